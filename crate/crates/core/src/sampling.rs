//! Seeded sampling of evaluation points inside the domain cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler::FinslerPoint;
use crate::frame::VierbeinField;
use crate::minkowski::MinkowskiNorm;

/// Box sampler: `x` uniform in `base`, frame components `y^a` uniform in `fiber`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    pub base: [f64; 2],
    pub fiber: [f64; 2],
    /// Per-component fiber ranges; overrides `fiber` when set.
    pub fiber_box: Option<Vec<[f64; 2]>>,
    /// Reject points where `L` is too close to zero for the indicatrix projector.
    pub require_projector: bool,
    pub max_attempts: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 7,
            count: 10,
            base: [-1.0, 1.0],
            fiber: [-2.0, 2.0],
            fiber_box: None,
            require_projector: true,
            max_attempts: 10_000,
        }
    }
}

/// A sampled `(x, y_coord)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn sample_points(norm: &MinkowskiNorm, field: &VierbeinField, cfg: &SampleConfig) -> Result<Vec<SamplePoint>> {
    let m = norm.dim();
    if let Some(b) = &cfg.fiber_box {
        if b.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "fiber_box has {} ranges, dimension is {m}",
                b.len()
            )));
        }
    }
    let ranges: Vec<[f64; 2]> = cfg.fiber_box.clone().unwrap_or_else(|| vec![cfg.fiber; m]);
    if ranges.iter().chain([&cfg.base]).any(|r| r[0].is_nan() || r[1].is_nan() || r[0] > r[1]) {
        return Err(Error::InvalidParameter("sampling range with lower bound above upper".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.count);
    for _ in 0..cfg.max_attempts {
        if out.len() == cfg.count {
            break;
        }
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(cfg.base[0]..=cfg.base[1])).collect();
        let yf: Vec<f64> = ranges.iter().map(|r| rng.gen_range(r[0]..=r[1])).collect();
        if !norm.contains(&yf) {
            continue;
        }
        let Ok(p) = FinslerPoint::from_frame(norm, field, &x, &yf) else {
            continue;
        };
        if cfg.require_projector && p.v.projector.is_none() {
            continue;
        }
        out.push(SamplePoint {
            x,
            y: p.point.y_coord.clone(),
        });
    }
    if out.len() < cfg.count {
        return Err(Error::InvalidParameter(format!(
            "only {} of {} in-domain samples found after {} attempts",
            out.len(),
            cfg.count,
            cfg.max_attempts
        )));
    }
    Ok(out)
}
