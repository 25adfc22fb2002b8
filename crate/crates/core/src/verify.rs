//! Verification sweeps: factored formulas against the definitional oracle,
//! plus the identity suite (Euler chain, symmetries, cross-form agreement,
//! pseudo-Riemannian reduction, flat triviality, chain rule).

use ndarray::{Array1, Array2, Array3, Array4, ArrayD, Dimension};
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::finsler::{vertical_cartan_derivative, CartanTarget, FinslerPoint, Mutation};
use crate::frame::{FrameEntries, VierbeinField};
use crate::linalg;
use crate::minkowski::MinkowskiNorm;
use crate::oracle::{self, CompositeLagrangian};
use crate::sampling::SamplePoint;

/// Relative tolerances; each residual is compared against `tol * scale`
/// with `scale` the largest compared component, floored at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Euler chain, symmetries, inverse identities, chain rule.
    pub identity: f64,
    /// Factored versus oracle, cross-form agreement.
    pub oracle: f64,
    /// Three-way Ricci agreement with the Christoffel route.
    pub classical: f64,
    /// Tensors that must vanish for quadratic `L`.
    pub vanishing: f64,
    /// `C_abc` for quadratic `L`, and everything for constant frames (absolute).
    pub exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-11,
            oracle: 1e-10,
            classical: 1e-9,
            vanishing: 1e-12,
            exact: 1e-13,
        }
    }
}

impl Tolerances {
    /// Every class set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            identity: tol,
            oracle: tol,
            classical: tol,
            vanishing: tol,
            exact: tol,
        }
    }

    fn get(&self, class: ToleranceClass) -> f64 {
        match class {
            ToleranceClass::Identity => self.identity,
            ToleranceClass::Oracle => self.oracle,
            ToleranceClass::Classical => self.classical,
            ToleranceClass::Vanishing => self.vanishing,
            ToleranceClass::Exact => self.exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ToleranceClass {
    Identity,
    Oracle,
    Classical,
    Vanishing,
    Exact,
}

#[derive(Debug, Clone)]
struct Record {
    name: &'static str,
    class: ToleranceClass,
    residual: f64,
    scale: f64,
}

/// Aggregated result of one named check over all points.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub max_abs: f64,
    /// `max residual / scale`
    pub max_rel: f64,
    /// Index of the point with the largest relative deviation.
    pub worst_point: usize,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub points: usize,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl VerifyReport {
    /// The failing check with the largest `max_rel / tolerance`.
    pub fn worst_failure(&self) -> Option<&CheckOutcome> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .max_by(|a, b| (a.max_rel / a.tolerance).total_cmp(&(b.max_rel / b.tolerance)))
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Checks whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckOutcome> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }
}

struct Recorder {
    records: Vec<Record>,
}

impl Recorder {
    fn push(&mut self, name: &'static str, class: ToleranceClass, residual: f64, scale: f64) {
        self.records.push(Record {
            name,
            class,
            residual,
            scale: scale.max(1.0),
        });
    }

    /// Residual `|a - b|` with the scale taken from both sides.
    fn compare<D: Dimension>(
        &mut self,
        name: &'static str,
        class: ToleranceClass,
        a: &ndarray::Array<f64, D>,
        b: &ndarray::Array<f64, D>,
    ) {
        let residual = linalg::max_abs((a - b).iter());
        let scale = linalg::max_abs(a.iter()).max(linalg::max_abs(b.iter()));
        self.push(name, class, residual, scale);
    }

    /// Residual `|a|` for a quantity that must vanish, relative to `scale`.
    fn vanish<'a>(&mut self, name: &'static str, class: ToleranceClass, a: impl IntoIterator<Item = &'a f64>, scale: f64) {
        self.push(name, class, linalg::max_abs(a), scale);
    }
}

fn sup(a: impl IntoIterator<Item = impl std::borrow::Borrow<f64>>) -> f64 {
    a.into_iter().fold(0.0, |m, v| m.max(v.borrow().abs()))
}

/// Largest deviation from total symmetry in the trailing `k` indices.
fn symmetry_residual(t: &ArrayD<f64>, first: usize) -> f64 {
    let rank = t.ndim();
    let mut worst = 0.0f64;
    for (idx, v) in t.indexed_iter() {
        let idx = idx.slice().to_vec();
        for i in first..rank {
            for j in (i + 1)..rank {
                let mut sw = idx.clone();
                sw.swap(i, j);
                worst = worst.max((v - t[sw.as_slice()]).abs());
            }
        }
    }
    worst
}

fn is_constant_frame(field: &VierbeinField) -> bool {
    matches!(field.entries(), FrameEntries::Identity | FrameEntries::Constant(_))
}

fn check_point(
    norm: &MinkowskiNorm,
    field: &VierbeinField,
    sp: &SamplePoint,
    mutation: Option<Mutation>,
) -> Result<Vec<Record>> {
    use ToleranceClass::*;
    let (x, y) = (&sp.x, &sp.y);
    let p = FinslerPoint::new(norm, field, x, y)?.with_mutation(mutation);
    let m = p.dim();
    let mut r = Recorder { records: Vec::new() };
    let cl = CompositeLagrangian::new(norm, field)?;
    let fo = oracle::oracle_fiber(&cl, x, y)?;
    let jo = oracle::oracle_joint(&cl, x, y)?;

    let spray = p.spray();
    let n = p.nonlinear_connection();
    let gb = p.berwald_connection();
    let gc = p.berwald_curvature();
    let e = p.mean_berwald();
    let d = p.douglas();
    let ric = p.ricci_scalar();
    let land: Vec<Array3<f64>> = (1..=3).map(|f| p.landsberg(f)).collect::<Result<_>>()?;
    let mland: Vec<Array1<f64>> = (1..=3).map(|f| p.mean_landsberg(f)).collect::<Result<_>>()?;
    let yv = Array1::from(y.clone());
    let yf = &p.v.y;
    let ysc = sup(yf.iter()).max(1.0);

    // oracle equivalence
    r.compare("oracle.spray", Oracle, &spray, &fo.spray);
    r.compare("oracle.nonlinear_connection", Oracle, &n, &fo.nonlinear_connection);
    r.compare("oracle.berwald_connection", Oracle, &gb, &fo.berwald_connection);
    r.compare("oracle.berwald_curvature", Oracle, &gc, &fo.berwald_curvature_frame(&p.h));
    r.compare("oracle.mean_berwald", Oracle, &e, &fo.mean_berwald_frame(&p.h));
    r.compare("oracle.douglas", Oracle, &d, &fo.douglas_frame(&p.h));
    r.compare("oracle.landsberg", Oracle, &land[0], &fo.landsberg_frame(&p.h));
    r.compare("oracle.ricci_scalar", Oracle, &ndarray::arr0(ric), &ndarray::arr0(jo.ricci_trace));
    r.compare(
        "oracle.ricci_routes",
        Oracle,
        &ndarray::arr0(jo.ricci_trace),
        &ndarray::arr0(jo.ricci_formula),
    );
    r.vanish(
        "oracle.nonlinear_curvature_antisymmetry",
        Identity,
        Array3::from_shape_fn((m, m, m), |(mu, a, b)| {
            jo.nonlinear_curvature[[mu, a, b]] + jo.nonlinear_curvature[[mu, b, a]]
        })
        .iter(),
        sup(jo.nonlinear_curvature.iter()),
    );

    // vertical identities
    let two_l = 2.0 * p.v.lagrangian;
    r.compare(
        "euler.dual_contraction",
        Identity,
        &ndarray::arr0(yf.dot(&p.v.y_lower)),
        &ndarray::arr0(two_l),
    );
    r.compare(
        "euler.metric_contraction",
        Identity,
        &ndarray::arr0(yf.dot(&p.v.g.dot(yf))),
        &ndarray::arr0(two_l),
    );
    let cy = Array2::from_shape_fn((m, m), |(a, b)| (0..m).map(|c| p.v.cartan[[a, b, c]] * yf[c]).sum::<f64>());
    r.vanish("euler.cartan", Identity, cy.iter(), sup(p.v.cartan.iter()) * ysc);
    r.vanish(
        "euler.mean_cartan",
        Identity,
        [p.v.mean_cartan.dot(yf)].iter(),
        sup(p.v.mean_cartan.iter()) * ysc,
    );
    r.compare("euler.inverse_metric", Identity, &p.v.g_inv.dot(&p.v.g), &Array2::eye(m));
    let nabla = vertical_cartan_derivative(&p.v, CartanTarget::Torsion);
    let ync = Array3::from_shape_fn((m, m, m), |(a, b, c)| {
        (0..m).map(|s| yf[s] * nabla[[s, a, b, c]]).sum::<f64>() + p.v.cartan[[a, b, c]]
    });
    r.vanish("euler.cartan_derivative", Identity, ync.iter(), sup(nabla.iter()) * ysc);

    // Euler chain
    r.compare("euler.spray", Identity, &n.dot(&yv), &(&spray * 2.0));
    let gby = Array2::from_shape_fn((m, m), |(a, b)| (0..m).map(|c| gb[[a, b, c]] * y[c]).sum::<f64>());
    r.compare("euler.berwald_connection", Identity, &gby, &n);
    let gcy = Array3::from_shape_fn((m, m, m), |(a, b, c)| (0..m).map(|k| gc[[a, b, c, k]] * yf[k]).sum::<f64>());
    r.vanish("euler.berwald_curvature", Identity, gcy.iter(), sup(gc.iter()) * ysc);
    for (k, l) in land.iter().enumerate() {
        let ly = Array2::from_shape_fn((m, m), |(a, b)| (0..m).map(|c| l[[a, b, c]] * yf[c]).sum::<f64>());
        let name = ["euler.landsberg_form1", "euler.landsberg_form2", "euler.landsberg_form3"][k];
        r.vanish(name, Identity, ly.iter(), sup(l.iter()) * ysc);
    }
    for (k, j) in mland.iter().enumerate() {
        let name = [
            "euler.mean_landsberg_form1",
            "euler.mean_landsberg_form2",
            "euler.mean_landsberg_form3",
        ][k];
        r.vanish(name, Identity, [j.dot(yf)].iter(), sup(j.iter()) * ysc);
    }
    r.vanish("euler.mean_berwald", Identity, e.dot(yf).iter(), sup(e.iter()) * ysc);
    let dtrace = Array2::from_shape_fn((m, m), |(b, c)| (0..m).map(|a| d[[a, a, b, c]]).sum::<f64>());
    r.vanish("euler.douglas_trace", Identity, dtrace.iter(), sup(d.iter()));
    let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
    let ric2 = FinslerPoint::new(norm, field, x, &y2)?.with_mutation(mutation).ricci_scalar();
    r.compare("homogeneity.ricci", Identity, &ndarray::arr0(ric2), &ndarray::arr0(4.0 * ric));

    // symmetries
    r.vanish(
        "symmetry.berwald_connection",
        Identity,
        [symmetry_residual(&gb.clone().into_dyn(), 1)].iter(),
        sup(gb.iter()),
    );
    r.vanish(
        "symmetry.berwald_curvature",
        Identity,
        [symmetry_residual(&gc.clone().into_dyn(), 1)].iter(),
        sup(gc.iter()),
    );
    r.vanish(
        "symmetry.douglas",
        Identity,
        [symmetry_residual(&d.clone().into_dyn(), 1)].iter(),
        sup(d.iter()),
    );
    for (k, l) in land.iter().enumerate() {
        let name = ["symmetry.landsberg_form1", "symmetry.landsberg_form2", "symmetry.landsberg_form3"][k];
        r.vanish(name, Identity, [symmetry_residual(&l.clone().into_dyn(), 0)].iter(), sup(l.iter()));
    }
    let k = p.ricci_rotation();
    let kanti = Array3::from_shape_fn((m, m, m), |(a, b, c)| k[[a, b, c]] + k[[b, a, c]]);
    r.vanish("symmetry.ricci_rotation", Identity, kanti.iter(), sup(k.iter()));

    // cross-form agreement
    r.compare("cross.landsberg_1_2", Oracle, &land[0], &land[1]);
    r.compare("cross.landsberg_1_3", Oracle, &land[0], &land[2]);
    r.compare("cross.landsberg_2_3", Oracle, &land[1], &land[2]);
    r.compare("cross.mean_landsberg_1_2", Oracle, &mland[0], &mland[1]);
    r.compare("cross.mean_landsberg_1_3", Oracle, &mland[0], &mland[2]);
    r.compare("cross.mean_landsberg_2_3", Oracle, &mland[1], &mland[2]);
    let yl = &p.v.y_lower;
    let l_from_g = Array3::from_shape_fn((m, m, m), |(a, b, c)| {
        -0.5 * (0..m).map(|rr| yl[rr] * gc[[rr, a, b, c]]).sum::<f64>()
    });
    r.compare("cross.landsberg_berwald", Oracle, &land[1], &l_from_g);
    let gi = &p.v.g_inv;
    for (kf, l) in land.iter().enumerate() {
        let tr = Array1::from_shape_fn(m, |c| {
            let mut s = 0.0;
            for a in 0..m {
                for b in 0..m {
                    s += gi[[a, b]] * l[[a, b, c]];
                }
            }
            s
        });
        let name = [
            "cross.mean_landsberg_trace_1",
            "cross.mean_landsberg_trace_2",
            "cross.mean_landsberg_trace_3",
        ][kf];
        r.compare(name, Oracle, &mland[kf], &tr);
    }
    let half_trace = Array2::from_shape_fn((m, m), |(b, c)| 0.5 * (0..m).map(|a| gc[[a, a, b, c]]).sum::<f64>());
    r.compare("cross.mean_berwald_trace", Identity, &e, &half_trace);
    let de = p.mean_berwald_derivative();
    let kk = 2.0 / (m as f64 + 1.0);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let d_rebuilt = Array4::from_shape_fn((m, m, m, m), |(rr, a, b, c)| {
        gc[[rr, a, b, c]]
            - kk * (delta(rr, a) * e[[b, c]] + delta(rr, b) * e[[a, c]] + delta(rr, c) * e[[a, b]] + yf[rr] * de[[a, b, c]])
    });
    r.compare("cross.douglas_reconstruction", Oracle, &d, &d_rebuilt);

    // pseudo-Riemannian reduction
    let gscale = sup(p.v.g.iter()).max(1.0);
    if sup(p.v.cartan.iter()) <= 1e-13 * gscale {
        r.vanish("reduction.cartan", Exact, p.v.cartan.iter(), gscale);
        let vs = sup(spray.iter()).max(sup(n.iter()));
        r.vanish("reduction.berwald_curvature", Vanishing, gc.iter(), vs);
        r.vanish("reduction.mean_berwald", Vanishing, e.iter(), vs);
        r.vanish("reduction.douglas", Vanishing, d.iter(), vs);
        for l in &land {
            r.vanish("reduction.landsberg", Vanishing, l.iter(), vs);
        }
        for j in &mland {
            r.vanish("reduction.mean_landsberg", Vanishing, j.iter(), vs);
        }
        let classical = oracle::classical_ricci(norm, field, x, y)?;
        r.compare("reduction.classical_ricci", Classical, &ndarray::arr0(ric), &ndarray::arr0(classical));
        r.compare(
            "reduction.classical_ricci_oracle",
            Classical,
            &ndarray::arr0(jo.ricci_trace),
            &ndarray::arr0(classical),
        );
    }

    // constant frames: absolute bound
    if is_constant_frame(field) {
        r.push("flat.spray", Exact, sup(spray.iter()), 1.0);
        r.push("flat.nonlinear_connection", Exact, sup(n.iter()), 1.0);
        r.push("flat.nonlinear_curvature", Exact, sup(jo.nonlinear_curvature.iter()), 1.0);
        r.push("flat.ricci_scalar", Exact, ric.abs(), 1.0);
    }

    let chain = oracle::chain_rule(&cl, &p.h, y)?;
    r.push("chain.fiber", Identity, chain.fiber, chain.scale);
    r.push("chain.base", Identity, chain.base, chain.scale);

    Ok(r.records)
}

/// Run every check at every point and aggregate per check name.
pub fn verify_points(
    norm: &MinkowskiNorm,
    field: &VierbeinField,
    points: &[SamplePoint],
    tol: &Tolerances,
    mutation: Option<Mutation>,
    threads: Option<usize>,
) -> Result<VerifyReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("verification needs at least one point".into()));
    }
    let per_point = batch::map_points(points, threads, |_, sp| check_point(norm, field, sp, mutation));
    let mut checks: Vec<CheckOutcome> = Vec::new();
    for (i, recs) in per_point.into_iter().enumerate() {
        for rec in recs? {
            let tolerance = tol.get(rec.class);
            let rel = rec.residual / rec.scale;
            let slot = match checks.iter_mut().position(|c| c.name == rec.name) {
                Some(pos) => &mut checks[pos],
                None => {
                    checks.push(CheckOutcome {
                        name: rec.name.to_string(),
                        max_abs: 0.0,
                        max_rel: 0.0,
                        worst_point: i,
                        tolerance,
                        samples: 0,
                        passed: true,
                    });
                    checks.last_mut().expect("just pushed")
                }
            };
            slot.samples += 1;
            slot.max_abs = slot.max_abs.max(rec.residual);
            if rel > slot.max_rel || rel.is_nan() {
                slot.max_rel = rel;
                slot.worst_point = i;
            }
            slot.passed = slot.max_rel <= tolerance;
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        points: points.len(),
        checks,
        passed,
    })
}
