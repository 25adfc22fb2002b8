//! Vierbein fields `x -> e^a_mu(x)` and their base-only data.

use std::collections::BTreeMap;

use ndarray::{Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Bindings, EvalError, Expression, Scope};
use crate::jet::{self, JetScalar, Scalar};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub enum FrameEntries {
    Identity,
    Constant(Array2<f64>),
    /// Row `a`, column `mu` holds `e^a_mu(x)`.
    Expressions(Vec<Vec<Expression>>),
    /// Orthonormal coframe of the unit round 2-sphere, `e^1 = dx^1`, `e^2 = sin(x^1) dx^2`.
    SphereOrthonormal,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameParams {
    /// `diagonal`: the entries `e^a_a`.
    pub diagonal: Option<Vec<String>>,
    /// `custom`: full grid of expressions, rows are frame indices.
    pub entries: Option<Vec<Vec<String>>>,
    /// `constant`: numeric matrix.
    pub matrix: Option<Vec<Vec<f64>>>,
    pub parameters: BTreeMap<String, f64>,
}

pub const CATALOG: &[(&str, &str)] = &[
    ("identity", "e^a_mu = delta; all commutation coefficients vanish"),
    ("constant", "params: matrix = m x m numeric grid (invertible)"),
    (
        "diagonal",
        "params: diagonal = [expr, ..] in x1..xm giving e^a_a; `parameters` table",
    ),
    (
        "exp_diagonal",
        "e^1_1 = 1, e^a_a = exp(x{a-1}) for a >= 2; constant nonzero commutation coefficients",
    ),
    (
        "sphere_orthonormal",
        "m = 2 only; e^1 = dx1, e^2 = sin(x1) dx2 (unit round sphere, polar coordinates)",
    ),
    (
        "custom",
        "params: entries = m x m grid of expressions in x1..xm; `parameters` table",
    ),
];

/// Frame field on a single chart.
#[derive(Debug, Clone)]
pub struct VierbeinField {
    name: String,
    dim: usize,
    entries: FrameEntries,
    params: BTreeMap<String, f64>,
}

impl VierbeinField {
    pub fn catalog(name: &str, m: usize, params: &FrameParams) -> Result<Self> {
        if m == 0 || m > jet::MAX_VARS {
            return Err(Error::InvalidParameter(format!("dimension {m} outside [1, {}]", jet::MAX_VARS)));
        }
        let entries = match name {
            "identity" => FrameEntries::Identity,
            "constant" => {
                let rows = params
                    .matrix
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("constant frame requires `matrix`".into()))?;
                check_square(rows.iter().map(Vec::len), rows.len(), m)?;
                FrameEntries::Constant(Array2::from_shape_fn((m, m), |(a, mu)| rows[a][mu]))
            }
            "diagonal" => {
                let diag = params
                    .diagonal
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("diagonal frame requires `diagonal`".into()))?;
                if diag.len() != m {
                    return Err(Error::DimensionMismatch(format!(
                        "diagonal has {} entries, dimension is {m}",
                        diag.len()
                    )));
                }
                let grid: Vec<Vec<String>> = (0..m)
                    .map(|a| {
                        (0..m)
                            .map(|mu| if a == mu { diag[a].clone() } else { "0".into() })
                            .collect()
                    })
                    .collect();
                parse_grid(&grid, m, &params.parameters)?
            }
            "exp_diagonal" => {
                let grid: Vec<Vec<String>> = (0..m)
                    .map(|a| {
                        (0..m)
                            .map(|mu| match (a == mu, a) {
                                (false, _) => "0".to_string(),
                                (true, 0) => "1".to_string(),
                                (true, _) => format!("exp(x{a})"),
                            })
                            .collect()
                    })
                    .collect();
                parse_grid(&grid, m, &BTreeMap::new())?
            }
            "sphere_orthonormal" => {
                if m != 2 {
                    return Err(Error::DimensionMismatch(
                        "sphere_orthonormal is two-dimensional".into(),
                    ));
                }
                FrameEntries::SphereOrthonormal
            }
            "custom" => {
                let grid = params
                    .entries
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("custom frame requires `entries`".into()))?;
                parse_grid(grid, m, &params.parameters)?
            }
            other => {
                return Err(Error::UnknownName {
                    kind: "frame",
                    name: other.to_string(),
                })
            }
        };
        Ok(VierbeinField {
            name: name.to_string(),
            dim: m,
            entries,
            params: params.parameters.clone(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &FrameEntries {
        &self.entries
    }

    /// `e^a_mu(x)` with rows `a` and columns `mu`.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> std::result::Result<Vec<Vec<S>>, EvalError> {
        let m = self.dim;
        let zero = || S::from_f64(0.0);
        Ok(match &self.entries {
            FrameEntries::Identity => (0..m)
                .map(|a| (0..m).map(|mu| S::from_f64(if a == mu { 1.0 } else { 0.0 })).collect())
                .collect(),
            FrameEntries::Constant(e) => (0..m)
                .map(|a| (0..m).map(|mu| S::from_f64(e[[a, mu]])).collect())
                .collect(),
            FrameEntries::SphereOrthonormal => vec![
                vec![S::from_f64(1.0), zero()],
                vec![zero(), x[0].sin()],
            ],
            FrameEntries::Expressions(grid) => {
                let b = Bindings {
                    x,
                    y: &[],
                    params: &self.params,
                };
                grid.iter()
                    .map(|row| row.iter().map(|e| e.eval(&b)).collect())
                    .collect::<std::result::Result<_, _>>()?
            }
        })
    }
}

fn check_square(rows: impl Iterator<Item = usize>, n_rows: usize, m: usize) -> Result<()> {
    let mut rows = rows;
    if n_rows != m || rows.any(|r| r != m) {
        return Err(Error::DimensionMismatch(format!("frame grid must be {m}x{m}")));
    }
    Ok(())
}

fn parse_grid(grid: &[Vec<String>], m: usize, params: &BTreeMap<String, f64>) -> Result<FrameEntries> {
    check_square(grid.iter().map(Vec::len), grid.len(), m)?;
    let scope = Scope::base(m).with_params(params.keys().cloned());
    let parsed = grid
        .iter()
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(mu, text)| {
                    parse(text, &scope).map_err(|source| Error::Parse {
                        context: format!("vierbein entry e^{}_{}", a + 1, mu + 1),
                        source,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameEntries::Expressions(parsed))
}

/// Base-only quantities at `x`. Index order follows the symbols:
/// `de[[a, mu, nu]] = e^a_{mu,nu}`, `c[[c, a, b]] = c^c_ab`,
/// `dc[[c, a, b, d]] = c^c_{ab,d}`.
#[derive(Debug, Clone)]
pub struct HorizontalData {
    pub x: Vec<f64>,
    /// `e^a_mu`
    pub e: Array2<f64>,
    /// `e^mu_a`
    pub e_inv: Array2<f64>,
    pub de: Array3<f64>,
    pub dde: Array4<f64>,
    /// `E^a_bc = e^a_{mu,nu} e^mu_b e^nu_c`
    pub de_frame: Array3<f64>,
    pub c: Array3<f64>,
    pub dc: Array4<f64>,
}

impl HorizontalData {
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    /// Frame components `y^a = e^a_mu y^mu`.
    pub fn to_frame(&self, y_coord: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|a| (0..m).map(|mu| self.e[[a, mu]] * y_coord[mu]).sum())
            .collect()
    }

    /// Coordinate components `y^mu = e^mu_a y^a`.
    pub fn to_coordinates(&self, y_frame: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|mu| (0..m).map(|a| self.e_inv[[mu, a]] * y_frame[a]).sum())
            .collect()
    }
}

pub fn horizontal_data(field: &VierbeinField, x: &[f64]) -> Result<HorizontalData> {
    let m = field.dim();
    if x.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "base point has {} coordinates, frame dimension is {m}",
            x.len()
        )));
    }
    let seeds = jet::lift(x, 2)?;
    let ej = field.eval(&seeds)?;
    let e = Array2::from_shape_fn((m, m), |(a, mu)| *ej[a][mu].value());
    let scale = linalg::max_abs(e.iter());
    let det = linalg::determinant(&e);
    let threshold = 1e-10 * scale.powi(m as i32);
    if det.is_nan() || det.abs() < threshold || scale == 0.0 {
        return Err(Error::SingularVierbein { det, threshold });
    }
    let e_inv = linalg::inverse(&e).ok_or(Error::SingularVierbein { det, threshold })?;
    let de = Array3::from_shape_fn((m, m, m), |(a, mu, nu)| ej[a][mu].partial(&[nu]));
    let dde = Array4::from_shape_fn((m, m, m, m), |(a, mu, nu, rho)| {
        ej[a][mu].partial(&[nu, rho])
    });
    let de_frame = frame_derivative(&de, &e_inv);
    let c = Array3::from_shape_fn((m, m, m), |(c, a, b)| {
        de_frame[[c, a, b]] - de_frame[[c, b, a]]
    });

    // c as a first-order jet in x: differentiate the composite, then contract.
    let e_inv_j = linalg::invert(&ej).ok_or(Error::SingularVierbein { det, threshold })?;
    let e_inv_j: Vec<Vec<JetScalar>> = e_inv_j
        .iter()
        .map(|row| row.iter().map(|j| j.truncate(1)).collect())
        .collect();
    let de_j: Vec<Vec<Vec<JetScalar>>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|mu| (0..m).map(|nu| ej[a][mu].derivative(nu)).collect())
                .collect()
        })
        .collect();
    let mut dc = Array4::zeros((m, m, m, m));
    for cc in 0..m {
        for a in 0..m {
            for b in 0..m {
                let mut cj = JetScalar::from_f64(0.0);
                for mu in 0..m {
                    for nu in 0..m {
                        let anti = de_j[cc][mu][nu].clone() - de_j[cc][nu][mu].clone();
                        let w = e_inv_j[mu][a].clone() * e_inv_j[nu][b].clone();
                        cj.mul_acc(&anti, &w);
                    }
                }
                for d in 0..m {
                    dc[[cc, a, b, d]] = (0..m).map(|rho| cj.partial(&[rho]) * e_inv[[rho, d]]).sum();
                }
            }
        }
    }
    Ok(HorizontalData {
        x: x.to_vec(),
        e,
        e_inv,
        de,
        dde,
        de_frame,
        c,
        dc,
    })
}

fn frame_derivative(de: &Array3<f64>, e_inv: &Array2<f64>) -> Array3<f64> {
    let m = e_inv.nrows();
    Array3::from_shape_fn((m, m, m), |(a, b, c)| {
        let mut s = 0.0;
        for mu in 0..m {
            for nu in 0..m {
                s += de[[a, mu, nu]] * e_inv[[mu, b]] * e_inv[[nu, c]];
            }
        }
        s
    })
}
