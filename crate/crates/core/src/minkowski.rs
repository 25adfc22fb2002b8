//! The model pseudo-Minkowski space `(V, L)` and its fiber-only tensors.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Bindings, EvalError, Expression, Scope};
use crate::jet::{self, DomainError, Jet, JetField, JetScalar, Scalar};
use crate::linalg;

/// Open cone on which `L` is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Every nonzero vector.
    PuncturedSpace,
    /// All components strictly positive.
    PositiveOrthant,
    /// Every listed expression strictly positive.
    Positive(Vec<Expression>),
}

/// Catalog parameters. Fields not used by a given norm are ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NormParams {
    /// `pseudo_euclidean`: diagonal entries, each +1 or -1.
    pub signature: Option<Vec<f64>>,
    /// `randers`: symmetric positive definite matrix `a` (identity if absent).
    pub a: Option<Vec<Vec<f64>>>,
    /// `randers`: covector `b` with `|b|_a < 1`.
    pub b: Option<Vec<f64>>,
    /// `bogoslovsky`: exponent `r` in (-1, 1).
    pub r: Option<f64>,
    /// `bogoslovsky`: covector `n` (default `(1, -1, 0, ..)`, null for the default signature).
    pub n: Option<Vec<f64>>,
    /// `custom`: the Lagrangian `L(y)`.
    pub expression: Option<String>,
    /// `custom`: the cone is the set where every expression is positive.
    pub domain: Option<Vec<String>>,
    /// `custom`: named constants usable in the expressions.
    pub parameters: BTreeMap<String, f64>,
}

/// Catalog names accepted by [`MinkowskiNorm::catalog`].
pub const CATALOG: &[(&str, &str)] = &[
    (
        "pseudo_euclidean",
        "L = 1/2 sum s_i y_i^2; params: signature = [+-1, ..] (default all +1); cone: y != 0",
    ),
    (
        "berwald_moor",
        "L = (y1 y2 .. ym)^(2/m); no params; cone: all y_i > 0",
    ),
    (
        "randers",
        "L = 1/2 (sqrt(a(y,y)) + b.y)^2; params: a (default identity), b with |b|_a < 1; cone: a(y,y) > 0",
    ),
    (
        "bogoslovsky",
        "L = 1/2 eta(y,y)^(1-r) ((n.y)^2)^r, eta = diag(1,-1,..); params: r in (-1,1), n (default (1,-1,0,..)); cone: eta(y,y) > 0, y1 > 0, n.y > 0",
    ),
    (
        "custom",
        "L from `expression` over y1..ym; `domain` = list of expressions required > 0; `parameters` table",
    ),
];

/// Model norm: a 2-homogeneous Lagrangian on an open cone of `R^m`.
#[derive(Debug, Clone)]
pub struct MinkowskiNorm {
    name: String,
    dim: usize,
    lagrangian: Expression,
    domain: Domain,
    params: BTreeMap<String, f64>,
}

fn lit(v: f64) -> String {
    format!("({v:?})")
}

impl MinkowskiNorm {
    pub fn catalog(name: &str, m: usize, params: &NormParams) -> Result<Self> {
        if m == 0 || m > jet::MAX_VARS {
            return Err(Error::InvalidParameter(format!(
                "dimension {m} outside [1, {}]",
                jet::MAX_VARS
            )));
        }
        let ys: Vec<String> = (1..=m).map(|i| format!("y{i}")).collect();
        match name {
            "pseudo_euclidean" => {
                let sig = params.signature.clone().unwrap_or_else(|| vec![1.0; m]);
                if sig.len() != m {
                    return Err(Error::DimensionMismatch(format!(
                        "signature has {} entries, dimension is {m}",
                        sig.len()
                    )));
                }
                if sig.iter().any(|&s| s != 1.0 && s != -1.0) {
                    return Err(Error::InvalidParameter(
                        "signature entries must be +1 or -1".into(),
                    ));
                }
                let terms: Vec<String> = sig
                    .iter()
                    .zip(&ys)
                    .map(|(s, y)| format!("{}{y}^2", if *s > 0.0 { "+" } else { "-" }))
                    .collect();
                let text = format!("0.5*(0{})", terms.concat());
                Self::build(name, m, &text, Domain::PuncturedSpace, BTreeMap::new())
            }
            "berwald_moor" => {
                if m < 2 {
                    return Err(Error::InvalidParameter("berwald_moor needs m >= 2".into()));
                }
                let text = format!("({})^(2/{m})", ys.join("*"));
                Self::build(name, m, &text, Domain::PositiveOrthant, BTreeMap::new())
            }
            "randers" => {
                let a = match &params.a {
                    Some(a) => Array2::from_shape_fn((m, m), |(i, j)| {
                        a.get(i).and_then(|r| r.get(j)).copied().unwrap_or(f64::NAN)
                    }),
                    None => Array2::eye(m),
                };
                if params.a.as_ref().is_some_and(|a| a.len() != m || a.iter().any(|r| r.len() != m)) {
                    return Err(Error::DimensionMismatch(format!("randers `a` must be {m}x{m}")));
                }
                let b = params
                    .b
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("randers requires `b`".into()))?;
                if b.len() != m {
                    return Err(Error::DimensionMismatch(format!("randers `b` must have {m} entries")));
                }
                if (0..m).any(|i| (0..m).any(|j| a[[i, j]] != a[[j, i]])) {
                    return Err(Error::InvalidParameter("randers `a` must be symmetric".into()));
                }
                if linalg::inertia(&a) != (m, 0) {
                    return Err(Error::InvalidParameter(
                        "randers `a` must be positive definite".into(),
                    ));
                }
                let a_inv = linalg::inverse(&a).expect("positive definite");
                let bv = Array1::from(b.clone());
                let norm_b = bv.dot(&a_inv.dot(&bv)).sqrt();
                if norm_b >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "randers requires |b|_a < 1, got {norm_b}"
                    )));
                }
                let mut quad = Vec::new();
                for i in 0..m {
                    for j in 0..m {
                        if a[[i, j]] != 0.0 {
                            quad.push(format!("{}*{}*{}", lit(a[[i, j]]), ys[i], ys[j]));
                        }
                    }
                }
                let quad = quad.join("+");
                let linear: Vec<String> = b
                    .iter()
                    .zip(&ys)
                    .map(|(bi, y)| format!("{}*{y}", lit(*bi)))
                    .collect();
                let text = format!("0.5*(sqrt({quad})+{})^2", linear.join("+"));
                let domain = Domain::Positive(vec![parse(&quad, &Scope::fiber(m)).map_err(
                    |source| Error::Parse {
                        context: "randers domain".into(),
                        source,
                    },
                )?]);
                Self::build(name, m, &text, domain, BTreeMap::new())
            }
            "bogoslovsky" => {
                if m < 2 {
                    return Err(Error::InvalidParameter("bogoslovsky needs m >= 2".into()));
                }
                let r = params
                    .r
                    .ok_or_else(|| Error::InvalidParameter("bogoslovsky requires `r`".into()))?;
                if !(r > -1.0 && r < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "bogoslovsky requires -1 < r < 1, got {r}"
                    )));
                }
                let n = params.n.clone().unwrap_or_else(|| {
                    let mut n = vec![0.0; m];
                    n[0] = 1.0;
                    n[1] = -1.0;
                    n
                });
                if n.len() != m {
                    return Err(Error::DimensionMismatch(format!(
                        "bogoslovsky `n` must have {m} entries"
                    )));
                }
                let eta: Vec<String> = ys
                    .iter()
                    .enumerate()
                    .map(|(i, y)| format!("{}{y}^2", if i == 0 { "+" } else { "-" }))
                    .collect();
                let eta = format!("(0{})", eta.concat());
                let ny: Vec<String> = (0..m).map(|i| format!("n{}*{}", i + 1, ys[i])).collect();
                let ny = format!("({})", ny.join("+"));
                let text = format!("0.5*{eta}^(1-r)*({ny}^2)^r");
                let mut p: BTreeMap<String, f64> = BTreeMap::from([("r".to_string(), r)]);
                for (i, v) in n.iter().enumerate() {
                    p.insert(format!("n{}", i + 1), *v);
                }
                let scope = Scope::fiber(m).with_params(p.keys().cloned());
                let cone = [eta.as_str(), "y1", ny.as_str()]
                    .iter()
                    .map(|t| parse(t, &scope))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|source| Error::Parse {
                        context: "bogoslovsky domain".into(),
                        source,
                    })?;
                Self::build(name, m, &text, Domain::Positive(cone), p)
            }
            "custom" => {
                let text = params.expression.as_deref().ok_or_else(|| {
                    Error::InvalidParameter("custom norm requires `expression`".into())
                })?;
                let domain: Vec<&str> = params
                    .domain
                    .as_ref()
                    .map(|d| d.iter().map(String::as_str).collect())
                    .unwrap_or_default();
                Self::custom(m, text, &domain, params.parameters.clone())
            }
            other => Err(Error::UnknownName {
                kind: "norm",
                name: other.to_string(),
            }),
        }
    }

    /// Norm from a user expression in `y1..ym`; the cone is where every
    /// `domain` expression is positive (all nonzero vectors if empty).
    pub fn custom(
        m: usize,
        expression: &str,
        domain: &[&str],
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let scope = Scope::fiber(m).with_params(params.keys().cloned());
        let cone = if domain.is_empty() {
            Domain::PuncturedSpace
        } else {
            Domain::Positive(
                domain
                    .iter()
                    .map(|t| {
                        parse(t, &scope).map_err(|source| Error::Parse {
                            context: format!("domain expression `{t}`"),
                            source,
                        })
                    })
                    .collect::<Result<_>>()?,
            )
        };
        let mut norm = Self::build("custom", m, expression, cone, params)?;
        norm.name = "custom".into();
        Ok(norm)
    }

    fn build(
        name: &str,
        m: usize,
        text: &str,
        domain: Domain,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let scope = Scope::fiber(m).with_params(params.keys().cloned());
        let lagrangian = parse(text, &scope).map_err(|source| Error::Parse {
            context: format!("norm expression `{text}`"),
            source,
        })?;
        Ok(MinkowskiNorm {
            name: name.to_string(),
            dim: m,
            lagrangian,
            domain,
            params,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lagrangian(&self) -> &Expression {
        &self.lagrangian
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Cone membership of a frame-component vector.
    pub fn contains(&self, y: &[f64]) -> bool {
        if y.len() != self.dim || y.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.domain {
            Domain::PuncturedSpace => y.iter().any(|&v| v != 0.0),
            Domain::PositiveOrthant => y.iter().all(|&v| v > 0.0),
            Domain::Positive(exprs) => exprs.iter().all(|e| {
                e.eval(&Bindings {
                    x: &[],
                    y,
                    params: &self.params,
                })
                .is_ok_and(|v: f64| v > 0.0)
            }),
        }
    }

    pub fn eval<S: Scalar>(&self, y: &[S]) -> std::result::Result<S, EvalError> {
        self.lagrangian.eval(&Bindings {
            x: &[],
            y,
            params: &self.params,
        })
    }
}

impl JetField for MinkowskiNorm {
    fn arity(&self) -> usize {
        self.dim
    }

    fn eval<S: Scalar>(&self, point: &[S]) -> std::result::Result<S, DomainError> {
        MinkowskiNorm::eval(self, point).map_err(|e| match e {
            EvalError::Domain(d) => d,
            EvalError::Unbound(name) => DomainError {
                function: "binding".into(),
                argument: f64::NAN,
                expression: name,
            },
        })
    }
}

/// Jets in the fiber variables (order 3) needed by derivative formulas.
#[derive(Debug, Clone)]
pub struct VerticalJets {
    /// Seeds `y^a`.
    pub y: Vec<JetScalar>,
    /// `y_a(y)`.
    pub y_lower: Vec<JetScalar>,
    /// `g^{ab}(y)`.
    pub g_inv: Vec<Vec<JetScalar>>,
    /// `I^a(y) = g^{ab} g^{cd} C_bcd`.
    pub mean_cartan_up: Vec<JetScalar>,
}

/// Everything that depends only on the frame components `y^a`.
#[derive(Debug, Clone)]
pub struct VerticalData {
    pub y: Array1<f64>,
    pub lagrangian: f64,
    /// `y_a = d_a L`
    pub y_lower: Array1<f64>,
    /// `g_ab = d_a d_b L`
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    /// `C_abc = 1/2 d_a d_b d_c L`
    pub cartan: Array3<f64>,
    /// `C_abcd = d_a C_bcd`
    pub cartan_curvature: Array4<f64>,
    /// `I_a = g^{bc} C_abc`
    pub mean_cartan: Array1<f64>,
    /// `I^a`
    pub mean_cartan_up: Array1<f64>,
    /// `[a][b] = d I^a / d y^b`
    pub d_mean_cartan: Array2<f64>,
    /// `h^a_b = delta^a_b - y^a y_b / (2L)`; absent where `L = 0`.
    pub projector: Option<Array2<f64>>,
    pub jets: VerticalJets,
}

impl VerticalData {
    pub fn dim(&self) -> usize {
        self.y.len()
    }

    /// `C^a_bc = g^{ad} C_dbc`
    pub fn cartan_mixed(&self) -> Array3<f64> {
        let m = self.dim();
        Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            (0..m).map(|d| self.g_inv[[a, d]] * self.cartan[[d, b, c]]).sum()
        })
    }

    /// `C^{ab}_c = g^{ap} g^{bq} C_pqc`
    pub fn cartan_raised2(&self) -> Array3<f64> {
        let m = self.dim();
        let mixed = self.cartan_mixed();
        Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            (0..m).map(|q| self.g_inv[[b, q]] * mixed[[a, q, c]]).sum()
        })
    }

    /// `C^a_bcd = g^{ap} C_pbcd`
    pub fn cartan_curvature_mixed(&self) -> Array4<f64> {
        let m = self.dim();
        Array4::from_shape_fn((m, m, m, m), |(a, b, c, d)| {
            (0..m)
                .map(|p| self.g_inv[[a, p]] * self.cartan_curvature[[p, b, c, d]])
                .sum()
        })
    }

    pub fn projector(&self) -> Result<&Array2<f64>> {
        self.projector.as_ref().ok_or(Error::NullDirection)
    }
}

/// Fiber tensors of `norm` at the frame vector `y`.
pub fn vertical_data(norm: &MinkowskiNorm, y: &[f64]) -> Result<VerticalData> {
    let m = norm.dim();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "fiber vector has {} components, norm dimension is {m}",
            y.len()
        )));
    }
    if !norm.contains(y) {
        return Err(Error::OutsideDomain(y.to_vec()));
    }

    // Single-level order-4 jet: canonical storage gives exactly symmetric C.
    let seeds = jet::lift(y, 4)?;
    let l4 = norm.eval(&seeds)?;
    let lagrangian = *l4.value();
    let y_lower = Array1::from_shape_fn(m, |a| l4.partial(&[a]));
    let g = Array2::from_shape_fn((m, m), |(a, b)| l4.partial(&[a, b]));
    let cartan = Array3::from_shape_fn((m, m, m), |(a, b, c)| 0.5 * l4.partial(&[a, b, c]));
    let cartan_curvature =
        Array4::from_shape_fn((m, m, m, m), |(a, b, c, d)| 0.5 * l4.partial(&[a, b, c, d]));

    let scale = linalg::max_abs(g.iter());
    let det = linalg::determinant(&g);
    let threshold = 1e-10 * scale.powi(m as i32);
    if det.is_nan() || det.abs() < threshold || scale == 0.0 {
        return Err(Error::DegenerateHessian { det, threshold });
    }
    let g_inv = linalg::inverse(&g).ok_or(Error::DegenerateHessian { det, threshold })?;

    let mean_cartan = Array1::from_shape_fn(m, |a| {
        let mut s = 0.0;
        for b in 0..m {
            for c in 0..m {
                s += g_inv[[b, c]] * cartan[[a, b, c]];
            }
        }
        s
    });
    let mean_cartan_up = g_inv.dot(&mean_cartan);

    let jets = vertical_jets(norm, y)?;
    let d_mean_cartan =
        Array2::from_shape_fn((m, m), |(a, b)| jets.mean_cartan_up[a].partial(&[b]));

    let two_l = 2.0 * lagrangian;
    let ynorm2: f64 = y.iter().map(|v| v * v).sum();
    let projector = (two_l.abs() > 1e-13 * scale * ynorm2).then(|| {
        Array2::from_shape_fn((m, m), |(a, b)| {
            let delta = if a == b { 1.0 } else { 0.0 };
            delta - y[a] * y_lower[b] / two_l
        })
    });

    Ok(VerticalData {
        y: Array1::from(y.to_vec()),
        lagrangian,
        y_lower,
        g,
        g_inv,
        cartan,
        cartan_curvature,
        mean_cartan,
        mean_cartan_up,
        d_mean_cartan,
        projector,
        jets,
    })
}

// Outer jets of order 4 whose coefficients carry inner second derivatives:
// g_ab(y) is then known through order 4, g^{ab} through 4, C and I through 3.
fn vertical_jets(norm: &MinkowskiNorm, y: &[f64]) -> Result<VerticalJets> {
    let m = norm.dim();
    let nested = jet::lift_nested(y, 4, 2)?;
    let l = norm.eval(&nested)?;
    let g: Vec<Vec<JetScalar>> = (0..m)
        .map(|a| (0..m).map(|b| l.map(|c| c.partial(&[a, b]))).collect())
        .collect();
    let g_inv4 = linalg::invert(&g).ok_or(Error::DegenerateHessian {
        det: 0.0,
        threshold: 0.0,
    })?;
    let g_inv: Vec<Vec<JetScalar>> = g_inv4
        .iter()
        .map(|row| row.iter().map(|j| j.truncate(3)).collect())
        .collect();
    let y_lower: Vec<JetScalar> = (0..m)
        .map(|a| l.map(|c| c.partial(&[a])).truncate(3))
        .collect();
    let mut mean_lower: Vec<JetScalar> = vec![JetScalar::from_f64(0.0); m];
    for (a, slot) in mean_lower.iter_mut().enumerate() {
        for b in 0..m {
            for c in 0..m {
                let cabc = g[a][b].derivative(c).scale(0.5);
                slot.mul_acc(&g_inv[b][c], &cabc);
            }
        }
    }
    let mean_cartan_up = (0..m)
        .map(|a| {
            let mut s = JetScalar::from_f64(0.0);
            for b in 0..m {
                s.mul_acc(&g_inv[a][b], &mean_lower[b]);
            }
            s
        })
        .collect();
    let layout = jet::Layout::get(m, 3);
    let seeds = (0..m).map(|a| Jet::variable(&layout, y[a], a)).collect();
    Ok(VerticalJets {
        y: seeds,
        y_lower,
        g_inv,
        mean_cartan_up,
    })
}

/// Per-sample diagnostics of the norm axioms.
#[derive(Debug, Clone, Serialize)]
pub struct PointDiagnostics {
    pub y: Vec<f64>,
    pub lagrangian: f64,
    /// `max_{s in {2,3}} |L(s y) - s^2 L(y)|`
    pub homogeneity_residual: f64,
    pub det_g: f64,
    /// `(positive, negative)` eigenvalue counts of `g`.
    pub signature: (usize, usize),
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormDiagnostics {
    pub points: Vec<PointDiagnostics>,
    pub signature_constant: bool,
}

pub fn check_norm(norm: &MinkowskiNorm, samples: &[Vec<f64>]) -> NormDiagnostics {
    let points: Vec<PointDiagnostics> = samples
        .iter()
        .map(|y| {
            let mut d = PointDiagnostics {
                y: y.clone(),
                lagrangian: f64::NAN,
                homogeneity_residual: f64::NAN,
                det_g: f64::NAN,
                signature: (0, 0),
                error: None,
            };
            let result = (|| -> Result<()> {
                if !norm.contains(y) {
                    return Err(Error::OutsideDomain(y.clone()));
                }
                let l: f64 = norm.eval(y)?;
                d.lagrangian = l;
                let mut residual: f64 = 0.0;
                for s in [2.0, 3.0] {
                    let sy: Vec<f64> = y.iter().map(|v| s * v).collect();
                    let ls: f64 = norm.eval(&sy)?;
                    residual = residual.max((ls - s * s * l).abs());
                }
                d.homogeneity_residual = residual;
                let seeds = jet::lift(y, 2)?;
                let l2 = norm.eval(&seeds)?;
                let m = norm.dim();
                let g = Array2::from_shape_fn((m, m), |(a, b)| l2.partial(&[a, b]));
                d.det_g = linalg::determinant(&g);
                d.signature = linalg::inertia(&g);
                Ok(())
            })();
            d.error = result.err().map(|e| e.to_string());
            d
        })
        .collect();
    let mut sigs = points
        .iter()
        .filter(|p| p.error.is_none())
        .map(|p| p.signature);
    let first = sigs.next();
    let signature_constant = sigs.all(|s| Some(s) == first);
    NormDiagnostics {
        points,
        signature_constant,
    }
}
