//! Definitional ground truth. Everything here differentiates
//! `L(x, y) = L(e(x) y)` directly in coordinates `(x^mu, y^nu)`; no
//! commutation coefficient or factored expression is used.

use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::frame::{HorizontalData, VierbeinField};
use crate::jet::{self, Jet, JetScalar, Layout, Scalar};
use crate::linalg;
use crate::minkowski::{vertical_data, MinkowskiNorm};

type Nested = Jet<JetScalar>;

/// `L(x, y) = L(e^a_nu(x) y^nu)`.
#[derive(Debug, Clone, Copy)]
pub struct CompositeLagrangian<'a> {
    pub norm: &'a MinkowskiNorm,
    pub field: &'a VierbeinField,
}

impl<'a> CompositeLagrangian<'a> {
    pub fn new(norm: &'a MinkowskiNorm, field: &'a VierbeinField) -> Result<Self> {
        if norm.dim() != field.dim() {
            return Err(Error::DimensionMismatch(format!(
                "norm dimension {} differs from vierbein dimension {}",
                norm.dim(),
                field.dim()
            )));
        }
        Ok(CompositeLagrangian { norm, field })
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let e = self.field.eval(x)?;
        let yf: Vec<S> = e
            .iter()
            .map(|row| {
                let mut s = S::from_f64(0.0);
                for (eam, ym) in row.iter().zip(y) {
                    s.mul_acc(eam, ym);
                }
                s
            })
            .collect();
        Ok(self.norm.eval(&yf)?)
    }

    fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let m = self.dim();
        if x.len() != m || y.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "point ({}, {}) components, dimension is {m}",
                x.len(),
                y.len()
            )));
        }
        let e = self.field.eval(x)?;
        let yf: Vec<f64> = e.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        if !self.norm.contains(&yf) {
            return Err(Error::OutsideDomain(yf));
        }
        Ok(())
    }
}

/// Which variables the outer jet level differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outer {
    /// `y` only, at fixed `x`.
    Fiber(usize),
    /// `(x, y)` jointly, order 2.
    Joint,
}

/// Spray as a jet in the outer variables, from inner second derivatives of L.
fn spray_jets(cl: &CompositeLagrangian, x: &[f64], y: &[f64], outer: Outer) -> Result<(Vec<JetScalar>, Vec<JetScalar>)> {
    cl.check_point(x, y)?;
    let m = cl.dim();
    let inner = Layout::get(2 * m, 2);
    let outer_layout: Arc<Layout> = match outer {
        Outer::Fiber(order) => Layout::get(m, order),
        Outer::Joint => Layout::get(2 * m, 2),
    };
    let one = || JetScalar::from_f64(1.0);
    let seed = |value: f64, inner_var: usize, outer_var: Option<usize>| -> Nested {
        let mut j = Nested::constant_in(&outer_layout, Jet::variable(&inner, value, inner_var));
        if let Some(v) = outer_var {
            let mut e = vec![0u8; outer_layout.vars()];
            e[v] = 1;
            let pos = outer_layout.position(&e).expect("first-order monomial");
            let mut coeffs = j.coefficients().to_vec();
            coeffs[pos] = one();
            j = Nested::from_coefficients(&outer_layout, coeffs);
        }
        j
    };
    let xs: Vec<Nested> = (0..m)
        .map(|mu| seed(x[mu], mu, (outer == Outer::Joint).then_some(mu)))
        .collect();
    let ys: Vec<Nested> = (0..m)
        .map(|nu| {
            let ov = match outer {
                Outer::Fiber(_) => nu,
                Outer::Joint => m + nu,
            };
            seed(y[nu], m + nu, Some(ov))
        })
        .collect();
    let l = cl.eval(&xs, &ys)?;

    let lx: Vec<JetScalar> = (0..m).map(|s| l.map(|c| c.partial(&[s]))).collect();
    let lxy: Vec<Vec<JetScalar>> = (0..m)
        .map(|r| (0..m).map(|s| l.map(|c| c.partial(&[r, m + s]))).collect())
        .collect();
    let lyy: Vec<Vec<JetScalar>> = (0..m)
        .map(|a| (0..m).map(|b| l.map(|c| c.partial(&[m + a, m + b]))).collect())
        .collect();

    let g0 = Array2::from_shape_fn((m, m), |(a, b)| *lyy[a][b].value());
    let scale = linalg::max_abs(g0.iter());
    let det = linalg::determinant(&g0);
    let threshold = 1e-10 * scale.powi(m as i32);
    if det.is_nan() || det.abs() < threshold || scale == 0.0 {
        return Err(Error::DegenerateHessian { det, threshold });
    }
    let g_inv = linalg::invert(&lyy).ok_or(Error::DegenerateHessian { det, threshold })?;

    // outer seeds for y^rho as plain jets
    let y_outer: Vec<JetScalar> = (0..m)
        .map(|nu| {
            let v = match outer {
                Outer::Fiber(_) => nu,
                Outer::Joint => m + nu,
            };
            Jet::variable(&outer_layout, y[nu], v)
        })
        .collect();
    let bracket: Vec<JetScalar> = (0..m)
        .map(|s| {
            let mut b = -lx[s].clone();
            for r in 0..m {
                b.mul_acc(&lxy[r][s], &y_outer[r]);
            }
            b
        })
        .collect();
    let spray = (0..m)
        .map(|mu| {
            let mut s = JetScalar::from_f64(0.0);
            for (sg, b) in bracket.iter().enumerate() {
                s.mul_acc(&g_inv[mu][sg], b);
            }
            s.scale(0.5)
        })
        .collect();
    Ok((spray, y_outer))
}

/// Fiber derivatives of the spray at fixed `x`, all in coordinate indices.
#[derive(Debug, Clone)]
pub struct FiberOracle {
    pub spray: Array1<f64>,
    /// `N^mu_alpha = dG^mu / dy^alpha`
    pub nonlinear_connection: Array2<f64>,
    /// `G^rho_{alpha beta}`
    pub berwald_connection: Array3<f64>,
    /// `G^rho_{alpha beta gamma}`
    pub berwald_curvature: Array4<f64>,
    /// `d^3 (G^rho - N^a_a y^rho / (m+1))`
    pub douglas: Array4<f64>,
    /// `y_rho = dL/dy^rho`
    pub y_lower: Array1<f64>,
}

pub fn oracle_fiber(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<FiberOracle> {
    let m = cl.dim();
    let (g, ys) = spray_jets(cl, x, y, Outer::Fiber(4))?;
    let trace = {
        let mut t = JetScalar::from_f64(0.0);
        for (a, ga) in g.iter().enumerate() {
            t += ga.derivative(a);
        }
        t
    };
    let k = 1.0 / (m as f64 + 1.0);
    let dg: Vec<JetScalar> = (0..m)
        .map(|r| g[r].truncate(3) - (ys[r].truncate(3) * trace.clone()).scale(k))
        .collect();
    let l = {
        let seeds = jet::lift(&[x, y].concat(), 1)?;
        cl.eval(&seeds[..m], &seeds[m..])?
    };
    Ok(FiberOracle {
        spray: Array1::from_shape_fn(m, |mu| *g[mu].value()),
        nonlinear_connection: Array2::from_shape_fn((m, m), |(mu, a)| g[mu].partial(&[a])),
        berwald_connection: Array3::from_shape_fn((m, m, m), |(r, a, b)| g[r].partial(&[a, b])),
        berwald_curvature: Array4::from_shape_fn((m, m, m, m), |(r, a, b, c)| g[r].partial(&[a, b, c])),
        douglas: Array4::from_shape_fn((m, m, m, m), |(r, a, b, c)| dg[r].partial(&[a, b, c])),
        y_lower: Array1::from_shape_fn(m, |a| l.partial(&[m + a])),
    })
}

impl FiberOracle {
    /// `G^r_abc = G^rho_{alpha beta gamma} e^r_rho e^alpha_a e^beta_b e^gamma_c`
    pub fn berwald_curvature_frame(&self, h: &HorizontalData) -> Array4<f64> {
        to_frame_1_3(&self.berwald_curvature, h)
    }

    pub fn douglas_frame(&self, h: &HorizontalData) -> Array4<f64> {
        to_frame_1_3(&self.douglas, h)
    }

    /// `L_abc = -1/2 y_rho G^rho_{alpha beta gamma}` pulled to frame indices.
    pub fn landsberg_frame(&self, h: &HorizontalData) -> Array3<f64> {
        let m = self.spray.len();
        let lc = Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            -0.5 * (0..m)
                .map(|r| self.y_lower[r] * self.berwald_curvature[[r, a, b, c]])
                .sum::<f64>()
        });
        let ei = &h.e_inv;
        Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            let mut s = 0.0;
            for al in 0..m {
                for be in 0..m {
                    for ga in 0..m {
                        s += lc[[al, be, ga]] * ei[[al, a]] * ei[[be, b]] * ei[[ga, c]];
                    }
                }
            }
            s
        })
    }

    /// `E_bc = 1/2 G^r_rbc` in frame indices.
    pub fn mean_berwald_frame(&self, h: &HorizontalData) -> Array2<f64> {
        let m = self.spray.len();
        let g = self.berwald_curvature_frame(h);
        Array2::from_shape_fn((m, m), |(b, c)| 0.5 * (0..m).map(|r| g[[r, r, b, c]]).sum::<f64>())
    }
}

fn to_frame_1_3(t: &Array4<f64>, h: &HorizontalData) -> Array4<f64> {
    let m = h.dim();
    let (e, ei) = (&h.e, &h.e_inv);
    // contract one index at a time
    let mut cur = t.clone();
    for axis in 0..4 {
        let mut next = Array4::<f64>::zeros((m, m, m, m));
        for ((i0, i1, i2, i3), v) in cur.indexed_iter() {
            if *v == 0.0 {
                continue;
            }
            let idx = [i0, i1, i2, i3];
            for k in 0..m {
                let w = if axis == 0 { e[[k, idx[0]]] } else { ei[[idx[axis], k]] };
                if w == 0.0 {
                    continue;
                }
                let mut out = idx;
                out[axis] = k;
                next[out] += v * w;
            }
        }
        cur = next;
    }
    cur
}

/// Quantities that need joint `(x, y)` derivatives of the spray.
#[derive(Debug, Clone)]
pub struct JointOracle {
    pub spray: Array1<f64>,
    /// `R^mu_{alpha beta}`
    pub nonlinear_curvature: Array3<f64>,
    /// `R^mu_{mu alpha} y^alpha`
    pub ricci_trace: f64,
    /// `2 d_x G - y d_x d_y G + 2 G d_y d_y G - d_y G d_y G`
    pub ricci_formula: f64,
}

pub fn oracle_joint(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<JointOracle> {
    let m = cl.dim();
    let (g, _) = spray_jets(cl, x, y, Outer::Joint)?;
    let gv: Vec<f64> = g.iter().map(|j| *j.value()).collect();
    // joint variables: 0..m are x, m..2m are y
    let n: Vec<Vec<JetScalar>> = (0..m)
        .map(|mu| (0..m).map(|a| g[mu].derivative(m + a)).collect())
        .collect();
    let nv = Array2::from_shape_fn((m, m), |(mu, a)| *n[mu][a].value());
    // dN^mu_beta / dx^alpha - N^nu_alpha dN^mu_beta / dy^nu
    let delta_n = |mu: usize, beta: usize, alpha: usize| -> f64 {
        let mut s = n[mu][beta].partial(&[alpha]);
        for nu in 0..m {
            s -= nv[[nu, alpha]] * n[mu][beta].partial(&[m + nu]);
        }
        s
    };
    let r = Array3::from_shape_fn((m, m, m), |(mu, al, be)| delta_n(mu, be, al) - delta_n(mu, al, be));
    let ricci_trace = (0..m)
        .map(|mu| (0..m).map(|al| r[[mu, mu, al]] * y[al]).sum::<f64>())
        .sum();

    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut t3 = 0.0;
    let mut t4 = 0.0;
    for mu in 0..m {
        t1 += 2.0 * g[mu].partial(&[mu]);
        for nu in 0..m {
            t2 -= y[mu] * g[nu].partial(&[mu, m + nu]);
            t3 += 2.0 * gv[mu] * g[nu].partial(&[m + mu, m + nu]);
            t4 -= g[mu].partial(&[m + nu]) * g[nu].partial(&[m + mu]);
        }
    }
    Ok(JointOracle {
        spray: Array1::from(gv),
        nonlinear_curvature: r,
        ricci_trace,
        ricci_formula: t1 + t2 + t3 + t4,
    })
}

pub fn oracle_spray(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<Array1<f64>> {
    let (g, _) = spray_jets(cl, x, y, Outer::Fiber(1))?;
    Ok(g.iter().map(|j| *j.value()).collect())
}

pub fn oracle_nonlinear(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<Array2<f64>> {
    let m = cl.dim();
    let (g, _) = spray_jets(cl, x, y, Outer::Fiber(1))?;
    Ok(Array2::from_shape_fn((m, m), |(mu, a)| g[mu].partial(&[a])))
}

/// `(G^rho_{alpha beta}, G^rho_{alpha beta gamma})`
pub fn oracle_berwald(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<(Array3<f64>, Array4<f64>)> {
    let m = cl.dim();
    let (g, _) = spray_jets(cl, x, y, Outer::Fiber(3))?;
    Ok((
        Array3::from_shape_fn((m, m, m), |(r, a, b)| g[r].partial(&[a, b])),
        Array4::from_shape_fn((m, m, m, m), |(r, a, b, c)| g[r].partial(&[a, b, c])),
    ))
}

pub fn oracle_nonlinear_curvature(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<Array3<f64>> {
    Ok(oracle_joint(cl, x, y)?.nonlinear_curvature)
}

/// Both definitional routes to `Ric(y)`: `(trace of R, four-term spray formula)`.
pub fn oracle_ricci(cl: &CompositeLagrangian, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let j = oracle_joint(cl, x, y)?;
    Ok((j.ricci_trace, j.ricci_formula))
}

/// `R_{mu nu} y^mu y^nu` of `g_{mu nu}(x) = g_ab e^a_mu e^b_nu` from coordinate
/// Christoffel symbols. Only meaningful when `L` is quadratic.
pub fn classical_ricci(norm: &MinkowskiNorm, field: &VierbeinField, x: &[f64], y: &[f64]) -> Result<f64> {
    let m = norm.dim();
    let cl = CompositeLagrangian::new(norm, field)?;
    cl.check_point(x, y)?;
    let e0 = field.eval(x)?;
    let yf: Vec<f64> = e0.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let v = vertical_data(norm, &yf)?;
    let cmax = linalg::max_abs(v.cartan.iter());
    if cmax > 1e-13 * linalg::max_abs(v.g.iter()).max(1.0) {
        return Err(Error::NotQuadratic("classical_ricci"));
    }
    let xs = jet::lift(x, 2)?;
    let e = field.eval(&xs)?;
    let gmn: Vec<Vec<JetScalar>> = (0..m)
        .map(|mu| {
            (0..m)
                .map(|nu| {
                    let mut s = JetScalar::from_f64(0.0);
                    for a in 0..m {
                        for b in 0..m {
                            let gab = v.g[[a, b]];
                            if gab != 0.0 {
                                s += (e[a][mu].clone() * e[b][nu].clone()).scale(gab);
                            }
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let ginv: Vec<Vec<JetScalar>> = linalg::invert(&gmn)
        .ok_or(Error::DegenerateHessian { det: 0.0, threshold: 0.0 })?
        .into_iter()
        .map(|row| row.into_iter().map(|j| j.truncate(1)).collect())
        .collect();
    let dg = |s: usize, n: usize, k: usize| gmn[s][n].derivative(k);
    // Gamma^l_{mu nu} as first-order jets
    let gamma: Vec<Vec<Vec<JetScalar>>> = (0..m)
        .map(|l| {
            (0..m)
                .map(|mu| {
                    (0..m)
                        .map(|nu| {
                            let mut s = JetScalar::from_f64(0.0);
                            for sg in 0..m {
                                let t = dg(sg, nu, mu) + dg(sg, mu, nu) - dg(mu, nu, sg);
                                s.mul_acc(&ginv[l][sg], &t);
                            }
                            s.scale(0.5)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let gv = |l: usize, a: usize, b: usize| *gamma[l][a][b].value();
    let mut ric = 0.0;
    for mu in 0..m {
        for nu in 0..m {
            let mut r = 0.0;
            for l in 0..m {
                r += gamma[l][mu][nu].partial(&[l]) - gamma[l][mu][l].partial(&[nu]);
                for s in 0..m {
                    r += gv(l, l, s) * gv(s, mu, nu) - gv(l, nu, s) * gv(s, mu, l);
                }
            }
            ric += r * y[mu] * y[nu];
        }
    }
    Ok(ric)
}

/// Residuals of the change of partial derivatives applied to `L` itself.
#[derive(Debug, Clone, Copy)]
pub struct ChainRuleResidual {
    /// `max |dL/dy^alpha - y_a e^a_alpha|`
    pub fiber: f64,
    /// `max |dL/dx^alpha - y_b e^b_{beta,alpha} e^beta_c y^c|`
    pub base: f64,
    pub scale: f64,
}

pub fn chain_rule(cl: &CompositeLagrangian, h: &HorizontalData, y: &[f64]) -> Result<ChainRuleResidual> {
    let m = cl.dim();
    cl.check_point(&h.x, y)?;
    let seeds = jet::lift(&[h.x.as_slice(), y].concat(), 1)?;
    let l = cl.eval(&seeds[..m], &seeds[m..])?;
    let yf = h.to_frame(y);
    let v = vertical_data(cl.norm, &yf)?;
    let mut fiber = 0.0f64;
    let mut base = 0.0f64;
    let mut scale = 1.0f64;
    for al in 0..m {
        let lhs_y = l.partial(&[m + al]);
        let rhs_y: f64 = (0..m).map(|a| v.y_lower[a] * h.e[[a, al]]).sum();
        let lhs_x = l.partial(&[al]);
        let mut rhs_x = 0.0;
        for b in 0..m {
            for be in 0..m {
                for c in 0..m {
                    rhs_x += v.y_lower[b] * h.de[[b, be, al]] * h.e_inv[[be, c]] * yf[c];
                }
            }
        }
        fiber = fiber.max((lhs_y - rhs_y).abs());
        base = base.max((lhs_x - rhs_x).abs());
        scale = scale.max(lhs_y.abs()).max(rhs_y.abs()).max(lhs_x.abs()).max(rhs_x.abs());
    }
    Ok(ChainRuleResidual { fiber, base, scale })
}
