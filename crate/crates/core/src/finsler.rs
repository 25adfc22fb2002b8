//! Factored formulas: every tensor is assembled from base-only factors
//! (`e`, `c`, `dc`) and fiber-only factors (`g`, `C`, `I`, ...) evaluated at
//! the frame components `y^a`.

use ndarray::{Array1, Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{horizontal_data, HorizontalData, VierbeinField};
use crate::jet::{JetScalar, Scalar};
use crate::linalg;
use crate::minkowski::{vertical_data, MinkowskiNorm, VerticalData};

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// A point of the slit tangent bundle in both fiber bases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationPoint {
    pub x: Vec<f64>,
    pub y_coord: Vec<f64>,
    pub y_frame: Vec<f64>,
}

/// Deliberate corruptions used to check that verification is not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Flips the sign of the `g^{mk} y_q y^n c^q_kn` term of the spray.
    FlipSprayCommutatorTerm,
}

/// Which vertical tensor the Cartan derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartanTarget {
    Torsion,
    Mean,
}

/// Base and fiber data at one point, plus a few contractions reused by several tensors.
#[derive(Debug, Clone)]
pub struct FinslerPoint {
    pub point: EvaluationPoint,
    pub h: HorizontalData,
    pub v: VerticalData,
    mutation: Option<Mutation>,
    /// `C^a_bc`
    c_mixed: Array3<f64>,
    /// `C^{ab}_c`
    c_raised: Array3<f64>,
    /// `c_abc = g_ad c^d_bc`
    c_lower: Array3<f64>,
}

impl FinslerPoint {
    /// `y_coord` holds coordinate components `y^mu`.
    pub fn new(norm: &MinkowskiNorm, field: &VierbeinField, x: &[f64], y_coord: &[f64]) -> Result<Self> {
        check_dims(norm, field)?;
        if y_coord.len() != norm.dim() {
            return Err(Error::DimensionMismatch(format!(
                "fiber vector has {} components, dimension is {}",
                y_coord.len(),
                norm.dim()
            )));
        }
        let h = horizontal_data(field, x)?;
        let y_frame = h.to_frame(y_coord);
        let v = vertical_data(norm, &y_frame)?;
        Ok(Self::from_parts(h, v, y_coord.to_vec()))
    }

    /// `y_frame` holds frame components `y^a`.
    pub fn from_frame(norm: &MinkowskiNorm, field: &VierbeinField, x: &[f64], y_frame: &[f64]) -> Result<Self> {
        check_dims(norm, field)?;
        let v = vertical_data(norm, y_frame)?;
        let h = horizontal_data(field, x)?;
        let y_coord = h.to_coordinates(y_frame);
        Ok(Self::from_parts(h, v, y_coord))
    }

    pub fn from_parts(h: HorizontalData, v: VerticalData, y_coord: Vec<f64>) -> Self {
        let m = v.dim();
        let c_mixed = v.cartan_mixed();
        let c_raised = v.cartan_raised2();
        let c_lower = Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            (0..m).map(|d| v.g[[a, d]] * h.c[[d, b, c]]).sum()
        });
        FinslerPoint {
            point: EvaluationPoint {
                x: h.x.clone(),
                y_coord,
                y_frame: v.y.to_vec(),
            },
            h,
            v,
            mutation: None,
            c_mixed,
            c_raised,
            c_lower,
        }
    }

    pub fn with_mutation(mut self, mutation: Option<Mutation>) -> Self {
        self.mutation = mutation;
        self
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    /// Frame spray `G^m` split into the commutator part `g^{mk} y_q y^n c^q_kn`
    /// and the frame-derivative part `E^m_dp y^d y^p` (both without the 1/2).
    pub fn frame_spray_parts(&self) -> (Array1<f64>, Array1<f64>) {
        let m = self.dim();
        let (y, yl, gi, c, e) = (&self.v.y, &self.v.y_lower, &self.v.g_inv, &self.h.c, &self.h.de_frame);
        // t_k = y_q y^n c^q_kn
        let t = Array1::from_shape_fn(m, |k| {
            let mut s = 0.0;
            for q in 0..m {
                for n in 0..m {
                    s += yl[q] * y[n] * c[[q, k, n]];
                }
            }
            s
        });
        let commutator = gi.dot(&t);
        let frame = Array1::from_shape_fn(m, |a| {
            let mut s = 0.0;
            for d in 0..m {
                for p in 0..m {
                    s += e[[a, d, p]] * y[d] * y[p];
                }
            }
            s
        });
        (commutator, frame)
    }

    /// `G^m` in frame components.
    pub fn frame_spray(&self) -> Array1<f64> {
        let (comm, frame) = self.frame_spray_parts();
        let sign = match self.mutation {
            Some(Mutation::FlipSprayCommutatorTerm) => -1.0,
            None => 1.0,
        };
        (comm * sign + frame) * 0.5
    }

    /// `G^mu = e^mu_m G^m`
    pub fn spray(&self) -> Array1<f64> {
        self.h.e_inv.dot(&self.frame_spray())
    }

    /// `N^mu_alpha`
    pub fn nonlinear_connection(&self) -> Array2<f64> {
        let m = self.dim();
        let (y, yl, g, gi) = (&self.v.y, &self.v.y_lower, &self.v.g, &self.v.g_inv);
        let c = &self.h.c;
        let cr = &self.c_raised;
        // bracket[l][b]
        let mut bracket = Array2::<f64>::zeros((m, m));
        for l in 0..m {
            for b in 0..m {
                let mut s = 0.0;
                for p in 0..m {
                    s += self.h.de_frame[[l, p, b]] * y[p];
                }
                for mm in 0..m {
                    for k in 0..m {
                        for n in 0..m {
                            let cc = c[[mm, k, n]];
                            if cc == 0.0 {
                                continue;
                            }
                            let term = -cr[[l, k, b]] * yl[mm] * y[n]
                                + 0.5
                                    * (gi[[l, k]] * g[[mm, b]] * y[n]
                                        + gi[[l, k]] * yl[mm] * delta(n, b)
                                        + delta(l, mm) * delta(k, b) * y[n]);
                            s += cc * term;
                        }
                    }
                }
                bracket[[l, b]] = s;
            }
        }
        self.h.e_inv.dot(&bracket).dot(&self.h.e)
    }

    /// `d_b C^{rm}_a = C^{rm}_ab - 2 C^{rs}_b C_sa^m - 2 C^{ms}_b C^r_sa`, stored as `[r, m, a, b]`.
    pub fn cartan_raised_derivative(&self) -> Array4<f64> {
        let m = self.dim();
        let gi = &self.v.g_inv;
        let c4m = self.v.cartan_curvature_mixed();
        let cm = &self.c_mixed;
        let cr = &self.c_raised;
        // C^{rm}_ab = g^{mq} C^r_qab
        let c4r = Array4::from_shape_fn((m, m, m, m), |(r, mm, a, b)| {
            (0..m).map(|q| gi[[mm, q]] * c4m[[r, q, a, b]]).sum::<f64>()
        });
        Array4::from_shape_fn((m, m, m, m), |(r, mm, a, b)| {
            let mut s = c4r[[r, mm, a, b]];
            for t in 0..m {
                s -= 2.0 * cr[[r, t, b]] * cm[[mm, t, a]];
                s -= 2.0 * cr[[mm, t, b]] * cm[[r, t, a]];
            }
            s
        })
    }

    /// `G^rho_{alpha beta}`
    pub fn berwald_connection(&self) -> Array3<f64> {
        let m = self.dim();
        let (y, yl, g, gi) = (&self.v.y, &self.v.y_lower, &self.v.g, &self.v.g_inv);
        let (c, cart, cr) = (&self.h.c, &self.v.cartan, &self.c_raised);
        let dcr = self.cartan_raised_derivative();
        let mut part = Array3::<f64>::zeros((m, m, m));
        for r in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for e in 0..m {
                        for mm in 0..m {
                            for n in 0..m {
                                let cc = c[[e, mm, n]];
                                if cc == 0.0 {
                                    continue;
                                }
                                let x = gi[[r, mm]] * g[[e, a]] * delta(n, b)
                                    + gi[[r, mm]] * g[[e, b]] * delta(n, a)
                                    + 2.0 * gi[[r, mm]] * cart[[e, a, b]] * y[n]
                                    - 2.0 * cr[[r, mm, b]] * g[[e, a]] * y[n]
                                    - 2.0 * cr[[r, mm, a]] * g[[e, b]] * y[n]
                                    - 2.0 * cr[[r, mm, a]] * yl[e] * delta(n, b)
                                    - 2.0 * cr[[r, mm, b]] * yl[e] * delta(n, a)
                                    - 2.0 * dcr[[r, mm, a, b]] * yl[e] * y[n];
                                s += cc * x;
                            }
                        }
                    }
                    part[[r, a, b]] = s;
                }
            }
        }
        let (e, ei, de) = (&self.h.e, &self.h.e_inv, &self.h.de);
        Array3::from_shape_fn((m, m, m), |(rho, al, be)| {
            let mut s = 0.0;
            for b in 0..m {
                s += ei[[rho, b]] * (de[[b, al, be]] + de[[b, be, al]]);
            }
            for r in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        s += ei[[rho, r]] * e[[a, al]] * e[[b, be]] * part[[r, a, b]];
                    }
                }
            }
            0.5 * s
        })
    }

    // W^m = c^e_mn y_e y^n as fiber jets
    fn commutator_jets(&self) -> Vec<JetScalar> {
        let m = self.dim();
        let jets = &self.v.jets;
        let mut w = vec![JetScalar::from_f64(0.0); m];
        for e in 0..m {
            for n in 0..m {
                if (0..m).all(|mm| self.h.c[[e, mm, n]] == 0.0) {
                    continue;
                }
                let p = jets.y_lower[e].clone() * jets.y[n].clone();
                for (mm, slot) in w.iter_mut().enumerate() {
                    let cc = self.h.c[[e, mm, n]];
                    if cc != 0.0 {
                        *slot += p.scale(cc);
                    }
                }
            }
        }
        w
    }

    // Q^r = g^{rm} W^m and S = I^m W^m
    fn curvature_jets(&self) -> (Vec<JetScalar>, JetScalar) {
        let m = self.dim();
        let w = self.commutator_jets();
        let jets = &self.v.jets;
        let q = (0..m)
            .map(|r| {
                let mut s = JetScalar::from_f64(0.0);
                for (mm, wm) in w.iter().enumerate() {
                    s.mul_acc(&jets.g_inv[r][mm], wm);
                }
                s
            })
            .collect();
        let mut s = JetScalar::from_f64(0.0);
        for (mm, wm) in w.iter().enumerate() {
            s.mul_acc(&jets.mean_cartan_up[mm], wm);
        }
        (q, s)
    }

    /// `G^r_abc = 1/2 c^e_mn d_a d_b d_c (g^{rm} y_e y^n)`
    pub fn berwald_curvature(&self) -> Array4<f64> {
        let m = self.dim();
        let (q, _) = self.curvature_jets();
        Array4::from_shape_fn((m, m, m, m), |(r, a, b, c)| 0.5 * q[r].partial(&[a, b, c]))
    }

    /// `E_bc = 1/2 G^r_rbc` with `G^r_rbc = -c^e_mn d_b d_c (I^m y_e y^n)`
    pub fn mean_berwald(&self) -> Array2<f64> {
        let m = self.dim();
        let (_, s) = self.curvature_jets();
        Array2::from_shape_fn((m, m), |(b, c)| -0.5 * s.partial(&[b, c]))
    }

    /// `d_a E_bc` as `[a, b, c]`.
    pub fn mean_berwald_derivative(&self) -> Array3<f64> {
        let m = self.dim();
        let (_, s) = self.curvature_jets();
        Array3::from_shape_fn((m, m, m), |(a, b, c)| -0.5 * s.partial(&[a, b, c]))
    }

    /// `D^r_abc = c^e_pq d_a d_b d_c ((g^{rp}/2 + I^p y^r/(m+1)) y_e y^q)`
    pub fn douglas(&self) -> Array4<f64> {
        let m = self.dim();
        let (q, s) = self.curvature_jets();
        let k = 1.0 / (m as f64 + 1.0);
        let t: Vec<JetScalar> = (0..m)
            .map(|r| q[r].scale(0.5) + (self.v.jets.y[r].clone() * s.clone()).scale(k))
            .collect();
        Array4::from_shape_fn((m, m, m, m), |(r, a, b, c)| t[r].partial(&[a, b, c]))
    }

    /// `k_mne = 1/2 (c_mne + c_nem - c_emn)`
    pub fn ricci_rotation(&self) -> Array3<f64> {
        let m = self.dim();
        let cl = &self.c_lower;
        Array3::from_shape_fn((m, m, m), |(a, n, e)| {
            0.5 * (cl[[a, n, e]] + cl[[n, e, a]] - cl[[e, a, n]])
        })
    }

    // ky[m, n] = k_mne y^e
    fn rotation_y(&self) -> Array2<f64> {
        let m = self.dim();
        let k = self.ricci_rotation();
        Array2::from_shape_fn((m, m), |(a, n)| (0..m).map(|e| k[[a, n, e]] * self.v.y[e]).sum())
    }

    /// `L_abc` by one of its three expressions.
    pub fn landsberg(&self, form: u8) -> Result<Array3<f64>> {
        match form {
            1 => Ok(self.landsberg_form1()),
            2 => Ok(self.landsberg_form2()),
            3 => self.landsberg_form3(),
            other => Err(Error::InvalidForm(other)),
        }
    }

    fn landsberg_form1(&self) -> Array3<f64> {
        let m = self.dim();
        let (q, _) = self.curvature_jets();
        let yl = &self.v.y_lower;
        Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            -0.25 * (0..m).map(|r| yl[r] * q[r].partial(&[a, b, c])).sum::<f64>()
        })
    }

    fn landsberg_form2(&self) -> Array3<f64> {
        let m = self.dim();
        let ky = self.rotation_y();
        let kk = ky.dot(&self.v.y);
        let cm = &self.c_mixed;
        let c4m = self.v.cartan_curvature_mixed();
        Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            let mut s = 0.0;
            for mm in 0..m {
                s += ky[[mm, a]] * cm[[mm, b, c]] + ky[[mm, b]] * cm[[mm, c, a]] + ky[[mm, c]] * cm[[mm, a, b]];
                let mut inner = c4m[[mm, a, b, c]];
                for t in 0..m {
                    inner -= cm[[t, b, c]] * cm[[mm, a, t]]
                        + cm[[t, c, a]] * cm[[mm, b, t]]
                        + cm[[t, a, b]] * cm[[mm, c, t]];
                }
                s += kk[mm] * inner;
            }
            s
        })
    }

    fn landsberg_form3(&self) -> Result<Array3<f64>> {
        let m = self.dim();
        let h = self.v.projector()?;
        let hup = self.projector_up()?;
        let ky = self.rotation_y();
        let cm = &self.c_mixed;
        let y = &self.v.y;
        let nabla = vertical_cartan_torsion(&self.v);
        // P_sabc = h^p_a h^q_b h^r_c nabla_s C_pqr
        let mut proj = Array4::<f64>::zeros((m, m, m, m));
        for s in 0..m {
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        let mut acc = 0.0;
                        for p in 0..m {
                            for q in 0..m {
                                for r in 0..m {
                                    acc += h[[p, a]] * h[[q, b]] * h[[r, c]] * nabla[[s, p, q, r]];
                                }
                            }
                        }
                        proj[[s, a, b, c]] = acc;
                    }
                }
            }
        }
        // H^m_abc = h^{ms} P_sabc
        let hp = Array4::from_shape_fn((m, m, m, m), |(mm, a, b, c)| {
            (0..m).map(|s| hup[[mm, s]] * proj[[s, a, b, c]]).sum::<f64>()
        });
        Ok(Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            let mut s = 0.0;
            for mm in 0..m {
                for n in 0..m {
                    let x = |i: usize, j: usize| {
                        cm[[i, b, c]] * h[[j, a]]
                            + cm[[i, c, a]] * h[[j, b]]
                            + cm[[i, a, b]] * h[[j, c]]
                            + y[j] * hp[[i, a, b, c]]
                    };
                    s += ky[[mm, n]] * 0.5 * (x(mm, n) - x(n, mm));
                }
            }
            s
        }))
    }

    /// `h^{ab} = g^{ab} - y^a y^b / (2L)`
    fn projector_up(&self) -> Result<Array2<f64>> {
        self.v.projector()?;
        let m = self.dim();
        let two_l = 2.0 * self.v.lagrangian;
        let y = &self.v.y;
        Ok(Array2::from_shape_fn((m, m), |(a, b)| self.v.g_inv[[a, b]] - y[a] * y[b] / two_l))
    }

    // d_c I^m + C^m_sc I^s, indexed [m, c]
    fn mean_cartan_shifted(&self) -> Array2<f64> {
        let m = self.dim();
        let iu = &self.v.mean_cartan_up;
        Array2::from_shape_fn((m, m), |(mm, c)| {
            self.v.d_mean_cartan[[mm, c]] + (0..m).map(|s| self.c_mixed[[mm, s, c]] * iu[s]).sum::<f64>()
        })
    }

    /// `J_c` by one of its three expressions.
    pub fn mean_landsberg(&self, form: u8) -> Result<Array1<f64>> {
        let m = self.dim();
        let (y, yl, g) = (&self.v.y, &self.v.y_lower, &self.v.g);
        let (il, iu) = (&self.v.mean_cartan, &self.v.mean_cartan_up);
        match form {
            1 => {
                let di = self.mean_cartan_shifted();
                let c = &self.h.c;
                Ok(Array1::from_shape_fn(m, |cc| {
                    let mut s = 0.0;
                    for e in 0..m {
                        for mm in 0..m {
                            for n in 0..m {
                                let k = c[[e, mm, n]];
                                if k == 0.0 {
                                    continue;
                                }
                                s += k
                                    * (y[mm] * il[e] * delta(n, cc)
                                        + iu[mm] * g[[e, cc]] * y[n]
                                        + iu[mm] * yl[e] * delta(n, cc)
                                        + 2.0 * di[[mm, cc]] * yl[e] * y[n]);
                            }
                        }
                    }
                    -0.5 * s
                }))
            }
            2 => {
                let di = self.mean_cartan_shifted();
                let ky = self.rotation_y();
                let kk = ky.dot(y);
                Ok(Array1::from_shape_fn(m, |c| {
                    (0..m)
                        .map(|mm| ky[[mm, c]] * iu[mm] + kk[mm] * di[[mm, c]])
                        .sum()
                }))
            }
            3 => {
                let h = self.v.projector()?;
                let ky = self.rotation_y();
                let nabla = vertical_cartan_mean(&self.v);
                // Z^m_c = h^a_c h^m_b nabla_a I^b
                let z = Array2::from_shape_fn((m, m), |(mm, c)| {
                    let mut s = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            s += h[[a, c]] * h[[mm, b]] * nabla[[a, b]];
                        }
                    }
                    s
                });
                Ok(Array1::from_shape_fn(m, |c| {
                    let mut s = 0.0;
                    for mm in 0..m {
                        for n in 0..m {
                            // X^{nm} = h^n_c I^m + y^n Z^m_c
                            let x = |i: usize, j: usize| h[[i, c]] * iu[j] + y[i] * z[[j, c]];
                            s += ky[[mm, n]] * 0.5 * (x(n, mm) - x(mm, n));
                        }
                    }
                    s
                }))
            }
            other => Err(Error::InvalidForm(other)),
        }
    }

    /// Factored Ricci scalar.
    pub fn ricci_scalar(&self) -> f64 {
        let m = self.dim();
        let (y, yl, gi) = (&self.v.y, &self.v.y_lower, &self.v.g_inv);
        let iu = &self.v.mean_cartan_up;
        let dc = &self.h.dc;

        // terms carrying c^c_{ab,d}
        let mut deriv = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let v = dc[[c, a, b, d]];
                        if v == 0.0 {
                            continue;
                        }
                        deriv += gi[[a, d]] * y[b] * yl[c] * v;
                    }
                    // y^a y^b c^c_{bc,a}
                    deriv += y[a] * y[b] * dc[[c, b, c, a]];
                    // I^b y^a y^c y_d c^d_{bc,a}
                    for d in 0..m {
                        deriv += iu[b] * y[a] * y[c] * yl[d] * dc[[d, b, c, a]];
                    }
                }
            }
        }

        let cl = &self.c_lower;
        // u_jk = y^a c_ajk, p_ak = c_ajk y^j, v_k = y^a y^j c_ajk
        let u = Array2::from_shape_fn((m, m), |(j, k)| (0..m).map(|a| y[a] * cl[[a, j, k]]).sum::<f64>());
        let p = Array2::from_shape_fn((m, m), |(a, k)| (0..m).map(|j| cl[[a, j, k]] * y[j]).sum::<f64>());
        let v = Array1::from_shape_fn(m, |k| (0..m).map(|j| u[[j, k]] * y[j]).sum::<f64>());
        // w^k = g^{km} g^{bn} c_bmn
        let w = Array1::from_shape_fn(m, |k| {
            let mut s = 0.0;
            for mm in 0..m {
                for b in 0..m {
                    for n in 0..m {
                        s += gi[[k, mm]] * gi[[b, n]] * cl[[b, mm, n]];
                    }
                }
            }
            s
        });
        let cr = &self.c_raised;
        let c_up = Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            (0..m).map(|t| cr[[a, b, t]] * gi[[t, c]]).sum::<f64>()
        });
        let cm = &self.c_mixed;

        let ug = u.dot(gi); // u_jk g^{kn}
        let t1 = 0.25 * (gi.t().dot(&u).dot(gi) * &u).sum();
        let t2 = v.dot(&w);
        let pg = p.dot(gi);
        let t3 = -0.5 * pg.dot(&pg).diag().sum();
        let t4 = -0.5 * (gi.dot(&p) * p.dot(gi)).sum();
        let mut t5 = 0.0;
        let mut t6 = 0.0;
        for k in 0..m {
            for b in 0..m {
                for n in 0..m {
                    t5 += 2.0 * v[k] * p[[b, n]] * c_up[[b, k, n]];
                }
            }
            for n in 0..m {
                let mut cc = 0.0;
                for q in 0..m {
                    for hh in 0..m {
                        cc += cm[[k, q, hh]] * c_up[[n, q, hh]];
                    }
                }
                t6 -= v[k] * v[n] * cc;
            }
        }
        let iu_u = iu.dot(&ug); // I^j u_jk g^{kn}
        let yu = y.dot(&u); // y^m u_mn
        let t7 = iu_u.dot(&yu);
        let t8 = -v.dot(&gi.dot(&p).dot(iu));
        let di = &self.v.d_mean_cartan; // [k, e] = d_e I^k
        let t9 = -v.dot(&di.dot(gi).dot(&v));
        deriv + t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8 + t9
    }
}

/// `nabla_s C_pqr` as `[s, p, q, r]`, or `nabla_a I^b` as `[a, b]`.
pub fn vertical_cartan_derivative(v: &VerticalData, target: CartanTarget) -> ndarray::ArrayD<f64> {
    match target {
        CartanTarget::Torsion => vertical_cartan_torsion(v).into_dyn(),
        CartanTarget::Mean => vertical_cartan_mean(v).into_dyn(),
    }
}

fn vertical_cartan_torsion(v: &VerticalData) -> Array4<f64> {
    let m = v.dim();
    let cm = v.cartan_mixed();
    let c = &v.cartan;
    Array4::from_shape_fn((m, m, m, m), |(s, p, q, r)| {
        let mut acc = v.cartan_curvature[[s, p, q, r]];
        for t in 0..m {
            acc -= cm[[t, s, p]] * c[[t, q, r]] + cm[[t, s, q]] * c[[p, t, r]] + cm[[t, s, r]] * c[[p, q, t]];
        }
        acc
    })
}

fn vertical_cartan_mean(v: &VerticalData) -> Array2<f64> {
    let m = v.dim();
    let cm = v.cartan_mixed();
    Array2::from_shape_fn((m, m), |(a, b)| {
        v.d_mean_cartan[[b, a]] + (0..m).map(|t| cm[[b, a, t]] * v.mean_cartan_up[t]).sum::<f64>()
    })
}

fn check_dims(norm: &MinkowskiNorm, field: &VierbeinField) -> Result<()> {
    if norm.dim() != field.dim() {
        return Err(Error::DimensionMismatch(format!(
            "norm dimension {} differs from vierbein dimension {}",
            norm.dim(),
            field.dim()
        )));
    }
    Ok(())
}

/// Outcome of the fiber-sampling Berwald probe at one base point.
#[derive(Debug, Clone, Serialize)]
pub struct BerwaldProbe {
    pub x: Vec<f64>,
    pub samples: usize,
    /// `max_s max |G^rho_ab(y_s) - G^rho_ab(y_0)|`
    pub max_variation: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub berwald_compatible: bool,
}

/// Necessary-condition check: Berwald spaces have fiber-independent `G^rho_{alpha beta}`.
/// `fiber_samples` are frame components inside the domain cone.
pub fn is_berwald(
    norm: &MinkowskiNorm,
    field: &VierbeinField,
    x: &[f64],
    fiber_samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<BerwaldProbe> {
    if fiber_samples.len() < 2 {
        return Err(Error::InvalidParameter("the Berwald probe needs at least two fiber samples".into()));
    }
    let connections = fiber_samples
        .iter()
        .map(|y| FinslerPoint::from_frame(norm, field, x, y).map(|p| p.berwald_connection()))
        .collect::<Result<Vec<_>>>()?;
    let scale = connections
        .iter()
        .map(|g| linalg::max_abs(g.iter()))
        .fold(1.0, f64::max);
    let max_variation = connections[1..]
        .iter()
        .map(|g| linalg::max_abs((g - &connections[0]).iter()))
        .fold(0.0, f64::max);
    Ok(BerwaldProbe {
        x: x.to_vec(),
        samples: fiber_samples.len(),
        max_variation,
        scale,
        tolerance,
        berwald_compatible: max_variation <= tolerance * scale,
    })
}
