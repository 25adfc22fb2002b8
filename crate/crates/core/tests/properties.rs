//! Property tests over random points: homogeneity degrees of the geometric
//! objects, jet derivatives against finite differences, and agreement of the
//! factored spray with the definitional one.

use std::collections::BTreeMap;

use finsler_core::expr::{parse, Bindings, Scope};
use finsler_core::jet::{derivative, DomainError, JetField, Scalar};
use finsler_core::oracle::{oracle_spray, CompositeLagrangian};
use finsler_core::{FinslerPoint, FrameParams, MinkowskiNorm, NormParams, VierbeinField};
use proptest::prelude::*;

fn randers() -> MinkowskiNorm {
    let params = NormParams {
        b: Some(vec![0.3, -0.2, 0.1]),
        ..Default::default()
    };
    MinkowskiNorm::catalog("randers", 3, &params).unwrap()
}

fn sheared() -> VierbeinField {
    let params = FrameParams {
        entries: Some(vec![
            vec!["1".into(), "0".into(), "0".into()],
            vec!["x3".into(), "exp(x1)".into(), "0".into()],
            vec!["0".into(), "0.5*x1".into(), "1 + x2^2".into()],
        ]),
        ..Default::default()
    };
    VierbeinField::catalog("custom", 3, &params).unwrap()
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1.0)
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3)
}

fn fiber3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3).prop_filter("away from zero", |y| y.iter().map(|v| v * v).sum::<f64>() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn homogeneity_degrees(x in vec3(), y in fiber3(), s in 0.3f64..3.0) {
        let (n, f) = (randers(), sheared());
        let p = FinslerPoint::new(&n, &f, &x, &y).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
        let q = FinslerPoint::new(&n, &f, &x, &ys).unwrap();

        let g = p.spray();
        let scale = max_abs(&g) * s * s;
        for (a, b) in g.iter().zip(q.spray().iter()) {
            prop_assert!(rel(a * s * s, *b, scale) < 1e-11);
        }
        let nl = p.nonlinear_connection();
        let scale = max_abs(&nl) * s;
        for (a, b) in nl.iter().zip(q.nonlinear_connection().iter()) {
            prop_assert!(rel(a * s, *b, scale) < 1e-11);
        }
        let bc = p.berwald_connection();
        for (a, b) in bc.iter().zip(q.berwald_connection().iter()) {
            prop_assert!(rel(*a, *b, max_abs(&bc)) < 1e-11);
        }
        // Berwald curvature has degree -1, Landsberg degree 0
        let bw = p.berwald_curvature();
        for (a, b) in bw.iter().zip(q.berwald_curvature().iter()) {
            prop_assert!(rel(*a / s, *b, max_abs(&bw) / s) < 1e-11);
        }
        let lb = p.landsberg(1).unwrap();
        for (a, b) in lb.iter().zip(q.landsberg(1).unwrap().iter()) {
            prop_assert!(rel(*a, *b, max_abs(&lb)) < 1e-11);
        }
        let r = p.ricci_scalar();
        prop_assert!(rel(r * s * s, q.ricci_scalar(), r.abs() * s * s) < 1e-10);
    }

    #[test]
    fn factored_spray_matches_definition(x in vec3(), y in fiber3()) {
        let (n, f) = (randers(), sheared());
        let p = FinslerPoint::new(&n, &f, &x, &y).unwrap();
        let oracle = oracle_spray(&CompositeLagrangian::new(&n, &f).unwrap(), &x, &y).unwrap();
        let g = p.spray();
        let scale = max_abs(&oracle);
        for (a, b) in g.iter().zip(oracle.iter()) {
            prop_assert!(rel(*a, *b, scale) < 1e-10);
        }
    }

    #[test]
    fn landsberg_forms_agree(x in vec3(), y in fiber3()) {
        let p = FinslerPoint::new(&randers(), &sheared(), &x, &y).unwrap();
        let l1 = p.landsberg(1).unwrap();
        let l2 = p.landsberg(2).unwrap();
        let scale = max_abs(&l1);
        for (a, b) in l1.iter().zip(l2.iter()) {
            prop_assert!(rel(*a, *b, scale) < 1e-10);
        }
    }

    #[test]
    fn jet_derivatives_match_central_differences(a in 0.2f64..2.0, b in 0.2f64..2.0) {
        let field = Parsed::new("exp(y1/3) * y2^2 + sqrt(y1*y2) - log(y2 + 1)/y1");
        let p = [a, b];
        let h = 1e-5;
        for i in 0..2 {
            let mut up = p;
            let mut dn = p;
            up[i] += h;
            dn[i] -= h;
            let fd = (field.value(&up) - field.value(&dn)) / (2.0 * h);
            let jet = derivative(&field, &p, &[i]).unwrap();
            prop_assert!((fd - jet).abs() < 1e-7 * jet.abs().max(1.0), "d{i}: {fd} vs {jet}");
        }
        // mixed second partial, symmetric by construction of the jet
        let d01 = derivative(&field, &p, &[0, 1]).unwrap();
        let d10 = derivative(&field, &p, &[1, 0]).unwrap();
        prop_assert_eq!(d01, d10);
    }

    #[test]
    fn jet_exp_ln_roundtrip(a in 0.1f64..5.0) {
        let f = Roundtrip;
        for order in 1..=4 {
            let idx = vec![0usize; order];
            let d = derivative(&f, &[a], &idx).unwrap();
            let expected = if order == 1 { 1.0 } else { 0.0 };
            prop_assert!((d - expected).abs() < 1e-12, "order {order}: {d}");
        }
    }
}

struct Parsed {
    expr: finsler_core::Expression,
    params: BTreeMap<String, f64>,
}

impl Parsed {
    fn new(text: &str) -> Self {
        Parsed {
            expr: parse(text, &Scope::fiber(2)).unwrap(),
            params: BTreeMap::new(),
        }
    }

    fn value(&self, y: &[f64]) -> f64 {
        self.eval(y).unwrap()
    }
}

impl JetField for Parsed {
    fn arity(&self) -> usize {
        2
    }

    fn eval<S: Scalar>(&self, point: &[S]) -> Result<S, DomainError> {
        let b = Bindings {
            x: &[],
            y: point,
            params: &self.params,
        };
        self.expr.eval(&b).map_err(|e| match e {
            finsler_core::expr::EvalError::Domain(d) => d,
            other => panic!("{other}"),
        })
    }
}

struct Roundtrip;

impl JetField for Roundtrip {
    fn arity(&self) -> usize {
        1
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Result<S, DomainError> {
        Ok(p[0].ln().exp())
    }
}
