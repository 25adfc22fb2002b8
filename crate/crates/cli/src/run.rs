//! `eval`, `verify` and `catalog` drivers.

use std::fmt::Write as _;

use finsler_core::batch::map_points;
use finsler_core::{
    evaluate_tensor, minkowski, frame, sample_points, verify_points, CheckOutcome, Error as CoreError, FinslerPoint,
    SamplePoint, TensorName, Tolerances,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Fiber, Mode, PointSpec, RunConfig};
use crate::error::Result;

pub const SKIP_OUTSIDE: &str = "outside domain cone";

/// Exit codes: success, tolerance breach, evaluation or configuration error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub tolerance: Option<f64>,
    pub threads: Option<usize>,
}

/// JSON document plus a human-readable summary for the terminal.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub document: Value,
    pub summary: String,
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    norm: NameDim<'a>,
    frame: NameDim<'a>,
    points: usize,
}

#[derive(Serialize)]
struct NameDim<'a> {
    name: &'a str,
    dimension: usize,
}

fn meta(cfg: &RunConfig, mode: Mode, points: usize) -> Value {
    let m = Meta {
        tool: "finsler",
        version: env!("CARGO_PKG_VERSION"),
        mode: match mode {
            Mode::Eval => "eval",
            Mode::Verify => "verify",
        },
        norm: NameDim {
            name: cfg.norm.name(),
            dimension: cfg.dim(),
        },
        frame: NameDim {
            name: cfg.frame.name(),
            dimension: cfg.frame.dim(),
        },
        points,
    };
    serde_json::to_value(m).expect("meta serializes")
}

/// Configured points followed by sampled ones.
pub fn resolve_points(cfg: &RunConfig) -> Result<Vec<PointSpec>> {
    let mut points = cfg.points.clone();
    if let Some(r) = &cfg.random {
        points.extend(sample_points(&cfg.norm, &cfg.frame, r)?.into_iter().map(|p| PointSpec {
            x: p.x,
            y: Fiber::Coordinate(p.y),
        }));
    }
    Ok(points)
}

fn prepare(cfg: &RunConfig, p: &PointSpec) -> finsler_core::Result<FinslerPoint> {
    match &p.y {
        Fiber::Coordinate(y) => FinslerPoint::new(&cfg.norm, &cfg.frame, &p.x, y),
        Fiber::Frame(y) => FinslerPoint::from_frame(&cfg.norm, &cfg.frame, &p.x, y),
    }
}

enum PointEval {
    Done(Vec<Value>),
    Skipped,
    Failed(String),
}

fn eval_point(cfg: &RunConfig, p: &PointSpec) -> PointEval {
    let fp = match prepare(cfg, p) {
        Ok(fp) => fp,
        Err(CoreError::OutsideDomain(_)) => return PointEval::Skipped,
        Err(e) => return PointEval::Failed(e.to_string()),
    };
    let mut out = Vec::with_capacity(cfg.tensors.len());
    for req in &cfg.tensors {
        match evaluate_tensor(&fp, *req).map(serde_json::to_value) {
            Ok(Ok(v)) => out.push(v),
            Ok(Err(e)) => return PointEval::Failed(e.to_string()),
            Err(e) => return PointEval::Failed(format!("{}: {e}", req.name)),
        }
    }
    PointEval::Done(out)
}

/// Tensor results for every point, sorted by point index then request order.
/// The oracle is never touched here.
fn eval_results(cfg: &RunConfig, points: &[PointSpec], threads: Option<usize>) -> (Vec<Value>, Vec<Value>) {
    let evaluated = map_points(points, threads, |_, p| eval_point(cfg, p));
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for (i, e) in evaluated.into_iter().enumerate() {
        match e {
            PointEval::Done(reports) => {
                for mut r in reports {
                    let obj = r.as_object_mut().expect("report is an object");
                    let tensor = obj.remove("name").unwrap_or(Value::Null);
                    let at = obj.remove("point").unwrap_or(Value::Null);
                    let mut entry = serde_json::Map::new();
                    entry.insert("point".into(), json!(i));
                    entry.insert("tensor".into(), tensor);
                    if let Some(f) = obj.remove("form") {
                        entry.insert("form".into(), f);
                    }
                    entry.insert("at".into(), at);
                    entry.insert("index_labels".into(), obj.remove("index_labels").unwrap_or(Value::Null));
                    entry.insert("components".into(), obj.remove("components").unwrap_or(Value::Null));
                    results.push(Value::Object(entry));
                }
            }
            PointEval::Skipped => {
                for req in &cfg.tensors {
                    results.push(json!({
                        "point": i,
                        "tensor": req.name.as_str(),
                        "skipped_reason": SKIP_OUTSIDE,
                    }));
                }
            }
            PointEval::Failed(msg) => errors.push(json!({ "point": i, "error": msg })),
        }
    }
    (results, errors)
}

pub fn run_eval(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    let points = resolve_points(cfg)?;
    let (results, errors) = eval_results(cfg, &points, opts.threads);
    let skipped = results.iter().filter(|r| r.get("skipped_reason").is_some()).count();
    let mut document = json!({
        "meta": meta(cfg, Mode::Eval, points.len()),
        "results": results,
    });
    let exit_code = if errors.is_empty() { EXIT_OK } else { EXIT_ERROR };
    let mut summary = format!(
        "eval: {} points, {} tensor(s), {skipped} skipped entries",
        points.len(),
        cfg.tensors.len()
    );
    if !errors.is_empty() {
        let _ = write!(summary, "\nerror: {} point(s) failed, first: {}", errors.len(), errors[0]);
        document["errors"] = Value::Array(errors);
    }
    Ok(Outcome {
        exit_code,
        document,
        summary,
    })
}

pub fn run_verify(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    let points = resolve_points(cfg)?;
    let tol = opts.tolerance.map(Tolerances::uniform).unwrap_or(cfg.tolerances);

    // domain violations are data; every other failure aborts
    let mut kept: Vec<usize> = Vec::new();
    let mut samples: Vec<SamplePoint> = Vec::new();
    let mut skipped: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match prepare(cfg, p) {
            Ok(fp) => {
                kept.push(i);
                samples.push(SamplePoint {
                    x: fp.point.x.clone(),
                    y: fp.point.y_coord.clone(),
                });
            }
            Err(CoreError::OutsideDomain(_)) => skipped.push(i),
            Err(e) => {
                return Ok(Outcome {
                    exit_code: EXIT_ERROR,
                    document: json!({
                        "meta": meta(cfg, Mode::Verify, points.len()),
                        "errors": [{ "point": i, "error": e.to_string() }],
                    }),
                    summary: format!("error: point {i}: {e}"),
                })
            }
        }
    }
    if samples.is_empty() {
        return Ok(Outcome {
            exit_code: EXIT_ERROR,
            document: json!({ "meta": meta(cfg, Mode::Verify, points.len()), "skipped": skipped }),
            summary: "error: every point lies outside the domain cone".into(),
        });
    }

    let mut report = verify_points(&cfg.norm, &cfg.frame, &samples, &tol, cfg.mutation, opts.threads)?;
    for c in &mut report.checks {
        c.worst_point = kept[c.worst_point];
    }
    let (results, errors) = eval_results(cfg, &points, opts.threads);

    let mut summary = table(&report.checks);
    let _ = writeln!(
        summary,
        "{} points verified, {} skipped ({SKIP_OUTSIDE}), {} checks",
        samples.len(),
        skipped.len(),
        report.checks.len()
    );
    let worst = report.worst_failure().cloned();
    let exit_code = match &worst {
        Some(w) => {
            let _ = write!(
                summary,
                "FAIL worst offender: {} max rel {:.3e} > tol {:.1e} (max abs {:.3e}) at point {}",
                w.name, w.max_rel, w.tolerance, w.max_abs, w.worst_point
            );
            EXIT_BREACH
        }
        None if !errors.is_empty() => {
            let _ = write!(summary, "error: {} point(s) failed tensor evaluation", errors.len());
            EXIT_ERROR
        }
        None => {
            let _ = write!(summary, "PASS all deviations within tolerance");
            EXIT_OK
        }
    };
    let mut document = json!({
        "meta": meta(cfg, Mode::Verify, points.len()),
        "results": results,
        "verify": {
            "passed": report.passed,
            "points": samples.len(),
            "skipped": skipped,
            "tolerances": tol,
            "table": report.checks,
            "worst_offender": worst,
        },
    });
    if !errors.is_empty() {
        document["errors"] = Value::Array(errors);
    }
    Ok(Outcome {
        exit_code,
        document,
        summary,
    })
}

fn table(checks: &[CheckOutcome]) -> String {
    let mut s = format!(
        "{:<40} {:>11} {:>11} {:>8} {:>6}  {}\n",
        "check", "max abs", "max rel", "tol", "worst", "status"
    );
    for c in checks {
        let _ = writeln!(
            s,
            "{:<40} {:>11.3e} {:>11.3e} {:>8.0e} {:>6}  {}",
            c.name,
            c.max_abs,
            c.max_rel,
            c.tolerance,
            c.worst_point,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    s
}

pub fn catalog() -> String {
    let mut s = String::from("norms (catalog name, Lagrangian, parameters, domain cone):\n");
    for (name, doc) in minkowski::CATALOG {
        let _ = writeln!(s, "  {name:<18} {doc}");
    }
    s.push_str("\nframes (catalog name, parameters):\n");
    for (name, doc) in frame::CATALOG {
        let _ = writeln!(s, "  {name:<18} {doc}");
    }
    s.push_str("\ntensors (name, indices; F = frame, C = coordinate):\n");
    for t in TensorName::ALL {
        let labels: String = t
            .index_labels()
            .iter()
            .map(|l| {
                let pos = match l.position {
                    finsler_core::tensor::IndexPosition::Up => '^',
                    finsler_core::tensor::IndexPosition::Down => '_',
                };
                let kind = match l.kind {
                    finsler_core::tensor::IndexKind::Frame => 'F',
                    finsler_core::tensor::IndexKind::Coordinate => 'C',
                };
                format!("{pos}{kind}")
            })
            .collect::<Vec<_>>()
            .join(" ");
        let forms = if t.has_forms() { "  (form = 1, 2 or 3)" } else { "" };
        let labels = if labels.is_empty() { "scalar".to_string() } else { labels };
        let _ = writeln!(s, "  {:<22} {labels}{forms}", t.as_str());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn berwald_moor_metric_at_diagonal_point() {
        let c = cfg(r#"
            tensors = ["metric"]
            [norm]
            name = "berwald_moor"
            dimension = 3
            [frame]
            name = "identity"
            [[points]]
            x = [0.0, 0.0, 0.0]
            y = [1.0, 1.0, 1.0]
        "#);
        let out = run_eval(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        let g = &out.document["results"][0]["components"];
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { -2.0 / 9.0 } else { 4.0 / 9.0 };
                assert!((g[a][b].as_f64().unwrap() - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn outside_cone_is_skipped_not_failed() {
        let c = cfg(r#"
            tensors = ["spray", "ricci_scalar"]
            [norm]
            name = "berwald_moor"
            dimension = 3
            [frame]
            name = "identity"
            [[points]]
            x = [0.0, 0.0, 0.0]
            y = [-1.0, 1.0, 1.0]
        "#);
        let out = run_eval(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        let results = out.document["results"].as_array().unwrap();
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| r["skipped_reason"] == SKIP_OUTSIDE));
    }

    #[test]
    fn flat_quadratic_is_all_zero() {
        let c = cfg(r#"
            tensors = ["spray", "ricci_scalar"]
            [norm]
            name = "pseudo_euclidean"
            dimension = 2
            signature = [1.0, -1.0]
            [frame]
            name = "identity"
            [[points]]
            x = [0.3, 0.1]
            y = [2.0, 1.0]
        "#);
        let out = run_eval(&c, &RunOptions::default()).unwrap();
        let results = out.document["results"].as_array().unwrap();
        assert_eq!(results[0]["components"], json!([0.0, 0.0]));
        assert_eq!(results[1]["components"], json!(0.0));
    }

    #[test]
    fn degenerate_point_aborts_with_error_record() {
        // pseudo_euclidean Hessian is fine; a singular frame is a numerical degeneracy
        let c = cfg(r#"
            tensors = ["spray"]
            [norm]
            name = "pseudo_euclidean"
            dimension = 2
            [frame]
            name = "diagonal"
            diagonal = ["x1", "1"]
            [[points]]
            x = [0.0, 0.0]
            y = [1.0, 0.0]
        "#);
        let out = run_eval(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_ERROR);
        assert_eq!(out.document["errors"][0]["point"], json!(0));
    }

    #[test]
    fn verify_maps_worst_point_back_to_config_index() {
        let c = cfg(r#"
            mode = "verify"
            [norm]
            name = "berwald_moor"
            dimension = 2
            [frame]
            name = "exp_diagonal"
            [[points]]
            x = [0.0, 0.0]
            y = [-1.0, 1.0]
            [[points]]
            x = [0.2, -0.4]
            y = [1.0, 0.5]
            [verify]
            mutation = "flip_spray_commutator_term"
        "#);
        let out = run_verify(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_BREACH);
        assert_eq!(out.document["verify"]["skipped"], json!([0]));
        assert_eq!(out.document["verify"]["worst_offender"]["worst_point"], json!(1));
        assert!(out.summary.contains("FAIL worst offender"));
    }

    #[test]
    fn catalog_lists_everything() {
        let text = catalog();
        for name in ["berwald_moor", "bogoslovsky", "sphere_orthonormal", "mean_landsberg", "ricci_scalar"] {
            assert!(text.contains(name), "{name}");
        }
    }
}
