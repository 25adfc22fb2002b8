//! TOML run configuration and its validation.

use std::path::{Path, PathBuf};

use finsler_core::{
    FrameParams, MinkowskiNorm, Mutation, NormParams, SampleConfig, TensorName, TensorRequest, Tolerances,
    VierbeinField,
};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Eval,
    Verify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    mode: Mode,
    output: Option<PathBuf>,
    norm: RawNorm,
    frame: RawFrame,
    #[serde(default)]
    points: Vec<RawPoint>,
    #[serde(default)]
    grid: Vec<RawGrid>,
    random: Option<SampleConfig>,
    #[serde(default)]
    tensors: Vec<RawTensor>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    verify: RawVerify,
}

#[derive(Debug, Deserialize)]
struct RawNorm {
    name: String,
    dimension: usize,
    #[serde(flatten)]
    params: NormParams,
}

#[derive(Debug, Deserialize)]
struct RawFrame {
    name: String,
    dimension: Option<usize>,
    #[serde(flatten)]
    params: FrameParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    x: Vec<f64>,
    y: Option<Vec<f64>>,
    y_frame: Option<Vec<f64>>,
}

/// Cartesian grid: each component takes `steps` evenly spaced values in
/// `[min, max]` (a single value where `min == max`).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: Vec<f64>,
    x_max: Vec<f64>,
    y_min: Vec<f64>,
    y_max: Vec<f64>,
    steps: usize,
    /// Interpret the `y` ranges as frame components.
    #[serde(default)]
    frame_components: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawTensor {
    Name(String),
    Detailed { name: String, form: Option<u8> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    /// Test fixture: run verification against a deliberately corrupted formula.
    mutation: Option<Mutation>,
}

/// Fiber components of a configured point.
#[derive(Debug, Clone, PartialEq)]
pub enum Fiber {
    Coordinate(Vec<f64>),
    Frame(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSpec {
    pub x: Vec<f64>,
    pub y: Fiber,
}

#[derive(Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub output: Option<PathBuf>,
    pub norm: MinkowskiNorm,
    pub frame: VierbeinField,
    pub points: Vec<PointSpec>,
    pub random: Option<SampleConfig>,
    pub tensors: Vec<TensorRequest>,
    pub tolerances: Tolerances,
    pub mutation: Option<Mutation>,
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        CliError::Toml { source, .. } => CliError::Toml {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|source| CliError::Toml {
        path: PathBuf::from("<input>"),
        source,
    })?;
    let m = raw.norm.dimension;
    if let Some(fm) = raw.frame.dimension {
        if fm != m {
            return Err(CliError::DimensionMismatch(format!(
                "norm has dimension {m}, frame has dimension {fm}"
            )));
        }
    }
    check_frame_shape(&raw.frame, m)?;
    let norm = MinkowskiNorm::catalog(&raw.norm.name, m, &raw.norm.params)?;
    let frame = VierbeinField::catalog(&raw.frame.name, m, &raw.frame.params)?;

    let mut points = Vec::new();
    for (i, p) in raw.points.iter().enumerate() {
        let y = match (&p.y, &p.y_frame) {
            (Some(y), None) => Fiber::Coordinate(y.clone()),
            (None, Some(y)) => Fiber::Frame(y.clone()),
            _ => return Err(CliError::Invalid(format!("point {i}: give exactly one of `y` or `y_frame`"))),
        };
        let point = PointSpec { x: p.x.clone(), y };
        check_point(&point, m, &format!("point {i}"))?;
        points.push(point);
    }
    for (i, g) in raw.grid.iter().enumerate() {
        points.extend(expand_grid(g, m, i)?);
    }
    if points.is_empty() && raw.random.is_none() {
        return Err(CliError::Invalid("no points: give [[points]], [[grid]] or [random]".into()));
    }

    let tensors = if raw.tensors.is_empty() && raw.mode == Mode::Eval {
        return Err(CliError::Invalid("eval mode needs at least one tensor".into()));
    } else {
        raw.tensors.iter().map(tensor_request).collect::<Result<Vec<_>>>()?
    };

    Ok(RunConfig {
        mode: raw.mode,
        output: raw.output,
        norm,
        frame,
        points,
        random: raw.random,
        tensors,
        tolerances: raw.tolerances,
        mutation: raw.verify.mutation,
    })
}

fn check_frame_shape(frame: &RawFrame, m: usize) -> Result<()> {
    let p = &frame.params;
    let found = p
        .entries
        .as_ref()
        .map(|e| e.len())
        .or(p.matrix.as_ref().map(|e| e.len()))
        .or(p.diagonal.as_ref().map(|e| e.len()));
    match found {
        Some(n) if n != m => Err(CliError::DimensionMismatch(format!(
            "norm has dimension {m}, frame `{}` has {n} rows",
            frame.name
        ))),
        _ => Ok(()),
    }
}

fn check_point(p: &PointSpec, m: usize, what: &str) -> Result<()> {
    let ylen = match &p.y {
        Fiber::Coordinate(y) | Fiber::Frame(y) => y.len(),
    };
    if p.x.len() != m || ylen != m {
        return Err(CliError::DimensionMismatch(format!(
            "{what} has x of length {} and y of length {ylen}, dimension is {m}",
            p.x.len()
        )));
    }
    Ok(())
}

fn tensor_request(t: &RawTensor) -> Result<TensorRequest> {
    let (name, form) = match t {
        RawTensor::Name(n) => (n, None),
        RawTensor::Detailed { name, form } => (name, *form),
    };
    let tensor: TensorName = name.parse().map_err(|_| CliError::UnknownTensor(name.clone()))?;
    Ok(match form {
        Some(f) => TensorRequest::with_form(tensor, f)?,
        None => TensorRequest::new(tensor),
    })
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if lo == hi || steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
}

fn expand_grid(g: &RawGrid, m: usize, index: usize) -> Result<Vec<PointSpec>> {
    let lens = [g.x_min.len(), g.x_max.len(), g.y_min.len(), g.y_max.len()];
    if lens.iter().any(|&l| l != m) {
        return Err(CliError::DimensionMismatch(format!(
            "grid {index} has range lengths {lens:?}, dimension is {m}"
        )));
    }
    if g.steps == 0 {
        return Err(CliError::Invalid(format!("grid {index}: steps must be positive")));
    }
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|i| linspace(g.x_min[i], g.x_max[i], g.steps))
        .chain((0..m).map(|i| linspace(g.y_min[i], g.y_max[i], g.steps)))
        .collect();
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    Ok(combos
        .into_iter()
        .map(|c| {
            let (x, y) = c.split_at(m);
            PointSpec {
                x: x.to_vec(),
                y: if g.frame_components {
                    Fiber::Frame(y.to_vec())
                } else {
                    Fiber::Coordinate(y.to_vec())
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        tensors = ["ricci_scalar"]
        [norm]
        name = "berwald_moor"
        dimension = 3
        [frame]
        name = "identity"
        [[points]]
        x = [0.0, 0.0, 0.0]
        y = [1.0, 1.0, 1.0]
    "#;

    #[test]
    fn minimal_config_is_valid() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.mode, Mode::Eval);
        assert_eq!(cfg.dim(), 3);
        assert_eq!(cfg.tensors, vec![TensorRequest::new(TensorName::RicciScalar)]);
        assert_eq!(cfg.points.len(), 1);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn frame_dimension_mismatch() {
        let text = BASE.replace("name = \"identity\"", "name = \"identity\"\ndimension = 2");
        assert!(matches!(parse_config(&text), Err(CliError::DimensionMismatch(_))));
        let grid = BASE.replace(
            "name = \"identity\"",
            "name = \"custom\"\nentries = [[\"1\", \"0\"], [\"0\", \"1\"]]",
        );
        assert!(matches!(parse_config(&grid), Err(CliError::DimensionMismatch(_))));
        let point = BASE.replace("y = [1.0, 1.0, 1.0]", "y = [1.0, 1.0]");
        assert!(matches!(parse_config(&point), Err(CliError::DimensionMismatch(_))));
    }

    #[test]
    fn landsberg_form_is_recorded() {
        let text = BASE.replace(
            "tensors = [\"ricci_scalar\"]",
            "tensors = [{ name = \"landsberg\", form = 2 }, \"spray\"]",
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.tensors[0].name, TensorName::Landsberg);
        assert_eq!(cfg.tensors[0].form, Some(2));
        assert_eq!(cfg.tensors[1].form, None);
    }

    #[test]
    fn unknown_tensor_and_bad_form() {
        let text = BASE.replace("\"ricci_scalar\"", "\"riemann\"");
        assert!(matches!(parse_config(&text), Err(CliError::UnknownTensor(t)) if t == "riemann"));
        let text = BASE.replace("\"ricci_scalar\"", "{ name = \"landsberg\", form = 4 }");
        assert!(matches!(
            parse_config(&text),
            Err(CliError::Core(finsler_core::Error::InvalidForm(4)))
        ));
    }

    #[test]
    fn toml_errors_carry_location() {
        let err = parse_config("mode = \n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn expressions_are_parsed_at_load() {
        let text = BASE.replace(
            "name = \"identity\"",
            "name = \"diagonal\"\ndiagonal = [\"1\", \"exp(x1\", \"1\"]",
        );
        assert!(matches!(parse_config(&text), Err(CliError::Core(finsler_core::Error::Parse { .. }))));
    }

    #[test]
    fn grid_expands_cartesian_product() {
        let text = r#"
            mode = "verify"
            [norm]
            name = "pseudo_euclidean"
            dimension = 2
            [frame]
            name = "identity"
            [[grid]]
            x_min = [0.0, 0.0]
            x_max = [1.0, 0.0]
            y_min = [1.0, -1.0]
            y_max = [2.0, 1.0]
            steps = 3
        "#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.points.len(), 3 * 3 * 3);
        assert_eq!(cfg.points[1].y, Fiber::Coordinate(vec![1.0, 0.0]));
        assert!(cfg.tensors.is_empty());
    }

    #[test]
    fn mutation_fixture_parses() {
        let text = format!("mode = \"verify\"\n{BASE}\n[verify]\nmutation = \"flip_spray_commutator_term\"\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.mutation, Some(Mutation::FlipSprayCommutatorTerm));
    }
}
