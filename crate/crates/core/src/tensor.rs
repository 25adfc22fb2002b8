//! Named tensors, index metadata and serializable reports.

use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayD, ArrayViewD, Axis, IxDyn};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler::{EvaluationPoint, FinslerPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorName {
    Spray,
    NonlinearConnection,
    BerwaldConnection,
    BerwaldCurvature,
    MeanBerwald,
    Douglas,
    RicciRotation,
    Landsberg,
    MeanLandsberg,
    RicciScalar,
    /// Vertical `g_ab`.
    Metric,
    CartanTorsion,
    MeanCartanTorsion,
}

impl TensorName {
    pub const ALL: [TensorName; 13] = [
        TensorName::Spray,
        TensorName::NonlinearConnection,
        TensorName::BerwaldConnection,
        TensorName::BerwaldCurvature,
        TensorName::MeanBerwald,
        TensorName::Douglas,
        TensorName::RicciRotation,
        TensorName::Landsberg,
        TensorName::MeanLandsberg,
        TensorName::RicciScalar,
        TensorName::Metric,
        TensorName::CartanTorsion,
        TensorName::MeanCartanTorsion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TensorName::Spray => "spray",
            TensorName::NonlinearConnection => "nonlinear_connection",
            TensorName::BerwaldConnection => "berwald_connection",
            TensorName::BerwaldCurvature => "berwald_curvature",
            TensorName::MeanBerwald => "mean_berwald",
            TensorName::Douglas => "douglas",
            TensorName::RicciRotation => "ricci_rotation",
            TensorName::Landsberg => "landsberg",
            TensorName::MeanLandsberg => "mean_landsberg",
            TensorName::RicciScalar => "ricci_scalar",
            TensorName::Metric => "metric",
            TensorName::CartanTorsion => "cartan_torsion",
            TensorName::MeanCartanTorsion => "mean_cartan_torsion",
        }
    }

    /// Whether the tensor has several equivalent expressions selectable by `form`.
    pub fn has_forms(self) -> bool {
        matches!(self, TensorName::Landsberg | TensorName::MeanLandsberg)
    }

    pub fn index_labels(self) -> Vec<IndexLabel> {
        use IndexKind::{Coordinate as C, Frame as F};
        use IndexPosition::{Down as D, Up as U};
        let l = |position, kind| IndexLabel { position, kind };
        match self {
            TensorName::Spray => vec![l(U, C)],
            TensorName::NonlinearConnection => vec![l(U, C), l(D, C)],
            TensorName::BerwaldConnection => vec![l(U, C), l(D, C), l(D, C)],
            TensorName::BerwaldCurvature | TensorName::Douglas => vec![l(U, F), l(D, F), l(D, F), l(D, F)],
            TensorName::MeanBerwald | TensorName::Metric => vec![l(D, F), l(D, F)],
            TensorName::RicciRotation | TensorName::Landsberg | TensorName::CartanTorsion => {
                vec![l(D, F), l(D, F), l(D, F)]
            }
            TensorName::MeanLandsberg | TensorName::MeanCartanTorsion => vec![l(D, F)],
            TensorName::RicciScalar => vec![],
        }
    }
}

impl fmt::Display for TensorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TensorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TensorName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "tensor",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexPosition {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Frame,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexLabel {
    pub position: IndexPosition,
    pub kind: IndexKind,
}

/// A tensor request: name plus expression choice where several exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorRequest {
    pub name: TensorName,
    pub form: Option<u8>,
}

impl TensorRequest {
    pub fn new(name: TensorName) -> Self {
        TensorRequest { name, form: None }
    }

    pub fn with_form(name: TensorName, form: u8) -> Result<Self> {
        if !name.has_forms() {
            return Err(Error::InvalidParameter(format!("tensor `{name}` has no alternative forms")));
        }
        if !(1..=3).contains(&form) {
            return Err(Error::InvalidForm(form));
        }
        Ok(TensorRequest { name, form: Some(form) })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorReport {
    pub name: TensorName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<u8>,
    pub index_labels: Vec<IndexLabel>,
    #[serde(serialize_with = "serialize_nested")]
    pub components: ArrayD<f64>,
    pub point: EvaluationPoint,
}

fn serialize_nested<S: Serializer>(a: &ArrayD<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    Nested(a.view()).serialize(s)
}

struct Nested<'a>(ArrayViewD<'a, f64>);

impl Serialize for Nested<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.ndim() == 0 {
            return s.serialize_f64(self.0[IxDyn(&[])]);
        }
        let mut seq = s.serialize_seq(Some(self.0.len_of(Axis(0))))?;
        for sub in self.0.axis_iter(Axis(0)) {
            seq.serialize_element(&Nested(sub))?;
        }
        seq.end()
    }
}

/// Evaluate one requested tensor at a prepared point.
pub fn evaluate_tensor(p: &FinslerPoint, req: TensorRequest) -> Result<TensorReport> {
    let form = if req.name.has_forms() { Some(req.form.unwrap_or(1)) } else { None };
    let components = match req.name {
        TensorName::Spray => p.spray().into_dyn(),
        TensorName::NonlinearConnection => p.nonlinear_connection().into_dyn(),
        TensorName::BerwaldConnection => p.berwald_connection().into_dyn(),
        TensorName::BerwaldCurvature => p.berwald_curvature().into_dyn(),
        TensorName::MeanBerwald => p.mean_berwald().into_dyn(),
        TensorName::Douglas => p.douglas().into_dyn(),
        TensorName::RicciRotation => p.ricci_rotation().into_dyn(),
        TensorName::Landsberg => p.landsberg(form.unwrap_or(1))?.into_dyn(),
        TensorName::MeanLandsberg => p.mean_landsberg(form.unwrap_or(1))?.into_dyn(),
        TensorName::RicciScalar => ndarray::arr0(p.ricci_scalar()).into_dyn(),
        TensorName::Metric => p.v.g.clone().into_dyn(),
        TensorName::CartanTorsion => p.v.cartan.clone().into_dyn(),
        TensorName::MeanCartanTorsion => p.v.mean_cartan.clone().into_dyn(),
    };
    Ok(TensorReport {
        name: req.name,
        form,
        index_labels: req.name.index_labels(),
        components,
        point: p.point.clone(),
    })
}
