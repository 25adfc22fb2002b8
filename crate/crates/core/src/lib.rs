//! Frame-based evaluation of Finsler geometric quantities on a vierbein
//! field carrying a Minkowski norm, with independent coordinate oracles.

#![allow(clippy::needless_range_loop)]

pub mod batch;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod frame;
pub mod jet;
pub mod linalg;
pub mod minkowski;
pub mod oracle;
pub mod sampling;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{parse, Expression, ParseError, Scope};
pub use finsler::{EvaluationPoint, FinslerPoint, Mutation};
pub use frame::{horizontal_data, FrameParams, HorizontalData, VierbeinField};
pub use jet::{Jet, JetField, JetScalar, Scalar};
pub use minkowski::{vertical_data, MinkowskiNorm, NormParams, VerticalData};
pub use sampling::{sample_points, SampleConfig, SamplePoint};
pub use tensor::{evaluate_tensor, TensorName, TensorReport, TensorRequest};
pub use verify::{verify_points, CheckOutcome, Tolerances, VerifyReport};
