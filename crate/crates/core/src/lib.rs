#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
pub mod error;
pub mod fbm;
pub mod fraccalc;
pub mod malliavin;
pub mod mc;
pub mod path;
pub mod quad;
pub mod rng;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use fbm::{FbmMethod, FbmSampler, FbmSpec};
pub use path::{SamplePath, StepFunction};
pub use solver::{CirDriftSpec, DriftSpec, SolveConfig};
