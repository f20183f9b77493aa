//! Small-volume soap films spanning a planar wire: spherical-cap oracles,
//! an axisymmetric shooting solver, a constrained mesh minimizer, the
//! hodograph chart diagnostics and the foliation validators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axisym;
pub mod cap;
pub mod error;
pub mod foliation;
pub mod geometry;
pub mod hodograph;
pub mod mesh;
pub mod numerics;
pub mod par;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use par::Execution;
