//! Numerical laboratory for passive scalars advected by a multiscale cascade
//! of alternating shear flows on the 2-torus.

// Guards are written as `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eulerian;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod io;
pub mod lagrangian;
pub mod params;

pub use error::{LabError, Result};
