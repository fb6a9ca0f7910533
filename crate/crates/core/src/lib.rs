//! Tests for elliptical symmetry of multivariate data with specified and
//! unspecified location.

pub mod are;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod matops;
pub mod quadrature;
pub mod radial;
pub mod samplers;
pub mod statdist;
pub mod testing;
pub mod ulan;

pub use error::{Error, Result};
