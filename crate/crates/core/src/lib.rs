//! Zeta-determinants of Dirac Laplacians on finite cylinders with APS
//! boundary conditions.
//!
//! A boundary model is a pair `(B, G)` of `n × n` complex matrices with `B`
//! Hermitian, `G* = -G`, `G² = -I` and `GB = -BG`. The cylinder operator
//! `-∂_u² + B²` on `[0, r] × C^n` decouples into scalar modes, one per
//! eigenvalue of `B`, plus a coupled block on `ker B`.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod model;
pub mod roots;
pub mod special;
pub mod spectrum;
pub mod zeta;
pub mod cli;
pub mod dtn;
pub mod scattering;

pub use error::{Error, Result};
