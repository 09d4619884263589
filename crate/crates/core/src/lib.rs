//! Nonlinear eigenfunctions of odd-order nonlinear dispersion equations.
//!
//! The crate covers closed-form similarity exponents, shooting of finite-`n`
//! profiles from the interface, exact piecewise-cubic `n = inf` limit
//! profiles, the linear Airy kernel, very singular solutions of the
//! absorption equation, and diagnostics shared by all of them.

pub mod airy;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod limit;
pub mod linear;
pub mod ode;
pub mod profile;
pub mod roots;
pub mod shooting;
pub mod similarity;
pub mod surd;
pub mod vss;

pub use error::{Error, Result};
pub use profile::{Profile, ProfileMeta, Termination};
pub use similarity::{OdeForm, OdeKind, SimilarityParams};
