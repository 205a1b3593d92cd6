//! Numerical verification of a sharp exponential-weight Hardy-type
//! inequality on the half-line, its closed-form extremals, the Bliss and
//! Moser-type satellite bounds, and the Onofri inequality on the 2-sphere.

mod cellexp;
mod dd;
pub mod constants;
pub mod error;
pub mod extremals;
pub mod quadrature;
pub mod radial;
pub mod sphere;
pub mod special;
pub mod varsolve;
pub mod verify;

pub use error::{Error, Result};
