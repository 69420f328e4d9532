//! Numerical tools for the Gram matrices, Muntz-type series and quadratic
//! forms that arise when approximating the constant function by Dirichlet
//! polynomials of fractional-part functions.

pub mod arith;
pub mod constants;
pub mod error;
pub mod gram;
pub mod muntz;
pub mod identities;
pub mod quad;
pub mod quadform;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
pub use muntz::{Order, SeriesEval};
