//! Random moment sequences on `[a,b]`, `[0,∞)` and `ℝ`.

pub mod asymptotics;
pub mod coords;
pub mod dual;
pub mod error;
pub mod measures;
pub mod potential;
pub mod quadrature;
pub mod sampling;
pub mod stieltjes;

pub use error::{MomentError, Result};
