//! Small numerical kernels: bracketed root finding, adaptive quadrature,
//! low-discrepancy sampling, relative error helpers.

pub mod halton;
pub mod quadrature;
pub mod roots;

pub use halton::halton;
pub use quadrature::{integrate, QuadError};
pub use roots::{solve_bracketed, RootError};

/// `|a - b| / (1 + max(|a|, |b|))`.
pub fn mixed_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}
