//! Differential invariants of autonomous first-order ODE systems
//! `dx_i/dt = f_i(x)` under web transformations
//! `(t, x_1, ..., x_n) -> (phi_0(t), phi_1(x_1), ..., phi_n(x_n))`.
//!
//! The pipeline is:
//!
//! 1. [`coframe::torsion_matrix`]: torsion coefficients
//!    `l_ij = f_j * d(ln|f_i|)/dx_j`.
//! 2. [`coframe::choose_normalizer`]: pick a nonvanishing `l_pq` to fix the
//!    remaining scaling freedom.
//! 3. [`coframe::invariant_coframe`]: `theta^0 = l dt`, `theta^i = (l/f_i) dx_i`.
//! 4. [`coframe::structure_functions`]: coefficients `c^k_ij` of
//!    `d theta^k = sum_{i<j} c^k_ij theta^i ^ theta^j`.
//!
//! The [`equivalence`] module uses these invariants to refute or verify web
//! equivalence of two systems, to estimate the dimension of the symmetry
//! group, and to build the explicit map between two scalar equations.

pub mod coframe;
pub mod equivalence;
mod error;
pub mod expr;
pub mod numeric;
pub mod testing;

pub use error::{Error, Result};
pub use expr::{parse, Env, EvalError, Expr, Func, Node, ParseError, Point, Symbol, TIME_VAR};
