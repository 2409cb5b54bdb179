//! Deciding whether two systems are related by a web transformation.
//!
//! Three routes, kept separate on purpose: transporting a system through an
//! explicit map and checking the pullback ([`verify_pullback`]), comparing
//! sampled invariant signatures ([`compare_signatures`]), and for `n = 1`
//! constructing the map by quadrature ([`solve_n1`]).

mod scalar;
mod signature;
mod symdim;
mod verify;
mod webmap;

pub use scalar::{
    solve_n1, GridRow, Quadrature, ScalarMap, ScalarProblem, ScalarSolution, QUAD_TOL, RESIDUAL_TOL,
};
pub use signature::{compare_signatures, signature_sample, SignatureSample, SIGNATURE_TOL};
pub use symdim::{symmetry_dimension, SymmetryEstimate, MIN_PROBES, RANK_ATOL, RANK_RTOL};
pub use verify::{verify_pullback, EquivVerdict, MatchStats, Witness, PULLBACK_TOL};
pub use webmap::{pushforward, WebMap};
