//! Torsion, normalization, invariant coframe and structure functions of an
//! autonomous system under web transformations.
//!
//! Coframe convention: lifting the reduced coframe `(dt, dx_i/f_i)` by the
//! scaling group and normalizing `l_pq / a = 1` gives `theta^0 = l dt` and
//! `theta^i = (l / f_i) dx_i` with `l = l_pq`. Structure functions are
//! computed from this coframe by exterior differentiation. In closed form
//!
//! ```text
//! c^0_{0j}        = -f_j (dl/dx_j) / l^2
//! coeff of theta^i ^ theta^j in d theta^i = l_ij / l - f_j (dl/dx_j) / l^2
//! ```
//!
//! The correction term is the coframe-directional derivative
//! `f_j (dl/dx_j) / l^2`, not the bare coordinate derivative `dl/dx_j`; the
//! two coincide only when `l` is constant.

mod forms;
mod oracle;
mod structure;
mod system;
mod torsion;

pub use forms::{OneForm, TwoForm};
pub use oracle::{numeric_structure_oracle, NumericStructure};
pub use structure::{
    invariant_coframe, structure_functions, InvariantCoframe, Slot, StructureFunctions,
};
pub use system::{
    is_identifier, validate_system, Interval, OdeSystem, ValidationReport, VanishingAt,
    TIME_INTERVAL, VANISHING_TOL,
};
pub use torsion::{
    choose_normalizer, is_identically_zero, torsion_matrix, NormalizerChoice, TorsionMatrix,
};

use crate::Result;

/// Everything the invariant pipeline produces for one system.
#[derive(Clone, Debug)]
pub struct Invariants {
    pub torsion: TorsionMatrix,
    pub coframe: InvariantCoframe,
    pub structure: StructureFunctions,
}

impl Invariants {
    pub fn compute(sys: &OdeSystem) -> Result<Invariants> {
        let torsion = torsion_matrix(sys)?;
        let choice = choose_normalizer(&torsion, sys)?;
        let coframe = invariant_coframe(sys, &choice);
        let structure = structure_functions(sys, &coframe)?;
        Ok(Invariants {
            torsion,
            coframe,
            structure,
        })
    }

    pub fn normalizer(&self) -> &NormalizerChoice {
        self.coframe.normalizer()
    }
}
