use nalgebra::DMatrix;

use crate::coframe::{Invariants, OdeSystem, TIME_INTERVAL};
use crate::expr::Expr;
use crate::numeric::halton;
use crate::{Error, Result};

/// Fewest evaluable probe points accepted.
pub const MIN_PROBES: usize = 3;

/// Relative singular-value cutoff for the rank.
pub const RANK_RTOL: f64 = 1e-8;

/// Absolute singular-value floor; a Jacobian below this is treated as zero.
pub const RANK_ATOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryEstimate {
    /// `n + 1 - rank`.
    pub dimension: usize,
    /// Largest numerical rank seen over the probes.
    pub rank: usize,
    pub n: usize,
    pub probes_requested: usize,
    /// Spatial coordinates of the probes that evaluated.
    pub probes: Vec<Vec<f64>>,
    /// Singular values (descending) of the Jacobian at each retained probe.
    pub singular_values: Vec<Vec<f64>>,
}

/// Dimension of the symmetry group of a system, from the rank of the
/// invariant vector's Jacobian with respect to the coframe.
///
/// The Jacobian is taken in the coframe directions
/// `d/dtheta^m = (1/s_m) d/dq_m`, from symbolic derivatives of the structure
/// functions; the rank equals that of the coordinate Jacobian since every
/// `s_m` is nonzero on the box.
pub fn symmetry_dimension(sys: &OdeSystem, probes: usize) -> Result<SymmetryEstimate> {
    let inv = Invariants::compute(sys)?;
    let n = sys.n();
    let coords = sys.names();
    let scales = inv.coframe.coefficients();
    let jacobian: Vec<Vec<Expr>> = inv
        .structure
        .invariants()
        .iter()
        .map(|(_, c)| {
            coords
                .iter()
                .zip(scales)
                .map(|(q, s)| c.differentiate(q) / s.clone())
                .collect()
        })
        .collect();
    let rows = jacobian.len();
    let mut kept = Vec::new();
    let mut singular_values = Vec::new();
    let mut rank = 0;
    for u in halton(probes, n) {
        let p = sys.point_at_fraction(TIME_INTERVAL.center(), &u);
        let mut values = Vec::with_capacity(rows * (n + 1));
        let ok = jacobian.iter().flatten().try_for_each(|e| {
            values.push(e.eval(&p)?);
            Ok::<_, Error>(())
        });
        match ok {
            Ok(()) => {}
            Err(Error::Eval(_)) => continue,
            Err(e) => return Err(e),
        }
        let m = DMatrix::from_row_slice(rows, n + 1, &values);
        let sv: Vec<f64> = {
            let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        };
        let cutoff = (RANK_RTOL * sv.first().copied().unwrap_or(0.0)).max(RANK_ATOL);
        rank = rank.max(sv.iter().filter(|&&v| v > cutoff).count());
        kept.push(p.x().to_vec());
        singular_values.push(sv);
    }
    if kept.len() < MIN_PROBES {
        return Err(Error::InsufficientProbes {
            evaluable: kept.len(),
            required: MIN_PROBES,
        });
    }
    Ok(SymmetryEstimate {
        dimension: (n + 1).saturating_sub(rank),
        rank,
        n,
        probes_requested: probes,
        probes: kept,
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(rhs: &[&str]) -> usize {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], rhs, 1.0, 2.0).unwrap();
        symmetry_dimension(&sys, 12).unwrap().dimension
    }

    #[test]
    fn constant_structure_gives_maximal_symmetry() {
        assert_eq!(dim(&["x2^2", "1"]), 3);
        assert_eq!(dim(&["x1*x2", "x2"]), 3);
    }

    #[test]
    fn one_functionally_independent_invariant() {
        assert_eq!(dim(&["exp(x2^2)", "1"]), 2);
    }

    #[test]
    fn rank_matches_finite_differences() {
        // Finite differences of the invariant vector along x2 agree with the
        // symbolic column (times s_2).
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &["exp(x2^2)", "1"], 1.0, 2.0).unwrap();
        let inv = Invariants::compute(&sys).unwrap();
        let p = sys.point(0.5, &[1.3, 1.6]);
        let h = 1e-5;
        let plus = inv.structure.invariant_vector(&p.with(2, 1.6 + h)).unwrap();
        let minus = inv.structure.invariant_vector(&p.with(2, 1.6 - h)).unwrap();
        let s2 = inv.coframe.eval(&p).unwrap()[2];
        for (r, (_, c)) in inv.structure.invariants().iter().enumerate() {
            let fd = (plus[r] - minus[r]) / (2.0 * h);
            let sym = (c.differentiate("x2") / inv.coframe.coefficients()[2].clone())
                .eval(&p)
                .unwrap();
            assert!((fd - sym * s2).abs() < 1e-6, "{r}: {fd} vs {}", sym * s2);
        }
    }

    #[test]
    fn unevaluable_probes_are_reported() {
        let f1 = "exp(x2*sqrt((x1 - 1)*(x1 - 3/2)*(x1 - 2)) + x2)";
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &[f1, "1"], 1.0, 2.0).unwrap();
        // Only probes in x1 < 3/2 evaluate; with 4 probes that is fewer than 3.
        let r = symmetry_dimension(&sys, 4);
        assert!(
            matches!(r, Err(Error::InsufficientProbes { required: 3, .. })),
            "{r:?}"
        );
    }
}
