use super::verify::{EquivVerdict, MatchStats, Witness};
use crate::coframe::{Invariants, OdeSystem, Slot, TIME_INTERVAL};
use crate::numeric::halton;
use crate::{Error, Result};

/// Tolerance for "constant" and for range comparisons, relative to `1 + |v|`.
pub const SIGNATURE_TOL: f64 = 1e-6;

/// Largest fraction of sample points that may fail to evaluate.
const MAX_SKIPPED_FRACTION: f64 = 0.2;

/// Invariant vectors sampled on a low-discrepancy grid of the box.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureSample {
    pub n: usize,
    /// 0-based normalizer pair used for the coframe.
    pub normalizer: (usize, usize),
    pub labels: Vec<String>,
    /// Spatial coordinates of each retained sample.
    pub points: Vec<Vec<f64>>,
    pub vectors: Vec<Vec<f64>>,
    /// Points dropped because an invariant could not be evaluated there.
    pub skipped: usize,
}

impl SignatureSample {
    /// `(min, max)` of invariant `idx` over the samples.
    pub fn range(&self, idx: usize) -> (f64, f64) {
        self.vectors
            .iter()
            .map(|v| v[idx])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    }

    /// Every invariant varies by at most the tolerance over the samples.
    pub fn is_constant(&self) -> bool {
        (0..self.labels.len()).all(|idx| {
            let (lo, hi) = self.range(idx);
            hi - lo <= SIGNATURE_TOL * (1.0 + lo.abs().max(hi.abs()))
        })
    }
}

/// Evaluates the invariant vector at `grid` Halton points of the box (`t` at
/// the middle of the time interval).
pub fn signature_sample(sys: &OdeSystem, grid: usize) -> Result<SignatureSample> {
    let inv = Invariants::compute(sys)?;
    let labels: Vec<String> = Slot::invariant_slots(sys.n())
        .iter()
        .map(Slot::label)
        .collect();
    let mut points = Vec::with_capacity(grid);
    let mut vectors = Vec::with_capacity(grid);
    let mut skipped = 0;
    for u in halton(grid, sys.n()) {
        let p = sys.point_at_fraction(TIME_INTERVAL.center(), &u);
        match inv.structure.invariant_vector(&p) {
            Ok(v) => {
                points.push(p.x().to_vec());
                vectors.push(v);
            }
            Err(Error::Eval(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if vectors.is_empty() || skipped as f64 > MAX_SKIPPED_FRACTION * grid as f64 {
        return Err(Error::IllConditionedNormalizer {
            skipped,
            total: grid,
        });
    }
    Ok(SignatureSample {
        n: sys.n(),
        normalizer: inv.normalizer().pair,
        labels,
        points,
        vectors,
        skipped,
    })
}

/// Compares two signatures. Never returns [`EquivVerdict::VerifiedByMap`].
///
/// Constant signatures are compared value by value; otherwise an invariant
/// whose value ranges are disjoint refutes equivalence.
pub fn compare_signatures(a: &SignatureSample, b: &SignatureSample) -> Result<EquivVerdict> {
    if a.n != b.n {
        return Err(Error::Dimension(format!("n = {} vs n = {}", a.n, b.n)));
    }
    if a.normalizer != b.normalizer {
        return Err(Error::PolicyMismatch {
            a: a.normalizer,
            b: b.normalizer,
        });
    }
    let constant = a.is_constant() && b.is_constant();
    let mut min_overlap: f64 = 1.0;
    for idx in 0..a.labels.len() {
        let ra = a.range(idx);
        let rb = b.range(idx);
        let scale = 1.0
            + [ra.0, ra.1, rb.0, rb.1]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
        let slack = SIGNATURE_TOL * scale;
        let disjoint = if constant {
            (0.5 * (ra.0 + ra.1) - 0.5 * (rb.0 + rb.1)).abs() > slack
        } else {
            ra.0 > rb.1 + slack || rb.0 > ra.1 + slack
        };
        if disjoint {
            return Ok(EquivVerdict::RefutedByInvariant(Witness {
                invariant: a.labels[idx].clone(),
                index: idx,
                a: ra,
                b: rb,
                point: None,
            }));
        }
        let union = ra.1.max(rb.1) - ra.0.min(rb.0);
        let inter = (ra.1.min(rb.1) - ra.0.max(rb.0)).max(0.0);
        if union > slack {
            min_overlap = min_overlap.min(inter / union);
        }
    }
    Ok(EquivVerdict::NotRefuted(MatchStats {
        invariants: a.labels.len(),
        samples: (a.vectors.len(), b.vectors.len()),
        constant,
        min_overlap,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rhs: &[&str], lo: f64, hi: f64) -> SignatureSample {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], rhs, lo, hi).unwrap();
        signature_sample(&sys, 32).unwrap()
    }

    #[test]
    fn constant_signatures_differ_at_c002() {
        let a = sample(&["x1*x2", "x2"], 1.0, 2.0);
        let b = sample(&["x2^2", "1"], 1.0, 2.0);
        assert!(a.is_constant() && b.is_constant());
        assert_eq!(a.normalizer, (0, 1));
        match compare_signatures(&a, &b).unwrap() {
            EquivVerdict::RefutedByInvariant(w) => {
                assert_eq!(w.invariant, "c^0_{02}");
                assert!(w.gap() > 0.49);
                assert_eq!(w.a, (0.0, 0.0));
                assert_eq!(w.b, (0.5, 0.5));
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn same_system_on_different_boxes_is_not_refuted() {
        let a = sample(&["x2^2", "1"], 1.0, 2.0);
        let b = sample(&["x2^2", "1"], 3.0, 5.0);
        assert!(matches!(
            compare_signatures(&a, &b).unwrap(),
            EquivVerdict::NotRefuted(MatchStats { constant: true, .. })
        ));
    }

    #[test]
    fn disjoint_ranges_refute() {
        // c^0_{02} = -1/(2 x2^2) here.
        let a = sample(&["exp(x2^2)", "1"], 1.0, 2.0);
        let b = sample(&["exp(x2^2)", "1"], 4.0, 5.0);
        assert!(!a.is_constant());
        assert!(matches!(
            compare_signatures(&a, &b).unwrap(),
            EquivVerdict::RefutedByInvariant(_)
        ));
        let c = sample(&["exp(x2^2)", "1"], 1.5, 2.5);
        assert!(matches!(
            compare_signatures(&a, &c).unwrap(),
            EquivVerdict::NotRefuted(MatchStats {
                constant: false,
                ..
            })
        ));
    }

    #[test]
    fn policy_mismatch() {
        let a = sample(&["x1*x2", "x2"], 1.0, 2.0);
        let b = sample(&["x1", "x1*x2"], 1.0, 2.0);
        assert!(matches!(
            compare_signatures(&a, &b),
            Err(Error::PolicyMismatch { .. })
        ));
    }

    #[test]
    fn mostly_singular_samples_are_rejected() {
        // l12 = 1 + sqrt(g) with g(x1) < 0 on (3/2, 2): half the box faults,
        // although g vanishes at the center and corners.
        let f1 = "exp(x2*sqrt((x1 - 1)*(x1 - 3/2)*(x1 - 2)) + x2)";
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &[f1, "1"], 1.0, 2.0).unwrap();
        assert!(matches!(
            signature_sample(&sys, 40),
            Err(Error::IllConditionedNormalizer { total: 40, .. })
        ));
    }
}
