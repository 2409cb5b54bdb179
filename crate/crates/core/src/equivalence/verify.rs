use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::webmap::WebMap;
use crate::coframe::{Invariants, OdeSystem, Slot};
use crate::numeric::mixed_error;
use crate::{Error, Result};

/// Mixed absolute/relative tolerance for pointwise agreement.
pub const PULLBACK_TOL: f64 = 1e-6;

const VERIFY_SEED: u64 = 0x5eed_0f0a;

/// An invariant on which two systems provably disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Label such as `c^0_{02}` or `theta^1`.
    pub invariant: String,
    /// Position in the invariant vector, or `n^2 + k` for coframe element `k`.
    pub index: usize,
    /// Range of values observed on the first system.
    pub a: (f64, f64),
    /// Range observed on the second system.
    pub b: (f64, f64),
    /// Sample point on the first system, when the comparison was pointwise.
    pub point: Option<Vec<f64>>,
}

impl Witness {
    /// Distance between the two ranges (0 when they overlap).
    pub fn gap(&self) -> f64 {
        (self.b.0 - self.a.1).max(self.a.0 - self.b.1).max(0.0)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: [{:.6e}, {:.6e}] vs [{:.6e}, {:.6e}]",
            self.invariant, self.a.0, self.a.1, self.b.0, self.b.1
        )
    }
}

/// Summary of a signature comparison that found no disagreement.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchStats {
    pub invariants: usize,
    pub samples: (usize, usize),
    /// Both invariant vectors were constant over their samples.
    pub constant: bool,
    /// Smallest overlap ratio `|A cap B| / |A cup B|` over all invariants.
    pub min_overlap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EquivVerdict {
    RefutedByInvariant(Witness),
    /// Invariant signatures are compatible; this is not a proof of equivalence.
    NotRefuted(MatchStats),
    /// A candidate map carries one coframe onto the other at every sample.
    VerifiedByMap {
        max_residual: f64,
        /// Largest mismatch of the transported invariant vectors.
        max_invariant_error: f64,
        samples: usize,
    },
}

impl EquivVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            EquivVerdict::RefutedByInvariant(_) => "RefutedByInvariant",
            EquivVerdict::NotRefuted(_) => "NotRefuted",
            EquivVerdict::VerifiedByMap { .. } => "VerifiedByMap",
        }
    }
}

impl fmt::Display for EquivVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivVerdict::RefutedByInvariant(w) => write!(f, "refuted by invariant {w}"),
            EquivVerdict::NotRefuted(s) => write!(
                f,
                "not refuted ({} invariants, {}+{} samples, constant: {}, min overlap {:.3})",
                s.invariants, s.samples.0, s.samples.1, s.constant, s.min_overlap
            ),
            EquivVerdict::VerifiedByMap {
                max_residual,
                samples,
                ..
            } => write!(
                f,
                "verified by map (max residual {max_residual:.3e} over {samples} samples)"
            ),
        }
    }
}

/// Checks that `m` maps the invariants of `src` onto those of `dst`.
///
/// At each random point `p` of the source box the transported invariant
/// vector is compared first, then the coframe pullback
/// `S_k(m(p)) phi_k'(p) = s_k(p)`.
pub fn verify_pullback(
    src: &OdeSystem,
    dst: &OdeSystem,
    m: &WebMap,
    samples: usize,
) -> Result<EquivVerdict> {
    if src.n() != dst.n() || m.n() != src.n() {
        return Err(Error::Dimension(format!(
            "source n = {}, target n = {}, map n = {}",
            src.n(),
            dst.n(),
            m.n()
        )));
    }
    let a = Invariants::compute(src)?;
    let b = Invariants::compute(dst)?;
    if a.normalizer().pair != b.normalizer().pair {
        return Err(Error::PolicyMismatch {
            a: a.normalizer().pair,
            b: b.normalizer().pair,
        });
    }
    let n = src.n();
    let slots = Slot::invariant_slots(n);
    let derivs = m.derivatives();
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let mut max_residual: f64 = 0.0;
    let mut max_invariant_error: f64 = 0.0;
    for _ in 0..samples {
        let p = src.random_point(&mut rng, 0.0);
        let q = m.apply(&p)?;
        let va = a.structure.invariant_vector(&p)?;
        let vb = b.structure.invariant_vector(&q)?;
        for (idx, (x, y)) in va.iter().zip(&vb).enumerate() {
            let err = mixed_error(*x, *y);
            if err > PULLBACK_TOL {
                return Ok(EquivVerdict::RefutedByInvariant(Witness {
                    invariant: slots[idx].label(),
                    index: idx,
                    a: (*x, *x),
                    b: (*y, *y),
                    point: Some(p.x().to_vec()),
                }));
            }
            max_invariant_error = max_invariant_error.max(err);
        }
        let s = a.coframe.eval(&p)?;
        let big_s = b.coframe.eval(&q)?;
        for k in 0..=n {
            let pulled = big_s[k] * derivs[k].eval(&p)?;
            let err = mixed_error(pulled, s[k]);
            if err > PULLBACK_TOL {
                return Ok(EquivVerdict::RefutedByInvariant(Witness {
                    invariant: format!("theta^{k}"),
                    index: slots.len() + k,
                    a: (s[k], s[k]),
                    b: (pulled, pulled),
                    point: Some(p.x().to_vec()),
                }));
            }
            max_residual = max_residual.max(err);
        }
    }
    Ok(EquivVerdict::VerifiedByMap {
        max_residual,
        max_invariant_error,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::pushforward;
    use crate::expr::{parse, Symbol};

    fn sys(rhs: &[&str]) -> OdeSystem {
        OdeSystem::parse_uniform(&["x1", "x2"], rhs, 1.0, 2.0).unwrap()
    }

    fn map(time: &str, space: &[&str]) -> WebMap {
        let all = ["t", "x1", "x2"];
        let vars: Vec<Symbol> = ["x1", "x2"].iter().map(|s| Symbol::from(*s)).collect();
        WebMap::new(
            parse(time, &all).unwrap(),
            space.iter().map(|s| parse(s, &all).unwrap()).collect(),
            &vars,
        )
        .unwrap()
    }

    #[test]
    fn pushforward_is_verified() {
        let a = sys(&["x2^2", "1"]);
        let m = map("2*t + 1", &["3*x1 - 1", "exp(x2)"]);
        let b = pushforward(&a, &m).unwrap();
        match verify_pullback(&a, &b, &m, 50).unwrap() {
            EquivVerdict::VerifiedByMap {
                max_residual,
                max_invariant_error,
                samples,
            } => {
                assert!(max_residual < 1e-10, "{max_residual}");
                assert!(max_invariant_error < 1e-10, "{max_invariant_error}");
                assert_eq!(samples, 50);
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn identity_between_inequivalent_systems_is_refuted_on_a_structure_slot() {
        let a = sys(&["x1*x2", "x2"]);
        let b = sys(&["x2^2", "1"]);
        let m = WebMap::identity(a.vars());
        match verify_pullback(&a, &b, &m, 10).unwrap() {
            EquivVerdict::RefutedByInvariant(w) => {
                assert_eq!(w.invariant, "c^0_{02}");
                assert_eq!(w.index, 1);
                assert!(w.gap() > 0.49);
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn wrong_scaling_is_refuted_on_the_coframe() {
        // Same invariant vector (both constant) but the map does not carry
        // one coframe to the other.
        let a = sys(&["exp(x2)", "1"]);
        let m = map("t", &["x1", "x2"]);
        let b = sys(&["2*exp(x2)", "1"]);
        match verify_pullback(&a, &b, &m, 10).unwrap() {
            EquivVerdict::RefutedByInvariant(w) => assert!(w.invariant.starts_with("theta^")),
            v => panic!("{v}"),
        }
    }

    #[test]
    fn normalizer_policy_mismatch() {
        let a = sys(&["x1*x2", "x2"]);
        let b = sys(&["x1", "x1*x2"]);
        let m = WebMap::identity(a.vars());
        assert_eq!(
            verify_pullback(&a, &b, &m, 5),
            Err(Error::PolicyMismatch {
                a: (0, 1),
                b: (1, 0)
            })
        );
    }
}
