use std::collections::BTreeMap;
use std::fmt;

use super::forms::OneForm;
use super::system::OdeSystem;
use super::torsion::NormalizerChoice;
use crate::expr::{Env, Expr};
use crate::{Error, Result};

/// Diagonal invariant coframe `theta^0 = s_0 dt`, `theta^i = s_i dx_i` with
/// `s_0 = l` and `s_i = l / f_i`, where `l` is the chosen normalizer.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCoframe {
    coefficients: Vec<Expr>,
    normalizer: NormalizerChoice,
}

impl InvariantCoframe {
    /// `s_0, ..., s_n`.
    pub fn coefficients(&self) -> &[Expr] {
        &self.coefficients
    }

    pub fn normalizer(&self) -> &NormalizerChoice {
        &self.normalizer
    }

    /// Values of `s_0..s_n` at a point.
    pub fn eval(&self, env: &impl Env) -> Result<Vec<f64>> {
        self.coefficients
            .iter()
            .map(|s| s.eval(env).map_err(Error::from))
            .collect()
    }
}

pub fn invariant_coframe(sys: &OdeSystem, choice: &NormalizerChoice) -> InvariantCoframe {
    let l = &choice.value;
    let mut coefficients = Vec::with_capacity(sys.n() + 1);
    coefficients.push(l.clone());
    coefficients.extend(sys.rhs().iter().map(|f| l / f));
    InvariantCoframe {
        coefficients,
        normalizer: choice.clone(),
    }
}

/// Index of a structure function `c^k_{ij}`, `i < j`, indices in `0..=n`
/// with 0 standing for `theta^0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub k: usize,
    pub i: usize,
    pub j: usize,
}

impl Slot {
    pub fn label(&self) -> String {
        if self.i < 10 && self.j < 10 {
            format!("c^{}_{{{}{}}}", self.k, self.i, self.j)
        } else {
            format!("c^{}_{{{},{}}}", self.k, self.i, self.j)
        }
    }

    /// Slots allowed by the diagonal coframe, in a fixed order: first
    /// `c^0_{0j}` for `j = 1..n`, then for each `k >= 1` the `n - 1` slots
    /// pairing `k` with every other spatial index.
    pub fn invariant_slots(n: usize) -> Vec<Slot> {
        let mut out: Vec<Slot> = (1..=n).map(|j| Slot { k: 0, i: 0, j }).collect();
        for k in 1..=n {
            for other in (1..=n).filter(|&o| o != k) {
                out.push(Slot {
                    k,
                    i: k.min(other),
                    j: k.max(other),
                });
            }
        }
        out
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Coefficients of `d theta^k = sum_{i<j} c^k_{ij} theta^i ^ theta^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureFunctions {
    n: usize,
    normalizer: (usize, usize),
    components: Vec<BTreeMap<(usize, usize), Expr>>,
}

impl StructureFunctions {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn normalizer_pair(&self) -> (usize, usize) {
        self.normalizer
    }

    /// `c^k_{ij}` for any `i != j` (antisymmetric); zero when absent.
    pub fn get(&self, k: usize, i: usize, j: usize) -> Expr {
        if i == j {
            return Expr::zero();
        }
        let (a, b) = (i.min(j), i.max(j));
        let c = self.components[k]
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(Expr::zero);
        if i < j {
            c
        } else {
            -c
        }
    }

    pub fn slot(&self, s: Slot) -> Expr {
        self.get(s.k, s.i, s.j)
    }

    /// Nonzero entries as `(k, i, j, c)` with `i < j`.
    pub fn nonzero(&self) -> impl Iterator<Item = (Slot, &Expr)> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(k, m)| m.iter().map(move |(&(i, j), c)| (Slot { k, i, j }, c)))
    }

    /// `c^0_{ij} = 0` unless `0 in {i, j}`; `c^k_{ij} = 0` unless `k in {i, j}`.
    pub fn check_sparsity(&self) -> Result<()> {
        for (slot, c) in self.nonzero() {
            if slot.i != slot.k && slot.j != slot.k {
                return Err(Error::Sparsity(format!("{slot} = {c} should vanish")));
            }
        }
        Ok(())
    }

    /// Symbolic invariant vector in [`Slot::invariant_slots`] order.
    pub fn invariants(&self) -> Vec<(Slot, Expr)> {
        Slot::invariant_slots(self.n)
            .into_iter()
            .map(|s| (s, self.slot(s)))
            .collect()
    }

    /// Invariant vector evaluated at a point.
    pub fn invariant_vector(&self, env: &impl Env) -> Result<Vec<f64>> {
        Slot::invariant_slots(self.n)
            .into_iter()
            .map(|s| self.slot(s).eval(env).map_err(Error::from))
            .collect()
    }
}

/// Exterior derivative of each coframe element, re-expressed in the coframe.
pub fn structure_functions(sys: &OdeSystem, cf: &InvariantCoframe) -> Result<StructureFunctions> {
    let n = sys.n();
    let coords = sys.names();
    let scales = cf.coefficients();
    let components = (0..=n)
        .map(|k| {
            OneForm::monomial(n + 1, k, scales[k].clone())
                .exterior_derivative(coords)
                .in_diagonal_coframe(scales)
                .coeffs
        })
        .collect();
    let sf = StructureFunctions {
        n,
        normalizer: cf.normalizer().pair,
        components,
    };
    sf.check_sparsity()?;
    Ok(sf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coframe::{choose_normalizer, torsion_matrix};
    use crate::expr::parse;

    fn pipeline(rhs: &[&str]) -> (OdeSystem, InvariantCoframe, StructureFunctions) {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], rhs, 1.0, 2.0).unwrap();
        let t = torsion_matrix(&sys).unwrap();
        let choice = choose_normalizer(&t, &sys).unwrap();
        let cf = invariant_coframe(&sys, &choice);
        let sf = structure_functions(&sys, &cf).unwrap();
        (sys, cf, sf)
    }

    fn p(s: &str) -> Expr {
        parse(s, &["x1", "x2"]).unwrap()
    }

    #[test]
    fn product_system_coframe_and_structure() {
        let (_, cf, sf) = pipeline(&["x1*x2", "x2"]);
        assert_eq!(cf.coefficients(), &[Expr::one(), p("1/(x1*x2)"), p("1/x2")]);
        let nz: Vec<_> = sf.nonzero().collect();
        assert_eq!(nz.len(), 1);
        assert_eq!(nz[0].0, Slot { k: 1, i: 1, j: 2 });
        assert!(nz[0].1.is_one());
    }

    #[test]
    fn square_system_structure() {
        let (_, cf, sf) = pipeline(&["x2^2", "1"]);
        assert_eq!(cf.coefficients(), &[p("2/x2"), p("2/x2^3"), p("2/x2")]);
        assert_eq!(sf.get(0, 0, 2), Expr::ratio(1, 2));
        assert_eq!(sf.get(1, 1, 2), Expr::ratio(3, 2));
        assert_eq!(sf.get(1, 2, 1), Expr::ratio(-3, 2));
        assert_eq!(sf.nonzero().count(), 2);
    }

    #[test]
    fn exponential_system_structure() {
        let (_, _, sf) = pipeline(&["exp(x2)", "1"]);
        assert!(sf.get(1, 1, 2).is_one());
        assert_eq!(sf.nonzero().count(), 1);
    }

    #[test]
    fn invariant_vector_order() {
        let (sys, _, sf) = pipeline(&["x2^2", "1"]);
        let v = sf.invariant_vector(&sys.center()).unwrap();
        assert_eq!(v, vec![0.0, 0.5, 1.5, 0.0]);
        let labels: Vec<String> = Slot::invariant_slots(2).iter().map(Slot::label).collect();
        assert_eq!(labels, ["c^0_{01}", "c^0_{02}", "c^1_{12}", "c^2_{12}"]);
    }

    #[test]
    fn reduced_coframe_when_normalizer_is_one() {
        let (sys, cf, _) = pipeline(&["x1*x2", "x2"]);
        let reduced: Vec<Expr> = std::iter::once(Expr::one())
            .chain(sys.rhs().iter().map(|f| f.clone().recip()))
            .collect();
        assert_eq!(cf.coefficients(), reduced.as_slice());
    }

    #[test]
    fn sparsity_violation_is_detected() {
        let mut components = vec![BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
        components[0].insert((1, 2), Expr::one());
        let sf = StructureFunctions {
            n: 2,
            normalizer: (0, 1),
            components,
        };
        assert!(matches!(sf.check_sparsity(), Err(Error::Sparsity(_))));
    }
}
