//! One- and two-forms on `(t, x_1, ..., x_n)` with symbolic coefficients.

use std::collections::BTreeMap;

use crate::expr::{Expr, Symbol};

/// `sum_m a_m dq_m` over the coordinate differentials `dq_0 = dt, dq_i = dx_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub coeffs: Vec<Expr>,
}

/// `sum_{m<l} w_ml dq_m ^ dq_l`, storing only nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoForm {
    pub coeffs: BTreeMap<(usize, usize), Expr>,
}

impl OneForm {
    /// `coefficient * dq_slot` in a space of `dim` coordinates.
    pub fn monomial(dim: usize, slot: usize, coefficient: Expr) -> OneForm {
        let mut coeffs = vec![Expr::zero(); dim];
        coeffs[slot] = coefficient;
        OneForm { coeffs }
    }

    /// `d(sum_l a_l dq_l) = sum_{m<l} (d_m a_l - d_l a_m) dq_m ^ dq_l`.
    pub fn exterior_derivative(&self, coords: &[Symbol]) -> TwoForm {
        assert_eq!(coords.len(), self.coeffs.len());
        let dim = coords.len();
        let mut out = TwoForm::default();
        for m in 0..dim {
            for l in m + 1..dim {
                let w = self.coeffs[l].differentiate(&coords[m])
                    - self.coeffs[m].differentiate(&coords[l]);
                if !w.is_zero() {
                    out.coeffs.insert((m, l), w);
                }
            }
        }
        out
    }
}

impl TwoForm {
    /// Rewrites in the basis `theta^m = s_m dq_m` of a diagonal coframe:
    /// `dq_m ^ dq_l = theta^m ^ theta^l / (s_m s_l)`.
    pub fn in_diagonal_coframe(&self, scales: &[Expr]) -> TwoForm {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&(m, l), w)| {
                let c = Expr::product([
                    w.clone(),
                    scales[m].clone().recip(),
                    scales[l].clone().recip(),
                ]);
                ((m, l), c)
            })
            .filter(|(_, c)| !c.is_zero())
            .collect();
        TwoForm { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn coords() -> Vec<Symbol> {
        ["t", "x1", "x2"].iter().map(|s| Symbol::from(*s)).collect()
    }

    fn p(s: &str) -> Expr {
        parse(s, &["t", "x1", "x2"]).unwrap()
    }

    #[test]
    fn d_of_exact_form_vanishes() {
        // d(x1^2 x2) = 2 x1 x2 dx1 + x1^2 dx2
        let form = OneForm {
            coeffs: vec![Expr::zero(), p("2*x1*x2"), p("x1^2")],
        };
        assert!(form.exterior_derivative(&coords()).coeffs.is_empty());
    }

    #[test]
    fn d_of_monomial() {
        let form = OneForm::monomial(3, 1, p("exp(-x2)"));
        let d = form.exterior_derivative(&coords());
        assert_eq!(d.coeffs.len(), 1);
        // d(e^{-x2} dx1) = -e^{-x2} dx2 ^ dx1 = e^{-x2} dx1 ^ dx2
        assert_eq!(d.coeffs[&(1, 2)], p("exp(-x2)"));
    }

    #[test]
    fn diagonal_rebasing() {
        let two = TwoForm {
            coeffs: [((1, 2), p("exp(-x2)"))].into_iter().collect(),
        };
        let scales = vec![Expr::one(), p("exp(-x2)"), Expr::one()];
        let c = two.in_diagonal_coframe(&scales);
        assert_eq!(c.coeffs[&(1, 2)], Expr::one());
    }
}
