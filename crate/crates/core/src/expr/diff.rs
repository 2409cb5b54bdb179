use std::collections::BTreeMap;

use super::{Expr, Func, Node, Symbol};

impl Expr {
    /// Canonical partial derivative with respect to `var`.
    ///
    /// `ln|u|` differentiates to `u'/u`: the absolute value never appears in
    /// a derivative of a logarithm. Elsewhere `|u|' = u'·|u|/u`, valid where
    /// `u != 0`.
    pub fn differentiate(&self, var: &str) -> Expr {
        if !self.depends_on(var) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(v) => {
                if &**v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.differentiate(var))),
            Node::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.differentiate(var);
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = fs.clone();
                    factors[i] = df;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Node::Pow(b, e) => {
                let db = b.differentiate(var);
                if !e.depends_on(var) {
                    let lowered = Expr::pow(b.clone(), e.clone() - Expr::one());
                    return Expr::product([e.clone(), lowered, db]);
                }
                let de = e.differentiate(var);
                let logb = b.clone().ln();
                if db.is_zero() {
                    return Expr::product([self.clone(), logb, de]);
                }
                let inner = Expr::sum([
                    Expr::product([de, logb]),
                    Expr::product([e.clone(), db, b.clone().recip()]),
                ]);
                Expr::product([self.clone(), inner])
            }
            Node::Func(f, u) => {
                let du = u.differentiate(var);
                let outer = match f {
                    Func::Ln => match u.node() {
                        // d ln|w| = dw / w
                        Node::Func(Func::Abs, w) => {
                            return Expr::product([w.differentiate(var), w.clone().recip()]);
                        }
                        _ => u.clone().recip(),
                    },
                    Func::Exp => self.clone(),
                    Func::Sin => u.clone().cos(),
                    Func::Cos => -u.clone().sin(),
                    Func::Sqrt => Expr::product([Expr::ratio(1, 2), self.clone().recip()]),
                    Func::Abs => Expr::product([self.clone(), u.clone().recip()]),
                };
                Expr::product([outer, du])
            }
            Node::Inverse(inv, a) => {
                // (g^{-1})'(a) = a' / g'(g^{-1}(a))
                let da = a.differentiate(var);
                let dg = inv.body().differentiate(inv.var());
                let bindings: BTreeMap<Symbol, Expr> =
                    [(inv.var().clone(), self.clone())].into_iter().collect();
                let dg_at = dg.substitute(&bindings);
                Expr::product([da, dg_at.recip()])
            }
        }
    }

    /// Derivative of `ln|self|`, i.e. `self' / self`.
    pub fn log_derivative(&self, var: &str) -> Expr {
        self.clone().abs().ln().differentiate(var)
    }
}
