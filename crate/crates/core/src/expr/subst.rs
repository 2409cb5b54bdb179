use std::collections::BTreeMap;

use super::{Expr, Node, Symbol};

impl Expr {
    /// Simultaneous substitution of variables, canonicalized.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            Node::Func(f, a) => Expr::func(*f, a.substitute(bindings)),
            Node::Pow(b, e) => Expr::pow(b.substitute(bindings), e.substitute(bindings)),
            Node::Product(fs) => Expr::product(fs.iter().map(|f| f.substitute(bindings))),
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.substitute(bindings))),
            Node::Inverse(inv, a) => Expr::inverse(inv.clone(), a.substitute(bindings)),
        }
    }

    /// Convenience wrapper for a single binding.
    pub fn substitute_one(&self, var: &str, value: Expr) -> Expr {
        let bindings: BTreeMap<Symbol, Expr> = [(Symbol::from(var), value)].into_iter().collect();
        self.substitute(&bindings)
    }
}
