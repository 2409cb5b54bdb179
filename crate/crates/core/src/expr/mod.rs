//! Immutable symbolic expressions over the variables `t, x_1, ..., x_n`.
//!
//! Every [`Expr`] is kept in canonical form: the smart constructors
//! ([`Expr::sum`], [`Expr::product`], [`Expr::pow`], [`Expr::func`]) run a
//! fixed bottom-up rewrite (constant folding, flattening, like-term
//! collection, power merging), so two trees built from the same canonical
//! form compare equal structurally. There is no attempt at a complete
//! normal form; equality of invariants is ultimately tested numerically.

mod diff;
mod display;
mod eval;
mod parse;
mod subst;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use ordered_float::OrderedFloat;

pub use eval::{Env, EvalError, Point};
pub use parse::{parse, ParseError};

/// Interned variable name.
pub type Symbol = Arc<str>;

/// Name of the independent variable. Reserved in every system.
pub const TIME_VAR: &str = "t";

/// Exact rational constant with a cached `f64` approximation.
#[derive(Clone, Debug)]
pub struct Rational {
    exact: BigRational,
    approx: f64,
}

impl Rational {
    pub fn new(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Rational { exact, approx }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn is_integer(&self) -> bool {
        self.exact.is_integer()
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exact.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.exact.is_negative()
    }

    /// Small integer value, if this constant is one.
    pub fn as_i64(&self) -> Option<i64> {
        if self.exact.is_integer() {
            self.exact.to_integer().to_i64()
        } else {
            None
        }
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.exact.cmp(&other.exact)
    }
}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.exact.hash(state);
    }
}

/// Elementary unary functions understood by the parser and the evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Ln,
    Exp,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Ln,
        Func::Exp,
        Func::Sin,
        Func::Cos,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Numerical inverse of a strictly monotone function of one variable,
/// restricted to a bracketing interval.
///
/// Used when a web map has no closed-form inverse. `body` may only mention
/// `var`; that variable is bound, so substitution never enters the body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InverseFn {
    var: Symbol,
    body: Expr,
    lo: OrderedFloat<f64>,
    hi: OrderedFloat<f64>,
}

impl InverseFn {
    pub fn new(var: Symbol, body: Expr, lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        InverseFn {
            var,
            body,
            lo: OrderedFloat(lo),
            hi: OrderedFloat(hi),
        }
    }

    pub fn var(&self) -> &Symbol {
        &self.var
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.lo.0, self.hi.0)
    }
}

/// Expression node. Variant order fixes the canonical sort order of operands.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(Symbol),
    Func(Func, Expr),
    Pow(Expr, Expr),
    Product(Vec<Expr>),
    Sum(Vec<Expr>),
    Inverse(Arc<InverseFn>, Expr),
}

/// Shared, immutable expression tree in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::raw(Node::Const(r))
    }

    pub fn big_rational(r: BigRational) -> Expr {
        Expr::rational(Rational::new(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::rational(Rational::from_ratio(num, den))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: impl AsRef<str>) -> Expr {
        Expr::raw(Node::Var(Arc::from(name.as_ref())))
    }

    pub fn symbol(name: Symbol) -> Expr {
        Expr::raw(Node::Var(name))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Rational::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Rational::is_one)
    }

    /// Free variables (the body of a numerical inverse is closed).
    pub fn variables(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Func(_, a) | Node::Inverse(_, a) => a.collect_vars(out),
            Node::Pow(b, e) => {
                b.collect_vars(out);
                e.collect_vars(out);
            }
            Node::Product(xs) | Node::Sum(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(v) => &**v == var,
            Node::Func(_, a) | Node::Inverse(_, a) => a.depends_on(var),
            Node::Pow(b, e) => b.depends_on(var) || e.depends_on(var),
            Node::Product(xs) | Node::Sum(xs) => xs.iter().any(|x| x.depends_on(var)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Func(_, a) | Node::Inverse(_, a) => a.size(),
            Node::Pow(b, e) => b.size() + e.size(),
            Node::Product(xs) | Node::Sum(xs) => xs.iter().map(Expr::size).sum(),
        }
    }

    /// Canonical sum of `terms`.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = BigRational::zero();
        let mut collected: BTreeMap<Expr, BigRational> = BTreeMap::new();
        let mut push = |t: &Expr, constant: &mut BigRational| match t.node() {
            Node::Const(c) => *constant += c.exact(),
            _ => {
                let (coeff, rest) = t.split_coefficient();
                *collected.entry(rest).or_insert_with(BigRational::zero) += coeff;
            }
        };
        for t in terms {
            match t.node() {
                Node::Sum(inner) => inner.iter().for_each(|x| push(x, &mut constant)),
                _ => push(&t, &mut constant),
            }
        }
        let mut out = Vec::with_capacity(collected.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::big_rational(constant));
        }
        for (rest, coeff) in collected {
            if coeff.is_zero() {
                continue;
            }
            if coeff.is_one() {
                out.push(rest);
            } else {
                out.push(Expr::product([Expr::big_rational(coeff), rest]));
            }
        }
        // Scaling a term can in principle produce a sum again; flatten once more.
        if out.iter().any(|t| matches!(t.node(), Node::Sum(_))) {
            return Expr::sum(out);
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort();
                Expr::raw(Node::Sum(out))
            }
        }
    }

    /// Splits a non-constant term into its rational coefficient and the rest.
    fn split_coefficient(&self) -> (BigRational, Expr) {
        match self.node() {
            Node::Product(fs) => match fs[0].node() {
                Node::Const(c) => {
                    let rest = &fs[1..];
                    let rest = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::raw(Node::Product(rest.to_vec()))
                    };
                    (c.exact().clone(), rest)
                }
                _ => (BigRational::one(), self.clone()),
            },
            _ => (BigRational::one(), self.clone()),
        }
    }

    /// Canonical product of `factors`.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coeff = BigRational::one();
        let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        let mut pending: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = pending.pop() {
            match f.node() {
                Node::Const(c) => coeff *= c.exact(),
                Node::Product(inner) => pending.extend(inner.iter().cloned()),
                Node::Pow(b, e) => powers.entry(b.clone()).or_default().push(e.clone()),
                _ => powers.entry(f.clone()).or_default().push(Expr::one()),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = Vec::with_capacity(powers.len());
        let mut refold = false;
        for (base, exps) in powers {
            let exponent = if exps.len() == 1 {
                exps.into_iter().next().unwrap()
            } else {
                Expr::sum(exps)
            };
            let f = Expr::pow(base, exponent);
            match f.node() {
                Node::Const(c) => coeff *= c.exact(),
                Node::Product(_) => {
                    refold = true;
                    out.push(f);
                }
                _ => out.push(f),
            }
        }
        if refold {
            out.push(Expr::big_rational(coeff));
            return Expr::product(out);
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::big_rational(coeff);
        }
        if coeff.is_one() && out.len() == 1 {
            return out.pop().unwrap();
        }
        out.sort();
        if !coeff.is_one() {
            // c*(a + b)*g -> (c*a + c*b)*g: the coefficient always moves into
            // the first sum factor, so the result does not depend on the
            // order in which factors were combined.
            if let Some(k) = out.iter().position(|f| matches!(f.node(), Node::Sum(_))) {
                let Node::Sum(terms) = out[k].node() else {
                    unreachable!()
                };
                let c = Expr::big_rational(coeff);
                out[k] = Expr::sum(terms.iter().map(|t| Expr::product([c.clone(), t.clone()])));
                return Expr::product(out);
            }
        }
        if !coeff.is_one() {
            out.insert(0, Expr::big_rational(coeff));
        }
        Expr::raw(Node::Product(out))
    }

    /// Canonical power `base^exponent`.
    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        if exponent.is_zero() || base.is_one() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        let int_exp = exponent.as_const().and_then(Rational::as_i64);
        if let (Node::Const(b), Some(k)) = (base.node(), int_exp) {
            if let Some(v) = fold_integer_power(b.exact(), k) {
                return Expr::big_rational(v);
            }
        }
        if let Some(e) = exponent.as_const() {
            if base.is_zero() && !e.is_negative() {
                return Expr::zero();
            }
        }
        if int_exp.is_some() {
            match base.node() {
                Node::Pow(b, e) => {
                    return Expr::pow(b.clone(), Expr::product([e.clone(), exponent]));
                }
                Node::Product(fs) => {
                    return Expr::product(
                        fs.iter().map(|f| Expr::pow(f.clone(), exponent.clone())),
                    );
                }
                _ => {}
            }
        }
        Expr::raw(Node::Pow(base, exponent))
    }

    /// Canonical application of an elementary function.
    pub fn func(f: Func, arg: Expr) -> Expr {
        match (f, arg.node()) {
            (Func::Ln, _) if arg.is_one() => Expr::zero(),
            (Func::Ln, Node::Func(Func::Exp, u)) => u.clone(),
            (Func::Exp, _) if arg.is_zero() => Expr::one(),
            // exp(ln u) = u wherever ln u is defined.
            (Func::Exp, Node::Func(Func::Ln, u)) => u.clone(),
            (Func::Sin, _) if arg.is_zero() => Expr::zero(),
            (Func::Cos, _) if arg.is_zero() => Expr::one(),
            (Func::Sqrt, Node::Const(c)) => match exact_sqrt(c.exact()) {
                Some(r) => Expr::big_rational(r),
                None => Expr::raw(Node::Func(f, arg)),
            },
            (Func::Abs, Node::Const(c)) => Expr::big_rational(c.exact().abs()),
            (Func::Abs, Node::Func(Func::Abs | Func::Exp | Func::Sqrt, _)) => arg,
            _ => Expr::raw(Node::Func(f, arg)),
        }
    }

    /// Numerical inverse of `inv` applied to `arg`.
    pub fn inverse(inv: Arc<InverseFn>, arg: Expr) -> Expr {
        Expr::raw(Node::Inverse(inv, arg))
    }

    pub fn ln(self) -> Expr {
        Expr::func(Func::Ln, self)
    }

    pub fn exp(self) -> Expr {
        Expr::func(Func::Exp, self)
    }

    pub fn sin(self) -> Expr {
        Expr::func(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::func(Func::Cos, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }

    pub fn abs(self) -> Expr {
        Expr::func(Func::Abs, self)
    }

    pub fn powi(self, k: i64) -> Expr {
        Expr::pow(self, Expr::int(k))
    }

    pub fn recip(self) -> Expr {
        Expr::pow(self, Expr::int(-1))
    }

    /// Rebuilds the tree bottom-up through the smart constructors.
    pub fn canonicalize(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Func(f, a) => Expr::func(*f, a.canonicalize()),
            Node::Pow(b, e) => Expr::pow(b.canonicalize(), e.canonicalize()),
            Node::Product(fs) => Expr::product(fs.iter().map(Expr::canonicalize)),
            Node::Sum(ts) => Expr::sum(ts.iter().map(Expr::canonicalize)),
            Node::Inverse(inv, a) => Expr::inverse(inv.clone(), a.canonicalize()),
        }
    }
}

fn fold_integer_power(base: &BigRational, k: i64) -> Option<BigRational> {
    if base.is_zero() && k < 0 {
        return None;
    }
    // Keep folded constants to a sane size.
    if k.unsigned_abs() > 64 && !(base.is_one() || base.is_zero() || (-base).is_one()) {
        return None;
    }
    let k32 = i32::try_from(k).ok()?;
    Some(num_traits::pow::Pow::pow(base, k32))
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl<'a> std::ops::Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl<'a> std::ops::Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl<'a> std::ops::Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.clone() * rhs.clone()
    }
}

impl<'a> std::ops::Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.clone() / rhs.clone()
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
