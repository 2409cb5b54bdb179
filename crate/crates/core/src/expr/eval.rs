use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{Expr, Func, InverseFn, Node, Symbol, TIME_VAR};
use crate::numeric::roots;

/// Variable lookup used by [`Expr::eval`].
pub trait Env {
    fn lookup(&self, name: &str) -> Option<f64>;

    /// Human-readable rendering for error messages.
    fn describe(&self) -> String;
}

/// Coordinates `(t, x_1, ..., x_n)` of a point, with the names they bind.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    names: Arc<[Symbol]>,
    values: Vec<f64>,
}

impl Point {
    /// `names[0]` must be the time variable; `values` align with `names`.
    pub fn new(names: Arc<[Symbol]>, values: Vec<f64>) -> Point {
        assert_eq!(names.len(), values.len(), "point dimension mismatch");
        debug_assert_eq!(&*names[0], TIME_VAR);
        Point { names, values }
    }

    pub fn names(&self) -> &Arc<[Symbol]> {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.values[0]
    }

    /// Spatial coordinates `x_1..x_n`.
    pub fn x(&self) -> &[f64] {
        &self.values[1..]
    }

    /// Copy with coordinate `index` (0 = t) replaced.
    pub fn with(&self, index: usize, value: f64) -> Point {
        let mut values = self.values.clone();
        values[index] = value;
        Point {
            names: self.names.clone(),
            values,
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Point {
        Point::new(self.names.clone(), values)
    }
}

impl Env for Point {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| &**n == name)
            .map(|i| self.values[i])
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, v)) in self.names.iter().zip(&self.values).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}: {v}")?;
        }
        write!(f, "}}")
    }
}

impl Env for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.iter().map(|(n, v)| format!("{n}: {v}")).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl<const N: usize> Env for [(&str, f64); N] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }

    fn describe(&self) -> String {
        self.as_slice().describe()
    }
}

impl Env for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }

    fn describe(&self) -> String {
        let mut parts: Vec<String> = self.iter().map(|(n, v)| format!("{n}: {v}")).collect();
        parts.sort();
        format!("{{{}}}", parts.join(", "))
    }
}

struct Single<'a> {
    name: &'a str,
    value: f64,
}

impl Env for Single<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        (name == self.name).then_some(self.value)
    }

    fn describe(&self) -> String {
        format!("{{{}: {}}}", self.name, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain fault in `{subexpr}` at {point}: {reason}")]
    DomainFault {
        subexpr: String,
        point: String,
        reason: String,
    },
    #[error("variable `{0}` is not bound at the evaluation point")]
    Unbound(String),
}

impl Expr {
    /// IEEE-double value of the expression at `env`.
    pub fn eval(&self, env: &(impl Env + ?Sized)) -> Result<f64, EvalError> {
        let v = self.eval_inner(env)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.fault(env, "non-finite value"))
        }
    }

    fn fault(&self, env: &(impl Env + ?Sized), reason: &str) -> EvalError {
        EvalError::DomainFault {
            subexpr: self.to_string(),
            point: env.describe(),
            reason: reason.to_string(),
        }
    }

    fn eval_inner(&self, env: &(impl Env + ?Sized)) -> Result<f64, EvalError> {
        match self.node() {
            Node::Const(c) => Ok(c.to_f64()),
            Node::Var(v) => env
                .lookup(v)
                .ok_or_else(|| EvalError::Unbound(v.to_string())),
            Node::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_inner(env)?;
                }
                Ok(acc)
            }
            Node::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_inner(env)?;
                }
                Ok(acc)
            }
            Node::Pow(b, e) => {
                let base = b.eval_inner(env)?;
                let int_exp = e.as_const().and_then(|c| c.as_i64());
                let v = match int_exp {
                    Some(k) => {
                        if base == 0.0 && k < 0 {
                            return Err(self.fault(env, "division by zero"));
                        }
                        match i32::try_from(k) {
                            Ok(k) => base.powi(k),
                            Err(_) => base.powf(k as f64),
                        }
                    }
                    None => {
                        let ex = e.eval_inner(env)?;
                        if base == 0.0 && ex < 0.0 {
                            return Err(self.fault(env, "zero to a negative power"));
                        }
                        if base < 0.0 && ex.fract() != 0.0 {
                            return Err(self.fault(env, "negative base with non-integer exponent"));
                        }
                        base.powf(ex)
                    }
                };
                if !v.is_finite() {
                    return Err(self.fault(env, "overflow"));
                }
                Ok(v)
            }
            Node::Func(f, a) => {
                let x = a.eval_inner(env)?;
                let v = match f {
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(self.fault(env, "logarithm of a nonpositive value"));
                        }
                        x.ln()
                    }
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.fault(env, "square root of a negative value"));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                };
                if !v.is_finite() {
                    return Err(self.fault(env, "overflow"));
                }
                Ok(v)
            }
            Node::Inverse(inv, a) => {
                let y = a.eval_inner(env)?;
                eval_inverse(inv, y).map_err(|reason| self.fault(env, &reason))
            }
        }
    }
}

/// Solves `body(u) = y` for `u` inside the bracket of `inv`.
fn eval_inverse(inv: &InverseFn, y: f64) -> Result<f64, String> {
    let (lo, hi) = inv.bracket();
    let g = |u: f64| {
        inv.body()
            .eval(&Single {
                name: inv.var(),
                value: u,
            })
            .map(|v| v - y)
            .map_err(|e| e.to_string())
    };
    roots::solve_bracketed(g, lo, hi).map_err(|e| e.to_string())
}
