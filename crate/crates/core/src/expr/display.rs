//! Infix rendering. Output of canonical expressions re-parses to the same
//! canonical tree (numerical inverse nodes excepted).

use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Node, Rational};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Product,
    Unary,
    Pow,
    Atom,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

fn render(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn prec(e: &Expr) -> Prec {
    match e.node() {
        Node::Const(c) => {
            if c.is_negative() {
                Prec::Unary
            } else if c.is_integer() {
                Prec::Atom
            } else {
                Prec::Product
            }
        }
        Node::Var(_) | Node::Func(..) | Node::Inverse(..) => Prec::Atom,
        Node::Pow(_, ex) => {
            if is_negative_const(ex) {
                Prec::Product
            } else {
                Prec::Pow
            }
        }
        Node::Product(fs) => match fs[0].as_const() {
            Some(c) if c.is_negative() => Prec::Unary,
            _ => Prec::Product,
        },
        Node::Sum(_) => Prec::Sum,
    }
}

fn is_negative_const(e: &Expr) -> bool {
    e.as_const().is_some_and(Rational::is_negative)
}

fn write_at(e: &Expr, min: Prec, out: &mut String) {
    if prec(e) < min {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_rational(r: &BigRational, out: &mut String) {
    if r.is_integer() {
        let _ = write!(out, "{}", r.numer());
    } else {
        let _ = write!(out, "{}/{}", r.numer(), r.denom());
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Const(c) => write_rational(c.exact(), out),
        Node::Var(v) => out.push_str(v),
        Node::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, out);
            out.push(')');
        }
        Node::Inverse(inv, a) => {
            let (lo, hi) = inv.bracket();
            let _ = write!(
                out,
                "inverse[{} -> {} on {}..{}](",
                inv.var(),
                inv.body(),
                lo,
                hi
            );
            write_expr(a, out);
            out.push(')');
        }
        Node::Pow(b, ex) => {
            // A constant base only survives with a negative exponent when it
            // is zero; keep that as an explicit power.
            if let Some(c) = ex
                .as_const()
                .filter(|c| c.is_negative() && b.as_const().is_none())
            {
                let flipped = Expr::pow(b.clone(), Expr::big_rational(-c.exact().clone()));
                write_fraction(&BigRational::one(), &[], &[flipped], out);
            } else {
                write_power(b, ex, out);
            }
        }
        Node::Product(fs) => {
            let (coeff, rest) = match fs[0].as_const() {
                Some(c) => (c.exact().clone(), &fs[1..]),
                None => (BigRational::one(), &fs[..]),
            };
            write_scaled(&coeff, rest, out);
        }
        Node::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                let (coeff, rest): (BigRational, Vec<Expr>) = match t.node() {
                    Node::Const(c) => (c.exact().clone(), vec![]),
                    Node::Product(fs) => match fs[0].as_const() {
                        Some(c) => (c.exact().clone(), fs[1..].to_vec()),
                        None => (BigRational::one(), fs.clone()),
                    },
                    _ => (BigRational::one(), vec![t.clone()]),
                };
                if coeff.is_negative() {
                    out.push_str(if i == 0 { "-" } else { " - " });
                } else if i > 0 {
                    out.push_str(" + ");
                }
                write_scaled(&coeff.abs(), &rest, out);
            }
        }
    }
}

fn write_power(b: &Expr, ex: &Expr, out: &mut String) {
    write_at(b, Prec::Atom, out);
    out.push('^');
    let simple = match ex.node() {
        Node::Const(c) => c.is_integer() && !c.is_negative(),
        Node::Var(_) | Node::Func(..) => true,
        _ => false,
    };
    if simple {
        write_expr(ex, out);
    } else {
        out.push('(');
        write_expr(ex, out);
        out.push(')');
    }
}

/// Writes `coeff * factors` as `[-]num/den`.
fn write_scaled(coeff: &BigRational, factors: &[Expr], out: &mut String) {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f.node() {
            Node::Pow(b, ex) if is_negative_const(ex) && b.as_const().is_none() => {
                let c = ex.as_const().unwrap();
                den.push(Expr::pow(b.clone(), Expr::big_rational(-c.exact().clone())));
            }
            _ => num.push(f.clone()),
        }
    }
    if coeff.is_negative() {
        out.push('-');
    }
    write_fraction(&coeff.abs(), &num, &den, out);
}

fn write_fraction(coeff: &BigRational, num: &[Expr], den: &[Expr], out: &mut String) {
    let numer = coeff.numer();
    let mut denom = coeff.denom();
    let mut first = true;
    // `2*(a + b)` would re-parse as `2*a + 2*b`, so next to a sum in the
    // denominator the coefficient is written as a leading fraction.
    let one = num_bigint::BigInt::one();
    if !denom.is_one() && den.iter().any(|f| matches!(f.node(), Node::Sum(_))) {
        let _ = write!(out, "{numer}/{denom}");
        denom = &one;
        first = false;
    } else if !numer.is_one() || num.is_empty() {
        let _ = write!(out, "{numer}");
        first = false;
    }
    for f in num {
        if !first {
            out.push('*');
        }
        write_at(f, Prec::Pow, out);
        first = false;
    }
    let den_items = usize::from(!denom.is_one()) + den.len();
    if den_items == 0 {
        return;
    }
    out.push('/');
    if den_items > 1 {
        out.push('(');
    }
    let mut first = true;
    if !denom.is_one() {
        let _ = write!(out, "{denom}");
        first = false;
    }
    for f in den {
        if !first {
            out.push('*');
        }
        write_at(f, Prec::Pow, out);
        first = false;
    }
    if den_items > 1 {
        out.push(')');
    }
}
