use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coframe::{Interval, OdeSystem, TIME_INTERVAL};
use crate::expr::{Expr, Func, InverseFn, Node, Point, Symbol, TIME_VAR};
use crate::{Error, Result};

/// Samples per component for the monotonicity check.
const MONOTONE_SAMPLES: usize = 64;

/// Fraction of the box width added on each side of a numerical-inverse bracket.
const BRACKET_SLACK: f64 = 0.05;

/// Web transformation `(t, x_1..x_n) -> (phi_0(t), phi_1(x_1), ..., phi_n(x_n))`.
#[derive(Clone, Debug, PartialEq)]
pub struct WebMap {
    time: Expr,
    space: Vec<Expr>,
    vars: Vec<Symbol>,
}

impl WebMap {
    /// `space[i]` may only mention `vars[i]`; `time` may only mention `t`.
    pub fn new(time: Expr, space: Vec<Expr>, vars: &[Symbol]) -> Result<WebMap> {
        if space.len() != vars.len() {
            return Err(Error::Dimension(format!(
                "{} spatial components for {} variables",
                space.len(),
                vars.len()
            )));
        }
        if let Some(v) = time.variables().into_iter().find(|v| &**v != TIME_VAR) {
            return Err(Error::NotBlockDiagonal(format!("phi0 depends on {v}")));
        }
        for (i, (phi, var)) in space.iter().zip(vars).enumerate() {
            if let Some(v) = phi.variables().into_iter().find(|v| v != var) {
                return Err(Error::NotBlockDiagonal(format!(
                    "phi{} depends on {v}",
                    i + 1
                )));
            }
        }
        Ok(WebMap {
            time,
            space,
            vars: vars.to_vec(),
        })
    }

    pub fn identity(vars: &[Symbol]) -> WebMap {
        WebMap {
            time: Expr::var(TIME_VAR),
            space: vars.iter().map(|v| Expr::symbol(v.clone())).collect(),
            vars: vars.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn time(&self) -> &Expr {
        &self.time
    }

    pub fn space(&self) -> &[Expr] {
        &self.space
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    /// `phi_0'(t), phi_1'(x_1), ..., phi_n'(x_n)`.
    pub fn derivatives(&self) -> Vec<Expr> {
        std::iter::once(self.time.differentiate(TIME_VAR))
            .chain(
                self.space
                    .iter()
                    .zip(&self.vars)
                    .map(|(phi, v)| phi.differentiate(v)),
            )
            .collect()
    }

    /// Image of a point (same coordinate names).
    pub fn apply(&self, p: &Point) -> Result<Point> {
        let mut values = Vec::with_capacity(self.n() + 1);
        values.push(self.time.eval(p)?);
        for phi in &self.space {
            values.push(phi.eval(p)?);
        }
        Ok(p.with_values(values))
    }

    /// Sign of each component's derivative at the center of its interval
    /// (`t` uses [`TIME_INTERVAL`]).
    pub fn orientation(&self, sys: &OdeSystem) -> Result<Vec<f64>> {
        let center = sys.center();
        self.derivatives()
            .iter()
            .map(|d| Ok(d.eval(&center)?.signum()))
            .collect()
    }

    /// Strict monotonicity of every component, sampled on the box.
    pub fn check_monotone(&self, sys: &OdeSystem) -> Result<()> {
        let derivs = self.derivatives();
        let mut intervals = vec![TIME_INTERVAL];
        intervals.extend_from_slice(sys.bbox());
        let names: Vec<&str> = sys.names().iter().map(|s| &**s).collect();
        for (k, (d, iv)) in derivs.iter().zip(&intervals).enumerate() {
            monotone_on(d, names[k], *iv).map_err(|reason| Error::InversionFailure {
                component: k,
                reason,
            })?;
        }
        Ok(())
    }
}

/// Checks that `d` (a derivative in `var`) keeps one strict sign on `iv`.
fn monotone_on(d: &Expr, var: &str, iv: Interval) -> std::result::Result<f64, String> {
    let mut sign = 0.0;
    for s in 0..=MONOTONE_SAMPLES {
        let x = iv.lerp(s as f64 / MONOTONE_SAMPLES as f64);
        let v = d.eval(&[(var, x)]).map_err(|e| e.to_string())?;
        if v == 0.0 || (sign != 0.0 && v.signum() != sign) {
            return Err(format!(
                "derivative {d} vanishes or changes sign near {var} = {x}"
            ));
        }
        sign = v.signum();
    }
    Ok(sign)
}

/// Closed-form inverse of `e` as a function of `var`, evaluated at `target`.
fn symbolic_inverse(e: &Expr, var: &str, target: Expr) -> Option<Expr> {
    match e.node() {
        Node::Var(v) if &**v == var => Some(target),
        Node::Sum(ts) => {
            let (dep, indep): (Vec<&Expr>, Vec<&Expr>) = ts.iter().partition(|t| t.depends_on(var));
            if dep.len() != 1 {
                return None;
            }
            let rest = Expr::sum(indep.into_iter().cloned());
            symbolic_inverse(dep[0], var, target - rest)
        }
        Node::Product(fs) => {
            let (dep, indep): (Vec<&Expr>, Vec<&Expr>) = fs.iter().partition(|f| f.depends_on(var));
            if dep.len() != 1 {
                return None;
            }
            let rest = Expr::product(indep.into_iter().cloned());
            symbolic_inverse(dep[0], var, target / rest)
        }
        Node::Func(Func::Exp, u) => symbolic_inverse(u, var, target.ln()),
        Node::Func(Func::Ln, u) => symbolic_inverse(u, var, target.exp()),
        Node::Pow(b, ex) if !ex.depends_on(var) => {
            symbolic_inverse(b, var, Expr::pow(target, ex.clone().recip()))
        }
        Node::Pow(b, ex) if !b.depends_on(var) => {
            symbolic_inverse(ex, var, target.ln() / b.clone().ln())
        }
        _ => None,
    }
}

/// Inverse of `phi` (a function of `var` only) as an expression in `var`,
/// closed-form when possible, otherwise a numerical inverse node.
fn inverse_expr(phi: &Expr, var: &Symbol, iv: Interval, component: usize) -> Result<Expr> {
    let fail = |reason: String| Error::InversionFailure { component, reason };
    let dphi = phi.differentiate(var);
    monotone_on(&dphi, var, iv).map_err(fail)?;
    let x = Expr::symbol(var.clone());
    if let Some(candidate) = symbolic_inverse(phi, var, x.clone()) {
        let round_trips = (0..=8).all(|s| {
            let xv = iv.lerp(s as f64 / 8.0);
            let y = phi.eval(&[(&**var, xv)]);
            let back = y.and_then(|y| candidate.eval(&[(&**var, y)]));
            matches!(back, Ok(b) if (b - xv).abs() <= 1e-12 * (1.0 + xv.abs()))
        });
        if round_trips {
            return Ok(candidate);
        }
    }
    let slack = BRACKET_SLACK * iv.width();
    let wide = Interval {
        lo: iv.lo - slack,
        hi: iv.hi + slack,
    };
    let bracket = if monotone_on(&dphi, var, wide).is_ok() {
        wide
    } else {
        iv
    };
    let inv = Arc::new(InverseFn::new(
        var.clone(),
        phi.clone(),
        bracket.lo,
        bracket.hi,
    ));
    Ok(Expr::inverse(inv, x))
}

/// Transports `sys` through `m`: `F_i(X) = phi_i'(x) f_i(x) / phi_0'` with
/// `x = phi^{-1}(X)`.
///
/// `phi_0'` must be constant, otherwise the result is not autonomous.
pub fn pushforward(sys: &OdeSystem, m: &WebMap) -> Result<OdeSystem> {
    if m.vars() != sys.vars() {
        return Err(Error::Dimension(format!(
            "map variables {:?} do not match system variables {:?}",
            m.vars(),
            sys.vars()
        )));
    }
    let derivs = m.derivatives();
    let dt = &derivs[0];
    if dt.depends_on(TIME_VAR) {
        return Err(Error::NonAutonomousResult(dt.to_string()));
    }
    let rate = dt.eval(&[(TIME_VAR, 0.0)])?;
    if rate == 0.0 {
        return Err(Error::InversionFailure {
            component: 0,
            reason: "phi0 is constant".into(),
        });
    }
    let mut bindings = BTreeMap::new();
    let mut image = Vec::with_capacity(sys.n());
    for (i, (phi, var)) in m.space().iter().zip(sys.vars()).enumerate() {
        let iv = sys.bbox()[i];
        bindings.insert(var.clone(), inverse_expr(phi, var, iv, i + 1)?);
        let a = phi.eval(&[(&**var, iv.lo)])?;
        let b = phi.eval(&[(&**var, iv.hi)])?;
        image.push(Interval::new(a.min(b), a.max(b))?);
    }
    let inv_rate = dt.clone().recip();
    let rhs = sys
        .rhs()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            Expr::product([derivs[i + 1].clone(), f.clone(), inv_rate.clone()])
                .substitute(&bindings)
        })
        .collect();
    OdeSystem::new(sys.vars(), rhs, image)
}
