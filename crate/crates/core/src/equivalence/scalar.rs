//! Scalar equations `x' = f(x)`: with no torsion to normalize, equivalence to
//! `X' = F(X)` is settled by quadrature. With `L(x) = int_{x0}^x du/f(u)` and
//! `M(X) = int_{X0}^X du/F(u)`, the map `phi_1 = M^{-1} o L` satisfies
//! `F(phi_1) = phi_1' f` and `phi_1(x0) = X0`.

use crate::coframe::Interval;
use crate::expr::{Expr, Symbol};
use crate::numeric::{integrate, solve_bracketed};
use crate::{Error, Result};

/// Absolute tolerance for each quadrature segment.
pub const QUAD_TOL: f64 = 1e-10;

/// Acceptance threshold on `|F(phi_1) - phi_1' f| / (1 + |F(phi_1)|)`.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Table nodes per quadrature interval.
const TABLE_SEGMENTS: usize = 64;

/// Samples for the nonvanishing check of an integrand.
const VANISHING_SAMPLES: usize = 256;

/// Doublings allowed when growing the target interval.
const MAX_DOUBLINGS: usize = 60;

/// Central-difference step for `phi_1'`, relative to `max(1, |x|)`.
const DERIVATIVE_STEP: f64 = 1e-4;

/// `x -> int_{base}^x du / f(u)` on an interval where `f` keeps one sign,
/// backed by a table of cumulative integrals.
#[derive(Clone, Debug)]
pub struct Quadrature {
    rhs: Expr,
    var: Symbol,
    interval: Interval,
    nodes: Vec<f64>,
    /// Integral from `base` to each node.
    values: Vec<f64>,
}

impl Quadrature {
    pub fn new(rhs: &Expr, var: &Symbol, base: f64, interval: Interval) -> Result<Quadrature> {
        if !interval.contains(base) {
            return Err(Error::OutsideBox {
                point: vec![base],
                margin: 0.0,
            });
        }
        nonvanishing(rhs, var, interval)?;
        let mut q = Quadrature {
            rhs: rhs.clone(),
            var: var.clone(),
            interval,
            nodes: (0..=TABLE_SEGMENTS)
                .map(|k| interval.lerp(k as f64 / TABLE_SEGMENTS as f64))
                .collect(),
            values: Vec::new(),
        };
        let mut acc = vec![0.0];
        for w in q.nodes.windows(2) {
            let last = *acc.last().unwrap();
            acc.push(last + q.segment(w[0], w[1])?);
        }
        let k = q.nearest(base);
        let shift = acc[k] + q.segment(q.nodes[k], base)?;
        q.values = acc.into_iter().map(|v| v - shift).collect();
        Ok(q)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    fn integrand(&self, u: f64) -> std::result::Result<f64, String> {
        self.rhs
            .eval(&[(&*self.var, u)])
            .map(|v| 1.0 / v)
            .map_err(|e| e.to_string())
    }

    fn segment(&self, a: f64, b: f64) -> Result<f64> {
        integrate(|u| self.integrand(u), a, b, QUAD_TOL)
            .map_err(|e| Error::QuadratureFailure(e.to_string()))
    }

    fn nearest(&self, x: f64) -> usize {
        let h = self.interval.width() / TABLE_SEGMENTS as f64;
        (((x - self.interval.lo) / h).round().max(0.0) as usize).min(TABLE_SEGMENTS)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.interval.contains(x) {
            return Err(Error::OutsideBox {
                point: vec![x],
                margin: 0.0,
            });
        }
        let k = self.nearest(x);
        Ok(self.values[k] + self.segment(self.nodes[k], x)?)
    }

    /// `(min, max)` of the integral over the interval.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.values[0], self.values[TABLE_SEGMENTS]);
        (a.min(b), a.max(b))
    }

    /// The `x` with `eval(x) = y`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(lo <= y && y <= hi) {
            return Err(Error::QuadratureFailure(format!(
                "value {y} outside the range [{lo}, {hi}] of the integral"
            )));
        }
        let increasing = self.values[TABLE_SEGMENTS] > self.values[0];
        let k = self
            .values
            .partition_point(|&v| if increasing { v < y } else { v > y });
        if k < self.values.len() && self.values[k] == y {
            return Ok(self.nodes[k]);
        }
        let (a, b) = (
            self.nodes[k.saturating_sub(1)],
            self.nodes[k.min(TABLE_SEGMENTS)],
        );
        solve_bracketed(
            |x| self.eval(x).map(|v| v - y).map_err(|e| e.to_string()),
            a,
            b,
        )
        .map_err(|e| Error::QuadratureFailure(e.to_string()))
    }
}

/// Checks that `f` has one strict sign on `iv`; returns that sign.
fn nonvanishing(f: &Expr, var: &Symbol, iv: Interval) -> Result<f64> {
    let mut sign = 0.0;
    for k in 0..=VANISHING_SAMPLES {
        let x = iv.lerp(k as f64 / VANISHING_SAMPLES as f64);
        let v = f.eval(&[(&**var, x)])?;
        if v == 0.0 || (sign != 0.0 && v.signum() != sign) {
            return Err(Error::Vanishing(format!(
                "{f} vanishes near {var} = {x} on {iv}"
            )));
        }
        sign = v.signum();
    }
    Ok(sign)
}

/// One scalar problem: `x' = f(x)` on `range`, `X' = F(X)`, anchored at
/// `phi_1(anchor.0) = anchor.1`.
#[derive(Clone, Debug)]
pub struct ScalarProblem {
    pub f: Expr,
    pub f_var: Symbol,
    pub target: Expr,
    pub target_var: Symbol,
    pub anchor: (f64, f64),
    pub range: Interval,
}

/// `phi_1 = M^{-1} o L`.
#[derive(Clone, Debug)]
pub struct ScalarMap {
    l: Quadrature,
    m: Quadrature,
}

impl ScalarMap {
    pub fn apply(&self, x: f64) -> Result<f64> {
        self.m.invert(self.l.eval(x)?)
    }

    /// `phi_1'` by second-order differences: central inside the interval,
    /// three-point one-sided near its ends.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let h = DERIVATIVE_STEP * x.abs().max(1.0);
        let iv = self.l.interval();
        if x - h < iv.lo {
            let (a, b, c) = (self.apply(x)?, self.apply(x + h)?, self.apply(x + 2.0 * h)?);
            Ok((-3.0 * a + 4.0 * b - c) / (2.0 * h))
        } else if x + h > iv.hi {
            let (a, b, c) = (self.apply(x)?, self.apply(x - h)?, self.apply(x - 2.0 * h)?);
            Ok((3.0 * a - 4.0 * b + c) / (2.0 * h))
        } else {
            Ok((self.apply(x + h)? - self.apply(x - h)?) / (2.0 * h))
        }
    }

    pub fn source(&self) -> &Quadrature {
        &self.l
    }

    pub fn target(&self) -> &Quadrature {
        &self.m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub x: f64,
    pub phi1: f64,
    /// `|F(phi_1) - phi_1' f| / (1 + |F(phi_1)|)`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ScalarSolution {
    pub map: ScalarMap,
    pub grid: Vec<GridRow>,
    pub max_residual: f64,
}

impl ScalarSolution {
    pub fn passes(&self) -> bool {
        self.max_residual < RESIDUAL_TOL
    }
}

/// Builds `phi_1` and tabulates its residual on `points` equally spaced
/// points of `problem.range`.
pub fn solve_n1(problem: &ScalarProblem, points: usize) -> Result<ScalarSolution> {
    let ScalarProblem {
        f,
        f_var,
        target,
        target_var,
        anchor: (x0, big_x0),
        range,
    } = problem;
    let f0 = f.eval(&[(&**f_var, *x0)])?;
    let big_f0 = target.eval(&[(&**target_var, *big_x0)])?;
    if f0 == 0.0 || big_f0 == 0.0 {
        return Err(Error::Vanishing(
            "right-hand side vanishes at the anchor".into(),
        ));
    }
    if f0.signum() != big_f0.signum() {
        return Err(Error::SignMismatch);
    }
    let l = Quadrature::new(f, f_var, *x0, *range)?;
    let needed = l.range();
    let m = grow_target(target, target_var, *big_x0, needed)?;
    let map = ScalarMap { l, m };
    let count = points.max(2);
    let mut grid = Vec::with_capacity(count);
    let mut max_residual: f64 = 0.0;
    for k in 0..count {
        let x = range.lerp(k as f64 / (count - 1) as f64);
        let phi1 = map.apply(x)?;
        let lhs = target.eval(&[(&**target_var, phi1)])?;
        let rhs = map.derivative(x)? * f.eval(&[(&**f_var, x)])?;
        let residual = (lhs - rhs).abs() / (1.0 + lhs.abs());
        max_residual = max_residual.max(residual);
        grid.push(GridRow { x, phi1, residual });
    }
    Ok(ScalarSolution {
        map,
        grid,
        max_residual,
    })
}

/// Grows an interval around `base` until `int_{base}^X du/F(u)` covers
/// `needed`, each side doubling independently.
fn grow_target(target: &Expr, var: &Symbol, base: f64, needed: (f64, f64)) -> Result<Quadrature> {
    let start = 1e-3 * base.abs().max(1.0);
    let (mut left, mut right) = (start, start);
    for _ in 0..MAX_DOUBLINGS {
        let iv = Interval::new(base - left, base + right)?;
        let q = Quadrature::new(target, var, base, iv).map_err(|e| {
            Error::QuadratureFailure(format!("cannot cover [{}, {}]: {e}", needed.0, needed.1))
        })?;
        let (lo_val, hi_val) = (q.values[0], q.values[TABLE_SEGMENTS]);
        // For F < 0 the integral decreases, so the left end must reach the top.
        let (grow_left, grow_right) = if hi_val >= lo_val {
            (lo_val > needed.0, hi_val < needed.1)
        } else {
            (lo_val < needed.1, hi_val > needed.0)
        };
        if !grow_left && !grow_right {
            return Ok(q);
        }
        if grow_left {
            left *= 2.0;
        }
        if grow_right {
            right *= 2.0;
        }
    }
    Err(Error::QuadratureFailure(format!(
        "target integral does not reach [{}, {}]",
        needed.0, needed.1
    )))
}
