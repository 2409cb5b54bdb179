//! Root finding on a sign-changing bracket: secant steps, falling back to
//! bisection whenever the secant iterate leaves the bracket or fails to
//! shrink it fast enough.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (values {f_lo}, {f_hi})")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("function evaluation failed: {0}")]
    Eval(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
}

const MAX_ITER: usize = 200;

/// Finds `x` in `[lo, hi]` with `g(x) = 0`, to near machine precision.
pub fn solve_bracketed<F>(mut g: F, lo: f64, hi: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> Result<f64, String>,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = g(a).map_err(RootError::Eval)?;
    let mut fb = g(b).map_err(RootError::Eval)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let mut width = (b - a).abs();
    for _ in 0..MAX_ITER {
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        let inside = secant > a.min(b) && secant < a.max(b) && secant.is_finite();
        let x = if inside { secant } else { mid };
        let fx = g(x).map_err(RootError::Eval)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let new_width = (b - a).abs();
        // Secant stalls against one end of the bracket; force a bisection.
        if new_width > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = g(m).map_err(RootError::Eval)?;
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        width = (b - a).abs();
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if width <= 4.0 * f64::EPSILON * scale {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Err(RootError::NoConvergence(MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let x = solve_bracketed(|x| Ok(x * x * x - 2.0), 0.0, 2.0).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn decreasing_function() {
        let x = solve_bracketed(|x| Ok((-x).exp() - 0.5), 0.0, 5.0).unwrap();
        assert!((x - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn flat_region_converges() {
        let x = solve_bracketed(|x: f64| Ok((x - 1.0).powi(7)), 0.0, 3.0).unwrap();
        assert!((x - 1.0).abs() < 1e-2);
    }

    #[test]
    fn missing_bracket() {
        assert!(matches!(
            solve_bracketed(|x| Ok(x * x + 1.0), -1.0, 1.0),
            Err(RootError::NoBracket { .. })
        ));
    }
}
