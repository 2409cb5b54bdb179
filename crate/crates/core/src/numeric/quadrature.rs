//! Adaptive Gauss–Kronrod (7/15) quadrature with global panel bisection.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand evaluation failed at {at}: {message}")]
    Eval { at: f64, message: String },
    #[error("no convergence on [{a}, {b}]: error estimate {estimate:e} with {panels} panels")]
    NoConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        panels: usize,
    },
}

// Kronrod abscissae on [0, 1]; the odd-indexed ones are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 2000;

/// One Gauss–Kronrod panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadError>
where
    F: FnMut(f64) -> Result<f64, String>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64| match f(x) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(QuadError::Eval {
            at: x,
            message: format!("non-finite integrand value {v}"),
        }),
        Err(message) => Err(QuadError::Eval { at: x, message }),
    };
    let fc = eval(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let sum = eval(c - dx)? + eval(c + dx)?;
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integral of `f` over `[a, b]` (either orientation) to absolute tolerance `tol`.
///
/// Globally adaptive: the panel with the largest error estimate is bisected
/// until the summed estimate drops below `tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, String>,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let (value, error) = gk15(&mut f, a, b)?;
    let mut panels = vec![Panel { a, b, value, error }];
    loop {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        let total: f64 = panels.iter().map(|p| p.value).sum();
        // Below ~50 ulp of the result the estimate is rounding noise.
        if total_error <= tol.max(50.0 * f64::EPSILON * total.abs()) {
            return Ok(total);
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if panels.len() + 2 > MAX_PANELS || m <= p.a || m >= p.b {
            return Err(QuadError::NoConvergence {
                a,
                b,
                estimate: total_error,
                panels: panels.len() + 1,
            });
        }
        let (lv, le) = gk15(&mut f, p.a, m)?;
        let (rv, re) = gk15(&mut f, m, p.b)?;
        panels.push(Panel {
            a: p.a,
            b: m,
            value: lv,
            error: le,
        });
        panels.push(Panel {
            a: m,
            b: p.b,
            value: rv,
            error: re,
        });
    }
}
