//! Random and catalog inputs shared by the test suites and the acceptance run.

use rand::Rng;

use crate::coframe::{Interval, Invariants, OdeSystem};
use crate::equivalence::{ScalarProblem, WebMap};
use crate::expr::{parse, Expr, Func, Symbol, TIME_VAR};

/// Depth-bounded random expression over `vars`, with elementary functions.
pub fn random_expr(rng: &mut impl Rng, vars: &[&str], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return random_leaf(rng, vars);
    }
    let sub = |rng: &mut _| random_expr(rng, vars, depth - 1);
    match rng.gen_range(0..10) {
        0 | 1 => sub(rng) + sub(rng),
        2 => sub(rng) - sub(rng),
        3 | 4 => sub(rng) * sub(rng),
        5 => sub(rng) / sub(rng),
        6 => {
            let k = *[-2, -1, 2, 3].get(rng.gen_range(0..4)).unwrap();
            sub(rng).powi(k)
        }
        _ => {
            let f = [Func::Ln, Func::Exp, Func::Sin, Func::Cos, Func::Sqrt][rng.gen_range(0..5)];
            Expr::func(f, sub(rng))
        }
    }
}

fn random_leaf(rng: &mut impl Rng, vars: &[&str]) -> Expr {
    if rng.gen_bool(0.7) {
        Expr::var(vars[rng.gen_range(0..vars.len())])
    } else {
        Expr::ratio(rng.gen_range(1..=5), rng.gen_range(1..=3))
    }
}

/// Random expression built from `+ - * /` and integer powers only.
pub fn random_rational(rng: &mut impl Rng, vars: &[&str], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_leaf(rng, vars);
    }
    let sub = |rng: &mut _| random_rational(rng, vars, depth - 1);
    match rng.gen_range(0..6) {
        0 | 1 => sub(rng) + sub(rng),
        2 => sub(rng) - sub(rng),
        3 => sub(rng) * sub(rng),
        4 => sub(rng) / sub(rng),
        _ => sub(rng).powi(rng.gen_range(2..=3)),
    }
}

/// Central difference of `e` in `var` at `p`, or `None` when `p` is too
/// close to a singularity for a step of `h` to resolve the derivative:
/// every stencil value must evaluate and stay moderate, and the estimates at
/// `h` and `2h` must agree.
pub fn conditioned_central_difference(
    e: &Expr,
    var: &str,
    point: &[(&str, f64)],
    h: f64,
) -> Option<f64> {
    let at = |dx: f64| {
        let shifted: Vec<(&str, f64)> = point
            .iter()
            .map(|&(n, v)| if n == var { (n, v + dx) } else { (n, v) })
            .collect();
        e.eval(shifted.as_slice()).ok().filter(|v| v.abs() < 1e3)
    };
    let d1 = (at(h)? - at(-h)?) / (2.0 * h);
    let d2 = (at(2.0 * h)? - at(-2.0 * h)?) / (4.0 * h);
    at(0.0)?;
    ((d1 - d2).abs() < 1e-8 * (1.0 + d1.abs())).then_some(d1)
}

/// Rational system with positive monomial sums on `[1, 2]^n`, resampled
/// until the invariant pipeline succeeds and evaluates at the box center.
pub fn random_system(rng: &mut impl Rng, n: usize) -> OdeSystem {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    loop {
        let rhs: Vec<Expr> = (0..n).map(|_| positive_monomial_sum(rng, &vars)).collect();
        let bbox = vec![Interval { lo: 1.0, hi: 2.0 }; n];
        let Ok(sys) = OdeSystem::new(&vars, rhs, bbox) else {
            continue;
        };
        if let Ok(inv) = Invariants::compute(&sys) {
            if inv.structure.invariant_vector(&sys.center()).is_ok() {
                return sys;
            }
        }
    }
}

fn positive_monomial_sum(rng: &mut impl Rng, vars: &[&str]) -> Expr {
    let terms = rng.gen_range(1..=2);
    Expr::sum((0..terms).map(|_| {
        let coeff = Expr::ratio(rng.gen_range(1..=4), rng.gen_range(1..=2));
        Expr::product(
            std::iter::once(coeff).chain(
                vars.iter()
                    .map(|v| Expr::var(v).powi(rng.gen_range(-2..=2))),
            ),
        )
    }))
}

/// Random web map with constant `phi_0'`; each spatial component is an
/// affine, exponential or cubic-plus-linear piece followed by an affine one,
/// strictly monotone on the whole line.
pub fn random_web_map(rng: &mut impl Rng, vars: &[Symbol]) -> WebMap {
    let time = affine(rng, Expr::var(TIME_VAR));
    let space = vars
        .iter()
        .map(|v| {
            let x = Expr::symbol(v.clone());
            let piece = match rng.gen_range(0..3) {
                0 => x,
                1 => {
                    let alpha = Expr::ratio(rng.gen_range(3..=12), 10) * sign(rng);
                    (alpha * x).exp()
                }
                _ => x.clone().powi(3) + Expr::ratio(rng.gen_range(1..=4), 2) * x,
            };
            affine(rng, piece)
        })
        .collect();
    WebMap::new(time, space, vars).expect("components are block-diagonal by construction")
}

fn sign(rng: &mut impl Rng) -> Expr {
    Expr::int(if rng.gen_bool(0.5) { 1 } else { -1 })
}

/// `a * e + b` with `|a|` in `[1/2, 2]` and either sign.
fn affine(rng: &mut impl Rng, e: Expr) -> Expr {
    let a = Expr::ratio(rng.gen_range(1..=4), 2) * sign(rng);
    let b = Expr::ratio(rng.gen_range(-4..=4), 2);
    a * e + b
}

/// Two-dimensional systems with known invariants, on `[1, 2]^2`.
pub fn catalog() -> Vec<OdeSystem> {
    [
        ["x1*x2", "x2"],
        ["x2^2", "1"],
        ["exp(x2)", "1"],
        ["exp(x2^2)", "1"],
    ]
    .iter()
    .map(|rhs| OdeSystem::parse_uniform(&["x1", "x2"], rhs, 1.0, 2.0).expect("catalog system"))
    .collect()
}

/// Scalar pairs `(f, F, anchor, range)` that are equivalent through the anchor.
pub fn scalar_catalog() -> Vec<ScalarProblem> {
    [
        ("1", "2", (0.0, 0.0), (0.0, 1.0)),
        ("x", "X", (1.0, 1.0), (1.0, 2.0)),
        ("1 + x^2", "1", (0.0, 0.0), (0.0, 1.0)),
        ("exp(x)", "1", (0.0, 0.0), (0.0, 1.0)),
        ("2 + sin(x)", "3", (0.0, 0.0), (0.0, 1.0)),
    ]
    .iter()
    .map(|&(f, big_f, anchor, (lo, hi))| scalar_problem(f, big_f, anchor, lo, hi))
    .collect()
}

pub fn scalar_problem(f: &str, big_f: &str, anchor: (f64, f64), lo: f64, hi: f64) -> ScalarProblem {
    ScalarProblem {
        f: parse(f, &["x"]).expect("scalar source"),
        f_var: Symbol::from("x"),
        target: parse(big_f, &["X"]).expect("scalar target"),
        target_var: Symbol::from("X"),
        anchor,
        range: Interval::new(lo, hi).expect("scalar range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::pushforward;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_systems_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 3] {
            for _ in 0..5 {
                let sys = random_system(&mut rng, n);
                assert!(sys.report().is_valid());
                assert_eq!(sys.n(), n);
            }
        }
    }

    #[test]
    fn random_maps_push_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for sys in catalog() {
            for _ in 0..3 {
                let m = random_web_map(&mut rng, sys.vars());
                m.check_monotone(&sys).unwrap();
                pushforward(&sys, &m).unwrap();
            }
        }
    }

    #[test]
    fn conditioned_difference_rejects_singularities() {
        let e = parse("1/(x - 1)", &["x"]).unwrap();
        assert!(conditioned_central_difference(&e, "x", &[("x", 1.0 + 1e-6)], 1e-5).is_none());
        let d = conditioned_central_difference(&e, "x", &[("x", 2.0)], 1e-5).unwrap();
        assert!((d + 1.0).abs() < 1e-8);
    }
}
