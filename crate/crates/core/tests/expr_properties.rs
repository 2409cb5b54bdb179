use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use webgeom::testing::{conditioned_central_difference, random_expr};
use webgeom::{parse, Expr};

const VARS: [&str; 2] = ["x1", "x2"];

fn sampled(seed: u64) -> (Expr, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_expr(&mut rng, &VARS, 3);
    (e, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derivative_matches_central_difference(seed in any::<u64>()) {
        let (e, mut rng) = sampled(seed);
        let var = VARS[rng.gen_range(0..2)];
        let d = e.differentiate(var);
        for _ in 0..3 {
            let p = [("x1", rng.gen_range(0.5..2.0)), ("x2", rng.gen_range(0.5..2.0))];
            let Some(fd) = conditioned_central_difference(&e, var, &p, 1e-5) else { continue };
            let sym = d.eval(&p).unwrap_or_else(|err| panic!("d/d{var} {e} = {d}: {err}"));
            let err = (sym - fd).abs() / (1.0 + sym.abs().max(fd.abs()));
            prop_assert!(err < 1e-6, "d/d{} {} = {}: {} vs {}", var, e, d, sym, fd);
        }
    }

    #[test]
    fn canonicalization_is_idempotent(seed in any::<u64>()) {
        let (e, _) = sampled(seed);
        let once = e.canonicalize();
        prop_assert_eq!(&once, &e);
        prop_assert_eq!(once.canonicalize(), once);
    }

    #[test]
    fn display_reparses_to_the_same_expression(seed in any::<u64>()) {
        let (e, _) = sampled(seed);
        let text = e.to_string();
        let back = parse(&text, &VARS).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn substitution_commutes_with_evaluation(seed in any::<u64>()) {
        let (e, mut rng) = sampled(seed);
        let g = random_expr(&mut rng, &VARS, 2);
        let p = [("x1", rng.gen_range(0.5..2.0)), ("x2", rng.gen_range(0.5..2.0))];
        let Ok(gv) = g.eval(&p) else { return Ok(()) };
        let moved = [("x1", gv), ("x2", p[1].1)];
        let (Ok(direct), Ok(composed)) = (e.eval(&moved), e.substitute_one("x1", g).eval(&p)) else {
            return Ok(());
        };
        if direct.abs() < 1e6 {
            let err = (direct - composed).abs() / (1.0 + direct.abs());
            prop_assert!(err < 1e-12, "{} vs {}", direct, composed);
        }
    }
}

#[test]
fn log_derivative_of_square() {
    let e = parse("ln(x2^2)", &["x2"]).unwrap();
    let d = e.differentiate("x2");
    assert_eq!(d, parse("2/x2", &["x2"]).unwrap());
    for x in [0.5, 1.3, 2.0] {
        let fd = conditioned_central_difference(&e, "x2", &[("x2", x)], 1e-5).unwrap();
        let sym = d.eval(&[("x2", x)]).unwrap();
        assert!((sym - fd).abs() / sym.abs() < 1e-8);
    }
}
