use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use webgeom::coframe::{numeric_structure_oracle, Invariants, OdeSystem, Slot};
use webgeom::testing::{catalog, random_rational, random_system};
use webgeom::{parse, Error, Expr};

const H: f64 = 1e-5;

fn oracle_agreement(sys: &OdeSystem, points: usize, seed: u64) {
    let inv = Invariants::compute(sys).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.n();
    for _ in 0..points {
        let p = sys.random_point(&mut rng, 0.01);
        let numeric = numeric_structure_oracle(sys, &inv.coframe, &p, H).unwrap();
        for k in 0..=n {
            for i in 0..=n {
                for j in i + 1..=n {
                    let sym = inv.structure.get(k, i, j).eval(&p).unwrap();
                    let num = numeric.get(k, i, j);
                    assert!(
                        (sym - num).abs() < 1e-6 * (1.0 + sym.abs()),
                        "{sys}c^{k}_{{{i}{j}}} at {p}: {sym} vs {num}"
                    );
                }
            }
        }
    }
}

#[test]
fn catalog_matches_finite_difference_oracle() {
    for (s, sys) in catalog().iter().enumerate() {
        oracle_agreement(sys, 20, s as u64);
    }
}

#[test]
fn random_three_dimensional_system_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = random_system(&mut rng, 3);
    oracle_agreement(&sys, 20, 99);
}

#[test]
fn oracle_examples() {
    let sys = OdeSystem::parse_uniform(&["x1", "x2"], &["x2^2", "1"], 0.5, 2.0).unwrap();
    let inv = Invariants::compute(&sys).unwrap();
    let v = numeric_structure_oracle(&sys, &inv.coframe, &sys.point(0.5, &[1.0, 1.0]), H).unwrap();
    assert!((v.get(0, 0, 2) - 0.5).abs() < 1e-7);
}

#[test]
fn normalizer_is_the_time_coefficient() {
    for sys in catalog() {
        let inv = Invariants::compute(&sys).unwrap();
        assert_eq!(&inv.coframe.coefficients()[0], &inv.normalizer().value);
    }
}

#[test]
fn constant_normalizer_reduces_to_torsion_ratio() {
    // With l constant the coframe correction term vanishes.
    for rhs in [["x1*x2", "x2"], ["exp(x2)", "1"], ["x1*exp(x2)", "2"]] {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &rhs, 1.0, 2.0).unwrap();
        let inv = Invariants::compute(&sys).unwrap();
        let l = &inv.normalizer().value;
        assert!(l.as_const().is_some(), "{l}");
        for j in 1..=2 {
            assert!(inv.structure.get(0, 0, j).is_zero());
        }
        for i in 1..=2 {
            for j in (1..=2).filter(|&j| j != i) {
                let lij = inv.torsion.get(i - 1, j - 1).unwrap();
                assert_eq!(inv.structure.get(i, i, j), lij / l, "{sys}");
            }
        }
    }
}

#[test]
fn square_system_closed_forms() {
    let sys = OdeSystem::parse_uniform(&["x1", "x2"], &["x2^2", "1"], 1.0, 2.0).unwrap();
    let inv = Invariants::compute(&sys).unwrap();
    let v = |s: &str| parse(s, &["x1", "x2"]).unwrap();
    assert_eq!(inv.normalizer().value, v("2/x2"));
    assert_eq!(inv.structure.get(0, 0, 2), Expr::ratio(1, 2));
    assert_eq!(inv.structure.get(1, 1, 2), Expr::ratio(3, 2));
    // l_12 / l = 1 and f_2 (dl/dx2) / l^2 = -1/2.
    let l = inv.normalizer().value.clone();
    let correction = sys.rhs()[1].clone() * l.differentiate("x2") / l.clone().powi(2);
    assert_eq!(
        inv.torsion.get(0, 1).unwrap() / &l - correction,
        Expr::ratio(3, 2)
    );
    let labels: Vec<String> = Slot::invariant_slots(2).iter().map(Slot::label).collect();
    assert_eq!(labels[1], "c^0_{02}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparsity_holds_for_random_rational_systems(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = ["x1", "x2", "x3"];
        let n = if seed % 2 == 0 { 2 } else { 3 };
        let rhs: Vec<Expr> = (0..n).map(|_| random_rational(&mut rng, &vars[..n], 3)).collect();
        let Ok(sys) = OdeSystem::new(&vars[..n], rhs, vec![webgeom::coframe::Interval { lo: 1.0, hi: 2.0 }; n]) else {
            return Ok(());
        };
        match Invariants::compute(&sys) {
            Ok(inv) => prop_assert!(inv.structure.check_sparsity().is_ok()),
            Err(Error::Sparsity(msg)) => prop_assert!(false, "{}", msg),
            Err(_) => {}
        }
    }
}
