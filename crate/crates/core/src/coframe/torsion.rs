use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::system::{validate_system, OdeSystem};
use crate::expr::Expr;
use crate::{Error, Result};

/// Numerical zero threshold for torsion entries.
const ZERO_TOL: f64 = 1e-12;

/// Extra random points for the numerical zero test.
const ZERO_TEST_POINTS: usize = 8;

const ZERO_TEST_SEED: u64 = 0x7e1_9e0;

/// Off-diagonal torsion coefficients `l_ij = f_j * d(ln|f_i|)/dx_j`.
///
/// Indices are 0-based; entry `(i, j)` is `l_{i+1, j+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionMatrix {
    n: usize,
    entries: Vec<Option<Expr>>,
}

impl TorsionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `None` on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<&Expr> {
        self.entries[i * self.n + j].as_ref()
    }

    /// Off-diagonal entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Expr)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(move |(k, e)| e.as_ref().map(|e| (k / self.n, k % self.n, e)))
    }
}

/// The torsion coefficient selected to fix the group parameter: `a = l_pq`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizerChoice {
    /// 0-based `(p, q)`.
    pub pair: (usize, usize),
    pub value: Expr,
}

impl NormalizerChoice {
    /// 1-based label such as `l12`.
    pub fn label(&self) -> String {
        format!("l{}", crate::error::pair_label(&self.pair))
    }
}

pub fn torsion_matrix(sys: &OdeSystem) -> Result<TorsionMatrix> {
    let report = validate_system(sys);
    if !report.is_valid() {
        return Err(Error::InvalidSystem(report.summary()));
    }
    let n = sys.n();
    if n < 2 {
        return Err(Error::Dimension(
            "torsion is empty for n = 1; use the scalar solver".into(),
        ));
    }
    let f = sys.rhs();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                entries.push(None);
            } else {
                let dlog = f[i].log_derivative(sys.var(j));
                entries.push(Some(f[j].clone() * dlog));
            }
        }
    }
    Ok(TorsionMatrix { n, entries })
}

/// Zero test for torsion entries: canonically zero, or numerically zero at
/// the box center and at a fixed set of random box points.
pub fn is_identically_zero(e: &Expr, sys: &OdeSystem) -> bool {
    if e.is_zero() {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ZERO_TEST_SEED);
    let mut points = vec![sys.center()];
    points.extend((0..ZERO_TEST_POINTS).map(|_| sys.random_point(&mut rng, 0.0)));
    points
        .iter()
        .all(|p| matches!(e.eval(p), Ok(v) if v.abs() <= ZERO_TOL))
}

/// First off-diagonal `l_pq` (row-major) that is not identically zero and is
/// nonzero at the box center.
pub fn choose_normalizer(torsion: &TorsionMatrix, sys: &OdeSystem) -> Result<NormalizerChoice> {
    if torsion.n() < 2 {
        return Err(Error::Dimension("normalization needs n >= 2".into()));
    }
    let center = sys.center();
    let mut vanishing_at_center = None;
    for (i, j, e) in torsion.iter() {
        if is_identically_zero(e, sys) {
            continue;
        }
        match e.eval(&center) {
            Ok(v) if v.abs() > ZERO_TOL => {
                return Ok(NormalizerChoice {
                    pair: (i, j),
                    value: e.clone(),
                })
            }
            _ => {
                vanishing_at_center.get_or_insert((i, j));
            }
        }
    }
    match vanishing_at_center {
        Some(pair) => Err(Error::DegenerateNormalizer { pair }),
        None => Err(Error::FlatTorsion),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn sys(rhs: &[&str]) -> OdeSystem {
        OdeSystem::parse_uniform(&["x1", "x2"], rhs, 1.0, 2.0).unwrap()
    }

    fn p(s: &str) -> Expr {
        parse(s, &["x1", "x2"]).unwrap()
    }

    #[test]
    fn product_system() {
        let s = sys(&["x1*x2", "x2"]);
        let t = torsion_matrix(&s).unwrap();
        assert_eq!(t.get(0, 1), Some(&Expr::one()));
        assert_eq!(t.get(1, 0), Some(&Expr::zero()));
        assert_eq!(t.get(0, 0), None);
        let choice = choose_normalizer(&t, &s).unwrap();
        assert_eq!(choice.pair, (0, 1));
        assert_eq!(choice.label(), "l12");
        assert!(choice.value.is_one());
    }

    #[test]
    fn square_system() {
        let s = sys(&["x2^2", "1"]);
        let t = torsion_matrix(&s).unwrap();
        assert_eq!(t.get(0, 1), Some(&p("2/x2")));
        assert!(t.get(1, 0).unwrap().is_zero());
    }

    #[test]
    fn constant_system_is_flat() {
        let s = sys(&["3", "5/2"]);
        let t = torsion_matrix(&s).unwrap();
        assert!(t.iter().all(|(_, _, e)| e.is_zero()));
        assert_eq!(choose_normalizer(&t, &s), Err(Error::FlatTorsion));
    }

    #[test]
    fn fallback_to_second_row() {
        let s = sys(&["x1", "x1*x2"]);
        let t = torsion_matrix(&s).unwrap();
        assert!(t.get(0, 1).unwrap().is_zero());
        assert!(t.get(1, 0).unwrap().is_one());
        assert_eq!(choose_normalizer(&t, &s).unwrap().pair, (1, 0));
    }

    #[test]
    fn numerically_zero_entry_is_skipped() {
        // sqrt(x2^2)/x2 is 1 on the box but does not simplify symbolically.
        let s = sys(&["exp(x1)*sqrt(x2^2)/x2", "x1"]);
        let t = torsion_matrix(&s).unwrap();
        assert!(!t.get(0, 1).unwrap().is_zero());
        assert!(is_identically_zero(t.get(0, 1).unwrap(), &s));
        assert_eq!(choose_normalizer(&t, &s).unwrap().pair, (1, 0));
    }

    #[test]
    fn vanishing_normalizer_at_center() {
        // l12 = 2*(x2 - 3/2): nonzero on the box but zero at its center.
        let s = sys(&["exp((x2 - 3/2)^2)", "1"]);
        let t = torsion_matrix(&s).unwrap();
        assert_eq!(
            choose_normalizer(&t, &s),
            Err(Error::DegenerateNormalizer { pair: (0, 1) })
        );
    }

    #[test]
    fn n1_and_invalid_systems_are_rejected() {
        let s = OdeSystem::parse_uniform(&["x"], &["x"], 1.0, 2.0).unwrap();
        assert!(matches!(torsion_matrix(&s), Err(Error::Dimension(_))));
        let s = sys(&["t*x1", "x2"]);
        assert!(matches!(torsion_matrix(&s), Err(Error::InvalidSystem(_))));
    }
}
