use std::collections::BTreeMap;

use super::structure::{InvariantCoframe, Slot};
use super::system::OdeSystem;
use crate::expr::Point;
use crate::{Error, Result};

/// Structure functions at one point, computed from central differences of
/// the coframe coefficients instead of symbolic derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericStructure {
    pub values: BTreeMap<Slot, f64>,
}

impl NumericStructure {
    /// `c^k_{ij}` (any order of `i`, `j`).
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let v = self
            .values
            .get(&Slot {
                k,
                i: i.min(j),
                j: i.max(j),
            })
            .copied()
            .unwrap_or(0.0);
        if i < j {
            v
        } else {
            -v
        }
    }
}

/// Finite-difference counterpart of [`super::structure_functions`] at `p`.
///
/// `d(s_k dq_k) = sum_m (ds_k/dq_m) dq_m ^ dq_k`, each derivative replaced by
/// `(s_k(p + h e_m) - s_k(p - h e_m)) / 2h`.
pub fn numeric_structure_oracle(
    sys: &OdeSystem,
    cf: &InvariantCoframe,
    p: &Point,
    h: f64,
) -> Result<NumericStructure> {
    let interior = sys
        .bbox()
        .iter()
        .zip(p.x())
        .all(|(iv, &x)| x - h >= iv.lo && x + h <= iv.hi);
    if !interior {
        return Err(Error::OutsideBox {
            point: p.x().to_vec(),
            margin: h,
        });
    }
    let n = sys.n();
    let scales = cf.coefficients();
    let at_p = cf.eval(p)?;
    let mut values = BTreeMap::new();
    for (k, s_k) in scales.iter().enumerate() {
        for m in (0..=n).filter(|&m| m != k) {
            let q = p.values()[m];
            let plus = s_k.eval(&p.with(m, q + h))?;
            let minus = s_k.eval(&p.with(m, q - h))?;
            let ds = (plus - minus) / (2.0 * h);
            // coefficient of dq_m ^ dq_k, stored against theta^min ^ theta^max
            let w = if m < k { ds } else { -ds };
            let c = w / (at_p[m] * at_p[k]);
            values.insert(
                Slot {
                    k,
                    i: m.min(k),
                    j: m.max(k),
                },
                c,
            );
        }
    }
    Ok(NumericStructure { values })
}
