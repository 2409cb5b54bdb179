//! Halton low-discrepancy sequence.

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`, in `[0, 1)`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// `count` points of the `dim`-dimensional Halton sequence in `[0, 1)^dim`,
/// skipping the origin.
pub fn halton(count: usize, dim: usize) -> Vec<Vec<f64>> {
    assert!(
        dim <= PRIMES.len(),
        "Halton dimension limited to {}",
        PRIMES.len()
    );
    (1..=count as u64)
        .map(|i| {
            PRIMES[..dim]
                .iter()
                .map(|&b| radical_inverse(i, b))
                .collect()
        })
        .collect()
}
