//! Low-discrepancy Halton sequences for deterministic quasi-random sampling.

/// `index`-th element (1-based) of the van der Corput sequence in `base`.
pub fn van_der_corput(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// 2-D Halton points in `[0,1)²` (bases 2 and 3), skipping index 0.
pub fn halton2(count: usize) -> impl Iterator<Item = [f64; 2]> {
    halton_pair(count, 2, 3)
}

/// 2-D Halton points with chosen coprime bases.
///
/// Dyadic sampling domains (block annuli with spans `3·2^l`) resonate with
/// base 2: affine images of its points can land exactly on integer lattices.
/// Such domains should be sampled with bases 5 and 3 instead.
pub fn halton_pair(count: usize, base1: u64, base2: u64) -> impl Iterator<Item = [f64; 2]> {
    (1..=count as u64).map(move |k| [van_der_corput(k, base1), van_der_corput(k, base2)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base2_prefix() {
        let got: Vec<f64> = (1..=4).map(|k| van_der_corput(k, 2)).collect();
        assert_eq!(got, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn points_fill_the_unit_square() {
        let pts: Vec<_> = halton2(1000).collect();
        assert!(pts.iter().all(|p| (0.0..1.0).contains(&p[0]) && (0.0..1.0).contains(&p[1])));
        // crude equidistribution: each quadrant gets roughly a quarter
        let q = pts
            .iter()
            .filter(|p| p[0] < 0.5 && p[1] < 0.5)
            .count();
        assert!((200..300).contains(&q));
    }
}
