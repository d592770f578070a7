//! The extension operator, Littlewood-Paley ring functions, and decay fits.

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::halton;
use crate::measures::DiscreteMeasure;

/// `σ̂(x) = Σ_i e^{-2πi x·ξ_i} σ_i`.
///
/// Pure node summation; accuracy at frequency `|x|` requires roughly
/// `n ≥ 20 (1 + diam·|x|)` nodes, which is the caller's responsibility.
pub fn sigma_hat(measure: &DiscreteMeasure, x: [f64; 2]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, w) in measure.nodes.iter().zip(&measure.weights) {
        let phase = -2.0 * std::f64::consts::PI * (x[0] * xi[0] + x[1] * xi[1]);
        acc += Complex64::from_polar(*w, phase);
    }
    acc
}

/// A density `f` on the nodes of a measure, with cached `L¹(σ)`/`L²(σ)` norms.
#[derive(Debug, Clone)]
pub struct Density {
    pub values: Vec<Complex64>,
    pub l1: f64,
    pub l2: f64,
}

impl Density {
    pub fn new(values: Vec<Complex64>, measure: &DiscreteMeasure) -> Result<Self> {
        if values.len() != measure.len() {
            return Err(Error::InvalidArgument(format!(
                "density has {} values but the measure has {} nodes",
                values.len(),
                measure.len()
            )));
        }
        let l1 = values
            .iter()
            .zip(&measure.weights)
            .map(|(f, w)| f.norm() * w)
            .sum();
        let l2 = values
            .iter()
            .zip(&measure.weights)
            .map(|(f, w)| f.norm_sqr() * w)
            .sum::<f64>()
            .sqrt();
        Ok(Density { values, l1, l2 })
    }

    pub fn constant(measure: &DiscreteMeasure) -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0); measure.len()], measure).unwrap()
    }

    /// Unimodular values with phases drawn from the given rng.
    pub fn random_phases(measure: &DiscreteMeasure, rng: &mut impl rand::Rng) -> Self {
        let values = (0..measure.len())
            .map(|_| {
                let theta: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                Complex64::from_polar(1.0, theta)
            })
            .collect();
        Self::new(values, measure).unwrap()
    }

    /// `f_i = e^{2πi x₀·ξ_i}`, translating the peak of `|Ef|` to `x₀`.
    pub fn focused(measure: &DiscreteMeasure, x0: [f64; 2]) -> Self {
        let values = measure
            .nodes
            .iter()
            .map(|xi| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (x0[0] * xi[0] + x0[1] * xi[1]))
            })
            .collect();
        Self::new(values, measure).unwrap()
    }
}

fn extend_row(
    measure: &DiscreteMeasure,
    f: &Density,
    spec: GridSpec,
    j: usize,
) -> Vec<Complex64> {
    let x2 = -spec.l + (j as f64 + 0.5) * spec.h();
    (0..spec.n)
        .map(|i| {
            let x1 = spec.coord(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for ((xi, w), fv) in measure.nodes.iter().zip(&measure.weights).zip(&f.values) {
                let phase = -2.0 * std::f64::consts::PI * (x1 * xi[0] + x2 * xi[1]);
                acc += fv * Complex64::from_polar(*w, phase);
            }
            acc
        })
        .collect()
}

/// `Ef(x) = Σ_i e^{-2πi x·ξ_i} f_i σ_i` sampled at every cell center.
///
/// Rows are computed independently (in parallel when enabled) and collected
/// in order, so parallel and sequential runs are bit-identical.
pub fn extend(measure: &DiscreteMeasure, f: &Density, spec: GridSpec) -> Result<Grid<Complex64>> {
    if f.values.len() != measure.len() {
        return Err(Error::InvalidArgument(
            "density does not match the measure's node count".into(),
        ));
    }
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Complex64>> = (0..spec.n)
        .into_par_iter()
        .map(|j| extend_row(measure, f, spec, j))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Complex64>> = (0..spec.n)
        .map(|j| extend_row(measure, f, spec, j))
        .collect();
    Ok(Grid {
        spec,
        values: rows.concat(),
    })
}

/// Smooth even cutoff: 1 on `[-1,1]`, 0 outside `(-2,2)`, glued by
/// `g(2-|r|)/(g(2-|r|) + g(|r|-1))` with `g(s) = e^{-1/s}`.
pub fn psi0(r: f64) -> f64 {
    let a = r.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
        let up = g(2.0 - a);
        up / (up + g(a - 1.0))
    }
}

/// Dyadic ring function `ψ_l(r) = ψ₀(r/2^l) - ψ₀(r/2^{l-1})` for `l ≥ 1`,
/// `ψ_0 = ψ₀`. Supported in `2^{l-1} ≤ |r| ≤ 2^{l+1}`; the family sums to 1.
pub fn psi(l: u32, r: f64) -> f64 {
    if l == 0 {
        psi0(r)
    } else {
        let scale = (1u64 << l) as f64;
        psi0(r / scale) - psi0(r / (scale / 2.0))
    }
}

/// Observed `max |ψ_l(x₁) ψ_m(x₂) σ̂(x)|` over a Halton sample of the
/// support box of the `(l, m)` block.
pub fn block_bounds_tensor(
    measure: &DiscreteMeasure,
    l: u32,
    m: u32,
    sample_count: usize,
) -> Result<f64> {
    if sample_count < 64 {
        return Err(Error::InvalidArgument(format!(
            "block sampling needs at least 64 points, got {sample_count}"
        )));
    }
    let span = |l: u32| -> (f64, f64) {
        if l == 0 {
            (0.0, 2.0)
        } else {
            ((1u64 << (l - 1)) as f64, (1u64 << (l + 1)) as f64)
        }
    };
    let (a1, b1) = span(l);
    let (a2, b2) = span(m);
    let mut best = 0.0_f64;
    // bases 5/3: base 2 resonates with the dyadic block spans
    for (k, p) in halton::halton_pair(sample_count, 5, 3).enumerate() {
        // alternate sign quadrants; |σ̂| is even so two suffice
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        let x = [a1 + (b1 - a1) * p[0], s * (a2 + (b2 - a2) * p[1])];
        let v = psi(l, x[0]) * psi(m, x[1]) * sigma_hat(measure, x).norm();
        best = best.max(v);
    }
    Ok(best)
}

/// Observed `max |ψ_l(x·v) σ̂(x)|` over a Halton sample of the slab
/// `2^{l-1} ≤ |x·v| ≤ 2^{l+1}`, with the transverse coordinate capped at `x_max`.
pub fn block_bounds_directional(
    measure: &DiscreteMeasure,
    v: [f64; 2],
    l: u32,
    sample_count: usize,
    x_max: f64,
) -> Result<f64> {
    if sample_count < 64 {
        return Err(Error::InvalidArgument(format!(
            "block sampling needs at least 64 points, got {sample_count}"
        )));
    }
    let v = unit(v)?;
    let perp = [-v[1], v[0]];
    let (a, b) = if l == 0 {
        (0.0, 2.0)
    } else {
        ((1u64 << (l - 1)) as f64, (1u64 << (l + 1)) as f64)
    };
    let mut best = 0.0_f64;
    // bases 5/3: base 2 resonates with the dyadic slab spans
    for (k, p) in halton::halton_pair(sample_count, 5, 3).enumerate() {
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        let s = sgn * (a + (b - a) * p[0]);
        let t = (2.0 * p[1] - 1.0) * x_max;
        let x = [s * v[0] + t * perp[0], s * v[1] + t * perp[1]];
        let val = psi(l, x[0] * v[0] + x[1] * v[1]) * sigma_hat(measure, x).norm();
        best = best.max(val);
    }
    Ok(best)
}

/// Which gauge a decay fit regresses against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayRegime {
    /// `|x₁| ≥ 1`, `|x₂| ≤ 1`; gauge `|x₁|`.
    TensorAxis1,
    /// `|x₂| ≥ 1`, `|x₁| ≤ 1`; gauge `|x₂|`.
    TensorAxis2,
    /// `|x₁|, |x₂| ≥ 1`; gauge `|x₁ x₂|`.
    TensorProduct,
    /// gauge `|x·v| ≥ 1`.
    Directional,
}

/// Result of a log-log decay fit `|σ̂| ≈ Ĉ · gauge^{-δ̂}`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub regime: DecayRegime,
    pub delta_hat: f64,
    /// Upper envelope constant: `max |σ̂| · gauge^{δ̂}` over the fit samples.
    pub c_hat: f64,
    pub residual_rms: f64,
    pub gauge_range: (f64, f64),
    pub used_samples: usize,
    pub dropped_zeros: usize,
}

/// Numerical zeros of oscillation are excluded from log fits.
pub const DECAY_DROP_THRESHOLD: f64 = 1e-13;
const MIN_FIT_SAMPLES: usize = 16;

/// Least-squares fit of `log |σ̂|` against `-log gauge` over the regime's
/// region. Samples outside the region or below [`DECAY_DROP_THRESHOLD`] are
/// dropped (the count is reported).
pub fn fit_decay(
    samples: &[([f64; 2], f64)],
    regime: DecayRegime,
    v: Option<[f64; 2]>,
) -> Result<DecayFit> {
    let v = match (regime, v) {
        (DecayRegime::Directional, Some(v)) => Some(unit(v)?),
        (DecayRegime::Directional, None) => {
            return Err(Error::InvalidArgument(
                "directional decay fit needs a unit vector v".into(),
            ))
        }
        _ => None,
    };
    let mut gauges = Vec::new();
    let mut vals = Vec::new();
    let mut dropped = 0usize;
    for &(x, s) in samples {
        let g = match regime {
            DecayRegime::TensorAxis1 => {
                if x[0].abs() < 1.0 || x[1].abs() > 1.0 {
                    continue;
                }
                x[0].abs()
            }
            DecayRegime::TensorAxis2 => {
                if x[1].abs() < 1.0 || x[0].abs() > 1.0 {
                    continue;
                }
                x[1].abs()
            }
            DecayRegime::TensorProduct => {
                if x[0].abs() < 1.0 || x[1].abs() < 1.0 {
                    continue;
                }
                (x[0] * x[1]).abs()
            }
            DecayRegime::Directional => {
                let v = v.unwrap();
                let g = (x[0] * v[0] + x[1] * v[1]).abs();
                if g < 1.0 {
                    continue;
                }
                g
            }
        };
        if s < DECAY_DROP_THRESHOLD {
            dropped += 1;
            continue;
        }
        gauges.push(g);
        vals.push(s);
    }
    if gauges.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: gauges.len(),
        });
    }
    let lg: Vec<f64> = gauges.iter().map(|g| g.ln()).collect();
    let ls: Vec<f64> = vals.iter().map(|s| s.ln()).collect();
    let n = lg.len() as f64;
    let mg = lg.iter().sum::<f64>() / n;
    let ms = ls.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (a, b) in lg.iter().zip(&ls) {
        cov += (a - mg) * (b - ms);
        var += (a - mg) * (a - mg);
    }
    if var == 0.0 {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: 1,
        });
    }
    let delta_hat = -cov / var;
    let intercept = ms + delta_hat * mg;
    let residual_rms = (lg
        .iter()
        .zip(&ls)
        .map(|(a, b)| {
            let r = b - (intercept - delta_hat * a);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let c_hat = gauges
        .iter()
        .zip(&vals)
        .map(|(g, s)| s * g.powf(delta_hat))
        .fold(0.0_f64, f64::max);
    let gmin = gauges.iter().cloned().fold(f64::INFINITY, f64::min);
    let gmax = gauges.iter().cloned().fold(0.0_f64, f64::max);
    Ok(DecayFit {
        regime,
        delta_hat,
        c_hat,
        residual_rms,
        gauge_range: (gmin, gmax),
        used_samples: gauges.len(),
        dropped_zeros: dropped,
    })
}

pub(crate) fn unit(v: [f64; 2]) -> Result<[f64; 2]> {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "direction vector must be nonzero, got [{}, {}]",
            v[0], v[1]
        )));
    }
    if (n - 1.0).abs() <= 1e-12 {
        Ok(v)
    } else {
        Ok([v[0] / n, v[1] / n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_circle_measure, make_flat_segment_measure};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn sigma_hat_at_zero_is_total_mass() {
        let m = make_circle_measure(256).unwrap();
        let z = sigma_hat(&m, [0.0, 0.0]);
        assert_relative_eq!(z.re, 2.0 * std::f64::consts::PI, max_relative = 1e-10);
        assert!(z.im.abs() < 1e-12);
    }

    #[test]
    fn flat_segment_transform_matches_closed_form() {
        // σ̂(x₁, x₂) = (1 - e^{-2πi x₁}) / (2πi x₁), independent of x₂
        let m = make_flat_segment_measure(64).unwrap();
        for (x1, x2) in [(0.7, 0.0), (3.3, 5.0), (9.1, -2.0)] {
            let got = sigma_hat(&m, [x1, x2]);
            let tp = 2.0 * std::f64::consts::PI * x1;
            let num = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -tp);
            let expect = num / Complex64::new(0.0, tp);
            assert_relative_eq!(got.re, expect.re, epsilon = 1e-10);
            assert_relative_eq!(got.im, expect.im, epsilon = 1e-10);
        }
        // zero frequency in x₁ gives the full mass regardless of x₂
        assert_relative_eq!(sigma_hat(&m, [0.0, 7.3]).re, 1.0, epsilon = 1e-12);
        // full-period cancellation at integer x₁
        assert!(sigma_hat(&m, [1.0, 0.37]).norm() <= 1e-10);
    }

    #[test]
    fn extend_of_constant_density_is_sigma_hat() {
        let m = make_circle_measure(64).unwrap();
        let f = Density::constant(&m);
        let spec = GridSpec::new(2.0, 8).unwrap();
        let e = extend(&m, &f, spec).unwrap();
        for j in 0..8 {
            for i in 0..8 {
                let x = spec.cell_center(i, j);
                let direct = sigma_hat(&m, x);
                let got = e.get(i, j);
                assert_relative_eq!(got.re, direct.re, epsilon = 1e-12);
                assert_relative_eq!(got.im, direct.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_node_density_is_unimodular() {
        let mut m = make_circle_measure(8).unwrap();
        m.nodes.truncate(1);
        m.weights.truncate(1);
        m.weights[0] = 1.0;
        m.total_mass = 1.0;
        let f = Density::constant(&m);
        let e = extend(&m, &f, GridSpec::new(5.0, 16).unwrap()).unwrap();
        for z in &e.values {
            assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn extension_is_bounded_by_l1_and_linear() {
        let m = make_flat_segment_measure(32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = Density::random_phases(&m, &mut rng);
        let g = Density::random_phases(&m, &mut rng);
        let spec = GridSpec::new(4.0, 16).unwrap();
        let ef = extend(&m, &f, spec).unwrap();
        let eg = extend(&m, &g, spec).unwrap();
        assert!(ef.values.iter().all(|z| z.norm() <= f.l1 + 1e-12));
        let sum = Density::new(
            f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect(),
            &m,
        )
        .unwrap();
        let esum = extend(&m, &sum, spec).unwrap();
        for (z, (a, b)) in esum.values.iter().zip(ef.values.iter().zip(&eg.values)) {
            assert_relative_eq!(z.re, (a + b).re, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(z.im, (a + b).im, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_density_extends_to_zero() {
        let m = make_circle_measure(16).unwrap();
        let f = Density::new(vec![Complex64::new(0.0, 0.0); 16], &m).unwrap();
        let e = extend(&m, &f, GridSpec::new(1.0, 4).unwrap()).unwrap();
        assert!(e.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn psi0_plateau_and_support() {
        assert_eq!(psi0(0.5), 1.0);
        assert_eq!(psi0(-1.0), 1.0);
        assert_eq!(psi0(3.0), 0.0);
        assert_eq!(psi0(2.0), 0.0);
        assert!(psi0(1.5) > 0.0 && psi0(1.5) < 1.0);
    }

    #[test]
    fn psi_unrolls_its_definition() {
        let r = 5.0;
        assert_relative_eq!(psi(3, r), psi0(5.0 / 8.0) - psi0(5.0 / 4.0), epsilon = 1e-15);
        assert_relative_eq!(psi(3, r), 1.0 - psi0(1.25), epsilon = 1e-15);
    }

    #[test]
    fn psi_partition_of_unity() {
        for k in 0..10_000u64 {
            let r = (k as f64 / 9_999.0) * 2048.0 * 2.0 - 2048.0;
            let total: f64 = (0..=12).map(|l| psi(l, r)).sum();
            assert!((total - 1.0).abs() <= 1e-12, "r = {r}, total = {total}");
        }
    }

    proptest! {
        #[test]
        fn psi_support_is_exact(l in 1u32..=12, r in -5000.0f64..5000.0) {
            let lo = (1u64 << (l - 1)) as f64;
            let hi = (1u64 << (l + 1)) as f64;
            let val = psi(l, r);
            if r.abs() <= lo || r.abs() >= hi {
                prop_assert!(val == 0.0);
            } else if r.abs() > lo * 1.05 && r.abs() < hi * 0.98 {
                // strictly positive except in the edge skin where the glue
                // ratio e^{-1/s} falls below f64 epsilon and rounds away
                prop_assert!(val > 0.0);
            }
        }
    }

    #[test]
    fn tensor_block_zero_zero_bounded_by_mass() {
        let m = make_circle_measure(128).unwrap();
        let b = block_bounds_tensor(&m, 0, 0, 128).unwrap();
        assert!(b <= 2.0 * std::f64::consts::PI + 1e-12);
        assert!(block_bounds_tensor(&m, 0, 0, 32).is_err());
    }

    #[test]
    fn flat_segment_block_decay_in_x1() {
        // |σ̂| ≤ 1/(π|x₁|) so the l = 8 block is at most 1/(π·128)
        let m = make_flat_segment_measure(4096).unwrap();
        let b = block_bounds_directional(&m, [1.0, 0.0], 8, 256, 2.0).unwrap();
        assert!(b <= 1.0 / (std::f64::consts::PI * 128.0) * 1.05, "b = {b}");
    }

    #[test]
    fn decay_fit_flat_segment_closed_form() {
        // feed the analytic |σ̂| and recover δ ≈ 1
        let samples: Vec<([f64; 2], f64)> = (0..512)
            .map(|k| {
                let x1 = 10f64.powf(3.0 * k as f64 / 511.0);
                let s = (std::f64::consts::PI * x1).sin().abs() / (std::f64::consts::PI * x1);
                ([x1, 0.0], s.abs())
            })
            .collect();
        let fit = fit_decay(&samples, DecayRegime::Directional, Some([1.0, 0.0])).unwrap();
        assert!((0.9..=1.1).contains(&fit.delta_hat), "δ̂ = {}", fit.delta_hat);
    }

    #[test]
    fn decay_fit_constant_signal_has_zero_slope() {
        let samples: Vec<([f64; 2], f64)> = (0..64)
            .map(|k| ([1.5 + k as f64, 0.0], 3.0))
            .collect();
        let fit = fit_decay(&samples, DecayRegime::Directional, Some([1.0, 0.0])).unwrap();
        assert!(fit.delta_hat.abs() < 1e-9);
        assert_relative_eq!(fit.c_hat, 3.0 * fit.gauge_range.1.powf(fit.delta_hat), max_relative = 1e-9);
    }

    #[test]
    fn decay_fit_needs_enough_samples() {
        let samples = vec![([2.0, 0.0], 1.0); 10];
        assert!(matches!(
            fit_decay(&samples, DecayRegime::Directional, Some([1.0, 0.0])),
            Err(Error::InsufficientData { .. })
        ));
    }
}
