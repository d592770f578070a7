//! The exponent-bootstrap engine and dimensional maximal-function probes.
//!
//! The recursion `β_k = β + β_{k-1}/p`, `C_k = M C_{k-1}^{1/p}` with
//! `p = α/(α-β)` contracts geometrically to `(α, M^{α/β})`; the closed forms
//! are carried alongside so both routes can be cross-checked at every step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::weights::{ball_functional, box_functional, tube_functional, FunctionalEstimate};

/// Which growth functional a maximal-function probe is built on.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum FunctionalFlavor {
    Ball,
    Box,
    Tube { v: [f64; 2] },
}

impl FunctionalFlavor {
    pub fn evaluate(&self, h_grid: &Grid<f64>, alpha: f64) -> Result<FunctionalEstimate> {
        match self {
            FunctionalFlavor::Ball => ball_functional(h_grid, alpha),
            FunctionalFlavor::Box => box_functional(h_grid, alpha),
            FunctionalFlavor::Tube { v } => tube_functional(h_grid, alpha, *v),
        }
    }
}

/// Parameters of one bootstrap run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BootstrapParams {
    pub alpha: f64,
    pub beta: f64,
    /// `p = α/(α-β)`; stored so the conjugate identity is visible in reports.
    pub p: f64,
    pub beta0: f64,
    pub c0: f64,
    pub m_const: f64,
    pub truncation: f64,
    pub k_max: usize,
}

impl BootstrapParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        beta0: f64,
        c0: f64,
        m_const: f64,
        truncation: f64,
        k_max: usize,
    ) -> Result<Self> {
        if !(0.0 < beta && beta < alpha && alpha <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < β < α ≤ 2, got α = {alpha}, β = {beta}"
            )));
        }
        if !(c0 > 0.0) || !(m_const > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "seed and step constants must be positive, got C₀ = {c0}, M = {m_const}"
            )));
        }
        if !(beta0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "seed exponent must be positive, got β₀ = {beta0}"
            )));
        }
        let p = alpha / (alpha - beta);
        debug_assert!((p * (alpha - beta) - alpha).abs() <= 1e-12 * alpha);
        Ok(BootstrapParams {
            alpha,
            beta,
            p,
            beta0,
            c0,
            m_const,
            truncation,
            k_max,
        })
    }

    /// Defaults: `β₀ = 1`, `N = 4`, `k_max = 60`.
    pub fn with_seed_defaults(alpha: f64, beta: f64, c0: f64, m_const: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, c0, m_const, 4.0, 60)
    }
}

/// The recursion trace with closed forms and limit targets.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapTrace {
    pub beta_k: Vec<f64>,
    pub c_k: Vec<f64>,
    pub beta_k_closed: Vec<f64>,
    pub c_k_closed: Vec<f64>,
    pub beta_limit: f64,
    pub c_limit: f64,
}

/// Runs the recursion and its closed forms for `k = 0..=k_max`.
pub fn bootstrap_sequence(params: &BootstrapParams) -> BootstrapTrace {
    let p = params.p;
    let q = 1.0 / p;
    let mut beta_k = Vec::with_capacity(params.k_max + 1);
    let mut c_k = Vec::with_capacity(params.k_max + 1);
    beta_k.push(params.beta0);
    c_k.push(params.c0);
    for k in 1..=params.k_max {
        beta_k.push(params.beta + beta_k[k - 1] / p);
        c_k.push(params.m_const * c_k[k - 1].powf(q));
    }
    let geo = |k: usize| (1.0 - q.powi(k as i32)) / (1.0 - q);
    let beta_k_closed: Vec<f64> = (0..=params.k_max)
        .map(|k| params.beta * geo(k) + params.beta0 * q.powi(k as i32))
        .collect();
    let c_k_closed: Vec<f64> = (0..=params.k_max)
        .map(|k| params.m_const.powf(geo(k)) * params.c0.powf(q.powi(k as i32)))
        .collect();
    BootstrapTrace {
        beta_k,
        c_k,
        beta_k_closed,
        c_k_closed,
        beta_limit: params.alpha,
        c_limit: params.m_const.powf(params.alpha / params.beta),
    }
}

/// `F_N = N⁻¹ χ_N F` with `χ_N` the indicator of `B(0,N) ∩ {F ≤ N}`.
pub fn truncate_normalize(f: &Grid<f64>, n_level: f64) -> Result<Grid<f64>> {
    if !(n_level >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation level must be ≥ 1, got {n_level}"
        )));
    }
    let spec = f.spec;
    let mut out = Grid::zeros(spec);
    for j in 0..spec.n {
        for i in 0..spec.n {
            let [x1, x2] = spec.cell_center(i, j);
            let v = f.values[spec.index(i, j)];
            if v <= n_level && x1 * x1 + x2 * x2 <= n_level * n_level {
                out.set(i, j, v / n_level);
            }
        }
    }
    Ok(out)
}

/// Report of one weight-upgrade verification.
#[derive(Debug, Clone, Serialize)]
pub struct HolderStepReport {
    /// `functional_β(ℋ)` for `ℋ = F_N^{β₀/p} H`.
    pub lhs: f64,
    /// `C₀^{1/p} · functional_α(H)` with the measured `C₀`.
    pub rhs: f64,
    pub measured_c0: f64,
    pub functional_alpha: f64,
    /// `lhs / rhs`; at matched discretization this cannot exceed 1 beyond
    /// floating-point noise.
    pub ratio: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Discretization slack for the upgrade checks; the discrete inequality is
/// exact, so this only absorbs FFT round-off on the box route.
pub const HOLDER_SLACK: f64 = 1.05;

/// Builds `ℋ = F_N^{β₀/p} H` and verifies the weight upgrade
/// `functional_β(ℋ) ≤ C₀^{1/p} functional_α(H)` with matched discretization,
/// where `C₀ = ∫F_N^{β₀}H / functional_α(H)` is measured from the seed bound.
pub fn holder_step_verify(
    f: &Grid<f64>,
    h_weight: &Grid<f64>,
    params: &BootstrapParams,
    flavor: FunctionalFlavor,
) -> Result<HolderStepReport> {
    if f.spec != h_weight.spec {
        return Err(Error::InvalidArgument(
            "F and H must share a grid".into(),
        ));
    }
    h_weight.validate_weight()?;
    let f_n = truncate_normalize(f, params.truncation)?;
    let func_alpha = flavor.evaluate(h_weight, params.alpha)?.value;
    if func_alpha == 0.0 {
        return Err(Error::DegenerateWeight(format!(
            "functional_α(H) = 0 on this window (α = {})",
            params.alpha
        )));
    }
    let seed_integral: f64 = {
        let h = f.spec.h();
        h * h
            * f_n
                .values
                .iter()
                .zip(&h_weight.values)
                .map(|(a, b)| a.powf(params.beta0) * b)
                .sum::<f64>()
    };
    let measured_c0 = seed_integral / func_alpha;
    let upgraded = Grid {
        spec: f.spec,
        values: f_n
            .values
            .iter()
            .zip(&h_weight.values)
            .map(|(a, b)| a.powf(params.beta0 / params.p) * b)
            .collect(),
    };
    upgraded.validate_weight()?;
    let lhs = flavor.evaluate(&upgraded, params.beta)?.value;
    let rhs = measured_c0.powf(1.0 / params.p) * func_alpha;
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(HolderStepReport {
        lhs,
        rhs,
        measured_c0,
        functional_alpha: func_alpha,
        ratio,
        slack: HOLDER_SLACK,
        holds: ratio <= HOLDER_SLACK,
    })
}

/// `Q(α) ≤ (α/β) Q(β)`: transfers an exponent bound upward in dimension.
pub fn exponent_transfer(alpha: f64, beta: f64, q_beta: f64) -> Result<f64> {
    if !(0.0 < beta && beta < alpha && alpha <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < β < α ≤ 2, got α = {alpha}, β = {beta}"
        )));
    }
    if !(q_beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent bound must be positive, got {q_beta}"
        )));
    }
    Ok(alpha / beta * q_beta)
}

/// One candidate row of a maximal-function lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateValue {
    pub name: String,
    pub functional: f64,
    pub integral: f64,
    /// `∫F^α H / functional(H)`, or `None` when the candidate is degenerate.
    pub ratio: Option<f64>,
}

/// Lower bound for a dimensional maximal function over a candidate set.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalProbe {
    pub alpha: f64,
    pub flavor: FunctionalFlavor,
    pub candidates: Vec<CandidateValue>,
    /// `max ratio^{1/α}` over usable candidates.
    pub lower_bound: f64,
    pub best_candidate: String,
}

/// Evaluates `(∫F^α H)/functional(H)` per candidate and returns the best
/// `ratio^{1/α}`. Candidates with `functional(H) ∉ (0, ∞)` are reported but
/// excluded from the bound.
pub fn maximal_lower_bound(
    f: &Grid<f64>,
    alpha: f64,
    flavor: FunctionalFlavor,
    candidates: &[(String, Grid<f64>)],
) -> Result<MaximalProbe> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "candidate weight set is empty".into(),
        ));
    }
    let h = f.spec.h();
    let mut rows = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, &str)> = None;
    let mut usable = 0usize;
    for (name, cand) in candidates {
        if cand.spec != f.spec {
            return Err(Error::InvalidArgument(format!(
                "candidate `{name}` lives on a different grid"
            )));
        }
        cand.validate_weight()?;
        let functional = flavor.evaluate(cand, alpha)?.value;
        let integral = h
            * h
            * f.values
                .iter()
                .zip(&cand.values)
                .map(|(a, b)| a.powf(alpha) * b)
                .sum::<f64>();
        let ratio = if functional > 0.0 && functional.is_finite() {
            usable += 1;
            let r = integral / functional;
            if best.map_or(true, |(b, _)| r > b) {
                best = Some((r, name));
            }
            Some(r)
        } else {
            None
        };
        rows.push(CandidateValue {
            name: name.clone(),
            functional,
            integral,
            ratio,
        });
    }
    if usable == 0 {
        return Err(Error::DegenerateWeight(
            "every candidate has a degenerate functional".into(),
        ));
    }
    let (best_ratio, best_name) = best.unwrap();
    Ok(MaximalProbe {
        alpha,
        flavor,
        candidates: rows,
        lower_bound: best_ratio.max(0.0).powf(1.0 / alpha),
        best_candidate: best_name.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn fixed_point_when_seed_equals_alpha() {
        let p = BootstrapParams::with_seed_defaults(1.0, 0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.p, 2.0);
        let tr = bootstrap_sequence(&p);
        for &b in &tr.beta_k {
            assert_relative_eq!(b, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn double_exponential_constant_anchor() {
        // M = 1, C₀ = 4, p = 2: C_k = 4^{2^{-k}} → 1
        let p = BootstrapParams::with_seed_defaults(1.0, 0.5, 4.0, 1.0).unwrap();
        let tr = bootstrap_sequence(&p);
        assert_relative_eq!(tr.c_k[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(tr.c_k[2], 2.0_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(tr.c_limit, 1.0);
        assert!((tr.c_k[60] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beta_recursion_unrolled_by_hand() {
        // α = 2, β = 1 (p = 2), β₀ = 1: β_k = 2 - 2^{-k}
        let p = BootstrapParams::with_seed_defaults(2.0, 1.0, 1.0, 1.0).unwrap();
        let tr = bootstrap_sequence(&p);
        assert_relative_eq!(tr.beta_k[1], 1.5, epsilon = 1e-14);
        assert_relative_eq!(tr.beta_k[2], 1.75, epsilon = 1e-14);
        assert_relative_eq!(tr.beta_k[3], 1.875, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BootstrapParams::with_seed_defaults(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(BootstrapParams::with_seed_defaults(2.5, 1.0, 1.0, 1.0).is_err());
        assert!(BootstrapParams::with_seed_defaults(1.0, 0.5, 0.0, 1.0).is_err());
        assert!(BootstrapParams::with_seed_defaults(1.0, 0.5, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn recursion_matches_closed_form(
            alpha in 0.2f64..2.0,
            frac in 0.05f64..0.95,
            beta0 in 0.1f64..2.0,
            c0 in 0.01f64..100.0,
            m in 0.01f64..100.0,
        ) {
            let beta = alpha * frac;
            let params = BootstrapParams::new(alpha, beta, beta0, c0, m, 4.0, 60).unwrap();
            let tr = bootstrap_sequence(&params);
            for k in 0..=60 {
                prop_assert!((tr.beta_k[k] - tr.beta_k_closed[k]).abs()
                    <= 1e-12 * tr.beta_k[k].abs().max(1.0));
                prop_assert!((tr.c_k[k] - tr.c_k_closed[k]).abs()
                    <= 1e-12 * tr.c_k[k].abs().max(1.0));
            }
        }

        #[test]
        fn geometric_contraction_identity(
            alpha in 0.2f64..2.0,
            frac in 0.05f64..0.95,
            beta0 in 0.1f64..2.0,
        ) {
            let beta = alpha * frac;
            let params = BootstrapParams::new(alpha, beta, beta0, 1.0, 1.0, 4.0, 40).unwrap();
            let tr = bootstrap_sequence(&params);
            let p = params.p;
            for k in 0..=40usize {
                let expect = (beta0 - alpha).abs() * p.powi(-(k as i32));
                let got = (tr.beta_k[k] - alpha).abs();
                prop_assert!((got - expect).abs() <= 1e-12 * alpha.max(1.0),
                    "k = {k}: got {got}, expect {expect}");
            }
        }

        #[test]
        fn exponent_transfer_is_multiplicative(
            alpha in 0.3f64..2.0,
            f1 in 0.1f64..0.9,
            f2 in 0.1f64..0.9,
            q in 0.1f64..10.0,
        ) {
            let gamma = alpha * f1;
            let beta = gamma * f2;
            let direct = exponent_transfer(alpha, beta, q).unwrap();
            let via = exponent_transfer(alpha, gamma, exponent_transfer(gamma, beta, q).unwrap()).unwrap();
            prop_assert!((direct - via).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn truncate_normalize_piecewise_cases() {
        let spec = GridSpec::new(1.0, 16).unwrap();
        let two = Grid::from_fn(spec, |_, _| 2.0);
        let t = truncate_normalize(&two, 1.0).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.0));

        let one = Grid::from_fn(spec, |_, _| 1.0);
        let t = truncate_normalize(&one, 2.0).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.5));

        let spec = GridSpec::new(2.0, 64).unwrap();
        let radial = Grid::from_fn(spec, |x1, x2| (x1 * x1 + x2 * x2).sqrt());
        let t = truncate_normalize(&radial, 1.0).unwrap();
        for j in 0..64 {
            for i in 0..64 {
                let [x1, x2] = spec.cell_center(i, j);
                let r = (x1 * x1 + x2 * x2).sqrt();
                let expect = if r <= 1.0 { r } else { 0.0 };
                assert_relative_eq!(t.get(i, j), expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn holder_step_zero_f_is_degenerate_zero() {
        let spec = GridSpec::new(1.0, 16).unwrap();
        let f = Grid::zeros(spec);
        let h = Grid::from_fn(spec, |x1, x2| {
            if x1.abs() <= 0.5 && x2.abs() <= 0.5 {
                1.0
            } else {
                0.0
            }
        });
        let params = BootstrapParams::with_seed_defaults(1.0, 0.5, 1.0, 1.0).unwrap();
        let rep = holder_step_verify(&f, &h, &params, FunctionalFlavor::Box).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.ratio, 0.0);
        assert!(rep.holds);
    }

    #[test]
    fn holder_step_random_pairs_never_violate() {
        let spec = GridSpec::new(1.0, 32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let params = BootstrapParams::with_seed_defaults(1.0, 0.5, 1.0, 1.0).unwrap();
        for _ in 0..5 {
            let f = Grid {
                spec,
                values: (0..spec.cell_count())
                    .map(|_| rng.random_range(0.0..3.0))
                    .collect(),
            };
            let h = Grid {
                spec,
                values: (0..spec.cell_count())
                    .map(|_| rng.random_range(0.0..1.0))
                    .collect(),
            };
            let rep = holder_step_verify(&f, &h, &params, FunctionalFlavor::Box).unwrap();
            assert!(rep.holds, "ratio = {}", rep.ratio);
        }
    }

    #[test]
    fn maximal_lower_bound_ball_anchor() {
        // F ≡ 1, candidate 1_{B(0,1)}: ∫F^α H = π = A_α, ratio 1
        let spec = GridSpec::new(2.0, 128).unwrap();
        let f = Grid::from_fn(spec, |_, _| 1.0);
        let ball = Grid::from_fn(spec, |x1, x2| {
            if x1 * x1 + x2 * x2 <= 1.0 {
                1.0
            } else {
                0.0
            }
        });
        for alpha in [0.7, 1.0] {
            let probe = maximal_lower_bound(
                &f,
                alpha,
                FunctionalFlavor::Ball,
                &[("unit_ball".into(), ball.clone())],
            )
            .unwrap();
            assert_relative_eq!(probe.lower_bound, 1.0, max_relative = 0.05);
        }
        let zero = Grid::zeros(spec);
        let probe = maximal_lower_bound(
            &zero,
            1.0,
            FunctionalFlavor::Ball,
            &[("unit_ball".into(), ball)],
        )
        .unwrap();
        assert_eq!(probe.lower_bound, 0.0);
    }

    #[test]
    fn maximal_lower_bound_monotone_in_candidates() {
        let spec = GridSpec::new(2.0, 32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let f = Grid {
            spec,
            values: (0..spec.cell_count())
                .map(|_| rng.random_range(0.0..2.0))
                .collect(),
        };
        let c1 = Grid::from_fn(spec, |x1, x2| {
            if x1 * x1 + x2 * x2 <= 1.0 {
                1.0
            } else {
                0.0
            }
        });
        let c2 = Grid::from_fn(spec, |x1, _| if x1.abs() <= 0.5 { 1.0 } else { 0.0 });
        let small = maximal_lower_bound(
            &f,
            1.0,
            FunctionalFlavor::Ball,
            &[("b".into(), c1.clone())],
        )
        .unwrap();
        let big = maximal_lower_bound(
            &f,
            1.0,
            FunctionalFlavor::Ball,
            &[("b".into(), c1), ("s".into(), c2)],
        )
        .unwrap();
        assert!(big.lower_bound >= small.lower_bound - 1e-12);
    }
}
