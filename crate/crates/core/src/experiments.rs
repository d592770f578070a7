//! End-to-end inequality probes: weighted-norm ratios against tube suprema,
//! local growth studies, weak-type level-set bounds, the convolution bound,
//! and extremizer search over densities and weight parameters.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{extend, sigma_hat, Density};
use crate::grid::{Grid, GridSpec};
use crate::measures::DiscreteMeasure;
use crate::weights::{
    box_functional, sup_tube_mass, tube_functional, TensorWeight, Tube, TubeFamily,
};

/// How the density `f` is generated on the measure's nodes.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum FSpec {
    Constant,
    RandomPhases { seed: u64 },
    Focused { x0: [f64; 2] },
}

impl FSpec {
    pub fn realize(&self, measure: &DiscreteMeasure) -> Density {
        match self {
            FSpec::Constant => Density::constant(measure),
            FSpec::RandomPhases { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Density::random_phases(measure, &mut rng)
            }
            FSpec::Focused { x0 } => Density::focused(measure, *x0),
        }
    }
}

/// Grid weights used by the probes.
#[derive(Debug, Clone, Serialize)]
pub enum WeightSpec {
    /// Indicator of the whole window.
    Window,
    Ball { center: [f64; 2], radius: f64 },
    /// Indicator of a tube.
    TubeIndicator {
        dir: [f64; 2],
        offset: f64,
        cross_section: f64,
    },
    Tensor(TensorWeight),
}

impl WeightSpec {
    pub fn realize(&self, spec: GridSpec) -> Result<Grid<f64>> {
        Ok(match self {
            WeightSpec::Window => Grid::from_fn(spec, |_, _| 1.0),
            WeightSpec::Ball { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "ball weight needs a positive radius, got {radius}"
                    )));
                }
                let (c, r) = (*center, *radius);
                Grid::from_fn(spec, |x1, x2| {
                    let (dx, dy) = (x1 - c[0], x2 - c[1]);
                    if dx * dx + dy * dy <= r * r {
                        1.0
                    } else {
                        0.0
                    }
                })
            }
            WeightSpec::TubeIndicator {
                dir,
                offset,
                cross_section,
            } => {
                let tube = Tube::new(*dir, *offset, *cross_section)?;
                Grid::from_fn(spec, |x1, x2| {
                    if tube.contains([x1, x2]) {
                        1.0
                    } else {
                        0.0
                    }
                })
            }
            WeightSpec::Tensor(t) => {
                let t = TensorWeight::new(t.profile, t.a, t.b)?;
                t.realize(spec)
            }
        })
    }
}

/// One weighted-norm-vs-tube-supremum measurement.
#[derive(Debug, Clone, Serialize)]
pub struct MtProbe {
    pub q: f64,
    /// `h² Σ |Ef|^q w` over the window.
    pub lhs: f64,
    /// Same sum restricted to `|x|_∞ ≤ L/2`, for truncation sensitivity.
    pub lhs_half_window: f64,
    /// `(sup_T w(T)) ‖f‖_{L²(σ)}^q`.
    pub rhs: f64,
    pub ratio: f64,
    pub sup_tube: f64,
    pub witness_tube: Tube,
    pub f_l2: f64,
    pub f_l1: f64,
    pub l: f64,
    pub n: usize,
    /// Set when `rhs = 0` while `lhs > 0`; with an exact estimate this can
    /// only come from discretization artifacts and demands refinement.
    pub failure_witness: bool,
}

/// Computes both sides of the weighted estimate on the grid carrying `w`.
pub fn mt_ratio(
    measure: &DiscreteMeasure,
    f: &Density,
    w: &Grid<f64>,
    q: f64,
    family: &TubeFamily,
) -> Result<MtProbe> {
    if !(q > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "the exponent q must be positive, got {q}"
        )));
    }
    if w.values.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateWeight(
            "the weight vanishes identically on the window".into(),
        ));
    }
    let spec = w.spec;
    let ef = extend(measure, f, spec)?;
    let h = spec.h();
    let mut lhs = 0.0;
    let mut lhs_half = 0.0;
    for j in 0..spec.n {
        for i in 0..spec.n {
            let [x1, x2] = spec.cell_center(i, j);
            let term = ef.values[spec.index(i, j)].norm().powf(q) * w.values[spec.index(i, j)];
            lhs += term;
            if x1.abs() <= spec.l / 2.0 && x2.abs() <= spec.l / 2.0 {
                lhs_half += term;
            }
        }
    }
    lhs *= h * h;
    lhs_half *= h * h;
    let (sup_tube, witness_tube) = sup_tube_mass(w, family)?;
    let rhs = sup_tube * f.l2.powf(q);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(MtProbe {
        q,
        lhs,
        lhs_half_window: lhs_half,
        rhs,
        ratio,
        sup_tube,
        witness_tube,
        f_l2: f.l2,
        f_l1: f.l1,
        l: spec.l,
        n: spec.n,
        failure_witness: rhs == 0.0 && lhs > 0.0,
    })
}

/// One row of the local growth study.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    /// `∫_{|x| ≤ R} |Ef|² w`.
    pub lhs: f64,
    /// `sup_T (w·χ_{B(0,R)})(T)` over the angular net.
    pub sup_tube: f64,
    /// `R^{1/2} · sup · ‖f‖²`.
    pub rhs_gauge: f64,
    pub normalized: f64,
}

/// Local growth study of `∫_{|x|≤R} |Ef|² w` against `R^{1/2} sup w(T)`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    /// Log-log slope of `lhs/(sup·‖f‖²)` against `R`, when fittable.
    pub fitted_exponent: Option<f64>,
    pub within_half_plus_margin: Option<bool>,
}

const GROWTH_EXPONENT_MARGIN: f64 = 0.1;

pub fn local_mt_growth(
    measure: &DiscreteMeasure,
    f: &Density,
    w: &Grid<f64>,
    r_list: &[f64],
    dtheta: f64,
) -> Result<GrowthTable> {
    if r_list.is_empty() || r_list.windows(2).any(|p| p[1] <= p[0]) || r_list[0] < 1.0 {
        return Err(Error::InvalidArgument(
            "radius list must be increasing with R ≥ 1".into(),
        ));
    }
    let spec = w.spec;
    if r_list.last().copied().unwrap_or(1.0) > spec.l * 2.0_f64.sqrt() {
        return Err(Error::InvalidArgument(format!(
            "largest radius {} exceeds the window diagonal",
            r_list.last().unwrap()
        )));
    }
    let ef = extend(measure, f, spec)?;
    let h = spec.h();
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let mut lhs = 0.0;
        let mut clipped = Grid::zeros(spec);
        for j in 0..spec.n {
            for i in 0..spec.n {
                let [x1, x2] = spec.cell_center(i, j);
                if x1 * x1 + x2 * x2 <= r * r {
                    let idx = spec.index(i, j);
                    lhs += ef.values[idx].norm_sqr() * w.values[idx];
                    clipped.values[idx] = w.values[idx];
                }
            }
        }
        lhs *= h * h;
        let sup = if clipped.values.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            sup_tube_mass(&clipped, &TubeFamily::All { dtheta })?.0
        };
        let rhs_gauge = r.sqrt() * sup * f.l2 * f.l2;
        let normalized = if sup > 0.0 {
            lhs / (sup * f.l2 * f.l2)
        } else {
            0.0
        };
        rows.push(GrowthRow {
            r,
            lhs,
            sup_tube: sup,
            rhs_gauge,
            normalized,
        });
    }
    // slope of log(normalized) vs log R over usable rows
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.normalized > 0.0)
        .map(|row| (row.r.ln(), row.normalized.ln()))
        .collect();
    let fitted = if usable.len() >= 2 {
        let n = usable.len() as f64;
        let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
        let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
        let cov: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let var: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        if var > 0.0 {
            Some(cov / var)
        } else {
            None
        }
    } else {
        None
    };
    Ok(GrowthTable {
        rows,
        fitted_exponent: fitted,
        within_half_plus_margin: fitted.map(|s| s <= 0.5 + GROWTH_EXPONENT_MARGIN),
    })
}

/// Which weak-type bound a level-set probe instantiates.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum LevelSetFlavor {
    /// `μ(G) ≲ ‖f‖ 𝔸_α(H) λ^{-1}` — the product-box functional, k = 1.
    Tensor,
    /// `μ(G) ≲ 𝒜_α(H) ‖f‖² λ^{-2}` — the tube functional, k = 2.
    Directional([f64; 2]),
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetRow {
    pub lambda: f64,
    pub mu_g: f64,
    /// Empirical constant `μ(G_λ) λ^k / (‖f‖^k functional)`.
    pub c_lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetProbe {
    pub rows: Vec<LevelSetRow>,
    pub max_c: f64,
    pub functional_value: f64,
    pub k: u32,
    pub f_l1: f64,
    pub f_l2: f64,
}

/// Sweeps `λ` over a log grid in `(4‖f‖₁·10⁻³, 4‖f‖₁]` and measures
/// `μ(G_λ)` for `G_λ = {Re Ef ≥ λ/4}` under `dμ = H dx`.
pub fn level_set_probe(
    measure: &DiscreteMeasure,
    f: &Density,
    h_weight: &Grid<f64>,
    alpha: f64,
    flavor: LevelSetFlavor,
    lambda_count: usize,
) -> Result<LevelSetProbe> {
    if lambda_count < 2 {
        return Err(Error::InvalidArgument(
            "need at least two λ samples".into(),
        ));
    }
    h_weight.validate_weight()?;
    let spec = h_weight.spec;
    let ef = extend(measure, f, spec)?;
    let h = spec.h();
    let (functional_value, k) = match flavor {
        LevelSetFlavor::Tensor => (box_functional(h_weight, alpha)?.value, 1u32),
        LevelSetFlavor::Directional(v) => (tube_functional(h_weight, alpha, v)?.value, 2u32),
    };
    if functional_value == 0.0 {
        return Err(Error::DegenerateWeight(format!(
            "the flavor functional vanishes at α = {alpha}"
        )));
    }
    let lam_max = 4.0 * f.l1;
    let lam_min = lam_max * 1e-3;
    let mut rows = Vec::with_capacity(lambda_count);
    let mut max_c = 0.0_f64;
    for idx in 0..lambda_count {
        let frac = idx as f64 / (lambda_count - 1) as f64;
        let lambda = lam_min * (lam_max / lam_min).powf(frac);
        let threshold = lambda / 4.0;
        let mut mu = 0.0;
        for (z, w) in ef.values.iter().zip(&h_weight.values) {
            if z.re >= threshold {
                mu += w;
            }
        }
        mu *= h * h;
        let c_lambda = mu * lambda.powi(k as i32) / (f.l2.powi(k as i32) * functional_value);
        max_c = max_c.max(c_lambda);
        rows.push(LevelSetRow {
            lambda,
            mu_g: mu,
            c_lambda,
        });
    }
    Ok(LevelSetProbe {
        rows,
        max_c,
        functional_value,
        k,
        f_l1: f.l1,
        f_l2: f.l2,
    })
}

/// Result of probing the pointwise convolution bound
/// `|σ̂ ∗ (χ_G H dx)(x)| ≲ 𝒜_α(H)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvolutionBoundReport {
    pub max_abs: f64,
    pub functional_value: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

/// Evaluates `(σ̂ ∗ χ_G H)(x) = h² Σ_y σ̂(x-y) χ_G(y) H(y)` on a subsampled
/// set of grid centers and reports `max |·| / 𝒜_α(H)`.
///
/// The kernel is tabulated once on the offset lattice `(i-i')h`, so the whole
/// probe costs one `σ̂` pass plus dense lookups.
pub fn convolution_bound_probe(
    measure: &DiscreteMeasure,
    h_weight: &Grid<f64>,
    g_mask: &Grid<f64>,
    alpha: f64,
    v: [f64; 2],
    sample_stride: usize,
) -> Result<ConvolutionBoundReport> {
    h_weight.validate_weight()?;
    if g_mask.spec != h_weight.spec {
        return Err(Error::InvalidArgument(
            "mask and weight must share a grid".into(),
        ));
    }
    if g_mask.values.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidArgument(
            "the level-set mask must be 0/1 valued".into(),
        ));
    }
    let stride = sample_stride.max(1);
    let spec = h_weight.spec;
    let n = spec.n;
    let h = spec.h();
    let functional_value = tube_functional(h_weight, alpha, v)?.value;
    if functional_value == 0.0 {
        return Err(Error::DegenerateWeight(format!(
            "𝒜_α(H) = 0 at α = {alpha}"
        )));
    }
    // masked field is often sparse; collect its support once
    let mut support: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let val = g_mask.values[spec.index(i, j)] * h_weight.values[spec.index(i, j)];
            if val != 0.0 {
                support.push((i, j, val));
            }
        }
    }
    if support.is_empty() {
        return Ok(ConvolutionBoundReport {
            max_abs: 0.0,
            functional_value,
            max_ratio: 0.0,
            samples: 0,
        });
    }
    // kernel on the offset lattice: K[(di, dj)] = σ̂(di·h, dj·h)
    let m = 2 * n - 1;
    let kernel: Vec<Complex64> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..m * m)
                .into_par_iter()
                .map(|idx| {
                    let dj = (idx / m) as i64 - (n as i64 - 1);
                    let di = (idx % m) as i64 - (n as i64 - 1);
                    sigma_hat(measure, [di as f64 * h, dj as f64 * h])
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..m * m)
                .map(|idx| {
                    let dj = (idx / m) as i64 - (n as i64 - 1);
                    let di = (idx % m) as i64 - (n as i64 - 1);
                    sigma_hat(measure, [di as f64 * h, dj as f64 * h])
                })
                .collect()
        }
    };
    let at = |di: i64, dj: i64| -> Complex64 {
        kernel[(dj + n as i64 - 1) as usize * m + (di + n as i64 - 1) as usize]
    };
    let mut max_abs = 0.0_f64;
    let mut samples = 0usize;
    for j in (0..n).step_by(stride) {
        for i in (0..n).step_by(stride) {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(yi, yj, val) in &support {
                acc += at(i as i64 - yi as i64, j as i64 - yj as i64) * val;
            }
            max_abs = max_abs.max((h * h * acc).norm());
            samples += 1;
        }
    }
    Ok(ConvolutionBoundReport {
        max_abs,
        functional_value,
        max_ratio: max_abs / functional_value,
        samples,
    })
}

/// Adjustable parameters of the extremizer search.
#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub iterations: usize,
    pub seed: u64,
    /// Iterations between randomized restarts.
    pub restart_every: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub best: MtProbe,
    pub best_weight: TensorWeight,
    /// Phases of the best density at the measure's nodes.
    pub best_phases: Vec<f64>,
    /// `(iteration, best-so-far ratio)` whenever the incumbent improved.
    pub trace: Vec<(usize, f64)>,
    pub evaluations: usize,
}

/// Coordinate ascent with randomized restarts over node phases and tensor
/// weight parameters, maximizing the probe ratio. Deterministic for a fixed
/// seed. The search starts from the `f ≡ 1` baseline with the given weight,
/// so the result never falls below that baseline.
pub fn extremizer_search(
    measure: &DiscreteMeasure,
    q: f64,
    family: &TubeFamily,
    initial_weight: TensorWeight,
    grid: GridSpec,
    config: &SearchConfig,
) -> Result<SearchResult> {
    if config.iterations == 0 {
        return Err(Error::InvalidArgument(
            "the search needs at least one iteration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let node_count = measure.len();

    let evaluate = |phases: &[f64], weight: &TensorWeight| -> Result<MtProbe> {
        let values = phases
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect();
        let f = Density::new(values, measure)?;
        let w = weight.realize(grid);
        mt_ratio(measure, &f, &w, q, family)
    };

    let mut phases = vec![0.0_f64; node_count];
    let mut weight = initial_weight;
    let mut current = evaluate(&phases, &weight)?;
    let mut best = current.clone();
    let mut best_phases = phases.clone();
    let mut best_weight = weight;
    let mut trace = vec![(0usize, best.ratio)];
    let mut evaluations = 1usize;

    for iter in 1..=config.iterations {
        if config.restart_every > 0 && iter % config.restart_every == 0 {
            for p in phases.iter_mut() {
                *p = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            }
            weight = best_weight;
            current = evaluate(&phases, &weight)?;
            evaluations += 1;
        }
        // tweak one coordinate: a node phase or a weight scale
        let coord = rng.random_range(0..node_count + 2);
        let mut cand_phases = phases.clone();
        let mut cand_weight = weight;
        if coord < node_count {
            cand_phases[coord] = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        } else {
            let factor = (rng.random_range(-1.0..1.0_f64) * 0.4).exp();
            if coord == node_count {
                cand_weight.a = (cand_weight.a * factor).clamp(1e-3, 1e3);
            } else {
                cand_weight.b = (cand_weight.b * factor).clamp(1e-3, 1e3);
            }
        }
        let cand = evaluate(&cand_phases, &cand_weight)?;
        evaluations += 1;
        if cand.ratio > current.ratio {
            phases = cand_phases;
            weight = cand_weight;
            current = cand;
            if current.ratio > best.ratio {
                best = current.clone();
                best_phases = phases.clone();
                best_weight = weight;
                trace.push((iter, best.ratio));
            }
        }
    }
    Ok(SearchResult {
        best,
        best_weight,
        best_phases,
        trace,
        evaluations,
    })
}
