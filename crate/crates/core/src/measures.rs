//! Discrete quadrature representations of planar curve measures.
//!
//! Built-in families: arc length on the unit circle, the unit flat segment
//! `[0,1] × {0}` with `dσ = dt`, and convex graphs `(t, γ(t))` carrying the
//! affine-curvature density `dσ = γ''(t)^{1/2} dt`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex graph `t ↦ (t, γ(t))` on `(0, c]` with its derivatives.
///
/// `gamma3` may be absent; hypothesis checks then fall back to finite
/// differences of `gamma2`.
#[derive(Clone)]
pub struct ConvexGraph {
    pub label: String,
    pub domain_end: f64,
    gamma: CurveFn,
    gamma1: CurveFn,
    gamma2: CurveFn,
    gamma3: Option<CurveFn>,
}

impl fmt::Debug for ConvexGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexGraph")
            .field("label", &self.label)
            .field("domain_end", &self.domain_end)
            .finish()
    }
}

impl ConvexGraph {
    pub fn new(
        label: impl Into<String>,
        domain_end: f64,
        gamma: CurveFn,
        gamma1: CurveFn,
        gamma2: CurveFn,
        gamma3: Option<CurveFn>,
    ) -> Result<Self> {
        if !(domain_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "curve domain end must be positive, got {domain_end}"
            )));
        }
        Ok(ConvexGraph {
            label: label.into(),
            domain_end,
            gamma,
            gamma1,
            gamma2,
            gamma3,
        })
    }

    /// Exponentially flat family `γ(t) = e^{-1/t^m}` on `(0, c]`.
    ///
    /// All derivatives are assembled from `A = m t^{-m-1}` via
    /// `γ' = A e^{-u}`, `γ'' = (A' + A²) e^{-u}`, `γ''' = (A'' + 3AA' + A³) e^{-u}`
    /// with `u = t^{-m}`, so no positive exponentials ever appear.
    pub fn exp_flat(m: u32, domain_end: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("exp_flat needs m ≥ 1".into()));
        }
        let mf = m as f64;
        let gamma: CurveFn = Arc::new(move |t: f64| (-t.powf(-mf)).exp());
        let gamma1: CurveFn = Arc::new(move |t: f64| {
            let e = (-t.powf(-mf)).exp();
            mf * t.powf(-mf - 1.0) * e
        });
        let gamma2: CurveFn = Arc::new(move |t: f64| {
            let e = (-t.powf(-mf)).exp();
            let a = mf * t.powf(-mf - 1.0);
            let ap = -mf * (mf + 1.0) * t.powf(-mf - 2.0);
            (ap + a * a) * e
        });
        let gamma3: CurveFn = Arc::new(move |t: f64| {
            let e = (-t.powf(-mf)).exp();
            let a = mf * t.powf(-mf - 1.0);
            let ap = -mf * (mf + 1.0) * t.powf(-mf - 2.0);
            let app = mf * (mf + 1.0) * (mf + 2.0) * t.powf(-mf - 3.0);
            (app + 3.0 * a * ap + a * a * a) * e
        });
        Self::new(
            format!("exp_flat_m{m}"),
            domain_end,
            gamma,
            gamma1,
            gamma2,
            Some(gamma3),
        )
    }

    /// Power curve `γ(t) = t^k` (k ≥ 2), e.g. the parabola `k = 2`.
    pub fn power(k: f64, domain_end: f64) -> Result<Self> {
        if k < 2.0 {
            return Err(Error::InvalidArgument(format!(
                "power curve needs k ≥ 2 for a convex graph with γ'(0)=0, got {k}"
            )));
        }
        let gamma: CurveFn = Arc::new(move |t: f64| t.powf(k));
        let gamma1: CurveFn = Arc::new(move |t: f64| k * t.powf(k - 1.0));
        let gamma2: CurveFn = Arc::new(move |t: f64| k * (k - 1.0) * t.powf(k - 2.0));
        let gamma3: CurveFn =
            Arc::new(move |t: f64| k * (k - 1.0) * (k - 2.0) * t.powf(k - 3.0));
        Self::new(
            format!("power_k{k}"),
            domain_end,
            gamma,
            gamma1,
            gamma2,
            Some(gamma3),
        )
    }

    pub fn gamma(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }
    pub fn gamma1(&self, t: f64) -> f64 {
        (self.gamma1)(t)
    }
    pub fn gamma2(&self, t: f64) -> f64 {
        (self.gamma2)(t)
    }
    pub fn gamma3(&self, t: f64) -> Option<f64> {
        self.gamma3.as_ref().map(|g| g(t))
    }
    pub fn has_gamma3(&self) -> bool {
        self.gamma3.is_some()
    }
}

/// Which curve a measure lives on.
#[derive(Debug, Clone)]
pub enum CurveSpec {
    Circle,
    FlatSegment,
    ConvexGraph(ConvexGraph),
}

impl CurveSpec {
    pub fn label(&self) -> String {
        match self {
            CurveSpec::Circle => "circle".into(),
            CurveSpec::FlatSegment => "flat_segment".into(),
            CurveSpec::ConvexGraph(g) => g.label.clone(),
        }
    }
}

/// Quadrature representation of a finite positive curve measure.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub total_mass: f64,
    pub source: CurveSpec,
    /// Mass of the removed `(0, t_min)` piece bound, when the construction truncates.
    pub truncated_mass_bound: f64,
}

impl DiscreteMeasure {
    fn assemble(
        nodes: Vec<[f64; 2]>,
        weights: Vec<f64>,
        source: CurveSpec,
        truncated_mass_bound: f64,
    ) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "node and weight counts differ".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "quadrature weights must be positive, got {w}"
            )));
        }
        let total_mass = weights.iter().sum();
        Ok(DiscreteMeasure {
            nodes,
            weights,
            total_mass,
            source,
            truncated_mass_bound,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Support diameter estimate used for sampling-resolution guidance.
    pub fn diameter(&self) -> f64 {
        match self.source {
            CurveSpec::Circle => 2.0,
            CurveSpec::FlatSegment => 1.0,
            CurveSpec::ConvexGraph(_) => {
                let mut d: f64 = 0.0;
                if let (Some(a), Some(b)) = (self.nodes.first(), self.nodes.last()) {
                    d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                }
                d.max(1e-12)
            }
        }
    }
}

/// Arc length measure on the unit circle, `n` equispaced nodes of mass `2π/n`.
pub fn make_circle_measure(n: usize) -> Result<DiscreteMeasure> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "circle measure needs at least 8 nodes, got {n}"
        )));
    }
    let w = 2.0 * std::f64::consts::PI / n as f64;
    let nodes = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            [theta.cos(), theta.sin()]
        })
        .collect();
    DiscreteMeasure::assemble(nodes, vec![w; n], CurveSpec::Circle, 0.0)
}

/// `dσ = dt` on the segment `[0,1] × {0}` via an `n`-point Gauss-Legendre rule.
pub fn make_flat_segment_measure(n: usize) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "flat segment measure needs at least 2 nodes, got {n}"
        )));
    }
    let (t, w) = quad::gauss_legendre_on(n, 0.0, 1.0)?;
    let nodes = t.iter().map(|&ti| [ti, 0.0]).collect();
    DiscreteMeasure::assemble(nodes, w, CurveSpec::FlatSegment, 0.0)
}

/// `dσ = γ''(t)^{1/2} dt` on `(t_min, c]` by composite Gauss-Legendre panels
/// geometrically refined toward `t_min`.
///
/// The density may blow up integrably or vanish at 0; truncation at `t_min`
/// keeps the rule well conditioned, and the omitted mass is reported via
/// `truncated_mass_bound` (a crude one-panel bound of `∫₀^{t_min} γ''^{1/2}`).
pub fn make_convex_graph_measure(
    spec: &ConvexGraph,
    n: usize,
    t_min: f64,
) -> Result<DiscreteMeasure> {
    let c = spec.domain_end;
    if !(t_min > 0.0 && t_min < c) {
        return Err(Error::InvalidArgument(format!(
            "t_min must lie in (0, {c}), got {t_min}"
        )));
    }
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "convex graph measure needs at least 8 nodes, got {n}"
        )));
    }
    let breaks = quad::geometric_breakpoints(t_min, c, 2.0, 64);
    let panels = breaks.len() - 1;
    let per_panel = (n.div_ceil(panels)).max(4);
    let (t, w) = quad::composite_gauss_legendre(&breaks, per_panel)?;
    let mut nodes = Vec::with_capacity(t.len());
    let mut weights = Vec::with_capacity(t.len());
    for (&ti, &wi) in t.iter().zip(&w) {
        let g2 = spec.gamma2(ti);
        if g2 < 0.0 {
            return Err(Error::HypothesisViolation(format!(
                "γ''({ti}) = {g2} < 0; the measure density γ''^{{1/2}} is undefined"
            )));
        }
        let mass = g2.sqrt() * wi;
        // exponentially flat densities underflow to exact zero near 0;
        // such nodes carry no mass and are dropped
        if mass > 0.0 {
            nodes.push([ti, spec.gamma(ti)]);
            weights.push(mass);
        }
    }
    if nodes.is_empty() {
        return Err(Error::DegenerateWeight(format!(
            "the density γ''^{{1/2}} vanishes identically on [{t_min}, {c}]"
        )));
    }
    // midpoint bound for the omitted head; γ''^{1/2} is monotone-ish there
    let head = spec.gamma2(0.5 * t_min).max(0.0).sqrt() * t_min;
    DiscreteMeasure::assemble(
        nodes,
        weights,
        CurveSpec::ConvexGraph(spec.clone()),
        head,
    )
}

/// One verified hypothesis: per-sample pass flags plus the worst margin.
///
/// Margins are normalized by the largest magnitude the checked quantity
/// attains on the grid, so `worst_margin ≥ -tol` means "passes at relative
/// tolerance `tol`". Non-strict inequalities: zero margins pass.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub pass: Vec<bool>,
    pub worst_margin: f64,
    pub worst_t: f64,
    pub satisfied: bool,
}

impl ConditionCheck {
    /// `values[i] ≥ 0` expected; margin is `value / scale`.
    fn lower_bounded(name: &'static str, ts: &[f64], values: &[f64], tol: f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::HypothesisViolation(format!(
                "condition `{name}` produced a non-finite margin"
            )));
        }
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut worst = f64::INFINITY;
        let mut worst_t = ts[0];
        let mut pass = Vec::with_capacity(values.len());
        for (&t, &v) in ts.iter().zip(values) {
            let margin = v / scale;
            if margin < worst {
                worst = margin;
                worst_t = t;
            }
            pass.push(margin >= -tol);
        }
        let satisfied = pass.iter().all(|&p| p);
        Ok(ConditionCheck {
            name,
            pass,
            worst_margin: worst,
            worst_t,
            satisfied,
        })
    }
}

/// Report of the convex-curve hypothesis battery.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub t_grid: Vec<f64>,
    pub gamma_convex: ConditionCheck,
    pub gamma1_convex: ConditionCheck,
    pub ratio_nonincreasing: ConditionCheck,
    /// `γ(t)` and `γ'(t)` at the smallest grid point; both must be small.
    pub boundary_gamma: f64,
    pub boundary_gamma1: f64,
    pub boundary_ok: bool,
    /// Fitted constant `C = max_t γ γ'' / γ'²`.
    pub c_constant: f64,
    pub all_pass: bool,
}

pub const HYPOTHESIS_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-2;

/// Evaluates the convex-curve hypotheses on a log-spaced grid in `[t_min, c]`:
/// `γ'' ≥ 0` (γ convex), `γ''' ≥ 0` (γ' convex), `(γ''^{1/2}/γ')' ≤ 0`, the
/// boundary limits `γ, γ' → 0`, and the constant `C = max γγ''/γ'²`.
///
/// The derivative-ratio condition is evaluated through the sign-equivalent
/// product form `γ'''γ' - 2γ''² ≤ 0` when `γ'''` is available, which avoids
/// the overflowing quotient `γ''^{1/2}/γ'` for exponentially flat curves.
pub fn check_corollary_hypotheses(
    spec: &ConvexGraph,
    grid_size: usize,
    t_min: f64,
) -> Result<HypothesisReport> {
    let c = spec.domain_end;
    if !(t_min > 0.0 && t_min < c) {
        return Err(Error::InvalidArgument(format!(
            "t_min must lie in (0, {c}), got {t_min}"
        )));
    }
    if grid_size < 8 {
        return Err(Error::InvalidArgument(
            "hypothesis grid needs at least 8 points".into(),
        ));
    }
    let (lo, hi) = (t_min.ln(), c.ln());
    let ts: Vec<f64> = (0..grid_size)
        .map(|k| (lo + (hi - lo) * k as f64 / (grid_size - 1) as f64).exp())
        .collect();

    let g2: Vec<f64> = ts.iter().map(|&t| spec.gamma2(t)).collect();
    let gamma_convex = ConditionCheck::lower_bounded("gamma_convex", &ts, &g2, HYPOTHESIS_TOL)?;

    let g3: Vec<f64> = if spec.has_gamma3() {
        ts.iter().map(|&t| spec.gamma3(t).unwrap()).collect()
    } else {
        // second differences of γ' with a step proportional to t
        ts.iter()
            .map(|&t| {
                let h = t * 1e-4;
                (spec.gamma1(t + h) - 2.0 * spec.gamma1(t) + spec.gamma1(t - h)) / (h * h)
            })
            .collect()
    };
    let gamma1_convex = ConditionCheck::lower_bounded("gamma1_convex", &ts, &g3, HYPOTHESIS_TOL)?;

    // (γ''^{1/2}/γ')' ≤ 0  ⇔  2γ''² - γ'''γ' ≥ 0   (γ' > 0, γ'' ≥ 0);
    // the product form needs no division, so γ'-underflow is harmless there
    let mut ratio_vals = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let v = match spec.gamma3(t) {
            Some(g3t) => 2.0 * g2[k] * g2[k] - g3t * spec.gamma1(t),
            None => {
                let g1 = spec.gamma1(t);
                if g1 == 0.0 {
                    if spec.gamma(t) == 0.0 && spec.gamma2(t) == 0.0 {
                        // flat to machine precision; the ratio is constant zero
                        ratio_vals.push(0.0);
                        continue;
                    }
                    return Err(Error::Singularity {
                        t,
                        context: "γ'(t) = 0 at an interior node of the hypothesis grid".into(),
                    });
                }
                // log-space derivative of r = γ''^{1/2}/γ'
                let h = t * 1e-5;
                let r = |t: f64| 0.5 * spec.gamma2(t).max(0.0).ln() - spec.gamma1(t).ln();
                -(r(t + h) - r(t - h)) / (2.0 * h)
            }
        };
        ratio_vals.push(v);
    }
    let ratio_nonincreasing =
        ConditionCheck::lower_bounded("ratio_nonincreasing", &ts, &ratio_vals, HYPOTHESIS_TOL)?;

    let boundary_gamma = spec.gamma(ts[0]);
    let boundary_gamma1 = spec.gamma1(ts[0]);
    let boundary_ok = boundary_gamma.abs() <= BOUNDARY_TOL && boundary_gamma1.abs() <= BOUNDARY_TOL;

    // C = max γγ''/γ'². Exponentially flat curves underflow γ, γ', γ'' to
    // exact zero near 0; those points are flat to machine precision and are
    // skipped. A vanishing γ' with nonvanishing γ or γ'' is a genuine
    // division singularity.
    let mut c_constant: f64 = 0.0;
    let mut c_points = 0usize;
    for &t in &ts {
        let num = spec.gamma(t) * spec.gamma2(t);
        let den = spec.gamma1(t) * spec.gamma1(t);
        if den == 0.0 {
            if num == 0.0 {
                continue;
            }
            return Err(Error::Singularity {
                t,
                context: "γ'(t) = 0 while fitting C = max γγ''/γ'²".into(),
            });
        }
        let v = num / den;
        if !v.is_finite() {
            return Err(Error::Singularity {
                t,
                context: format!("γγ''/γ'² = {v}"),
            });
        }
        c_points += 1;
        c_constant = c_constant.max(v);
    }
    if c_points == 0 {
        return Err(Error::DegenerateWeight(
            "γ' vanishes (to machine precision) on the whole hypothesis grid".into(),
        ));
    }

    let all_pass = gamma_convex.satisfied
        && gamma1_convex.satisfied
        && ratio_nonincreasing.satisfied
        && boundary_ok;
    Ok(HypothesisReport {
        t_grid: ts,
        gamma_convex,
        gamma1_convex,
        ratio_nonincreasing,
        boundary_gamma,
        boundary_gamma1,
        boundary_ok,
        c_constant,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circle_rejects_small_n() {
        assert!(matches!(
            make_circle_measure(4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn circle_total_mass_is_two_pi() {
        let m = make_circle_measure(100).unwrap();
        assert_relative_eq!(
            m.total_mass,
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
        for p in &m.nodes {
            assert_relative_eq!(p[0] * p[0] + p[1] * p[1], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_segment_mass_is_one() {
        let m = make_flat_segment_measure(16).unwrap();
        assert_relative_eq!(m.total_mass, 1.0, epsilon = 1e-14);
        assert!(m.nodes.iter().all(|p| p[1] == 0.0));
        assert!(matches!(
            make_flat_segment_measure(1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn parabola_measure_has_constant_density() {
        // γ = t² on [t_min, 1]: density √2, total mass √2·(1 - t_min)
        let spec = ConvexGraph::power(2.0, 1.0).unwrap();
        let m = make_convex_graph_measure(&spec, 128, 1e-6).unwrap();
        assert_relative_eq!(
            m.total_mass,
            2.0_f64.sqrt() * (1.0 - 1e-6),
            max_relative = 1e-10
        );
    }

    #[test]
    fn exp_flat_m2_weights_positive() {
        let spec = ConvexGraph::exp_flat(2, 0.3).unwrap();
        let m = make_convex_graph_measure(&spec, 512, 3e-5).unwrap();
        assert!(m.weights.iter().all(|&w| w > 0.0));
        assert!(m.truncated_mass_bound < 1e-30);
    }

    #[test]
    fn doubling_nodes_barely_moves_the_mass() {
        let spec = ConvexGraph::exp_flat(1, 0.3).unwrap();
        let a = make_convex_graph_measure(&spec, 256, 1e-4).unwrap();
        let b = make_convex_graph_measure(&spec, 512, 1e-4).unwrap();
        assert!((a.total_mass - b.total_mass).abs() < 1e-8);

        let a = make_circle_measure(512).unwrap();
        let b = make_circle_measure(1024).unwrap();
        assert!((a.total_mass - b.total_mass).abs() < 1e-8);
    }

    #[test]
    fn parabola_reports_c_half() {
        let spec = ConvexGraph::power(2.0, 1.0).unwrap();
        let rep = check_corollary_hypotheses(&spec, 1000, 1e-4).unwrap();
        assert!(rep.gamma_convex.satisfied);
        assert!(rep.gamma1_convex.satisfied);
        assert!(rep.ratio_nonincreasing.satisfied);
        assert!(rep.boundary_ok, "γ'({}) = {}", rep.t_grid[0], rep.boundary_gamma1);
        assert_relative_eq!(rep.c_constant, 0.5, epsilon = 1e-9);
        assert!(rep.all_pass);
    }

    #[test]
    fn exp_flat_m2_passes_all_hypotheses() {
        let spec = ConvexGraph::exp_flat(2, 0.3).unwrap();
        let rep = check_corollary_hypotheses(&spec, 1000, 3e-5).unwrap();
        assert!(rep.all_pass, "report: {rep:?}");
        assert!(rep.c_constant.is_finite());
    }

    #[test]
    fn exp_flat_m1_fails_gamma1_convexity_beyond_the_root() {
        // γ''' = e^{-1/t} t^{-6} (6t² - 6t + 1) turns negative past (3-√3)/6
        let spec = ConvexGraph::exp_flat(1, 0.3).unwrap();
        let rep = check_corollary_hypotheses(&spec, 1000, 3e-5).unwrap();
        assert!(rep.gamma_convex.satisfied);
        assert!(rep.ratio_nonincreasing.satisfied);
        assert!(!rep.gamma1_convex.satisfied);
        assert!(rep.gamma1_convex.worst_t > 0.21);

        let spec = ConvexGraph::exp_flat(1, 0.21).unwrap();
        let rep = check_corollary_hypotheses(&spec, 1000, 2.1e-5).unwrap();
        assert!(rep.all_pass);
    }

    #[test]
    fn negative_curvature_is_a_hypothesis_violation() {
        // γ = e^{-1/t} has γ'' < 0 beyond t = 1/2
        let spec = ConvexGraph::exp_flat(1, 0.8).unwrap();
        let err = make_convex_graph_measure(&spec, 64, 0.6).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolation(_)));
    }
}
