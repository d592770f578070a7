//! Browser demo bindings: interactive views of the extension field, decay
//! curves, and tube-supremum sweeps, driven by a single static page.
//!
//! The exported functions take plain scalars and return flat arrays or JSON
//! strings so the page needs no framework and no generated glue beyond
//! wasm-bindgen's own.

use wasm_bindgen::prelude::*;

use mtlab_core::experiments::{mt_ratio, FSpec};
use mtlab_core::fourier::{extend, fit_decay, sigma_hat, DecayRegime, Density};
use mtlab_core::grid::GridSpec;
use mtlab_core::io::MeasureConfig;
use mtlab_core::measures::DiscreteMeasure;
use mtlab_core::weights::{
    sup_tube_mass_by_direction, Profile, TensorWeight, TubeFamily,
};

fn build_measure(kind: &str, nodes: usize) -> Result<DiscreteMeasure, JsError> {
    let config = MeasureConfig {
        family: kind.to_string(),
        nodes,
        m: 1,
        c: 0.45,
        t_min: None,
        k: 2.0,
    };
    config.build().map_err(|e| JsError::new(&e.to_string()))
}

/// Magma-like perceptual ramp from a unit value.
fn colormap(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * (0.2 + 1.3 * t).min(1.0)) as u8;
    let g = (255.0 * (t * t * 0.9)) as u8;
    let b = (255.0 * (0.4 + 0.6 * (1.0 - t).powi(2)) * (1.0 - 0.55 * t)) as u8;
    [r, g, b]
}

/// `|Ef|` on an `n×n` window of half-length `l`, returned as RGBA bytes for
/// a canvas `ImageData`. `f_kind`: 0 constant, 1 random phases, 2 focused.
#[wasm_bindgen]
pub fn render_extension_field(
    measure_kind: &str,
    nodes: usize,
    f_kind: u8,
    seed: u64,
    focus_x: f64,
    focus_y: f64,
    l: f64,
    n: usize,
) -> Result<Vec<u8>, JsError> {
    let measure = build_measure(measure_kind, nodes)?;
    let f_spec = match f_kind {
        0 => FSpec::Constant,
        1 => FSpec::RandomPhases { seed },
        _ => FSpec::Focused {
            x0: [focus_x, focus_y],
        },
    };
    let f = f_spec.realize(&measure);
    let spec = GridSpec::new(l, n).map_err(|e| JsError::new(&e.to_string()))?;
    let field = extend(&measure, &f, spec).map_err(|e| JsError::new(&e.to_string()))?;
    let peak = f.l1.max(1e-300);
    let mut rgba = Vec::with_capacity(4 * n * n);
    // canvas rows run top-down; grid rows run bottom-up
    for j in (0..n).rev() {
        for i in 0..n {
            let v = field.values[spec.index(i, j)].norm() / peak;
            // sqrt stretch keeps the oscillation tails visible
            let [r, g, b] = colormap(v.sqrt());
            rgba.extend_from_slice(&[r, g, b, 255]);
        }
    }
    Ok(rgba)
}

/// `|σ̂|` along a ray with a fitted decay exponent; returns JSON
/// `{ "gauges": [...], "values": [...], "delta_hat": ..., "c_hat": ... }`.
#[wasm_bindgen]
pub fn decay_curve(
    measure_kind: &str,
    nodes: usize,
    vx: f64,
    vy: f64,
    gauge_min: f64,
    gauge_max: f64,
    count: usize,
) -> Result<String, JsError> {
    let measure = build_measure(measure_kind, nodes)?;
    let norm = (vx * vx + vy * vy).sqrt();
    if !(norm > 0.0) {
        return Err(JsError::new("direction must be nonzero"));
    }
    let v = [vx / norm, vy / norm];
    let count = count.clamp(2, 4096);
    let samples: Vec<([f64; 2], f64)> = (0..count)
        .map(|k| {
            let frac = k as f64 / (count - 1) as f64;
            let g = gauge_min * (gauge_max / gauge_min).powf(frac);
            let x = [g * v[0], g * v[1]];
            (x, sigma_hat(&measure, x).norm())
        })
        .collect();
    let fit = fit_decay(&samples, DecayRegime::Directional, Some(v))
        .map_err(|e| JsError::new(&e.to_string()))?;
    let gauges: Vec<f64> = samples
        .iter()
        .map(|(x, _)| (x[0] * v[0] + x[1] * v[1]).abs())
        .collect();
    let values: Vec<f64> = samples.iter().map(|(_, s)| *s).collect();
    let doc = serde_json::json!({
        "gauges": gauges,
        "values": values,
        "delta_hat": fit.delta_hat,
        "c_hat": fit.c_hat,
        "dropped": fit.dropped_zeros,
    });
    Ok(doc.to_string())
}

/// Per-direction tube suprema of a tensor weight over an angular net, plus
/// the weighted-norm ratio at exponent `q` against the weight's matched
/// slope family. Returns JSON
/// `{ "angles": [...], "sups": [...], "best_angle": ..., "ratio": ... }`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn tube_sweep(
    measure_kind: &str,
    nodes: usize,
    profile: &str,
    a: f64,
    b: f64,
    q: f64,
    l: f64,
    n: usize,
    directions: usize,
) -> Result<String, JsError> {
    let measure = build_measure(measure_kind, nodes)?;
    let profile = match profile {
        "interval" => Profile::Interval { lo: -1.0, hi: 1.0 },
        "bump" => Profile::Bump,
        _ => Profile::StepTrain {
            period: 4.0,
            duty: 0.25,
        },
    };
    let weight =
        TensorWeight::new(profile, a, b).map_err(|e| JsError::new(&e.to_string()))?;
    let spec = GridSpec::new(l, n).map_err(|e| JsError::new(&e.to_string()))?;
    let w = weight.realize(spec);
    let dtheta = std::f64::consts::PI / directions.clamp(4, 720) as f64;
    let (_, _, table) = sup_tube_mass_by_direction(&w, &TubeFamily::All { dtheta })
        .map_err(|e| JsError::new(&e.to_string()))?;
    let angles: Vec<f64> = table.iter().map(|(d, _)| d[1].atan2(d[0])).collect();
    let sups: Vec<f64> = table.iter().map(|(_, s)| *s).collect();
    let best = sups
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .map(|(i, _)| angles[i])
        .unwrap_or(0.0);
    let f = Density::constant(&measure);
    let probe = mt_ratio(&measure, &f, &w, q, &weight.slope_family())
        .map_err(|e| JsError::new(&e.to_string()))?;
    let doc = serde_json::json!({
        "angles": angles,
        "sups": sups,
        "best_angle": best,
        "ratio": probe.ratio,
        "lhs": probe.lhs,
        "rhs": probe.rhs,
    });
    Ok(doc.to_string())
}
