//! Experiment dispatch: config → domain objects → probes → report files.

use std::time::Instant;

use anyhow::{bail, Context, Result};

use mtlab_core::experiments::{
    extremizer_search, level_set_probe, local_mt_growth, mt_ratio, LevelSetFlavor, SearchConfig,
    WeightSpec,
};
use mtlab_core::fourier::{fit_decay, sigma_hat, DecayRegime};
use mtlab_core::halton::van_der_corput;
use mtlab_core::io::{
    apply_overrides, emit_plot_data, load_config, parse_config, write_report, ExperimentConfig,
    ExperimentReport, Table,
};
use mtlab_core::maximal::{bootstrap_sequence, BootstrapParams};
use mtlab_core::measures::DiscreteMeasure;
use mtlab_core::weights::{
    ball_functional, box_functional, compare_ball_to_tubes, sup_tube_mass, tube_functional,
};

use crate::RunArgs;

pub fn run(kind: &str, args: &RunArgs) -> Result<()> {
    let (_, raw) = load_config(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if args.seq {
        overrides.push(("threads".into(), "1".into()));
    }
    let effective = if overrides.is_empty() {
        raw
    } else {
        apply_overrides(&raw, &overrides)?
    };
    let config = parse_config(&effective, &args.config.display().to_string())?;
    if config.experiment != kind {
        bail!(
            "config declares experiment `{}` but the `{}` subcommand was invoked",
            config.experiment,
            kind.replace('_', "-")
        );
    }
    configure_threads(&config, args.seq)?;

    let started = Instant::now();
    let (mut report, summary) = match kind {
        "decay" => run_decay(&config, &effective)?,
        "functional" => run_functional(&config, &effective)?,
        "bootstrap" => run_bootstrap(&config, &effective)?,
        "mt_ratio" => run_mt_ratio(&config, &effective)?,
        "level_set" => run_level_set(&config, &effective)?,
        "local_growth" => run_local_growth(&config, &effective)?,
        "hypotheses" => run_hypotheses(&config, &effective)?,
        "search" => run_search(&config, &effective)?,
        other => bail!("unknown experiment `{other}`"),
    };
    // timings are omitted in sequential mode so re-runs are byte-identical
    if !args.seq {
        report
            .metadata
            .timings
            .push(("total".into(), started.elapsed().as_secs_f64()));
    }
    let stem = kind.to_string();
    let written = write_report(&report, &args.out, &stem)?;
    let plots = emit_plot_data(&report, &args.out, &stem)?;
    println!("{summary} -> {}", written[0].display());
    if args.verbose > 0 {
        for path in written.iter().skip(1).chain(plots.iter()) {
            eprintln!("  wrote {}", path.display());
        }
    }
    Ok(())
}

fn configure_threads(config: &ExperimentConfig, seq: bool) -> Result<()> {
    let mut threads = config.threads;
    if let Ok(env) = std::env::var("MTLAB_THREADS") {
        threads = env
            .parse()
            .with_context(|| format!("MTLAB_THREADS=`{env}` is not a thread count"))?;
    }
    if seq {
        threads = 1;
    }
    if threads > 0 {
        // ignore the error when a pool already exists (repeated calls in-process)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

fn stamp_measure(report: &mut ExperimentReport, config: &ExperimentConfig, m: &DiscreteMeasure) {
    report.metadata.node_count = Some(m.len());
    report.metadata.grid_l = Some(config.grid.l);
    report.metadata.grid_n = Some(config.grid.n);
    report.metadata.grid_h = Some(2.0 * config.grid.l / config.grid.n as f64);
}

/// Decay-fit sample plan per regime; deterministic (log-spaced gauge plus a
/// Halton transverse coordinate where the regime permits one).
fn decay_samples(
    measure: &DiscreteMeasure,
    regime: DecayRegime,
    v: [f64; 2],
    gauge_min: f64,
    gauge_max: f64,
    count: usize,
) -> Vec<([f64; 2], f64)> {
    let gauge = |k: usize| -> f64 {
        let frac = k as f64 / (count - 1) as f64;
        gauge_min * (gauge_max / gauge_min).powf(frac)
    };
    (0..count)
        .map(|k| {
            let g = gauge(k);
            let t = 2.0 * van_der_corput(k as u64 + 1, 3) - 1.0;
            let x = match regime {
                DecayRegime::TensorAxis1 => [g, t],
                DecayRegime::TensorAxis2 => [t, g],
                // diagonal net: |x₁| = |x₂| = √g so the gauge |x₁x₂| is g
                DecayRegime::TensorProduct => [g.sqrt(), g.sqrt()],
                DecayRegime::Directional => [g * v[0], g * v[1]],
            };
            (x, sigma_hat(measure, x).norm())
        })
        .collect()
}

fn run_decay(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let measure = config.measure_required()?.build()?;
    let regime = config.decay.regime()?;
    let samples = decay_samples(
        &measure,
        regime,
        config.family.v,
        config.decay.gauge_min,
        config.decay.gauge_max,
        config.decay.samples.max(2),
    );
    let fit = fit_decay(&samples, regime, Some(config.family.v))?;
    let mut report = ExperimentReport::new("decay", echo);
    stamp_measure(&mut report, config, &measure);
    report.scalar("delta_hat", fit.delta_hat);
    report.scalar("c_hat", fit.c_hat);
    report.scalar("residual_rms", fit.residual_rms);
    report.scalar("used_samples", fit.used_samples as f64);
    report.scalar("dropped_zeros", fit.dropped_zeros as f64);
    let mut t = Table::new("samples", &["x1", "x2", "sigma_hat_abs"]);
    for (x, s) in &samples {
        t.push(vec![x[0], x[1], *s]);
    }
    report.tables.push(t);
    let summary = format!(
        "decay[{}]: delta_hat = {:.4} (C_hat = {:.4}, {} samples, {} dropped)",
        config.measure_required()?.family,
        fit.delta_hat,
        fit.c_hat,
        fit.used_samples,
        fit.dropped_zeros
    );
    Ok((report, summary))
}

fn run_functional(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let spec = config.grid.build()?;
    let w = config.weight.build()?.realize(spec)?;
    let alpha = config.alpha;
    let ball = ball_functional(&w, alpha)?;
    let boxed = box_functional(&w, alpha)?;
    let tube = tube_functional(&w, alpha, config.family.v)?;
    let family = config.family.build()?;
    let (sup, witness) = sup_tube_mass(&w, &family)?;
    let covering = compare_ball_to_tubes(&w, config.family.dtheta_deg.to_radians())?;
    let mut report = ExperimentReport::new("functional", echo);
    report.metadata.grid_l = Some(spec.l);
    report.metadata.grid_n = Some(spec.n);
    report.metadata.grid_h = Some(spec.h());
    report.scalar("ball_a", ball.value);
    report.scalar("box_aa", boxed.value);
    report.scalar("tube_cal_a", tube.value);
    report.scalar("sup_tube_mass", sup);
    report.scalar("witness_offset", witness.offset);
    report.scalar("covering_c0", covering.c0);
    report.scalar("covering_min_sup", covering.min_sup);
    let mut t = Table::new(
        "witnesses",
        &["ball_x1", "ball_x2", "ball_r", "box_x1", "box_x2", "box_r1", "box_r2"],
    );
    t.push(vec![
        ball.witness_center[0],
        ball.witness_center[1],
        ball.witness_r[0],
        boxed.witness_center[0],
        boxed.witness_center[1],
        boxed.witness_r[0],
        boxed.witness_r[1],
    ]);
    report.tables.push(t);
    let summary = format!(
        "functional: ball={:.5} box={:.5} tube={:.5} sup_T={:.5} covering_c0={:.3}",
        ball.value, boxed.value, tube.value, sup, covering.c0
    );
    Ok((report, summary))
}

fn run_bootstrap(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let b = &config.bootstrap;
    let params = BootstrapParams::new(
        config.alpha,
        config.beta,
        b.beta0,
        b.c0,
        b.m_const,
        b.truncation,
        b.k_max,
    )?;
    let trace = bootstrap_sequence(&params);
    let k_last = trace.beta_k.len() - 1;
    let beta_gap = (trace.beta_k[k_last] - params.alpha).abs();
    let c_gap = (trace.c_k[k_last] - trace.c_limit).abs();
    let max_closed_gap = trace
        .beta_k
        .iter()
        .zip(&trace.beta_k_closed)
        .chain(trace.c_k.iter().zip(&trace.c_k_closed))
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0_f64, f64::max);
    let mut report = ExperimentReport::new("bootstrap", echo);
    report.scalar("p", params.p);
    report.scalar("beta_limit", trace.beta_limit);
    report.scalar("c_limit", trace.c_limit);
    report.scalar("beta_gap_at_k_max", beta_gap);
    report.scalar("c_gap_at_k_max", c_gap);
    report.scalar("max_recursion_vs_closed_gap", max_closed_gap);
    let mut t = Table::new("trace", &["k", "beta_k", "c_k", "beta_k_closed", "c_k_closed"]);
    for k in 0..=k_last {
        t.push(vec![
            k as f64,
            trace.beta_k[k],
            trace.c_k[k],
            trace.beta_k_closed[k],
            trace.c_k_closed[k],
        ]);
    }
    report.tables.push(t);
    let summary = format!(
        "bootstrap: |beta_k - alpha| = {beta_gap:.3e} at k = {k_last}, C_k -> {:.6}",
        trace.c_limit
    );
    Ok((report, summary))
}

fn run_mt_ratio(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let measure = config.measure_required()?.build()?;
    let f = config.density.build()?.realize(&measure);
    let spec = config.grid.build()?;
    let w = config.weight.build()?.realize(spec)?;
    let family = config.family.build()?;
    let probe = mt_ratio(&measure, &f, &w, config.q, &family)?;
    let mut report = ExperimentReport::new("mt_ratio", echo);
    stamp_measure(&mut report, config, &measure);
    report.scalar("q", probe.q);
    report.scalar("lhs", probe.lhs);
    report.scalar("lhs_half_window", probe.lhs_half_window);
    report.scalar("rhs", probe.rhs);
    report.scalar("ratio", probe.ratio);
    report.scalar("sup_tube_mass", probe.sup_tube);
    report.scalar("f_l2", probe.f_l2);
    report.scalar("failure_witness", probe.failure_witness as u8 as f64);
    let summary = format!(
        "mt-ratio: q = {}, lhs = {:.5e}, rhs = {:.5e}, ratio = {:.5}",
        probe.q, probe.lhs, probe.rhs, probe.ratio
    );
    Ok((report, summary))
}

fn run_level_set(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let measure = config.measure_required()?.build()?;
    let f = config.density.build()?.realize(&measure);
    let spec = config.grid.build()?;
    let h = config.weight.build()?.realize(spec)?;
    // the family section picks the flavor: `perp` probes the directional
    // bound along its v, anything else the tensor bound
    let flavor = if config.family.kind == "perp" {
        LevelSetFlavor::Directional(config.family.v)
    } else {
        LevelSetFlavor::Tensor
    };
    let probe = level_set_probe(&measure, &f, &h, config.alpha, flavor, config.lambda_count)?;
    let mut report = ExperimentReport::new("level_set", echo);
    stamp_measure(&mut report, config, &measure);
    report.scalar("max_c", probe.max_c);
    report.scalar("functional_value", probe.functional_value);
    report.scalar("k", probe.k as f64);
    report.scalar("f_l1", probe.f_l1);
    report.scalar("f_l2", probe.f_l2);
    let mut t = Table::new("levels", &["lambda", "mu_g", "c_lambda"]);
    for row in &probe.rows {
        t.push(vec![row.lambda, row.mu_g, row.c_lambda]);
    }
    report.tables.push(t);
    let summary = format!(
        "level-set: max c(lambda) = {:.5} (functional = {:.5}, k = {})",
        probe.max_c, probe.functional_value, probe.k
    );
    Ok((report, summary))
}

fn run_local_growth(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let measure = config.measure_required()?.build()?;
    let f = config.density.build()?.realize(&measure);
    let spec = config.grid.build()?;
    let w = config.weight.build()?.realize(spec)?;
    let table = local_mt_growth(
        &measure,
        &f,
        &w,
        &config.r_list,
        config.family.dtheta_deg.to_radians(),
    )?;
    let mut report = ExperimentReport::new("local_growth", echo);
    stamp_measure(&mut report, config, &measure);
    if let Some(e) = table.fitted_exponent {
        report.scalar("fitted_exponent", e);
        report.scalar(
            "within_half_plus_margin",
            table.within_half_plus_margin.unwrap_or(false) as u8 as f64,
        );
    }
    let mut t = Table::new(
        "growth",
        &["r", "lhs", "sup_tube", "rhs_gauge", "normalized"],
    );
    for row in &table.rows {
        t.push(vec![row.r, row.lhs, row.sup_tube, row.rhs_gauge, row.normalized]);
    }
    report.tables.push(t);
    let summary = match table.fitted_exponent {
        Some(e) => format!("local-growth: fitted exponent = {e:.4}"),
        None => "local-growth: no fittable rows".into(),
    };
    Ok((report, summary))
}

fn run_hypotheses(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let mc = config.measure_required()?;
    let curve = mc.convex_graph()?;
    let t_min = mc.t_min.unwrap_or(1e-4 * mc.c);
    let rep = mtlab_core::measures::check_corollary_hypotheses(
        &curve,
        config.hypothesis_grid,
        t_min,
    )?;
    let mut report = ExperimentReport::new("hypotheses", echo);
    report.scalar("all_pass", rep.all_pass as u8 as f64);
    report.scalar("c_constant", rep.c_constant);
    report.scalar("gamma_convex_margin", rep.gamma_convex.worst_margin);
    report.scalar("gamma1_convex_margin", rep.gamma1_convex.worst_margin);
    report.scalar("ratio_margin", rep.ratio_nonincreasing.worst_margin);
    report.scalar("boundary_gamma", rep.boundary_gamma);
    report.scalar("boundary_gamma1", rep.boundary_gamma1);
    let mut t = Table::new(
        "conditions",
        &["t", "gamma_convex_ok", "gamma1_convex_ok", "ratio_ok"],
    );
    for (idx, &tv) in rep.t_grid.iter().enumerate() {
        t.push(vec![
            tv,
            rep.gamma_convex.pass[idx] as u8 as f64,
            rep.gamma1_convex.pass[idx] as u8 as f64,
            rep.ratio_nonincreasing.pass[idx] as u8 as f64,
        ]);
    }
    report.tables.push(t);
    let summary = if rep.all_pass {
        format!(
            "hypotheses[{}]: all hypotheses satisfied, C = {:.6}",
            curve.label, rep.c_constant
        )
    } else {
        let mut failed = Vec::new();
        if !rep.gamma_convex.satisfied {
            failed.push(format!(
                "gamma convex (worst {:.3e} at t = {:.4})",
                rep.gamma_convex.worst_margin, rep.gamma_convex.worst_t
            ));
        }
        if !rep.gamma1_convex.satisfied {
            failed.push(format!(
                "gamma' convex (worst {:.3e} at t = {:.4})",
                rep.gamma1_convex.worst_margin, rep.gamma1_convex.worst_t
            ));
        }
        if !rep.ratio_nonincreasing.satisfied {
            failed.push(format!(
                "ratio condition (worst {:.3e} at t = {:.4})",
                rep.ratio_nonincreasing.worst_margin, rep.ratio_nonincreasing.worst_t
            ));
        }
        if !rep.boundary_ok {
            failed.push("boundary limits".into());
        }
        format!(
            "hypotheses[{}]: VIOLATED — {} (C = {:.6})",
            curve.label,
            failed.join("; "),
            rep.c_constant
        )
    };
    Ok((report, summary))
}

fn run_search(config: &ExperimentConfig, echo: &str) -> Result<(ExperimentReport, String)> {
    let measure = config.measure_required()?.build()?;
    let spec = config.grid.build()?;
    let family = config.family.build()?;
    let weight = match config.weight.build()? {
        WeightSpec::Tensor(t) => t,
        _ => bail!("the search experiment needs a tensor weight (weight.kind = \"tensor\")"),
    };
    let search = extremizer_search(
        &measure,
        config.q,
        &family,
        weight,
        spec,
        &SearchConfig {
            iterations: config.iterations,
            seed: config.seed,
            restart_every: config.restart_every,
        },
    )?;
    let mut report = ExperimentReport::new("search", echo);
    stamp_measure(&mut report, config, &measure);
    report.scalar("best_ratio", search.best.ratio);
    report.scalar("best_lhs", search.best.lhs);
    report.scalar("best_rhs", search.best.rhs);
    report.scalar("best_a", search.best_weight.a);
    report.scalar("best_b", search.best_weight.b);
    report.scalar("evaluations", search.evaluations as f64);
    let mut t = Table::new("ascent", &["iteration", "best_ratio"]);
    for (iter, ratio) in &search.trace {
        t.push(vec![*iter as f64, *ratio]);
    }
    report.tables.push(t);
    let mut phases = Table::new("best_phases", &["node", "phase"]);
    for (idx, p) in search.best_phases.iter().enumerate() {
        phases.push(vec![idx as f64, *p]);
    }
    report.tables.push(phases);
    let summary = format!(
        "search: best ratio = {:.5} after {} evaluations (a = {:.4}, b = {:.4})",
        search.best.ratio, search.evaluations, search.best_weight.a, search.best_weight.b
    );
    Ok((report, summary))
}
