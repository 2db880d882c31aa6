//! `simulate`, `classify`, `wave-op`, `scatter-residual` and `two-sided`.

use std::path::Path;

use serde_json::{json, Value};
use weakdamp::fit::decay_fit;
use weakdamp::propagator::evolve;
use weakdamp::scattering::{
    scattering_op, scattering_residual, two_sided_ratio, BackwardHypothesis, Normalization, WaveOperatorEntry,
    WaveOperatorTable,
};
use weakdamp::{Mat2, RegimeTag};

use crate::config::HypothesisSpec;
use crate::error::CliError;
use crate::output::{fmt_f, read_numeric_csv, Table};
use crate::setup;
use crate::Context;

/// Tables to write plus a JSON summary; `failed` marks a check failure (exit 2).
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    /// Additional tables written next to the main output, keyed by file suffix.
    pub extra: Vec<(String, Table)>,
    pub summary: Value,
    pub failed: bool,
}

impl Outcome {
    fn ok(table: Table, summary: Value) -> Self {
        Self { table, extra: Vec::new(), summary, failed: false }
    }
}

fn mat_cells(m: &Mat2<f64>) -> impl Iterator<Item = String> {
    m.entries().into_iter().map(fmt_f)
}

pub fn simulate(ctx: &Context, dump_modes: bool) -> Result<Outcome, CliError> {
    let cfg = &ctx.cfg;
    let coeff = setup::coefficient(cfg, &cfg.config.coefficient, &cfg.config.regime)?;
    let model = setup::spectral_model(cfg)?;
    let data = setup::data(cfg, &model)?;
    let times = setup::times(cfg);
    log::info!("simulating {} modes at {} times", model.len(), times.len());
    let traj = evolve(&model, &coeff, &data, &times, cfg.config.tolerances.ode)?;
    let energies = traj.energies(&model)?;

    let mut header: Vec<String> = ["t", "lambda_t", "energy_E"].iter().map(|s| s.to_string()).collect();
    if dump_modes {
        for j in 0..model.len() {
            header.extend(["re_v1", "im_v1", "re_v2", "im_v2"].iter().map(|c| format!("{c}_{j}")));
        }
    }
    let mut table = Table::new(header);
    for (k, &t) in traj.times.iter().enumerate() {
        let mut row = vec![fmt_f(t), fmt_f(traj.lambda_values[k]), fmt_f(energies[k])];
        if dump_modes {
            for v in &traj.states[k] {
                row.extend([v[0].re, v[0].im, v[1].re, v[1].im].into_iter().map(fmt_f));
            }
        }
        table.push(row);
    }
    table.meta("representation", "V=(Lambda u, u')");
    let summary = json!({
        "modes": model.len(),
        "times": times.len(),
        "energy_initial": energies[0],
        "energy_final": energies[energies.len() - 1],
    });
    Ok(Outcome::ok(table, summary))
}

pub fn classify(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.cfg;
    let coeff = setup::coefficient(cfg, &cfg.config.coefficient, &cfg.config.regime)?;
    let regime = setup::classify(cfg, &coeff)?;
    let zone_n = match &cfg.config.spectral {
        Some(_) => Some(setup::zone_n(cfg, &coeff, &setup::spectral_model(cfg)?.lambdas())?),
        None => cfg.config.zone_n,
    };
    let opt = |x: Option<f64>| x.map(fmt_f).unwrap_or_default();
    let normalization = match regime.tag {
        RegimeTag::Unclassified => String::new(),
        tag => Normalization::for_regime(tag).to_string(),
    };
    let mut table = Table::new([
        "tag",
        "gamma_index",
        "lemma_gamma",
        "two_mu_admissible",
        "sampled_sup",
        "sampled_inf",
        "normalization",
        "zone_n",
    ]);
    table.push(vec![
        regime.tag.to_string(),
        fmt_f(regime.gamma_index),
        opt(regime.lemma_gamma),
        regime.two_mu_admissible.map(|b| b.to_string()).unwrap_or_default(),
        fmt_f(regime.sampled_sup),
        fmt_f(regime.sampled_inf),
        normalization.clone(),
        opt(zone_n),
    ]);
    let summary = json!({
        "regime": regime.tag.to_string(),
        "gamma_index": regime.gamma_index,
        "lemma_gamma": regime.lemma_gamma,
        "two_mu_admissible": regime.two_mu_admissible,
        "normalization": normalization,
        "zone_n": zone_n,
    });
    Ok(Outcome::ok(table, summary))
}

pub fn wave_op(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.cfg;
    let coeff = setup::coefficient(cfg, &cfg.config.coefficient, &cfg.config.regime)?;
    let model = setup::spectral_model(cfg)?;
    let regime = setup::classify(cfg, &coeff)?;
    let zone_n = setup::zone_n(cfg, &coeff, &model.lambdas())?;
    let gamma = setup::gamma(cfg, &regime);
    let opts = setup::limit_options(cfg);
    log::info!("building wave operators: regime {}, N = {}", regime.tag, zone_n);
    let mut table = WaveOperatorTable::build(&model, &coeff, regime.tag, gamma, zone_n, &opts)?;
    if let Some(back) = &cfg.config.backward {
        let back_coeff = match &back.coefficient {
            Some(spec) => setup::coefficient(cfg, spec, &cfg.config.regime)?,
            None => coeff.clone(),
        };
        let hypothesis = match back.hypothesis {
            HypothesisSpec::Integrable => BackwardHypothesis::Integrable,
            HypothesisSpec::Invertible => BackwardHypothesis::Invertible { c0: back.c0.unwrap_or(0.0) },
        };
        table = table.with_w_minus(&back_coeff, hypothesis, &opts)?;
    }

    let mut header: Vec<&str> = vec!["lambda", "w11", "w12", "w21", "w22", "conv_error", "horizon"];
    if cfg.config.backward.is_some() {
        header.extend(["wm11", "wm12", "wm21", "wm22", "s11", "s12", "s21", "s22"]);
    }
    let mut out = Table::new(header);
    let mut min_s_singular = f64::INFINITY;
    for e in &table.entries {
        let mut row = vec![fmt_f(e.lambda)];
        row.extend(mat_cells(&e.w_plus));
        row.extend([fmt_f(e.conv_error), fmt_f(e.horizon)]);
        if let Some(wm) = e.w_minus {
            let s = scattering_op(&e.w_plus, &wm)?;
            min_s_singular = min_s_singular.min(s.singular_values().1);
            row.extend(mat_cells(&wm));
            row.extend(mat_cells(&s));
        }
        out.push(row);
    }
    let eps = cfg.config.epsilon;
    let conv_eps = table.entries.iter().filter(|e| e.lambda >= eps).map(|e| e.conv_error).fold(0.0, f64::max);
    out.meta("regime", regime.tag);
    out.meta("normalization", table.normalization);
    out.meta("zone_n", fmt_f(zone_n));
    out.meta("gamma", fmt_f(gamma));
    out.meta("epsilon", fmt_f(eps));
    out.meta("max_conv_error_above_epsilon", fmt_f(conv_eps));
    let mut summary = json!({
        "regime": regime.tag.to_string(),
        "normalization": table.normalization.to_string(),
        "zone_n": zone_n,
        "gamma": gamma,
        "entries": table.entries.len(),
        "epsilon": eps,
        "max_conv_error_above_epsilon": conv_eps,
        "min_singular_value_w_plus": table.min_singular_value(),
    });
    if cfg.config.backward.is_some() {
        summary["min_singular_value_s"] = json!(min_s_singular);
    }
    Ok(Outcome::ok(out, summary))
}

/// Reads a table written by `wave-op`.
pub fn read_wave_op_table(path: &Path) -> Result<WaveOperatorTable<f64>, CliError> {
    let optional = ["wm11", "wm12", "wm21", "wm22", "s11", "s12", "s21", "s22"];
    let input =
        read_numeric_csv(path, &["lambda", "w11", "w12", "w21", "w22", "conv_error", "horizon"], &optional)?;
    let bad = |m: &str| CliError::Config(format!("{}: {}", path.display(), m));
    let regime = match input.meta("regime") {
        Some("Integrable") => RegimeTag::Integrable,
        Some("C1") => RegimeTag::C1,
        Some("C2") => RegimeTag::C2,
        _ => return Err(bad("missing or invalid `# regime=` metadata")),
    };
    let normalization = match input.meta("normalization") {
        Some("classical") => Normalization::Classical,
        Some("modified") => Normalization::Modified,
        _ => return Err(bad("missing or invalid `# normalization=` metadata")),
    };
    let number = |key: &str| -> Result<f64, CliError> {
        input
            .meta(key)
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| bad(&format!("missing or invalid `# {key}=` metadata")))
    };
    let (zone_n, gamma) = (number("zone_n")?, number("gamma")?);
    let has_minus = input.header.len() > 7;
    let entries = input
        .rows
        .iter()
        .map(|r| WaveOperatorEntry {
            lambda: r[0],
            w_plus: Mat2::new(r[1], r[2], r[3], r[4]),
            conv_error: r[5],
            horizon: r[6],
            w_minus: has_minus.then(|| Mat2::new(r[7], r[8], r[9], r[10])),
        })
        .collect();
    WaveOperatorTable::from_entries(entries, regime, normalization, gamma, zone_n)
        .map_err(|e| bad(&e.to_string()))
}

pub fn scatter_residual(ctx: &Context, waveop: &Path) -> Result<Outcome, CliError> {
    let cfg = &ctx.cfg;
    let coeff = setup::coefficient(cfg, &cfg.config.coefficient, &cfg.config.regime)?;
    let model = setup::spectral_model(cfg)?;
    let data = setup::data(cfg, &model)?;
    let regime = setup::classify(cfg, &coeff)?;
    let table = read_wave_op_table(waveop)?;
    if regime.tag != table.regime {
        return Err(CliError::Config(format!(
            "wave-operator table was built for regime {}, the configuration classifies as {}",
            table.regime, regime.tag
        )));
    }
    let times = setup::times(cfg);
    log::info!("residual convention: {} normalization", table.normalization);
    let rows = scattering_residual(&model, &coeff, &data, &table, &times, cfg.config.tolerances.ode)?;
    let mut out = Table::new(["t", "lambda_t", "residual", "energy_u", "energy_v"]);
    for r in &rows {
        out.push([r.t, r.lambda_t, r.residual, r.energy_u, r.energy_v].into_iter().map(fmt_f).collect());
    }
    out.meta("regime", table.regime);
    out.meta("normalization", table.normalization);
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.residual)).collect();
    let fit = decay_fit(&series).ok();
    let summary = json!({
        "regime": table.regime.to_string(),
        "normalization": table.normalization.to_string(),
        "residual_first": rows.first().map(|r| r.residual),
        "residual_last": rows.last().map(|r| r.residual),
        "fitted_exponent": fit.map(|f| f.exponent),
        "fit_log_rms": fit.map(|f| f.residual),
    });
    Ok(Outcome::ok(out, summary))
}

pub fn two_sided(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.cfg;
    let coeff = setup::coefficient(cfg, &cfg.config.coefficient, &cfg.config.regime)?;
    let model = setup::spectral_model(cfg)?;
    let data = setup::data(cfg, &model)?;
    let times = setup::times(cfg);
    let series = two_sided_ratio(&model, &coeff, &data, &times, cfg.config.tolerances.ode)?;
    let quad = Default::default();
    let lambda_t: Vec<f64> = coeff.log_lambda_series(&times, &quad)?.into_iter().map(f64::exp).collect();
    let mut out = Table::new(["t", "lambda_t", "energy_E", "scaled_energy"]);
    for ((t, scaled), l) in series.iter().zip(&lambda_t) {
        out.push(vec![fmt_f(*t), fmt_f(*l), fmt_f(scaled / l), fmt_f(*scaled)]);
    }
    let lo = series.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let hi = series.iter().map(|s| s.1).fold(0.0, f64::max);
    out.meta("lower", fmt_f(lo));
    out.meta("upper", fmt_f(hi));
    let summary = json!({ "lower": lo, "upper": hi, "ratio": hi / lo });
    Ok(Outcome::ok(out, summary))
}
