//! Verification suites: zone bounds, hyperbolic representation, `det N₁`, `Q₁` tail and the
//! energy estimate. Each suite reports empirical constants and pass/fail checks.

use clap::ValueEnum;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use weakdamp::coefficients::{log_grid, shifted_log_grid};
use weakdamp::diagonal::{hyperbolic_representation_complex, n1, q1_series, IM_RESIDUE_FACTOR};
use weakdamp::propagator::integrate_fundamental;
use weakdamp::scattering::energy_estimate_check;
use weakdamp::spectral::DataVector;
use weakdamp::zones::{check_diss_bound_c1, check_diss_bound_c2, t_xi, BoundReport, ZoneGrid};
use weakdamp::{CoefficientKind, CoefficientModel};

use crate::commands::Outcome;
use crate::error::CliError;
use crate::output::{fmt_f, Table};
use crate::setup;
use crate::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    ZoneBounds,
    HyperbolicRep,
    #[value(name = "detN1")]
    DetN1,
    Q1Tail,
    EnergyEstimate,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::ZoneBounds, Suite::HyperbolicRep, Suite::DetN1, Suite::Q1Tail, Suite::EnergyEstimate];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ZoneBounds => "zone-bounds",
            Suite::HyperbolicRep => "hyperbolic-rep",
            Suite::DetN1 => "detN1",
            Suite::Q1Tail => "q1-tail",
            Suite::EnergyEstimate => "energy-estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// One pass/fail criterion of a suite.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub status: Status,
    pub witness: Value,
}

impl Check {
    /// Passes when `value <= threshold`.
    fn at_most(name: &str, value: f64, threshold: f64, witness: Value) -> Self {
        let status = if value <= threshold { Status::Pass } else { Status::Fail };
        Self { name: name.into(), value, threshold, status, witness }
    }

    /// Passes when `value >= threshold`.
    fn at_least(name: &str, value: f64, threshold: f64, witness: Value) -> Self {
        let status = if value >= threshold { Status::Pass } else { Status::Fail };
        Self { name: name.into(), value, threshold, status, witness }
    }

    fn skipped(name: &str, reason: &str) -> Self {
        Self { name: name.into(), value: f64::NAN, threshold: f64::NAN, status: Status::Skipped, witness: json!({ "reason": reason }) }
    }

    fn to_json(&self) -> Value {
        let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        json!({
            "check": self.name,
            "value": num(self.value),
            "threshold": num(self.threshold),
            "status": self.status.as_str(),
            "witness": self.witness,
        })
    }
}

/// Report of one suite: its detail table and its checks.
#[derive(Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub table: Table,
    pub checks: Vec<Check>,
}

/// Largest factor between consecutive constants, with its position.
fn max_change(constants: &[f64]) -> (f64, usize) {
    constants
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (a, b) = (w[0].abs(), w[1].abs());
            let f = if a == b { 1.0 } else { a.max(b) / a.min(b) };
            (f, i + 1)
        })
        .fold((1.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn declared_c2(coeff: &CoefficientModel<f64>) -> bool {
    coeff.mu_lower.is_some_and(|m| m > 0.5)
}

fn declared_c1(coeff: &CoefficientModel<f64>) -> bool {
    matches!(coeff.kind, CoefficientKind::Zero) || coeff.mu_upper.is_some_and(|m| m < 0.5)
}

fn zone_bounds(ctx: &Context, coeff: &CoefficientModel<f64>) -> Result<SuiteReport, CliError> {
    let cfg = &ctx.cfg;
    let v = &cfg.config.verify;
    let mut table = Table::new(["check", "lambda", "t", "entry", "ratio", "refinement_level"]);
    let (check_name, is_c2) = if declared_c2(coeff) {
        ("diss_bound_c2", true)
    } else if declared_c1(coeff) {
        ("diss_bound_c1", false)
    } else {
        let checks = vec![Check::skipped("refinement_stability", "coefficient is declared neither C1 nor C2")];
        return Ok(SuiteReport { suite: Suite::ZoneBounds, table, checks });
    };
    let regime = setup::classify(cfg, coeff)?;
    let gamma = cfg.config.gamma.or(regime.lemma_gamma).or(coeff.effective_mu_plus().map(|m| 2.0 * m)).unwrap_or(0.0);
    let zone_n = match cfg.config.zone_n {
        Some(n) => n,
        None => setup::zone_n(cfg, coeff, &log_grid(v.lambda_min, 1.0, v.n_lambda))?,
    };
    if !(v.lambda_min < zone_n) {
        return Err(CliError::Config(format!("verify.lambda_min = {} must be below N = {}", v.lambda_min, zone_n)));
    }
    let tol = cfg.config.tolerances.ode;
    let mut constants = Vec::new();
    let mut witnesses: Vec<BoundReport<f64>> = Vec::new();
    for level in 0..v.levels {
        let grid = ZoneGrid::refined(v.lambda_min, zone_n, v.n_lambda, v.t_points, level, v.lambda_factor)?;
        log::info!("zone-bounds level {level}: {} frequencies", grid.lambdas.len());
        let report = if is_c2 {
            check_diss_bound_c2(coeff, &grid, zone_n, tol)?
        } else {
            check_diss_bound_c1(coeff, &grid, gamma, zone_n, tol)?
        };
        for r in &report.rows {
            table.push(vec![
                check_name.to_string(),
                fmt_f(r.lambda),
                fmt_f(r.t),
                format!("{}{}", r.entry.0 + 1, r.entry.1 + 1),
                fmt_f(r.ratio),
                level.to_string(),
            ]);
        }
        constants.push(report.constant);
        witnesses.push(report);
    }
    let (change, at) = max_change(&constants);
    let w = &witnesses[at].witness;
    let witness = json!({
        "constants": constants,
        "level": at,
        "lambda": w.lambda,
        "t": w.t,
        "entry": format!("{}{}", w.entry.0 + 1, w.entry.1 + 1),
        "ratio": w.ratio,
    });
    table.meta("gamma", fmt_f(gamma));
    table.meta("zone_n", fmt_f(zone_n));
    let checks = vec![Check::at_most("refinement_stability", change, v.stability_factor, witness)];
    Ok(SuiteReport { suite: Suite::ZoneBounds, table, checks })
}

fn hyperbolic_rep(ctx: &Context, coeff: &CoefficientModel<f64>) -> Result<SuiteReport, CliError> {
    let cfg = &ctx.cfg;
    let v = &cfg.config.verify;
    let tol = cfg.config.tolerances.ode;
    let zone_n = setup::zone_n(cfg, coeff, &[v.rep_lambda[0]])?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (ll, lh) = (v.rep_lambda[0].ln(), v.rep_lambda[1].ln());
    let mut samples = Vec::with_capacity(v.samples);
    for _ in 0..v.samples {
        let lambda = (ll + (lh - ll) * rng.random::<f64>()).exp();
        let start = t_xi(lambda, zone_n)?;
        let end = v.rep_t_max.max(start);
        let a = start + (end - start) * rng.random::<f64>();
        let b = start + (end - start) * rng.random::<f64>();
        samples.push((lambda, a.min(b), a.max(b)));
    }
    let rows = samples
        .par_iter()
        .map(|&(lambda, s, t)| -> Result<(f64, f64, f64, f64, f64), weakdamp::Error> {
            let rep = hyperbolic_representation_complex(coeff, lambda, s, t, tol)?;
            let (re, im) = rep.split_real();
            let direct = integrate_fundamental(coeff, lambda, s, t, tol)?;
            let rel = (re - direct).frobenius() / direct.frobenius();
            let residue = im / re.max_abs().max(1.0);
            Ok((lambda, s, t, rel, residue))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["lambda", "s", "t", "rel_err", "im_residue"]);
    for r in &rows {
        table.push([r.0, r.1, r.2, r.3, r.4].into_iter().map(fmt_f).collect());
    }
    let worst = |k: fn(&(f64, f64, f64, f64, f64)) -> f64| {
        rows.iter().copied().fold(rows[0], |a, b| if k(&b) > k(&a) { b } else { a })
    };
    let w_rel = worst(|r| r.3);
    let w_im = worst(|r| r.4);
    table.meta("zone_n", fmt_f(zone_n));
    let checks = vec![
        Check::at_most("max_rel_err", w_rel.3, v.rep_tol, json!({ "lambda": w_rel.0, "s": w_rel.1, "t": w_rel.2 })),
        Check::at_most(
            "max_im_residue",
            w_im.4,
            IM_RESIDUE_FACTOR * tol.max(f64::EPSILON),
            json!({ "lambda": w_im.0, "s": w_im.1, "t": w_im.2 }),
        ),
    ];
    Ok(SuiteReport { suite: Suite::HyperbolicRep, table, checks })
}

fn det_n1(ctx: &Context, coeff: &CoefficientModel<f64>) -> Result<SuiteReport, CliError> {
    let cfg = &ctx.cfg;
    let v = &cfg.config.verify;
    let lambdas = log_grid(v.rep_lambda[0], v.rep_lambda[1], 4 * v.n_lambda);
    let zone_n = setup::zone_n(cfg, coeff, &lambdas)?;
    let mut table = Table::new(["lambda", "t", "det_n1", "formula", "abs_err"]);
    let mut worst_err = (0.0, 0.0, 0.0);
    let mut worst_det = (f64::INFINITY, 0.0, 0.0);
    for &lambda in &lambdas {
        let start = t_xi(lambda, zone_n)?;
        for t in shifted_log_grid(start, v.rep_t_max.max(start) * 10.0, v.t_points) {
            let det: Complex<f64> = n1(coeff, t, lambda)?.det();
            let b = coeff.b(t);
            let formula = 1.0 - b * b / (4.0 * lambda * lambda);
            let err = (det - Complex::new(formula, 0.0)).norm();
            if err > worst_err.0 {
                worst_err = (err, lambda, t);
            }
            if det.re < worst_det.0 {
                worst_det = (det.re, lambda, t);
            }
            table.push([lambda, t, det.re, formula, err].into_iter().map(fmt_f).collect());
        }
    }
    table.meta("zone_n", fmt_f(zone_n));
    let checks = vec![
        Check::at_most("max_abs_err", worst_err.0, v.det_tol, json!({ "lambda": worst_err.1, "t": worst_err.2 })),
        Check::at_least("min_det", worst_det.0, v.det_min, json!({ "lambda": worst_det.1, "t": worst_det.2 })),
    ];
    Ok(SuiteReport { suite: Suite::DetN1, table, checks })
}

fn q1_tail(ctx: &Context, coeff: &CoefficientModel<f64>) -> Result<SuiteReport, CliError> {
    let cfg = &ctx.cfg;
    let v = &cfg.config.verify;
    let tol = cfg.config.tolerances.ode;
    let zone_n = setup::zone_n(cfg, coeff, &v.tail_lambdas)?;
    let per_lambda = v
        .tail_lambdas
        .par_iter()
        .map(|&lambda| -> Result<Vec<(f64, f64, f64, f64, f64)>, weakdamp::Error> {
            let s = t_xi(lambda, zone_n)?;
            let ts: Vec<f64> = log_grid(v.tail_range[0], v.tail_range[1], v.tail_points).into_iter().filter(|&t| t >= s).collect();
            let mut times: Vec<f64> = ts.iter().flat_map(|&t| [t, 2.0 * t]).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            let q = q1_series(coeff, lambda, s, &times, tol)?;
            let at = |t: f64| &q[times.partition_point(|&x| x < t)];
            Ok(ts
                .iter()
                .map(|&t| {
                    let diff = (*at(2.0 * t) - *at(t)).frobenius();
                    (lambda, s, t, diff, diff * lambda * t)
                })
                .collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["lambda", "s", "t", "tail_diff", "scaled"]);
    // Boundedness: the largest scaled difference over the upper half of the T range may exceed
    // the one over the lower half at most by the stability factor.
    let floor = cfg.config.tolerances.limit;
    let mut growth = (1.0, 0.0);
    for rows in &per_lambda {
        for r in rows {
            table.push([r.0, r.1, r.2, r.3, r.4].into_iter().map(fmt_f).collect());
        }
        if rows.len() >= 2 {
            let half = rows.len() / 2;
            let lo = rows[..half].iter().map(|r| r.4).fold(0.0, f64::max).max(floor);
            let hi = rows[half..].iter().map(|r| r.4).fold(0.0, f64::max).max(floor);
            if hi / lo > growth.0 {
                growth = (hi / lo, rows[0].0);
            }
        }
    }
    table.meta("zone_n", fmt_f(zone_n));
    let sup = per_lambda.iter().flatten().map(|r| r.4).fold(0.0, f64::max);
    let checks = vec![Check::at_most(
        "scaled_tail_growth",
        growth.0,
        v.stability_factor,
        json!({ "lambda": growth.1, "sup_scaled": sup }),
    )];
    Ok(SuiteReport { suite: Suite::Q1Tail, table, checks })
}

fn energy_estimate(ctx: &Context, coeff: &CoefficientModel<f64>) -> Result<SuiteReport, CliError> {
    let cfg = &ctx.cfg;
    let v = &cfg.config.verify;
    let mut table = Table::new(["datum", "sup_ratio", "refinement_level"]);
    if !declared_c1(coeff) && !declared_c2(coeff) {
        let checks = vec![Check::skipped("refinement_stability", "coefficient is declared neither C1 nor C2")];
        return Ok(SuiteReport { suite: Suite::EnergyEstimate, table, checks });
    }
    if cfg.config.spectral.is_none() {
        let checks = vec![Check::skipped("refinement_stability", "no spectral model configured")];
        return Ok(SuiteReport { suite: Suite::EnergyEstimate, table, checks });
    }
    let model = setup::spectral_model(cfg)?;
    let regime = setup::classify(cfg, coeff)?;
    let gamma = setup::gamma(cfg, &regime);
    let zone_n = setup::zone_n(cfg, coeff, &model.lambdas())?;

    let mut data_set = Vec::new();
    if cfg.config.data.is_some() {
        data_set.push(setup::data(cfg, &model)?);
    }
    // Random data use a stream independent of the hyperbolic-representation samples.
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x5eed_0e57);
    for _ in 0..v.random_data {
        let mut draw = || Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (u1, u2) = model
            .points()
            .iter()
            .map(|p| if p.is_kernel() { (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)) } else { (draw(), draw()) })
            .unzip();
        data_set.push(DataVector::new(u1, u2)?);
    }
    if data_set.is_empty() {
        let checks = vec![Check::skipped("refinement_stability", "no data configured and verify.random_data = 0")];
        return Ok(SuiteReport { suite: Suite::EnergyEstimate, table, checks });
    }
    let t = &cfg.config.times;
    let mut constants = Vec::new();
    let mut witnesses = Vec::new();
    for level in 0..v.levels {
        let points = (t.points - 1) * (1 << level) + 1;
        let times =
            if t.t_min == 0.0 { shifted_log_grid(0.0, t.t_max, points) } else { log_grid(t.t_min, t.t_max, points) };
        let report = energy_estimate_check(&model, coeff, &data_set, gamma, zone_n, &times, cfg.config.tolerances.ode)?;
        for (j, c) in report.per_datum.iter().enumerate() {
            table.push(vec![j.to_string(), fmt_f(*c), level.to_string()]);
        }
        constants.push(report.constant);
        witnesses.push((report.witness_t, report.witness_index));
    }
    let (change, at) = max_change(&constants);
    table.meta("gamma", fmt_f(gamma));
    table.meta("zone_n", fmt_f(zone_n));
    let witness = json!({
        "constants": constants,
        "level": at,
        "t": witnesses[at].0,
        "datum": witnesses[at].1,
        "regime": regime.tag.to_string(),
    });
    let checks = vec![Check::at_most("refinement_stability", change, v.stability_factor, witness)];
    Ok(SuiteReport { suite: Suite::EnergyEstimate, table, checks })
}

pub fn run_suite(ctx: &Context, suite: Suite) -> Result<SuiteReport, CliError> {
    let cfg = &ctx.cfg;
    let coeff = setup::coefficient(cfg, &cfg.config.coefficient, &cfg.config.regime)?;
    log::info!("verify {}", suite.name());
    match suite {
        Suite::ZoneBounds => zone_bounds(ctx, &coeff),
        Suite::HyperbolicRep => hyperbolic_rep(ctx, &coeff),
        Suite::DetN1 => det_n1(ctx, &coeff),
        Suite::Q1Tail => q1_tail(ctx, &coeff),
        Suite::EnergyEstimate => energy_estimate(ctx, &coeff),
    }
}

fn checks_json(reports: &[SuiteReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .flat_map(|r| {
                r.checks.iter().map(move |c| {
                    let mut v = c.to_json();
                    v["suite"] = json!(r.suite.name());
                    v
                })
            })
            .collect(),
    )
}

fn summary_table(reports: &[SuiteReport]) -> Table {
    let mut t = Table::new(["suite", "check", "value", "threshold", "status"]);
    for r in reports {
        for c in &r.checks {
            let cell = |x: f64| if x.is_finite() { fmt_f(x) } else { String::new() };
            t.push(vec![
                r.suite.name().into(),
                c.name.clone(),
                cell(c.value),
                cell(c.threshold),
                c.status.as_str().into(),
            ]);
        }
    }
    t
}

/// Runs one suite (its detail table is the main output) or all suites (the pass/fail table is the
/// main output and each suite's table is written alongside).
pub fn verify(ctx: &Context, suite: Option<Suite>) -> Result<Outcome, CliError> {
    let suites: Vec<Suite> = suite.map(|s| vec![s]).unwrap_or_else(|| Suite::ALL.to_vec());
    let reports = suites.into_iter().map(|s| run_suite(ctx, s)).collect::<Result<Vec<_>, _>>()?;
    let failed = reports.iter().flat_map(|r| &r.checks).any(|c| c.status == Status::Fail);
    let summary = json!({ "status": if failed { "check_failed" } else { "pass" }, "checks": checks_json(&reports) });
    if suite.is_some() {
        let report = reports.into_iter().next().expect("one suite");
        return Ok(Outcome { table: report.table, extra: Vec::new(), summary, failed });
    }
    let table = summary_table(&reports);
    let extra = reports.into_iter().map(|r| (r.suite.name().to_string(), r.table)).collect();
    Ok(Outcome { table, extra, summary, failed })
}
