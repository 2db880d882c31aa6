//! Construction of the numerical objects described by a configuration.

use num_complex::Complex;
use weakdamp::coefficients::{log_grid, shifted_log_grid};
use weakdamp::diagonal::{select_zone_n, LimitOptions};
use weakdamp::spectral::{BuiltinModel, DataVector, SpectralModel, SpectralPoint};
use weakdamp::{CoefficientModel, Regime, TabulatedCoefficient};

use crate::config::{CoefficientSpec, DataSpec, LoadedConfig, RegimeSpec, SpectralSpec};
use crate::error::CliError;
use crate::output::read_numeric_csv;

/// `det N₁` threshold of the automatic zone-constant selection.
pub const AUTO_ZONE_DET_MIN: f64 = 0.9;

/// Builds a coefficient model and attaches the declared hypothesis constants.
pub fn coefficient(cfg: &LoadedConfig, spec: &CoefficientSpec, regime: &RegimeSpec) -> Result<CoefficientModel<f64>, CliError> {
    let model = match spec {
        CoefficientSpec::Zero => CoefficientModel::zero(),
        CoefficientSpec::PowerLaw { amplitude, p } => CoefficientModel::power_law(*amplitude, *p),
        CoefficientSpec::MuOver1pt { mu } => CoefficientModel::mu_over_1pt(*mu),
        CoefficientSpec::IteratedLog { mu, n } => CoefficientModel::iterated_log(*mu, *n),
        CoefficientSpec::FootnoteCounterexample => CoefficientModel::footnote_counterexample(),
        CoefficientSpec::Tabulated { path } => {
            let path = cfg.resolve(path);
            let input = read_numeric_csv(&path, &["t", "b", "bprime"], &[])?;
            let col = |k: usize| input.rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
            let table = TabulatedCoefficient::new(col(0), col(1), col(2))
                .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
            CoefficientModel::tabulated(table, path.display().to_string())
        }
    };
    let mut model = model.declare(regime.mu_upper, regime.mu_lower).with_bounds(regime.c1, regime.c2);
    if let Some(p) = regime.mu_plus {
        model = model.with_mu_plus(p);
    }
    Ok(model)
}

pub fn spectral_model(cfg: &LoadedConfig) -> Result<SpectralModel<f64>, CliError> {
    let spec = cfg.config.spectral.as_ref().ok_or_else(|| CliError::Config("missing `spectral`".into()))?;
    let builtin = match *spec {
        SpectralSpec::DirichletInterval { k } => BuiltinModel::DirichletInterval { k },
        SpectralSpec::NeumannInterval { k } => BuiltinModel::NeumannInterval { k },
        SpectralSpec::FreeWave { dim, xi_max, points } => BuiltinModel::FreeWave { dim, xi_max, points },
        SpectralSpec::KleinGordon { dim, xi_max, points } => BuiltinModel::KleinGordon { dim, xi_max, points },
        SpectralSpec::Plate { dim, xi_max, points } => BuiltinModel::Plate { dim, xi_max, points },
        SpectralSpec::Csv { ref path } => {
            let path = cfg.resolve(path);
            let input = read_numeric_csv(&path, &["lambda", "weight"], &["is_kernel"])?;
            let mut points = Vec::with_capacity(input.rows.len());
            for (i, r) in input.rows.iter().enumerate() {
                if let Some(&k) = r.get(2) {
                    let flagged = match k {
                        0.0 => false,
                        1.0 => true,
                        _ => return Err(CliError::Config(format!("{}: row {}: is_kernel must be 0 or 1", path.display(), i + 1))),
                    };
                    if flagged != (r[0] == 0.0) {
                        return Err(CliError::Config(format!(
                            "{}: row {}: is_kernel must be 1 exactly when lambda = 0",
                            path.display(),
                            i + 1
                        )));
                    }
                }
                points.push(SpectralPoint { lambda: r[0], weight: r[1] });
            }
            return SpectralModel::new(points, path.display().to_string())
                .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)));
        }
    };
    SpectralModel::builtin(builtin).map_err(|e| CliError::Config(format!("spectral: {e}")))
}

pub fn data(cfg: &LoadedConfig, model: &SpectralModel<f64>) -> Result<DataVector<f64>, CliError> {
    let spec = cfg.config.data.as_ref().ok_or_else(|| CliError::Config("missing `data`".into()))?;
    let as_config = |e: weakdamp::Error| CliError::Config(format!("data: {e}"));
    match *spec {
        DataSpec::GaussianBump { center, width } => DataVector::gaussian_bump(model, center, width).map_err(as_config),
        DataSpec::CompactBump { lo, hi } => DataVector::compact_bump(model, lo, hi).map_err(as_config),
        DataSpec::KernelOnly { u1, u2 } => {
            if model.kernel_indices().is_empty() {
                return Err(CliError::Config("data.kind = kernel_only needs a model with kernel modes".into()));
            }
            Ok(DataVector::kernel_only(model, Complex::new(u1, 0.0), Complex::new(u2, 0.0)))
        }
        DataSpec::Csv { ref path } => {
            let path = cfg.resolve(path);
            let input = read_numeric_csv(&path, &["lambda_index", "re_u1", "im_u1", "re_u2", "im_u2"], &[])?;
            let mut d = DataVector::zeros(model.len());
            for (i, r) in input.rows.iter().enumerate() {
                let j = r[0];
                if j < 0.0 || j.fract() != 0.0 || j as usize >= model.len() {
                    return Err(CliError::Config(format!(
                        "{}: row {}: lambda_index {} is not a mode index below {}",
                        path.display(),
                        i + 1,
                        j,
                        model.len()
                    )));
                }
                d.u1[j as usize] = Complex::new(r[1], r[2]);
                d.u2[j as usize] = Complex::new(r[3], r[4]);
            }
            Ok(d)
        }
    }
}

/// Sample times of the configuration.
pub fn times(cfg: &LoadedConfig) -> Vec<f64> {
    let t = &cfg.config.times;
    if t.t_min == 0.0 {
        shifted_log_grid(0.0, t.t_max, t.points)
    } else {
        log_grid(t.t_min, t.t_max, t.points)
    }
}

pub fn limit_options(cfg: &LoadedConfig) -> LimitOptions<f64> {
    LimitOptions { tol: cfg.config.tolerances.ode, limit_tol: cfg.config.tolerances.limit, horizon_cap: cfg.config.horizon_cap }
}

pub fn classify(cfg: &LoadedConfig, coeff: &CoefficientModel<f64>) -> Result<Regime<f64>, CliError> {
    Ok(coeff.classify(cfg.config.classify.horizon, cfg.config.classify.grid_size)?)
}

/// Configured zone constant, or the smallest power of two with `det N₁ >= 0.9` for the given
/// frequencies.
pub fn zone_n(cfg: &LoadedConfig, coeff: &CoefficientModel<f64>, lambdas: &[f64]) -> Result<f64, CliError> {
    match cfg.config.zone_n {
        Some(n) => Ok(n),
        None => Ok(select_zone_n(coeff, lambdas, AUTO_ZONE_DET_MIN)?),
    }
}

/// Energy-space index: the override, else the regime's `max(μ̄⁺ - 1, 0)`.
pub fn gamma(cfg: &LoadedConfig, regime: &Regime<f64>) -> f64 {
    cfg.config.gamma.unwrap_or(regime.gamma_index)
}
