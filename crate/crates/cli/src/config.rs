//! Experiment configuration: a TOML file validated before any computation.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

/// Top-level experiment description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub coefficient: CoefficientSpec,
    #[serde(default)]
    pub spectral: Option<SpectralSpec>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    #[serde(default)]
    pub regime: RegimeSpec,
    /// Zone constant `N`; selected automatically (`det N₁ >= 0.9`) when absent.
    #[serde(default)]
    pub zone_n: Option<f64>,
    /// Overrides the energy-space index (and, for C1, the dissipative-zone exponent).
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Lower end of the uniform-convergence set `{Λ >= ε}` used to report wave-operator errors.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub times: TimesSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default = "default_horizon_cap")]
    pub horizon_cap: f64,
    #[serde(default)]
    pub classify: ClassifySpec,
    #[serde(default)]
    pub backward: Option<BackwardSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_horizon_cap() -> f64 {
    1e6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Zero,
    PowerLaw {
        #[serde(default = "one")]
        amplitude: f64,
        p: f64,
    },
    #[serde(rename = "mu_over_1pt")]
    MuOver1pt {
        mu: f64,
    },
    IteratedLog {
        mu: f64,
        n: u32,
    },
    FootnoteCounterexample,
    /// CSV with columns `t,b,bprime`.
    Tabulated {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralSpec {
    DirichletInterval { k: usize },
    NeumannInterval { k: usize },
    FreeWave { dim: u32, xi_max: f64, points: usize },
    KleinGordon { dim: u32, xi_max: f64, points: usize },
    Plate { dim: u32, xi_max: f64, points: usize },
    /// CSV with columns `lambda,weight[,is_kernel]`.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    /// Profile `exp(-((λ - center)/width)²)` in both components on positive modes.
    GaussianBump { center: f64, width: f64 },
    /// Smooth bump profile supported on `λ ∈ (lo, hi)`, in both components.
    CompactBump { lo: f64, hi: f64 },
    /// Data carried by the kernel modes only.
    KernelOnly {
        #[serde(default)]
        u1: f64,
        #[serde(default)]
        u2: f64,
    },
    /// CSV with columns `lambda_index,re_u1,im_u1,re_u2,im_u2`; unlisted modes are zero.
    Csv { path: PathBuf },
}

/// Declared hypothesis constants of the coefficient.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSpec {
    pub mu_upper: Option<f64>,
    pub mu_lower: Option<f64>,
    pub mu_plus: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

/// Log-spaced sample times; `t_min = 0` spaces `1 + t` logarithmically instead.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimesSpec {
    fn default() -> Self {
        Self { t_min: 1.0, t_max: 1e3, points: 16 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Integration tolerance.
    #[serde(default = "default_ode_tol")]
    pub ode: f64,
    /// Cauchy stopping threshold for limits `t → ∞`.
    #[serde(default = "default_limit_tol")]
    pub limit: f64,
}

fn default_ode_tol() -> f64 {
    1e-12
}

fn default_limit_tol() -> f64 {
    1e-9
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self { ode: default_ode_tol(), limit: default_limit_tol() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    #[serde(default = "default_classify_horizon")]
    pub horizon: f64,
    #[serde(default = "default_classify_grid")]
    pub grid_size: usize,
}

fn default_classify_horizon() -> f64 {
    1e6
}

fn default_classify_grid() -> usize {
    64
}

impl Default for ClassifySpec {
    fn default() -> Self {
        Self { horizon: default_classify_horizon(), grid_size: default_classify_grid() }
    }
}

/// Backward branch `t → -∞` used for `W₋` and `S`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackwardSpec {
    /// `b(-τ)` for `τ >= 0`; the even extension (same coefficient) when absent.
    #[serde(default)]
    pub coefficient: Option<CoefficientSpec>,
    pub hypothesis: HypothesisSpec,
    /// Lower bound of `Λ` for the invertible hypothesis.
    #[serde(default)]
    pub c0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisSpec {
    Integrable,
    Invertible,
}

/// Grids and thresholds of the verification suites.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Smallest frequency of the level-0 zone grid.
    #[serde(default = "default_lambda_min")]
    pub lambda_min: f64,
    #[serde(default = "default_n_lambda")]
    pub n_lambda: usize,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
    /// Refinement levels `0..levels`.
    #[serde(default = "default_levels")]
    pub levels: u32,
    /// Factor dividing `lambda_min` per refinement level.
    #[serde(default = "default_lambda_factor")]
    pub lambda_factor: f64,
    /// Allowed change of an empirical constant between consecutive levels.
    #[serde(default = "default_stability")]
    pub stability_factor: f64,
    /// Random samples of the hyperbolic representation.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rep_lambda")]
    pub rep_lambda: [f64; 2],
    #[serde(default = "default_rep_t_max")]
    pub rep_t_max: f64,
    #[serde(default = "default_rep_tol")]
    pub rep_tol: f64,
    #[serde(default = "default_det_tol")]
    pub det_tol: f64,
    #[serde(default = "default_det_min")]
    pub det_min: f64,
    /// Frequencies of the `Q₁` tail check.
    #[serde(default = "default_tail_lambdas")]
    pub tail_lambdas: Vec<f64>,
    #[serde(default = "default_tail_range")]
    pub tail_range: [f64; 2],
    #[serde(default = "default_tail_points")]
    pub tail_points: usize,
    /// Random data added to the configured datum in the energy-estimate suite.
    #[serde(default = "default_random_data")]
    pub random_data: usize,
}

fn default_lambda_min() -> f64 {
    0.01
}
fn default_n_lambda() -> usize {
    6
}
fn default_t_points() -> usize {
    12
}
fn default_levels() -> u32 {
    3
}
fn default_lambda_factor() -> f64 {
    10.0
}
fn default_stability() -> f64 {
    2.0
}
fn default_samples() -> usize {
    100
}
fn default_rep_lambda() -> [f64; 2] {
    [0.5, 50.0]
}
fn default_rep_t_max() -> f64 {
    1e3
}
fn default_rep_tol() -> f64 {
    1e-6
}
fn default_det_tol() -> f64 {
    1e-14
}
fn default_det_min() -> f64 {
    0.9
}
fn default_tail_lambdas() -> Vec<f64> {
    vec![0.5, 1.0, 4.0]
}
fn default_tail_range() -> [f64; 2] {
    [10.0, 1e4]
}
fn default_tail_points() -> usize {
    13
}
fn default_random_data() -> usize {
    3
}

impl Default for VerifySpec {
    fn default() -> Self {
        toml::from_str("").expect("all verify fields have defaults")
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output CSV path used when `--out` is not given.
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub dump_modes: bool,
}

/// A parsed configuration together with its source text and location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub text: String,
    pub dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
        let config = parse(&text)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, text, dir })
    }

    /// Resolves a path from the config relative to the config file's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }
}

/// Parses and validates a configuration.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Schema-level checks that need no numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        validate_coefficient("coefficient", &self.coefficient)?;
        if let Some(s) = &self.spectral {
            match *s {
                SpectralSpec::DirichletInterval { k } | SpectralSpec::NeumannInterval { k } if k == 0 => {
                    return Err(CliError::Config("spectral.k must be >= 1".into()));
                }
                SpectralSpec::FreeWave { dim, xi_max, points }
                | SpectralSpec::KleinGordon { dim, xi_max, points }
                | SpectralSpec::Plate { dim, xi_max, points } => {
                    positive("spectral.xi_max", xi_max)?;
                    if dim == 0 || points == 0 {
                        return Err(CliError::Config("spectral.dim and spectral.points must be >= 1".into()));
                    }
                }
                _ => {}
            }
        }
        if let Some(d) = &self.data {
            match *d {
                DataSpec::GaussianBump { center, width } => {
                    finite("data.center", center)?;
                    positive("data.width", width)?;
                }
                DataSpec::CompactBump { lo, hi } => {
                    finite("data.lo", lo)?;
                    finite("data.hi", hi)?;
                    if lo >= hi {
                        return Err(CliError::Config("data.lo must be below data.hi".into()));
                    }
                }
                DataSpec::KernelOnly { u1, u2 } => {
                    finite("data.u1", u1)?;
                    finite("data.u2", u2)?;
                }
                DataSpec::Csv { .. } => {}
            }
        }
        let r = &self.regime;
        for (name, v) in [("regime.mu_upper", r.mu_upper), ("regime.mu_lower", r.mu_lower)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!("{name} must be >= 0, got {v}")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (r.mu_lower, r.mu_upper) {
            if lo > hi {
                return Err(CliError::Config("regime.mu_lower exceeds regime.mu_upper".into()));
            }
        }
        if let Some(p) = r.mu_plus {
            if r.mu_upper.is_some_and(|m| p <= m) || r.mu_lower.is_some_and(|m| p <= m) {
                return Err(CliError::Config("regime.mu_plus must exceed the declared mu".into()));
            }
        }
        for (name, v) in [("regime.c1", r.c1), ("regime.c2", r.c2), ("zone_n", self.zone_n)] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(CliError::Config(format!("gamma must be >= 0, got {g}")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::Config("epsilon must be >= 0".into()));
        }
        let t = &self.times;
        if !(t.t_min >= 0.0 && t.t_min.is_finite()) || !(t.t_max > t.t_min && t.t_max.is_finite()) || t.points < 2 {
            return Err(CliError::Config("times needs 0 <= t_min < t_max and points >= 2".into()));
        }
        positive("tolerances.ode", self.tolerances.ode)?;
        positive("tolerances.limit", self.tolerances.limit)?;
        positive("horizon_cap", self.horizon_cap)?;
        positive("classify.horizon", self.classify.horizon)?;
        if self.classify.grid_size < 2 {
            return Err(CliError::Config("classify.grid_size must be >= 2".into()));
        }
        if let Some(b) = &self.backward {
            if let Some(c) = &b.coefficient {
                validate_coefficient("backward.coefficient", c)?;
            }
            match (b.hypothesis, b.c0) {
                (HypothesisSpec::Invertible, Some(c0)) => positive("backward.c0", c0)?,
                (HypothesisSpec::Invertible, None) => {
                    return Err(CliError::Config("backward.c0 is required for the invertible hypothesis".into()))
                }
                (HypothesisSpec::Integrable, Some(_)) => {
                    return Err(CliError::Config("backward.c0 only applies to the invertible hypothesis".into()))
                }
                (HypothesisSpec::Integrable, None) => {}
            }
        }
        let v = &self.verify;
        positive("verify.lambda_min", v.lambda_min)?;
        positive("verify.rep_tol", v.rep_tol)?;
        positive("verify.det_tol", v.det_tol)?;
        positive("verify.rep_t_max", v.rep_t_max)?;
        if !(v.lambda_factor > 1.0) || !(v.stability_factor > 1.0) {
            return Err(CliError::Config("verify.lambda_factor and verify.stability_factor must exceed 1".into()));
        }
        if v.n_lambda == 0 || v.t_points < 2 || v.levels < 2 || v.samples == 0 || v.tail_points < 2 {
            return Err(CliError::Config(
                "verify needs n_lambda >= 1, t_points >= 2, levels >= 2, samples >= 1, tail_points >= 2".into(),
            ));
        }
        if !(v.rep_lambda[0] > 0.0 && v.rep_lambda[1] >= v.rep_lambda[0]) {
            return Err(CliError::Config("verify.rep_lambda must be an interval of positive numbers".into()));
        }
        if !(v.tail_range[0] > 0.0 && v.tail_range[1] > v.tail_range[0]) {
            return Err(CliError::Config("verify.tail_range must be an interval of positive numbers".into()));
        }
        if v.tail_lambdas.is_empty() || v.tail_lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(CliError::Config("verify.tail_lambdas must be positive".into()));
        }
        if !(v.det_min > 0.0 && v.det_min < 1.0) {
            return Err(CliError::Config("verify.det_min must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

fn validate_coefficient(name: &str, c: &CoefficientSpec) -> Result<(), CliError> {
    match *c {
        CoefficientSpec::PowerLaw { amplitude, p } => {
            if !(amplitude >= 0.0 && amplitude.is_finite()) {
                return Err(CliError::Config(format!("{name}.amplitude must be >= 0")));
            }
            positive(&format!("{name}.p"), p)
        }
        CoefficientSpec::MuOver1pt { mu } | CoefficientSpec::IteratedLog { mu, .. } => {
            if mu >= 0.0 && mu.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name}.mu must be >= 0")))
            }
        }
        _ => Ok(()),
    }
}
