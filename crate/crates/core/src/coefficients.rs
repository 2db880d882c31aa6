//! Dissipation coefficients `b(t)`, the decay scale `λ(t) = exp(∫₀ᵗ b)`, tail integrals and
//! regime classification.
//!
//! Regimes are declared by the caller (`mu_upper`, `mu_lower`); sampling only falsifies a
//! declaration. Integrability is the one property inferred from samples.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};
use crate::scalar::Real;
use crate::spline::MonotoneCubic;

type ScalarFn<T> = Box<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied coefficient given by closures.
pub struct CustomCoefficient<T> {
    pub b: ScalarFn<T>,
    pub b_prime: ScalarFn<T>,
    pub primitive: Option<ScalarFn<T>>,
}

/// Coefficient tabulated on `(t, b, b')` samples.
///
/// Inside the table both `b` and `b'` are monotone cubic interpolants of the samples. Beyond the
/// last sample the tail is continued as `b(t_last)(1 + t_last)/(1 + t)`, which keeps `t·b(t)`
/// constant.
#[derive(Debug, Clone)]
pub struct TabulatedCoefficient<T> {
    b: MonotoneCubic<T>,
    b_prime: MonotoneCubic<T>,
}

impl<T: Real> TabulatedCoefficient<T> {
    pub fn new(t: Vec<T>, b: Vec<T>, b_prime: Vec<T>) -> Result<Self> {
        if t.first().is_none_or(|&t0| t0 > T::zero()) {
            return Err(Error::Argument("tabulated coefficient must start at t <= 0".into()));
        }
        Ok(Self { b: MonotoneCubic::new(t.clone(), b)?, b_prime: MonotoneCubic::new(t, b_prime)? })
    }

    fn value(&self, t: T) -> T {
        let last = self.b.x_max();
        if t > last {
            let (bl, _) = self.b.eval(last);
            bl * (T::one() + last) / (T::one() + t)
        } else {
            self.b.eval(t).0
        }
    }

    fn derivative(&self, t: T) -> T {
        let last = self.b.x_max();
        if t > last {
            let (bl, _) = self.b.eval(last);
            -bl * (T::one() + last) / ((T::one() + t) * (T::one() + t))
        } else {
            self.b_prime.eval(t).0
        }
    }
}

/// Closed-form and tabulated coefficient families.
#[derive(Clone)]
pub enum CoefficientKind<T> {
    Zero,
    /// `amplitude · (1+t)^(-p)`.
    PowerLaw { amplitude: T, p: T },
    /// `μ/(1+t)`.
    MuOver1pt { mu: T },
    /// `μ / ((1+t) log(e+t) ⋯ log^[n](e^[n]+t))`.
    IteratedLog { mu: T, n: u32 },
    /// `1/(4(e+t)) + 1/((e+t) log(e+t))`: `limsup t·b = 1/4`, yet `λ²(t)/t^(1/2)` is unbounded.
    FootnoteCounterexample,
    Tabulated(Arc<TabulatedCoefficient<T>>),
    Custom(Arc<CustomCoefficient<T>>),
}

impl<T: fmt::Debug> fmt::Debug for CoefficientKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::PowerLaw { amplitude, p } => write!(f, "PowerLaw {{ amplitude: {amplitude:?}, p: {p:?} }}"),
            Self::MuOver1pt { mu } => write!(f, "MuOver1pt {{ mu: {mu:?} }}"),
            Self::IteratedLog { mu, n } => write!(f, "IteratedLog {{ mu: {mu:?}, n: {n} }}"),
            Self::FootnoteCounterexample => write!(f, "FootnoteCounterexample"),
            Self::Tabulated(_) => write!(f, "Tabulated"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Iterated exponential `e^[n]` with `e^[0] = 1`.
pub fn iterated_exp<T: Real>(n: u32) -> T {
    (0..n).fold(T::one(), |acc, _| acc.exp())
}

/// Iterated logarithm `log^[n]`, with `log^[0]` the identity.
pub fn iterated_log<T: Real>(x: T, n: u32) -> T {
    (0..n).fold(x, |acc, _| acc.ln())
}

/// A dissipation coefficient together with its declared hypothesis constants.
#[derive(Debug, Clone)]
pub struct CoefficientModel<T> {
    pub kind: CoefficientKind<T>,
    /// Declared `limsup t·b(t)`.
    pub mu_upper: Option<T>,
    /// Declared `liminf t·b(t)`.
    pub mu_lower: Option<T>,
    /// Any number above `mu_upper`; defaults to `mu_upper + 0.01`.
    pub mu_plus: Option<T>,
    pub c1: Option<T>,
    pub c2: Option<T>,
    pub label: String,
}

impl<T: Real> CoefficientModel<T> {
    pub fn new(kind: CoefficientKind<T>, label: impl Into<String>) -> Self {
        Self { kind, mu_upper: None, mu_lower: None, mu_plus: None, c1: None, c2: None, label: label.into() }
    }

    pub fn zero() -> Self {
        Self::new(CoefficientKind::Zero, "zero")
    }

    pub fn power_law(amplitude: T, p: T) -> Self {
        Self::new(CoefficientKind::PowerLaw { amplitude, p }, format!("power_law(p={p})"))
    }

    pub fn mu_over_1pt(mu: T) -> Self {
        Self::new(CoefficientKind::MuOver1pt { mu }, format!("mu_over_1pt(mu={mu})"))
    }

    pub fn iterated_log(mu: T, n: u32) -> Self {
        Self::new(CoefficientKind::IteratedLog { mu, n }, format!("iterated_log(mu={mu}, n={n})"))
    }

    pub fn footnote_counterexample() -> Self {
        Self::new(CoefficientKind::FootnoteCounterexample, "footnote_counterexample")
    }

    pub fn tabulated(table: TabulatedCoefficient<T>, label: impl Into<String>) -> Self {
        Self::new(CoefficientKind::Tabulated(Arc::new(table)), label)
    }

    pub fn custom(
        label: impl Into<String>,
        b: impl Fn(T) -> T + Send + Sync + 'static,
        b_prime: impl Fn(T) -> T + Send + Sync + 'static,
        primitive: Option<ScalarFn<T>>,
    ) -> Self {
        Self::new(
            CoefficientKind::Custom(Arc::new(CustomCoefficient { b: Box::new(b), b_prime: Box::new(b_prime), primitive })),
            label,
        )
    }

    /// Declares `limsup t·b` and `liminf t·b`.
    pub fn declare(mut self, mu_upper: Option<T>, mu_lower: Option<T>) -> Self {
        self.mu_upper = mu_upper;
        self.mu_lower = mu_lower;
        self
    }

    pub fn with_mu_plus(mut self, mu_plus: T) -> Self {
        self.mu_plus = Some(mu_plus);
        self
    }

    pub fn with_bounds(mut self, c1: Option<T>, c2: Option<T>) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    /// `b(t)`.
    pub fn b(&self, t: T) -> T {
        let one = T::one();
        match &self.kind {
            CoefficientKind::Zero => T::zero(),
            CoefficientKind::PowerLaw { amplitude, p } => *amplitude * (one + t).powf(-*p),
            CoefficientKind::MuOver1pt { mu } => *mu / (one + t),
            CoefficientKind::IteratedLog { mu, n } => {
                let mut denom = one + t;
                for k in 1..=*n {
                    denom *= iterated_log(iterated_exp::<T>(k) + t, k);
                }
                *mu / denom
            }
            CoefficientKind::FootnoteCounterexample => {
                let x = T::E() + t;
                one / (T::c(4.0) * x) + one / (x * x.ln())
            }
            CoefficientKind::Tabulated(tab) => tab.value(t),
            CoefficientKind::Custom(c) => (c.b)(t),
        }
    }

    /// `b'(t)`.
    pub fn b_prime(&self, t: T) -> T {
        let one = T::one();
        match &self.kind {
            CoefficientKind::Zero => T::zero(),
            CoefficientKind::PowerLaw { amplitude, p } => -*amplitude * *p * (one + t).powf(-*p - one),
            CoefficientKind::MuOver1pt { mu } => -*mu / ((one + t) * (one + t)),
            CoefficientKind::IteratedLog { n, .. } => {
                // b'/b = -(1/(1+t) + Σ_k L_k'/L_k), L_k = log^[k](e^[k] + t).
                let mut log_deriv = one / (one + t);
                for k in 1..=*n {
                    let x = iterated_exp::<T>(k) + t;
                    let mut chain = one;
                    for j in 0..k {
                        chain = chain / iterated_log(x, j);
                    }
                    log_deriv += chain / iterated_log(x, k);
                }
                -self.b(t) * log_deriv
            }
            CoefficientKind::FootnoteCounterexample => {
                let x = T::E() + t;
                let l = x.ln();
                -one / (T::c(4.0) * x * x) - (l + one) / (x * x * l * l)
            }
            CoefficientKind::Tabulated(tab) => tab.derivative(t),
            CoefficientKind::Custom(c) => (c.b_prime)(t),
        }
    }

    /// Closed-form `∫₀ᵗ b`, when the family has one.
    pub fn primitive(&self, t: T) -> Option<T> {
        let one = T::one();
        match &self.kind {
            CoefficientKind::Zero => Some(T::zero()),
            CoefficientKind::PowerLaw { amplitude, p } => {
                if (*p - one).abs() < T::epsilon() {
                    Some(*amplitude * (one + t).ln())
                } else {
                    Some(*amplitude * ((one + t).powf(one - *p) - one) / (one - *p))
                }
            }
            CoefficientKind::MuOver1pt { mu } => Some(*mu * (one + t).ln()),
            CoefficientKind::IteratedLog { mu, n: 0 } => Some(*mu * (one + t).ln()),
            CoefficientKind::IteratedLog { .. } => None,
            CoefficientKind::FootnoteCounterexample => {
                let x = T::E() + t;
                Some(T::c(0.25) * (x / T::E()).ln() + x.ln().ln())
            }
            CoefficientKind::Tabulated(_) => None,
            CoefficientKind::Custom(c) => c.primitive.as_ref().map(|p| p(t)),
        }
    }

    pub fn has_primitive(&self) -> bool {
        self.primitive(T::zero()).is_some()
    }

    /// `∫ₐᵇ b` by dyadic-panel quadrature, ignoring any closed form.
    pub fn integral_quadrature(&self, a: T, b: T, opts: &QuadOptions<T>) -> Result<T> {
        if b < a {
            return Ok(-self.integral_quadrature(b, a, opts)?);
        }
        Ok(quadrature::dyadic(|t| self.b(t), a, b, opts)?.value)
    }

    /// `∫ₐᵇ b`, from the closed form when available.
    pub fn integral(&self, a: T, b: T, opts: &QuadOptions<T>) -> Result<T> {
        match (self.primitive(a), self.primitive(b)) {
            (Some(pa), Some(pb)) => Ok(pb - pa),
            _ => self.integral_quadrature(a, b, opts),
        }
    }

    /// `log λ(t) = ∫₀ᵗ b`.
    pub fn log_lambda(&self, t: T, opts: &QuadOptions<T>) -> Result<T> {
        if t < T::zero() {
            return Err(Error::Argument(format!("lambda_at needs t >= 0, got {}", t)));
        }
        self.integral(T::zero(), t, opts)
    }

    /// `λ(t) = exp(∫₀ᵗ b)`.
    pub fn lambda_at(&self, t: T) -> Result<T> {
        Ok(self.log_lambda(t, &QuadOptions::default())?.exp())
    }

    /// `log λ` on an increasing list of times, accumulating panel integrals.
    pub fn log_lambda_series(&self, times: &[T], opts: &QuadOptions<T>) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(times.len());
        let mut prev_t = T::zero();
        let mut acc = T::zero();
        for &t in times {
            if t < prev_t {
                return Err(Error::Argument("times must be nondecreasing and >= 0".into()));
            }
            acc = match self.primitive(t) {
                Some(p) => p,
                None => acc + self.integral_quadrature(prev_t, t, opts)?,
            };
            out.push(acc);
            prev_t = t;
        }
        Ok(out)
    }

    /// `∫ₜ^horizon b`; `horizon = ∞` integrates the full tail.
    pub fn tail_integral(&self, t: T, horizon: T) -> Result<T> {
        self.tail_integral_with(t, horizon, &QuadOptions::default())
    }

    pub fn tail_integral_with(&self, t: T, horizon: T, opts: &QuadOptions<T>) -> Result<T> {
        if horizon < t {
            return Err(Error::Argument(format!("horizon {} precedes t = {}", horizon, t)));
        }
        if horizon.is_infinite() {
            if let CoefficientKind::Zero = self.kind {
                return Ok(T::zero());
            }
            return Ok(quadrature::dyadic_to_infinity(|s| self.b(s), t, opts)?.value);
        }
        self.integral(t, horizon, opts)
    }

    /// `-b`, used to run the reversed-time system forward.
    pub fn negated(&self) -> Self {
        let inner = self.clone();
        let inner_d = self.clone();
        let primitive: Option<ScalarFn<T>> = if self.has_primitive() {
            let inner_p = self.clone();
            Some(Box::new(move |t| -inner_p.primitive(t).unwrap_or(T::nan())))
        } else {
            None
        };
        let mut out = Self::custom(format!("neg({})", self.label), move |t| -inner.b(t), move |t| -inner_d.b_prime(t), primitive);
        out.c1 = self.c1;
        out.c2 = self.c2;
        out
    }

    /// Checks (A1) and, when `c1`/`c2` are declared, (A2) on the given sample times.
    pub fn validate_hypotheses(&self, samples: &[T]) -> Result<()> {
        for &t in samples {
            let b = self.b(t);
            if !(b >= T::zero()) {
                return Err(Error::Validation { witness_t: t.to_f64_lossy(), message: format!("b(t) = {} is negative", b) });
            }
            let bracket = (T::one() + t * t).sqrt();
            if let Some(c1) = self.c1 {
                if b * bracket > c1 * (T::one() + T::c(1e-12)) {
                    return Err(Error::Validation {
                        witness_t: t.to_f64_lossy(),
                        message: format!("b(t)<t> = {} exceeds c1 = {}", b * bracket, c1),
                    });
                }
            }
            if let Some(c2) = self.c2 {
                let v = self.b_prime(t).abs() * bracket * bracket;
                if v > c2 * (T::one() + T::c(1e-12)) {
                    return Err(Error::Validation {
                        witness_t: t.to_f64_lossy(),
                        message: format!("|b'(t)|<t>^2 = {} exceeds c2 = {}", v, c2),
                    });
                }
            }
        }
        Ok(())
    }

    /// `mu_plus`, or `mu_upper + 0.01`.
    pub fn effective_mu_plus(&self) -> Option<T> {
        self.mu_plus.or(self.mu_upper.map(|m| m + T::c(0.01)))
    }

    /// Classifies the coefficient from its declarations, sanity-checked on a log grid over
    /// `[horizon/10, horizon]`.
    pub fn classify(&self, horizon: T, grid_size: usize) -> Result<Regime<T>> {
        if !(horizon > T::zero()) || grid_size < 2 {
            return Err(Error::Argument("classify needs horizon > 0 and grid_size >= 2".into()));
        }
        let tol = T::c(0.05);
        let half = T::c(0.5);
        let lo = horizon / T::c(10.0);
        let grid = log_grid(lo, horizon, grid_size);
        let mut sup = T::neg_infinity();
        let mut inf = T::infinity();
        let mut sup_at = lo;
        let mut inf_at = lo;
        for &t in &grid {
            let tb = t * self.b(t);
            if tb > sup {
                sup = tb;
                sup_at = t;
            }
            if tb < inf {
                inf = tb;
                inf_at = t;
            }
        }
        if let Some(mu_upper) = self.mu_upper {
            if sup > mu_upper + tol {
                return Err(Error::Validation {
                    witness_t: sup_at.to_f64_lossy(),
                    message: format!("t*b(t) = {} exceeds declared mu_upper = {} + {}", sup, mu_upper, tol),
                });
            }
        }
        if let Some(mu_lower) = self.mu_lower {
            if inf < mu_lower - tol {
                return Err(Error::Validation {
                    witness_t: inf_at.to_f64_lossy(),
                    message: format!("t*b(t) = {} is below declared mu_lower = {} - {}", inf, mu_lower, tol),
                });
            }
        }
        self.validate_hypotheses(&grid)?;

        let quad = QuadOptions::default();
        let last_decade = self.integral(lo, horizon, &quad)?;
        let prev_decade = self.integral(lo / T::c(10.0), lo, &quad)?;
        let integrable = sup < tol
            && (last_decade <= T::c(0.01) || last_decade <= half * prev_decade)
            && last_decade <= prev_decade;

        let mut regime = Regime {
            tag: RegimeTag::Unclassified,
            gamma_index: T::zero(),
            lemma_gamma: None,
            two_mu_admissible: None,
            sampled_sup: sup,
            sampled_inf: inf,
        };
        if integrable {
            regime.tag = RegimeTag::Integrable;
            regime.lemma_gamma = Some(T::zero());
            regime.two_mu_admissible = Some(true);
            return Ok(regime);
        }
        if let Some(mu_upper) = self.mu_upper.filter(|&m| m < half) {
            let mu_plus = self.effective_mu_plus().unwrap_or(mu_upper);
            regime.tag = RegimeTag::C1;
            regime.gamma_index = (mu_plus - T::one()).max(T::zero());
            regime.lemma_gamma = Some(T::c(2.0) * mu_plus);
            regime.two_mu_admissible = Some(self.two_mu_is_admissible(mu_upper, horizon)?);
            return Ok(regime);
        }
        if self.mu_lower.is_some_and(|m| m > half) {
            let mu_plus = self.effective_mu_plus().unwrap_or(sup + T::c(0.01));
            regime.tag = RegimeTag::C2;
            regime.gamma_index = (mu_plus - T::one()).max(T::zero());
            return Ok(regime);
        }
        Ok(regime)
    }

    /// Whether `λ²(t)(1+t)^(-2μ̄)` stays bounded on the sampled range, i.e. whether the zone
    /// bound may use `γ = 2μ̄`. Declared unbounded when the quantity increases monotonically
    /// over the last three decades below `horizon` by more than 10%.
    fn two_mu_is_admissible(&self, mu_upper: T, horizon: T) -> Result<bool> {
        let quad = QuadOptions::default();
        let times = log_grid(horizon / T::c(1000.0), horizon, 16);
        let logs = self.log_lambda_series(&times, &quad)?;
        let vals: Vec<T> =
            times.iter().zip(&logs).map(|(&t, &l)| T::c(2.0) * l - T::c(2.0) * mu_upper * (T::one() + t).ln()).collect();
        let increasing = vals.windows(2).all(|w| w[1] >= w[0]);
        let growth = vals[vals.len() - 1] - vals[0];
        Ok(!(increasing && growth > T::c(1.1).ln()))
    }
}

/// Regime tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    Integrable,
    C1,
    C2,
    Unclassified,
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeTag::Integrable => "Integrable",
            RegimeTag::C1 => "C1",
            RegimeTag::C2 => "C2",
            RegimeTag::Unclassified => "Unclassified",
        };
        f.write_str(s)
    }
}

/// Classification result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime<T> {
    pub tag: RegimeTag,
    /// Index `γ` of the modified energy space used for the data: `max(μ̄⁺ - 1, 0)`.
    pub gamma_index: T,
    /// Exponent for the dissipative-zone bound in the C1 case (`2μ̄⁺`; 0 when integrable).
    pub lemma_gamma: Option<T>,
    /// For C1: whether `γ = 2μ̄` itself is admissible for the zone bound.
    pub two_mu_admissible: Option<bool>,
    pub sampled_sup: T,
    pub sampled_inf: T,
}

/// `n` points log-spaced on `[a, b]` with `0 < a <= b`.
pub fn log_grid<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i == n - 1 {
                b
            } else {
                (la + (lb - la) * T::c(i as f64) / T::c((n - 1) as f64)).exp()
            }
        })
        .collect()
}

/// `n` points with `1 + t` log-spaced on `[1 + a, 1 + b]`; admits `a = 0`.
pub fn shifted_log_grid<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    log_grid(T::one() + a, T::one() + b, n).into_iter().map(|x| x - T::one()).collect()
}
