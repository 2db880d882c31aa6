//! Wave operators, the scattering operator and asymptotic-equivalence diagnostics.
//!
//! The classical construction compares the damped evolution with the free one through
//! `𝓠(t,s) = 𝓔₀(s-t)𝓔(t,s)`, which solves
//!
//! `∂ₜ𝓠 = -2b(t) 𝓔₀(s-t)[[0,0],[0,1]]𝓔₀(t-s) 𝓠 = -b(t)(I + O(2λ(t-s)))𝓠`,
//!
//! with the reflection `O(φ) = [[-cos φ, -sin φ], [-sin φ, cos φ]]`. The scalar part integrates
//! to `λ(s)/λ(t)`, so `𝓠̂ = (λ(t)/λ(s))𝓠` solves `∂ₜ𝓠̂ = -b O(2λ(t-s)) 𝓠̂` and
//! `λ(t)𝓔₀(-t)𝓔(t,0) = 𝓠̂(t,0)`. Its limit is the modified wave operator `W̃₊`; for integrable
//! `b` the classical one is `𝓠(∞,0) = W̃₊/λ(∞)`.
//!
//! The limit is computed twice: directly from `𝓠̂` at horizons aligned with the oscillation
//! period and extrapolated in `1/(1+T)` (path a), and from the hyperbolic-zone factorization
//!
//! `W̃₊ = λ(t_ξ) 𝓔₀(-t_ξ) M Q₁(∞,t_ξ) N₁(t_ξ)⁻¹ M⁻¹ 𝓔(t_ξ,0)` (path b).

use num_complex::Complex;
use rayon::prelude::*;

use crate::coefficients::{CoefficientModel, RegimeTag};
use crate::diagonal::{m_inverse, m_matrix, n1_inverse, q1_limit, real_part_checked, LimitOptions};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::ode::Dop853;
use crate::propagator::{evolve, free_propagator, fundamental_series, integrate_fundamental, mode_options};
use crate::quadrature::QuadOptions;
use crate::scalar::Real;
use crate::spectral::{e_gamma_norm, DataVector, SpectralModel};
use crate::zones::{declared_c1, declared_c2, t_xi};

/// Number of trailing horizons used by the extrapolation of path (a).
pub const RICHARDSON_DEPTH: usize = 4;

/// Oscillation periods spent on path (a) when it only serves as a cross-check.
pub const CROSS_CHECK_MAX_PERIODS: f64 = 65536.0;

/// Safety factor applied to the combined error estimates when comparing paths (a) and (b).
pub const CROSS_CHECK_FACTOR: f64 = 10.0;

/// Normalization of the wave operator and of the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `W₊ = 𝓠(∞,0)`, residual `‖V_u(t) - 𝓔₀(t)W₊V(0)‖` (integrable dissipation).
    Classical,
    /// `W̃₊ = lim λ(t)𝓔₀(-t)𝓔(t,0)`, residual `‖λ(t)V_u(t) - 𝓔₀(t)W̃₊V(0)‖`.
    Modified,
}

impl Normalization {
    pub fn for_regime(tag: RegimeTag) -> Self {
        if tag == RegimeTag::Integrable {
            Normalization::Classical
        } else {
            Normalization::Modified
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Classical => "classical",
            Normalization::Modified => "modified",
        })
    }
}

/// A limit `t → ∞` with its convergence estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue<T> {
    pub value: Mat2<T>,
    pub conv_error: T,
    pub horizon: T,
}

/// `O(φ) = [[-cos φ, -sin φ], [-sin φ, cos φ]]`.
fn reflection<T: Real>(phi: T) -> Mat2<T> {
    let (s, c) = phi.sin_cos();
    Mat2::new(-c, -s, -s, c)
}

/// Generator `-2b(t)𝓔₀(s-t)[[0,0],[0,1]]𝓔₀(t-s)` of the classical `𝓠(t,s)`.
pub fn classical_generator<T: Real>(b: T, lambda: T, s: T, t: T) -> Mat2<T> {
    let p2 = Mat2::diag(T::zero(), T::one());
    (free_propagator(lambda, s - t) * p2 * free_propagator(lambda, t - s)).scale(-T::c(2.0) * b)
}

fn check_positive<T: Real>(lambda: T, tol: T) -> Result<()> {
    if !(lambda > T::zero()) || !(tol > T::zero()) {
        return Err(Error::Argument(format!("need lambda > 0 and tol > 0, got {} and {}", lambda, tol)));
    }
    Ok(())
}

/// Integrator of `𝓠̂(·,s)` (row-major real 2×2 state).
fn qhat_solver<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    s: T,
    tol: T,
) -> Dop853<T, impl FnMut(T, &[T; 4]) -> [T; 4] + '_, 4> {
    let two = T::c(2.0);
    let rhs = move |t: T, y: &[T; 4]| {
        let g = reflection(two * lambda * (t - s)).scale(-coeff.b(t));
        (g * Mat2::from_entries(*y)).entries()
    };
    Dop853::new(rhs, s, Mat2::<T>::identity().entries(), mode_options(two * lambda, tol))
}

/// `𝓠(t_k, s, ξ)` for nondecreasing `t_k >= s`.
pub fn classical_q_series<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, times: &[T], tol: T) -> Result<Vec<Mat2<T>>> {
    check_positive(lambda, tol)?;
    if s < T::zero() {
        return Err(Error::Argument(format!("need s >= 0, got {}", s)));
    }
    let quad = QuadOptions::default();
    let mut solver = qhat_solver(coeff, lambda, s, tol);
    let mut out = Vec::with_capacity(times.len());
    let (mut prev, mut acc) = (s, T::zero());
    for &t in times {
        if t < prev {
            return Err(Error::Argument(format!("times must be nondecreasing and >= s = {}", s)));
        }
        acc += coeff.integral(prev, t, &quad)?;
        prev = t;
        let y = *solver.advance_to(t)?;
        out.push(Mat2::from_entries(y).scale((-acc).exp()));
    }
    Ok(out)
}

/// `𝓠(t, s, ξ) = 𝓔₀(s-t)𝓔(t,s)` by integration of its own dynamics.
pub fn classical_q<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, t: T, tol: T) -> Result<Mat2<T>> {
    Ok(classical_q_series(coeff, lambda, s, &[t], tol)?[0])
}

/// Truncated Peano–Baker series of `𝓠(t,s)` (oracle for [`classical_q`]).
pub fn classical_q_peano_baker<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    s: T,
    t: T,
    terms: usize,
    nodes: usize,
) -> Result<Mat2<T>> {
    let gen = |tau: T| classical_generator(coeff.b(tau), lambda, s, tau).to_complex();
    let q = crate::diagonal::peano_baker(gen, s, t, terms, nodes)?;
    Ok(q.split_real().0)
}

/// Neville extrapolation of `(h_i, X_i)` to `h = 0`.
fn extrapolate<T: Real>(h: &[T], x: &[Mat2<T>]) -> Mat2<T> {
    let mut p: Vec<Mat2<T>> = x.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            p[i] = (p[i + 1].scale(hi) - p[i].scale(hj)).scale(T::one() / (hi - hj));
        }
    }
    p[0]
}

/// Outcome of the extrapolated limit of `𝓠̂`.
struct QhatOutcome<T> {
    limit: LimitValue<T>,
    converged: bool,
}

/// `𝓠̂(∞, s, ξ)`: horizons `s + kπ/λ` with `k` doubling, polynomial extrapolation in
/// `1/(1+T)` over the last [`RICHARDSON_DEPTH`] horizons, Cauchy stopping on the extrapolants.
/// Stops unconverged at `horizon_cap` or after `max_periods` oscillation periods.
fn qhat_extrapolate<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    s: T,
    opts: &LimitOptions<T>,
    max_periods: T,
) -> Result<QhatOutcome<T>> {
    check_positive(lambda, opts.tol)?;
    let period = T::PI() / lambda;
    let min_span = T::c(16.0).max(T::c(8.0) * period);
    let mut k = (min_span / period).ceil();
    let mut solver = qhat_solver(coeff, lambda, s, opts.tol);
    let (mut hs, mut xs): (Vec<T>, Vec<Mat2<T>>) = (Vec::new(), Vec::new());
    let mut last: Option<LimitValue<T>> = None;
    loop {
        let horizon = s + k * period;
        if horizon > opts.horizon_cap || k > max_periods {
            return match last {
                Some(limit) => Ok(QhatOutcome { limit, converged: false }),
                None => Err(Error::Horizon { cap: opts.horizon_cap.to_f64_lossy(), difference: f64::INFINITY }),
            };
        }
        let y = *solver.advance_to(horizon)?;
        hs.push(T::one() / (T::one() + horizon));
        xs.push(Mat2::from_entries(y));
        let start = hs.len().saturating_sub(RICHARDSON_DEPTH);
        let est = extrapolate(&hs[start..], &xs[start..]);
        if !est.is_finite() {
            return Err(Error::Inconsistency("non-finite wave-operator iterate".into()));
        }
        let diff = last.map_or(T::infinity(), |p| (est - p.value).frobenius());
        last = Some(LimitValue { value: est, conv_error: diff, horizon });
        if hs.len() >= 3 && diff < opts.limit_tol {
            return Ok(QhatOutcome { limit: LimitValue { value: est, conv_error: diff, horizon }, converged: true });
        }
        k = k * T::c(2.0);
    }
}

fn qhat_limit<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, opts: &LimitOptions<T>) -> Result<LimitValue<T>> {
    let out = qhat_extrapolate(coeff, lambda, s, opts, T::infinity())?;
    if !out.converged {
        return Err(Error::Horizon {
            cap: opts.horizon_cap.to_f64_lossy(),
            difference: out.limit.conv_error.to_f64_lossy(),
        });
    }
    Ok(out.limit)
}

/// `𝓠(∞, s, ξ)` for integrable `b`: `(λ(s)/λ(∞)) 𝓠̂(∞, s)`.
pub fn classical_q_limit<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, opts: &LimitOptions<T>) -> Result<LimitValue<T>> {
    let lim = qhat_limit(coeff, lambda, s, opts)?;
    let factor = (-coeff.tail_integral(s, T::infinity())?).exp();
    Ok(LimitValue { value: lim.value.scale(factor), conv_error: lim.conv_error * factor, horizon: lim.horizon })
}

/// `2∫ₜ^∞b · exp(2∫₀^∞b)`, the bound on `‖𝓠(∞,t) - I‖`.
pub fn classical_q_bound<T: Real>(coeff: &CoefficientModel<T>, t: T) -> Result<T> {
    let total = coeff.tail_integral(T::zero(), T::infinity())?;
    Ok(T::c(2.0) * coeff.tail_integral(t, T::infinity())? * (T::c(2.0) * total).exp())
}

/// Path (a): `lim λ(T)𝓔₀(-T)𝓔(T,0)` from the equivalent dynamics of `𝓠̂(T,0)`.
pub fn direct_wave_operator<T: Real>(coeff: &CoefficientModel<T>, lambda: T, opts: &LimitOptions<T>) -> Result<LimitValue<T>> {
    qhat_limit(coeff, lambda, T::zero(), opts)
}

/// Path (b): the hyperbolic-zone closed form with `Q₁(∞, t_ξ)`.
pub fn assembled_wave_operator<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    zone_n: T,
    opts: &LimitOptions<T>,
) -> Result<LimitValue<T>> {
    check_positive(lambda, opts.tol)?;
    let txi = t_xi(lambda, zone_n)?;
    let e_diss = integrate_fundamental(coeff, lambda, T::zero(), txi, opts.tol)?;
    let q = q1_limit(coeff, lambda, txi, opts)?;
    let lambda_txi = coeff.lambda_at(txi)?;
    let left = free_propagator(lambda, -txi).to_complex().scale_re(lambda_txi) * m_matrix();
    let right = n1_inverse(coeff, txi, lambda)? * m_inverse() * e_diss.to_complex();
    let value = real_part_checked(&(left * q.value * right), opts.tol, "assembled wave operator")?;
    let conv_error = q.conv_error * left.spectral_norm() * right.spectral_norm();
    Ok(LimitValue { value, conv_error, horizon: q.horizon })
}

/// Modified wave operator `W̃₊(ξ)` with the agreement of both constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOperator<T> {
    /// Path (b) value.
    pub value: Mat2<T>,
    /// Path (b) convergence estimate.
    pub conv_error: T,
    pub horizon: T,
    /// Path (a) result; its `conv_error` is the last Cauchy difference.
    pub direct: LimitValue<T>,
    /// Whether path (a) met the Cauchy criterion within its period budget.
    pub direct_converged: bool,
    /// `‖path (a) - path (b)‖_F`.
    pub discrepancy: T,
}

/// `W̃₊(ξ)` by both paths; fails with an inconsistency error when they disagree beyond
/// `CROSS_CHECK_FACTOR · (conv_a + conv_b) + sqrt(tol)·‖W̃₊‖`.
pub fn modified_wave_operator<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    zone_n: T,
    opts: &LimitOptions<T>,
) -> Result<WaveOperator<T>> {
    let (assembled, direct) = rayon::join(
        || assembled_wave_operator(coeff, lambda, zone_n, opts),
        || qhat_extrapolate(coeff, lambda, T::zero(), opts, T::c(CROSS_CHECK_MAX_PERIODS)),
    );
    let (assembled, QhatOutcome { limit: direct, converged: direct_converged }) = (assembled?, direct?);
    let discrepancy = (assembled.value - direct.value).frobenius();
    let allowed = T::c(CROSS_CHECK_FACTOR) * (assembled.conv_error + direct.conv_error)
        + opts.tol.sqrt() * assembled.value.frobenius().max(T::one());
    if !(discrepancy <= allowed) {
        return Err(Error::Inconsistency(format!(
            "wave operator paths disagree at lambda = {}: |a - b| = {:e} > {:e}",
            lambda, discrepancy.to_f64_lossy(), allowed.to_f64_lossy()
        )));
    }
    Ok(WaveOperator {
        value: assembled.value,
        conv_error: assembled.conv_error,
        horizon: assembled.horizon,
        direct,
        direct_converged,
        discrepancy,
    })
}

/// Wave operator of one frequency in the requested normalization.
fn wave_operator_normalized<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    zone_n: T,
    normalization: Normalization,
    opts: &LimitOptions<T>,
) -> Result<LimitValue<T>> {
    let w = modified_wave_operator(coeff, lambda, zone_n, opts)?;
    let factor = match normalization {
        Normalization::Modified => T::one(),
        Normalization::Classical => (-coeff.tail_integral(T::zero(), T::infinity())?).exp(),
    };
    let conv_error = w.conv_error.max(w.discrepancy) * factor;
    Ok(LimitValue { value: w.value.scale(factor), conv_error, horizon: w.horizon })
}

/// Which hypothesis allows the backward wave operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackwardHypothesis<T> {
    /// The backward branch `τ ↦ b(-τ)` is integrable.
    Integrable,
    /// Every frequency of the model satisfies `λ >= c0 > 0`.
    Invertible { c0: T },
}

/// `W₋(ξ)` from the backward branch `b_back(τ) = b(-τ)`, `τ >= 0`.
///
/// Reversing time and conjugating with `σ = diag(1, -1)` turns the backward problem into the
/// forward one with coefficient `-b_back`, so `W₋ = σ W₊[-b_back] σ` in either normalization.
pub fn w_minus<T: Real>(
    back: &CoefficientModel<T>,
    lambda: T,
    hypothesis: BackwardHypothesis<T>,
    normalization: Normalization,
    zone_n: T,
    opts: &LimitOptions<T>,
) -> Result<Mat2<T>> {
    if let BackwardHypothesis::Invertible { c0 } = hypothesis {
        if !(c0 > T::zero()) || lambda < c0 {
            return Err(Error::Precondition(format!(
                "backward wave operator needs lambda >= c0 > 0 in the invertible case, got lambda = {}, c0 = {}",
                lambda, c0
            )));
        }
    }
    if hypothesis == BackwardHypothesis::Integrable && normalization == Normalization::Modified {
        return Err(Error::Precondition("integrable backward branch uses the classical normalization".into()));
    }
    let reversed = back.negated();
    let w = wave_operator_normalized(&reversed, lambda, zone_n, normalization, opts)?.value;
    let sigma = Mat2::diag(T::one(), -T::one());
    Ok(sigma * w * sigma)
}

/// `S = W₊W₋⁻¹`.
pub fn scattering_op<T: Real>(w_plus: &Mat2<T>, w_minus: &Mat2<T>) -> Result<Mat2<T>> {
    let inv = w_minus.inverse().ok_or(Error::Singular { det: w_minus.det().to_f64_lossy() })?;
    Ok(*w_plus * inv)
}

/// Wave operator of one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOperatorEntry<T> {
    pub lambda: T,
    pub w_plus: Mat2<T>,
    pub conv_error: T,
    pub horizon: T,
    pub w_minus: Option<Mat2<T>>,
}

/// Wave operators of all positive frequencies of a model (kernel modes carry no entry).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveOperatorTable<T> {
    pub entries: Vec<WaveOperatorEntry<T>>,
    pub regime: RegimeTag,
    pub normalization: Normalization,
    pub gamma: T,
    pub zone_n: T,
}

impl<T: Real> WaveOperatorTable<T> {
    /// Builds `W₊` for every positive frequency of `model` in parallel.
    pub fn build(
        model: &SpectralModel<T>,
        coeff: &CoefficientModel<T>,
        regime: RegimeTag,
        gamma: T,
        zone_n: T,
        opts: &LimitOptions<T>,
    ) -> Result<Self> {
        if regime == RegimeTag::Unclassified {
            return Err(Error::Precondition(format!("{} is not in a certified regime", coeff.label)));
        }
        let normalization = Normalization::for_regime(regime);
        let positive: Vec<(usize, T)> =
            model.points().iter().enumerate().filter(|(_, p)| !p.is_kernel()).map(|(j, p)| (j, p.lambda)).collect();
        let entries = positive
            .par_iter()
            .map(|&(j, lambda)| -> Result<WaveOperatorEntry<T>> {
                let w = wave_operator_normalized(coeff, lambda, zone_n, normalization, opts).map_err(|e| e.at_mode(j))?;
                Ok(WaveOperatorEntry { lambda, w_plus: w.value, conv_error: w.conv_error, horizon: w.horizon, w_minus: None })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(entries, regime, normalization, gamma, zone_n)
    }

    /// Validates and wraps precomputed entries.
    pub fn from_entries(
        entries: Vec<WaveOperatorEntry<T>>,
        regime: RegimeTag,
        normalization: Normalization,
        gamma: T,
        zone_n: T,
    ) -> Result<Self> {
        for (j, e) in entries.iter().enumerate() {
            if !(e.lambda > T::zero()) {
                return Err(Error::Argument(format!("entry {}: kernel modes carry no wave operator", j)));
            }
            if !e.conv_error.is_finite() || e.conv_error < T::zero() || !e.w_plus.is_finite() {
                return Err(Error::Argument(format!("entry {}: non-finite wave operator or error", j)));
            }
            if e.w_plus.det() == T::zero() {
                return Err(Error::Singular { det: 0.0 });
            }
        }
        Ok(Self { entries, regime, normalization, gamma, zone_n })
    }

    /// Entry whose frequency matches `lambda` to relative precision `1e-12`.
    pub fn lookup(&self, lambda: T) -> Option<&WaveOperatorEntry<T>> {
        let tol = T::c(1e-12) * lambda.abs().max(T::one());
        self.entries.iter().find(|e| (e.lambda - lambda).abs() <= tol)
    }

    /// Adds `W₋` to every entry from the backward branch of the coefficient.
    pub fn with_w_minus(
        mut self,
        back: &CoefficientModel<T>,
        hypothesis: BackwardHypothesis<T>,
        opts: &LimitOptions<T>,
    ) -> Result<Self> {
        let (normalization, zone_n) = (self.normalization, self.zone_n);
        let minus = self
            .entries
            .par_iter()
            .enumerate()
            .map(|(j, e)| w_minus(back, e.lambda, hypothesis, normalization, zone_n, opts).map_err(|err| err.at_mode(j)))
            .collect::<Result<Vec<_>>>()?;
        for (e, m) in self.entries.iter_mut().zip(minus) {
            e.w_minus = Some(m);
        }
        Ok(self)
    }

    /// Smallest singular value of the `W₊` entries.
    pub fn min_singular_value(&self) -> T {
        self.entries.iter().map(|e| e.w_plus.singular_values().1).fold(T::infinity(), T::min)
    }
}

/// One row of an asymptotic-equivalence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow<T> {
    pub t: T,
    pub lambda_t: T,
    /// `‖λ(t)V_u(t) - V_v(t)‖_E` (modified) or `‖V_u(t) - V_v(t)‖_E` (classical).
    pub residual: T,
    /// `‖V_u(t)‖_E`.
    pub energy_u: T,
    /// `‖V_v(t)‖_E`, with `V_v(t) = 𝓔₀(t)W₊V(0)`.
    pub energy_v: T,
}

/// Distance between the damped solution and the free wave `𝓔₀(t)W₊V(0)`.
pub fn scattering_residual<T: Real>(
    model: &SpectralModel<T>,
    coeff: &CoefficientModel<T>,
    data: &DataVector<T>,
    table: &WaveOperatorTable<T>,
    times: &[T],
    tol: T,
) -> Result<Vec<ResidualRow<T>>> {
    let v0 = data.to_v(model)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < T::zero()) {
        return Err(Error::Argument("residual times must be nondecreasing and >= 0".into()));
    }
    let quad = QuadOptions::default();
    let lambda_t: Vec<T> = coeff.log_lambda_series(times, &quad)?.into_iter().map(|l| l.exp()).collect();
    let scale: Vec<T> = match table.normalization {
        Normalization::Modified => lambda_t.clone(),
        Normalization::Classical => vec![T::one(); times.len()],
    };
    let zero = Complex::new(T::zero(), T::zero());
    // Per mode and time: weighted (|residual|², |V_u|², |V_v|²).
    let per_mode = model
        .points()
        .par_iter()
        .zip(v0.par_iter())
        .enumerate()
        .map(|(j, (p, v))| -> Result<Vec<[T; 3]>> {
            if v[0] == zero && v[1] == zero && (!p.is_kernel() || data.u1[j] == zero) {
                return Ok(vec![[T::zero(); 3]; times.len()]);
            }
            let entry = table.lookup(p.lambda).ok_or_else(|| {
                Error::Argument(format!("no wave-operator entry for mode {} (lambda = {})", j, p.lambda)).at_mode(j)
            })?;
            let fund = fundamental_series(coeff, p.lambda, T::zero(), times, tol).map_err(|e| e.at_mode(j))?;
            let wv = entry.w_plus.apply_c(*v);
            let sq = |a: [Complex<T>; 2]| p.weight * (a[0].norm_sqr() + a[1].norm_sqr());
            Ok(fund
                .iter()
                .zip(times)
                .zip(&scale)
                .map(|((e, &t), &sc)| {
                    let vu = e.apply_c(*v);
                    let vv = free_propagator(p.lambda, t).apply_c(wv);
                    let diff = [vu[0] * sc - vv[0], vu[1] * sc - vv[1]];
                    [sq(diff), sq(vu), sq(vv)]
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..times.len())
        .map(|k| {
            let mut acc = [T::zero(); 3];
            for m in &per_mode {
                for (a, x) in acc.iter_mut().zip(m[k]) {
                    *a += x;
                }
            }
            ResidualRow {
                t: times[k],
                lambda_t: lambda_t[k],
                residual: acc[0].sqrt(),
                energy_u: acc[1].sqrt(),
                energy_v: acc[2].sqrt(),
            }
        })
        .collect())
}

fn require_no_kernel_data<T: Real>(model: &SpectralModel<T>, data: &DataVector<T>) -> Result<()> {
    if data.len() != model.len() {
        return Err(Error::Argument(format!("data has {} modes, model has {}", data.len(), model.len())));
    }
    if !data.vanishes_on_kernel(model) {
        return Err(Error::Domain("data must vanish on kernel modes".into()));
    }
    Ok(())
}

/// `(t, λ(t)‖(u,u')‖_E)` along the damped evolution.
pub fn two_sided_ratio<T: Real>(
    model: &SpectralModel<T>,
    coeff: &CoefficientModel<T>,
    data: &DataVector<T>,
    times: &[T],
    tol: T,
) -> Result<Vec<(T, T)>> {
    require_no_kernel_data(model, data)?;
    let traj = evolve(model, coeff, data, times, tol)?;
    let energies = traj.energies(model)?;
    Ok(traj.times.iter().zip(&traj.lambda_values).zip(energies).map(|((&t, &l), e)| (t, l * e)).collect())
}

/// Empirical constant of `‖(u,u')‖_E ≲ λ(t)⁻¹‖(u₁,u₂)‖_{E^(γ)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimateReport<T> {
    /// `sup λ(t)‖(u,u')(t)‖_E / ‖data‖_{E^(γ)}` over the data set and times.
    pub constant: T,
    pub witness_t: T,
    pub witness_index: usize,
    /// Supremum over times for each datum.
    pub per_datum: Vec<T>,
}

/// Evaluates the energy estimate over a set of data, for coefficients declared C1 or C2.
pub fn energy_estimate_check<T: Real>(
    model: &SpectralModel<T>,
    coeff: &CoefficientModel<T>,
    data_set: &[DataVector<T>],
    gamma: T,
    zone_n: T,
    times: &[T],
    tol: T,
) -> Result<EnergyEstimateReport<T>> {
    if !declared_c1(coeff) && !declared_c2(coeff) {
        return Err(Error::Precondition(format!("{} is declared neither C1 nor C2", coeff.label)));
    }
    if data_set.is_empty() {
        return Err(Error::Argument("energy_estimate_check needs at least one datum".into()));
    }
    let mut report = EnergyEstimateReport {
        constant: T::neg_infinity(),
        witness_t: T::zero(),
        witness_index: 0,
        per_datum: Vec::with_capacity(data_set.len()),
    };
    for (i, data) in data_set.iter().enumerate() {
        let norm = e_gamma_norm(model, data, gamma, zone_n)?;
        if !(norm > T::zero()) {
            return Err(Error::Argument(format!("datum {} has zero E^(gamma) norm", i)));
        }
        let series = two_sided_ratio(model, coeff, data, times, tol)?;
        let mut best = T::neg_infinity();
        for (t, v) in series {
            let r = v / norm;
            if r > best {
                best = r;
            }
            if r > report.constant {
                report.constant = r;
                report.witness_t = t;
                report.witness_index = i;
            }
        }
        report.per_datum.push(best);
    }
    Ok(report)
}
