//! Zone partition of the extended phase space, dissipative-zone bound scans and the Volterra
//! oracle for the fundamental solution in the dissipative zone.
//!
//! `Z_diss(N) = {λ(1+t) < N}` and `Z_hyp(N) = {λ(1+t) >= N}`; the boundary time is
//! `t_ξ = max(N/λ - 1, 0)`.

use rayon::prelude::*;

use crate::coefficients::{shifted_log_grid, log_grid, CoefficientKind, CoefficientModel};
use crate::error::{Error, Result};
use crate::propagator::fundamental_series;
use crate::quadrature::{cumulative_uniform, QuadOptions};
use crate::scalar::Real;
use crate::spectral::SpectralModel;

/// Number of nodes of the Volterra quadrature grid (uniform in `ln(1+τ)`).
pub const VOLTERRA_NODES: usize = 4097;

/// `t_ξ = max(N/λ - 1, 0)`, the exit time from the dissipative zone.
pub fn t_xi<T: Real>(lambda: T, zone_n: T) -> Result<T> {
    if lambda == T::zero() {
        return Err(Error::Domain("kernel modes never leave the dissipative zone".into()));
    }
    if !(lambda > T::zero()) || !(zone_n > T::zero()) {
        return Err(Error::Argument(format!("t_xi needs lambda > 0 and N > 0, got {} and {}", lambda, zone_n)));
    }
    Ok((zone_n / lambda - T::one()).max(T::zero()))
}

/// Sampling of `Z_diss(N)`: frequencies and the number of times per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneGrid<T> {
    pub lambdas: Vec<T>,
    /// Times per frequency, log-spaced in `1 + t` on `[0, t_ξ]`.
    pub t_points: usize,
}

impl<T: Real> ZoneGrid<T> {
    /// `n_lambda` log-spaced frequencies in `[lambda_min, N)`.
    pub fn log_spaced(lambda_min: T, zone_n: T, n_lambda: usize, t_points: usize) -> Result<Self> {
        if !(lambda_min > T::zero()) || !(lambda_min < zone_n) || n_lambda < 1 || t_points < 2 {
            return Err(Error::Argument("zone grid needs 0 < lambda_min < N, n_lambda >= 1, t_points >= 2".into()));
        }
        // Exclude λ = N itself, whose dissipative zone is empty.
        let mut lambdas = log_grid(lambda_min, zone_n, n_lambda + 1);
        lambdas.pop();
        Ok(Self { lambdas, t_points })
    }

    /// Positive frequencies of a model that lie in the dissipative zone.
    pub fn from_model(model: &SpectralModel<T>, zone_n: T, t_points: usize) -> Self {
        let lambdas = model.lambdas().into_iter().filter(|&l| l > T::zero() && l < zone_n).collect();
        Self { lambdas, t_points }
    }

    /// One refinement level: `lambda_min` divided by `lambda_factor`, point counts doubled.
    pub fn refined(lambda_min: T, zone_n: T, n_lambda: usize, t_points: usize, level: u32, lambda_factor: T) -> Result<Self> {
        let scale = 1usize << level;
        Self::log_spaced(lambda_min / lambda_factor.powi(level as i32), zone_n, n_lambda * scale, t_points * scale)
    }
}

/// Largest sampled ratio for one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow<T> {
    pub lambda: T,
    pub t: T,
    /// `(row, column)` of the matrix entry attaining the ratio.
    pub entry: (usize, usize),
    pub ratio: T,
}

/// Empirical constant of a matrix bound with its witness and the per-frequency maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub constant: T,
    pub witness: BoundRow<T>,
    pub rows: Vec<BoundRow<T>>,
}

pub(crate) fn declared_c1<T: Real>(coeff: &CoefficientModel<T>) -> bool {
    matches!(coeff.kind, CoefficientKind::Zero) || coeff.mu_upper.is_some_and(|m| m < T::c(0.5))
}

pub(crate) fn declared_c2<T: Real>(coeff: &CoefficientModel<T>) -> bool {
    coeff.mu_lower.is_some_and(|m| m > T::c(0.5))
}

/// Scans `|𝓔_ik(t,0,ξ)| · weight(t) / pattern_ik(λ)` over the grid.
fn scan<T: Real>(
    coeff: &CoefficientModel<T>,
    grid: &ZoneGrid<T>,
    zone_n: T,
    tol: T,
    weight: impl Fn(T, T) -> T + Sync,
    first_column: impl Fn(T) -> T + Sync,
) -> Result<BoundReport<T>> {
    if grid.lambdas.is_empty() {
        return Err(Error::Argument("zone grid contains no frequency inside the dissipative zone".into()));
    }
    let quad = QuadOptions::default();
    let rows: Vec<BoundRow<T>> = grid
        .lambdas
        .par_iter()
        .enumerate()
        .map(|(j, &lambda)| -> Result<BoundRow<T>> {
            let txi = t_xi(lambda, zone_n)?;
            let times = shifted_log_grid(T::zero(), txi, grid.t_points);
            let fund = fundamental_series(coeff, lambda, T::zero(), &times, tol).map_err(|e| e.at_mode(j))?;
            let logs = coeff.log_lambda_series(&times, &quad).map_err(|e| e.at_mode(j))?;
            let pattern_first = first_column(lambda);
            let mut best = BoundRow { lambda, t: T::zero(), entry: (0, 0), ratio: T::neg_infinity() };
            for ((&t, e), &log_l) in times.iter().zip(&fund).zip(&logs) {
                let w = weight(t, log_l);
                for i in 0..2 {
                    for k in 0..2 {
                        let pattern = if k == 0 { pattern_first } else { T::one() };
                        let ratio = e[(i, k)].abs() * w / pattern;
                        if ratio > best.ratio {
                            best = BoundRow { lambda, t, entry: (i, k), ratio };
                        }
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let witness = *rows.iter().fold(&rows[0], |a, b| if b.ratio > a.ratio { b } else { a });
    Ok(BoundReport { constant: witness.ratio, witness, rows })
}

/// Empirical constant in `|𝓔(t,0,ξ)| ≲ λ⁻²(t) [[Λ^(-γ), 1], [Λ^(-γ), 1]]` on `Z_diss(N)`, for
/// coefficients declared with `limsup t·b < 1/2`.
pub fn check_diss_bound_c1<T: Real>(
    coeff: &CoefficientModel<T>,
    grid: &ZoneGrid<T>,
    gamma: T,
    zone_n: T,
    tol: T,
) -> Result<BoundReport<T>> {
    if !declared_c1(coeff) {
        return Err(Error::Precondition(format!("{} is not declared with mu_upper < 1/2", coeff.label)));
    }
    if gamma < T::zero() {
        return Err(Error::Argument(format!("gamma must be >= 0, got {}", gamma)));
    }
    let two = T::c(2.0);
    scan(coeff, grid, zone_n, tol, |_, log_l| (two * log_l).exp(), |lambda| lambda.powf(-gamma))
}

/// Empirical constant in `|𝓔(t,0,ξ)| ≲ (1+t)⁻¹ [[Λ⁻¹, 1], [Λ⁻¹, 1]]` on `Z_diss(N)`, for
/// coefficients declared with `liminf t·b > 1/2`.
pub fn check_diss_bound_c2<T: Real>(
    coeff: &CoefficientModel<T>,
    grid: &ZoneGrid<T>,
    zone_n: T,
    tol: T,
) -> Result<BoundReport<T>> {
    if !declared_c2(coeff) {
        return Err(Error::Precondition(format!("{} is not declared with mu_lower > 1/2", coeff.label)));
    }
    scan(coeff, grid, zone_n, tol, |t, _| T::one() + t, |lambda| T::one() / lambda)
}

/// `𝓔(t,0,ξ)η` for `η ∈ {(1,0), (0,1)}` from the Volterra system
/// `v = η₁ + Λ∫₀ᵗ w`, `w = λ⁻²(t)η₂ - Λλ⁻²(t)∫₀ᵗ λ²v`, by Picard iteration on a grid uniform
/// in `ln(1+τ)`.
pub fn volterra_solve_diss<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    eta: [T; 2],
    t: T,
    kmax: usize,
    tol: T,
) -> Result<[T; 2]> {
    if t < T::zero() || lambda < T::zero() || !(tol > T::zero()) {
        return Err(Error::Argument("volterra_solve_diss needs t >= 0, lambda >= 0 and tol > 0".into()));
    }
    if t == T::zero() {
        return Ok(eta);
    }
    let n = VOLTERRA_NODES;
    let s_end = t.ln_1p();
    let h = s_end / T::c((n - 1) as f64);
    let s: Vec<T> = (0..n).map(|i| h * T::c(i as f64)).collect();
    let jac: Vec<T> = s.iter().map(|&x| x.exp()).collect();
    let taus: Vec<T> = jac.iter().enumerate().map(|(i, &e)| if i == n - 1 { t } else { e - T::one() }).collect();
    let logs = coeff.log_lambda_series(&taus, &QuadOptions::default())?;
    let lam2: Vec<T> = logs.iter().map(|&l| (T::c(2.0) * l).exp()).collect();

    let mut v = vec![eta[0]; n];
    let mut w: Vec<T> = lam2.iter().map(|&l2| eta[1] / l2).collect();
    for _ in 0..kmax {
        let wv: Vec<T> = w.iter().zip(&jac).map(|(&a, &b)| a * b).collect();
        let lv: Vec<T> = v.iter().zip(&lam2).zip(&jac).map(|((&a, &l2), &b)| a * l2 * b).collect();
        let cw = cumulative_uniform(&wv, h);
        let cl = cumulative_uniform(&lv, h);
        let mut diff = T::zero();
        for i in 0..n {
            let nv = eta[0] + lambda * cw[i];
            let nw = (eta[1] - lambda * cl[i]) / lam2[i];
            diff = diff.max((nv - v[i]).abs()).max((nw - w[i]).abs());
            v[i] = nv;
            w[i] = nw;
        }
        if diff < tol {
            return Ok([v[n - 1], w[n - 1]]);
        }
    }
    let last = (v[n - 1].abs() + w[n - 1].abs()).to_f64_lossy();
    Err(Error::SeriesDivergence { terms: kmax, increment: last })
}
