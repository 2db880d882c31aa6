//! Free propagator, the damped fundamental solution `𝓔(t, s, ξ)` by adaptive integration, exact
//! kernel-mode solutions and trajectory evolution over a spectral model.

use num_complex::Complex;
use rayon::prelude::*;

use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::ode::{Dop853, OdeOptions};
use crate::quadrature::{self, QuadOptions};
use crate::scalar::Real;
use crate::spectral::{DataVector, SpectralModel};

/// Step cap `STEP_CAP / max(λ, 1)`: about a dozen steps per oscillation period.
pub const STEP_CAP: f64 = 0.5;

/// `𝓔₀(t) = [[cos λt, sin λt], [-sin λt, cos λt]]`.
pub fn free_propagator<T: Real>(lambda: T, t: T) -> Mat2<T> {
    Mat2::rotation(lambda * t)
}

/// Integrator options used for the per-mode system at frequency `lambda`.
pub fn mode_options<T: Real>(lambda: T, tol: T) -> OdeOptions<T> {
    OdeOptions::new(tol).with_h_max(T::c(STEP_CAP) / lambda.max(T::one()))
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if !(tol > T::zero()) {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", tol)));
    }
    Ok(())
}

/// Right-hand side of `E' = [[0, λ], [-λ, -2b(t)]] E` on the row-major flattening of `E`.
fn fundamental_rhs<T: Real>(coeff: &CoefficientModel<T>, lambda: T) -> impl FnMut(T, &[T; 4]) -> [T; 4] + '_ {
    move |t, e| {
        let two_b = T::c(2.0) * coeff.b(t);
        [lambda * e[2], lambda * e[3], -lambda * e[0] - two_b * e[2], -lambda * e[1] - two_b * e[3]]
    }
}

/// `𝓔(t, s, ξ)` at frequency `lambda`, with both columns integrated jointly.
pub fn integrate_fundamental<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, t: T, tol: T) -> Result<Mat2<T>> {
    Ok(fundamental_series(coeff, lambda, s, &[t], tol)?[0])
}

/// `𝓔(t_k, s, ξ)` for nondecreasing `t_k >= s`, in one pass of the integrator.
pub fn fundamental_series<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    s: T,
    times: &[T],
    tol: T,
) -> Result<Vec<Mat2<T>>> {
    check_tol(tol)?;
    if s < T::zero() || lambda < T::zero() {
        return Err(Error::Argument(format!("need s >= 0 and lambda >= 0, got s = {}, lambda = {}", s, lambda)));
    }
    let mut last = s;
    for &t in times {
        if t < last {
            return Err(Error::Argument(format!("times must be nondecreasing and >= s = {}; got {} after {}", s, t, last)));
        }
        last = t;
    }
    let identity = Mat2::<T>::identity().entries();
    let mut solver = Dop853::new(fundamental_rhs(coeff, lambda), s, identity, mode_options(lambda, tol));
    times.iter().map(|&t| solver.advance_to(t).map(|e| Mat2::from_entries(*e))).collect()
}

/// `(u(t), u'(t))` for a kernel mode: the exact solution of `u'' + 2b u' = 0`,
/// `u' = u₂/λ²(t)`, `u = u₁ + u₂ ∫₀ᵗ λ⁻²`.
pub fn kernel_mode_solution<T: Real>(
    coeff: &CoefficientModel<T>,
    u1: Complex<T>,
    u2: Complex<T>,
    t: T,
) -> Result<(Complex<T>, Complex<T>)> {
    Ok(kernel_mode_series(coeff, u1, u2, &[t])?[0])
}

/// Kernel-mode solution on nondecreasing times.
pub fn kernel_mode_series<T: Real>(
    coeff: &CoefficientModel<T>,
    u1: Complex<T>,
    u2: Complex<T>,
    times: &[T],
) -> Result<Vec<(Complex<T>, Complex<T>)>> {
    let opts = QuadOptions::default();
    let logs = coeff.log_lambda_series(times, &opts)?;
    let two = T::c(2.0);
    let mut out = Vec::with_capacity(times.len());
    if coeff.has_primitive() {
        let weight = |tau: T| (-two * coeff.primitive(tau).unwrap_or(T::nan())).exp();
        let mut acc = T::zero();
        let mut prev = T::zero();
        for (&t, &log_l) in times.iter().zip(&logs) {
            acc += quadrature::dyadic(weight, prev, t, &opts)?.value;
            prev = t;
            out.push((u1 + u2 * acc, u2 * (-two * log_l).exp()));
        }
    } else {
        // y = (∫₀ᵗ b, ∫₀ᵗ λ⁻²)
        let rhs = |tau: T, y: &[T; 2]| [coeff.b(tau), (-two * y[0]).exp()];
        let tol = T::c(1e-12).max(T::epsilon() * T::c(100.0));
        let mut solver = Dop853::new(rhs, T::zero(), [T::zero(), T::zero()], OdeOptions::new(tol));
        for &t in times {
            let y = *solver.advance_to(t)?;
            out.push((u1 + u2 * y[1], u2 * (-two * y[0]).exp()));
        }
    }
    Ok(out)
}

/// Solution of the damped problem sampled at given times, in the `V = (Λu, u')` representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    /// `states[k][j]` is `V_j(times[k])`.
    pub states: Vec<Vec<[Complex<T>; 2]>>,
    /// `λ(t)` at each time.
    pub lambda_values: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    /// `‖(u, u')‖_E` at each time.
    pub fn energies(&self, model: &SpectralModel<T>) -> Result<Vec<T>> {
        self.states.iter().map(|s| model.v_norm(s)).collect()
    }
}

fn apply<T: Real>(m: &Mat2<T>, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
    m.apply_c(v)
}

/// Evolves Cauchy data: `V_j(t) = 𝓔(t, 0, ξ_j) V_j(0)`, kernel modes by the exact solver.
pub fn evolve<T: Real>(
    model: &SpectralModel<T>,
    coeff: &CoefficientModel<T>,
    data: &DataVector<T>,
    times: &[T],
    tol: T,
) -> Result<Trajectory<T>> {
    check_tol(tol)?;
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < T::zero()) {
        return Err(Error::Argument("trajectory times must be strictly increasing and >= 0".into()));
    }
    let v0 = data.to_v(model)?;
    let zero = Complex::new(T::zero(), T::zero());
    let per_mode: Vec<Vec<[Complex<T>; 2]>> = model
        .points()
        .par_iter()
        .zip(data.u1.par_iter().zip(data.u2.par_iter()))
        .zip(v0.par_iter())
        .enumerate()
        .map(|(j, ((p, (&u1, &u2)), &v))| -> Result<Vec<[Complex<T>; 2]>> {
            if v[0] == zero && v[1] == zero && (!p.is_kernel() || u1 == zero) {
                return Ok(vec![[zero, zero]; times.len()]);
            }
            if p.is_kernel() {
                let sol = kernel_mode_series(coeff, u1, u2, times).map_err(|e| e.at_mode(j))?;
                return Ok(sol.into_iter().map(|(_, du)| [zero, du]).collect());
            }
            let fund = fundamental_series(coeff, p.lambda, T::zero(), times, tol).map_err(|e| e.at_mode(j))?;
            Ok(fund.iter().map(|e| apply(e, v)).collect())
        })
        .collect::<Result<_>>()?;
    let states = (0..times.len()).map(|k| per_mode.iter().map(|m| m[k]).collect()).collect();
    let logs = coeff.log_lambda_series(times, &QuadOptions::default())?;
    Ok(Trajectory { times: times.to_vec(), states, lambda_values: logs.into_iter().map(|l| l.exp()).collect() })
}
