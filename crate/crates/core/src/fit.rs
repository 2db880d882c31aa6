//! Power-law fits of decay series.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum number of samples accepted by [`decay_fit`].
pub const MIN_FIT_POINTS: usize = 8;

/// Least-squares fit `log value ≈ intercept + exponent · log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    pub exponent: T,
    pub intercept: T,
    /// Root-mean-square residual of the fit in `log value`.
    pub residual: T,
    pub points: usize,
}

/// Fits a power law to `(t, value)` samples spanning at least two decades in `t`.
pub fn decay_fit<T: Real>(series: &[(T, T)]) -> Result<DecayFit<T>> {
    if series.len() < MIN_FIT_POINTS {
        return Err(Error::Argument(format!("decay_fit needs at least {} points, got {}", MIN_FIT_POINTS, series.len())));
    }
    if let Some(&(t, v)) = series.iter().find(|&&(t, v)| !(t > T::zero()) || !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::Domain(format!("decay_fit needs positive times and values, got ({}, {})", t, v)));
    }
    let (t_min, t_max) = series.iter().fold((T::infinity(), T::zero()), |(lo, hi), &(t, _)| (lo.min(t), hi.max(t)));
    if t_max / t_min < T::c(100.0) * (T::one() - T::c(1e-9)) {
        return Err(Error::Argument(format!("decay_fit needs two decades of t, got [{}, {}]", t_min, t_max)));
    }
    let n = T::c(series.len() as f64);
    let xs: Vec<T> = series.iter().map(|&(t, _)| t.ln()).collect();
    let ys: Vec<T> = series.iter().map(|&(_, v)| v.ln()).collect();
    let x_mean = xs.iter().copied().sum::<T>() / n;
    let y_mean = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - x_mean) * (y - y_mean)).sum();
    let exponent = sxy / sxx;
    let intercept = y_mean - exponent * x_mean;
    let ss: T = xs.iter().zip(&ys).map(|(&x, &y)| (y - intercept - exponent * x).powi(2)).sum();
    Ok(DecayFit { exponent, intercept, residual: (ss / n).sqrt(), points: series.len() })
}
