//! Adaptive Gauss–Kronrod quadrature on dyadic panels, plus fixed-grid cumulative rules used by
//! the integral-equation oracles.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances for the adaptive routines.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Maximum number of subintervals per panel.
    pub max_intervals: usize,
    /// Maximum number of dyadic panels on unbounded ranges.
    pub max_panels: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self { rel_tol: T::c(1e-10), abs_tol: T::c(1e-300).max(T::min_positive_value()), max_intervals: 4000, max_panels: 400 }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

fn gauss_kronrod<T: Real>(f: &mut impl FnMut(T) -> T, a: T, b: T) -> (T, T) {
    let half = T::c(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::c(WGK[7]);
    let mut gauss = fc * T::c(WG[3]);
    for j in 0..7 {
        let dx = radius * T::c(XGK[j]);
        let sum = f(center - dx) + f(center + dx);
        kronrod += T::c(WGK[j]) * sum;
        if j % 2 == 1 {
            gauss += T::c(WG[j / 2]) * sum;
        }
    }
    (kronrod * radius, ((kronrod - gauss) * radius).abs())
}

/// Globally adaptive G7–K15 on a finite interval.
pub fn adaptive<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    adaptive_inner(&mut f, a, b, opts, T::zero())
}

fn adaptive_inner<T: Real>(
    f: &mut impl FnMut(T) -> T,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
    extra_abs: T,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: T::zero() });
    }
    // (a, b, value, error)
    let mut pieces: Vec<(T, T, T, T)> = Vec::with_capacity(64);
    let (v, e) = gauss_kronrod(f, a, b);
    pieces.push((a, b, v, e));
    loop {
        let total: T = pieces.iter().map(|p| p.2).sum();
        let err: T = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature { a: a.to_f64_lossy(), b: b.to_f64_lossy(), achieved: f64::NAN });
        }
        let target = (opts.rel_tol * total.abs()).max(opts.abs_tol).max(extra_abs);
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
                achieved: (err / total.abs()).to_f64_lossy(),
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (pa, pb, _, _) = pieces.swap_remove(idx);
        let mid = T::c(0.5) * (pa + pb);
        if mid <= pa.min(pb) || mid >= pa.max(pb) {
            // Interval can no longer be split in floating point.
            return Err(Error::Quadrature {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
                achieved: (err / total.abs()).to_f64_lossy(),
            });
        }
        let (v1, e1) = gauss_kronrod(f, pa, mid);
        let (v2, e2) = gauss_kronrod(f, mid, pb);
        pieces.push((pa, mid, v1, e1));
        pieces.push((mid, pb, v2, e2));
    }
}

/// Integrates over `[a, b]` (with `a <= b`) on panels whose widths double away from `a`.
///
/// Panel widths start at `min(1, b - a)`, which resolves integrands that vary on the scale
/// `1 + t`, as dissipation coefficients do.
pub fn dyadic<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    if b < a {
        return Err(Error::Argument(format!("dyadic quadrature needs a <= b, got [{}, {}]", a, b)));
    }
    let mut value = T::zero();
    let mut error = T::zero();
    let mut left = a;
    let mut width = T::one().min(b - a);
    while left < b {
        let right = (left + width).min(b);
        let est = adaptive_inner(&mut f, left, right, opts, T::zero())?;
        value += est.value;
        error += est.error;
        left = right;
        width = width + width;
    }
    Ok(Estimate { value, error })
}

/// Integrates over `[a, ∞)` on doubling panels, stopping once a geometric extrapolation of the
/// remaining panels falls below the requested tolerance.
pub fn dyadic_to_infinity<T: Real>(mut f: impl FnMut(T) -> T, a: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let mut value = T::zero();
    let mut error = T::zero();
    let mut left = a;
    let mut width = T::one().max(a.abs());
    let mut prev: Option<T> = None;
    let mut small_streak = 0usize;
    for _ in 0..opts.max_panels {
        let right = left + width;
        let est = adaptive_inner(&mut f, left, right, opts, opts.abs_tol)?;
        value += est.value;
        error += est.error;
        let contrib = est.value.abs();
        let tol = (opts.rel_tol * value.abs()).max(opts.abs_tol);
        let remainder = match prev {
            Some(p) if p > T::zero() && contrib < p => {
                let r = contrib / p;
                contrib * r / (T::one() - r)
            }
            Some(_) => T::infinity(),
            None => T::infinity(),
        };
        if contrib <= tol && remainder <= tol {
            small_streak += 1;
        } else if contrib == T::zero() {
            small_streak += 1;
        } else {
            small_streak = 0;
        }
        if small_streak >= 2 {
            let rem = if remainder.is_finite() { remainder } else { T::zero() };
            return Ok(Estimate { value, error: error + rem });
        }
        prev = Some(contrib);
        left = right;
        width = width + width;
        if !left.is_finite() {
            break;
        }
    }
    Err(Error::Quadrature {
        a: a.to_f64_lossy(),
        b: f64::INFINITY,
        achieved: (prev.unwrap_or(T::nan()) / value.abs()).to_f64_lossy(),
    })
}

/// Cumulative integral of samples on a uniform grid with spacing `h`, fourth order accurate.
///
/// `out[i]` approximates the integral from the first node to node `i`. Needs at least 4 nodes.
pub fn cumulative_uniform<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + T::c(0.5) * h * (values[i - 1] + values[i]);
        }
        return out;
    }
    let w = h / T::c(24.0);
    for i in 0..n - 1 {
        let piece = if i == 0 {
            w * (T::c(9.0) * values[0] + T::c(19.0) * values[1] - T::c(5.0) * values[2] + values[3])
        } else if i == n - 2 {
            w * (T::c(9.0) * values[n - 1] + T::c(19.0) * values[n - 2] - T::c(5.0) * values[n - 3] + values[n - 4])
        } else {
            w * (-values[i - 1] + T::c(13.0) * values[i] + T::c(13.0) * values[i + 1] - values[i + 2])
        };
        out[i + 1] = out[i] + piece;
    }
    out
}
