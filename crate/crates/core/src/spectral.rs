//! Sampled spectral models of `A`, Cauchy data per spectral point, and the energy norms `E` and
//! `E^(γ)`.
//!
//! A continuous spectrum is represented by quadrature samples `(λ_j, w_j)` of `Λ(ξ) = √A(ξ)`
//! and of the spectral measure. Kernel modes (`λ_j = 0`) are stored but handled separately.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One quadrature sample of the spectral measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint<T> {
    pub lambda: T,
    pub weight: T,
}

impl<T: Real> SpectralPoint<T> {
    pub fn is_kernel(&self) -> bool {
        self.lambda == T::zero()
    }
}

/// Weighted sample set of `Λ(ξ)`, sorted by `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel<T> {
    points: Vec<SpectralPoint<T>>,
    pub label: String,
}

/// Built-in families of spectral models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinModel<T> {
    /// `-d²/dx²` on `(0, π)` with Dirichlet conditions: `λ_k = k`, `k = 1..=K`.
    DirichletInterval { k: usize },
    /// Neumann conditions: `λ_0 = 0` (constants) and `λ_k = k`, `k = 1..=K`.
    NeumannInterval { k: usize },
    /// `-Δ` on `L²(ℝⁿ)` in polar coordinates: `Λ = |ξ|` at radial midpoints.
    FreeWave { dim: u32, xi_max: T, points: usize },
    /// `-Δ + 1`: `Λ = √(1 + |ξ|²)`, boundedly invertible.
    KleinGordon { dim: u32, xi_max: T, points: usize },
    /// `Δ²`: `Λ = |ξ|²`.
    Plate { dim: u32, xi_max: T, points: usize },
}

/// Dispersion relations of the radial models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    Wave,
    KleinGordon,
    Plate,
}

impl Dispersion {
    fn apply<T: Real>(self, xi: T) -> T {
        match self {
            Dispersion::Wave => xi.abs(),
            Dispersion::KleinGordon => (T::one() + xi * xi).sqrt(),
            Dispersion::Plate => xi * xi,
        }
    }
}

impl<T: Real> SpectralModel<T> {
    /// Validates and sorts the points.
    pub fn new(mut points: Vec<SpectralPoint<T>>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("spectral model needs at least one point".into()));
        }
        for (j, p) in points.iter().enumerate() {
            if !(p.lambda >= T::zero()) || !p.lambda.is_finite() {
                return Err(Error::Argument(format!("point {}: lambda = {} must be finite and >= 0", j, p.lambda)));
            }
            if !(p.weight > T::zero()) || !p.weight.is_finite() {
                return Err(Error::Argument(format!("point {}: weight = {} must be finite and > 0", j, p.weight)));
            }
        }
        points.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite lambdas"));
        Ok(Self { points, label: label.into() })
    }

    /// Builds a model from `(λ, w)` pairs.
    pub fn from_pairs(pairs: &[(T, T)], label: impl Into<String>) -> Result<Self> {
        Self::new(pairs.iter().map(|&(lambda, weight)| SpectralPoint { lambda, weight }).collect(), label)
    }

    pub fn builtin(kind: BuiltinModel<T>) -> Result<Self> {
        match kind {
            BuiltinModel::DirichletInterval { k } => {
                if k == 0 {
                    return Err(Error::Argument("dirichlet_interval needs k >= 1".into()));
                }
                let pts = (1..=k).map(|j| SpectralPoint { lambda: T::c(j as f64), weight: T::one() }).collect();
                Self::new(pts, format!("dirichlet_interval(k={k})"))
            }
            BuiltinModel::NeumannInterval { k } => {
                let pts = (0..=k).map(|j| SpectralPoint { lambda: T::c(j as f64), weight: T::one() }).collect();
                Self::new(pts, format!("neumann_interval(k={k})"))
            }
            BuiltinModel::FreeWave { dim, xi_max, points } => Self::radial_uniform(Dispersion::Wave, dim, xi_max, points),
            BuiltinModel::KleinGordon { dim, xi_max, points } => {
                Self::radial_uniform(Dispersion::KleinGordon, dim, xi_max, points)
            }
            BuiltinModel::Plate { dim, xi_max, points } => Self::radial_uniform(Dispersion::Plate, dim, xi_max, points),
        }
    }

    /// Radial model on `points` midpoints of `[0, xi_max]`, weights `|ξ|^(n-1) Δξ`.
    pub fn radial_uniform(dispersion: Dispersion, dim: u32, xi_max: T, points: usize) -> Result<Self> {
        if points == 0 || !(xi_max > T::zero()) || dim == 0 {
            return Err(Error::Argument("radial model needs points >= 1, xi_max > 0, dim >= 1".into()));
        }
        let dxi = xi_max / T::c(points as f64);
        let xis: Vec<T> = (0..points).map(|j| (T::c(j as f64) + T::c(0.5)) * dxi).collect();
        let pts = xis
            .iter()
            .map(|&xi| SpectralPoint { lambda: dispersion.apply(xi), weight: xi.powi(dim as i32 - 1) * dxi })
            .collect();
        Self::new(pts, format!("{:?}(dim={}, xi_max={}, points={})", dispersion, dim, xi_max, points).to_lowercase())
    }

    /// Radial model on an explicit increasing grid of `|ξ|` values with trapezoidal weights times
    /// `|ξ|^(n-1)`. Points of zero weight (the origin when `n > 1`) are dropped.
    pub fn radial_from_grid(dispersion: Dispersion, dim: u32, xis: &[T]) -> Result<Self> {
        if xis.is_empty() || xis.windows(2).any(|w| w[1] <= w[0]) || xis[0] < T::zero() {
            return Err(Error::Argument("radial grid must be nonnegative and strictly increasing".into()));
        }
        let n = xis.len();
        let half = T::c(0.5);
        let mut pts = Vec::with_capacity(n);
        for j in 0..n {
            let cell = if n == 1 {
                T::one()
            } else if j == 0 {
                half * (xis[1] - xis[0])
            } else if j == n - 1 {
                half * (xis[n - 1] - xis[n - 2])
            } else {
                half * (xis[j + 1] - xis[j - 1])
            };
            let w = cell * xis[j].powi(dim as i32 - 1);
            if w > T::zero() {
                pts.push(SpectralPoint { lambda: dispersion.apply(xis[j]), weight: w });
            }
        }
        Self::new(pts, format!("{:?}(dim={}, grid)", dispersion, dim).to_lowercase())
    }

    pub fn points(&self) -> &[SpectralPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn kernel_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.points[j].is_kernel()).collect()
    }

    pub fn min_positive_lambda(&self) -> Option<T> {
        self.points.iter().map(|p| p.lambda).find(|&l| l > T::zero())
    }

    /// Weighted norm of per-mode vectors in the `V = (Λu, u')` representation.
    pub fn v_norm(&self, v: &[[Complex<T>; 2]]) -> Result<T> {
        if v.len() != self.len() {
            return Err(misaligned(self.len(), v.len()));
        }
        let sum: T = self.points.iter().zip(v).map(|(p, x)| p.weight * (x[0].norm_sqr() + x[1].norm_sqr())).sum();
        Ok(sum.sqrt())
    }
}

fn misaligned(expected: usize, got: usize) -> Error {
    Error::Argument(format!("data has {} entries but the spectral model has {} points", got, expected))
}

/// Cauchy data `(u₁, u₂)` per spectral point.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector<T> {
    pub u1: Vec<Complex<T>>,
    pub u2: Vec<Complex<T>>,
}

impl<T: Real> DataVector<T> {
    pub fn new(u1: Vec<Complex<T>>, u2: Vec<Complex<T>>) -> Result<Self> {
        if u1.len() != u2.len() {
            return Err(Error::Argument(format!("u1 has {} entries, u2 has {}", u1.len(), u2.len())));
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(n: usize) -> Self {
        Self { u1: vec![Complex::new(T::zero(), T::zero()); n], u2: vec![Complex::new(T::zero(), T::zero()); n] }
    }

    pub fn from_real(u1: &[T], u2: &[T]) -> Result<Self> {
        Self::new(
            u1.iter().map(|&x| Complex::new(x, T::zero())).collect(),
            u2.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { u1: self.u1.iter().map(|x| x * s).collect(), u2: self.u2.iter().map(|x| x * s).collect() }
    }

    /// `(u₁, u₂)` with the profile `g(λ)` in both components; zero on kernel modes.
    pub fn from_profile(model: &SpectralModel<T>, profile: impl Fn(T) -> T) -> Self {
        let vals: Vec<Complex<T>> = model
            .points()
            .iter()
            .map(|p| if p.is_kernel() { T::zero() } else { profile(p.lambda) })
            .map(|g| Complex::new(g, T::zero()))
            .collect();
        Self { u1: vals.clone(), u2: vals }
    }

    /// Gaussian profile `exp(-((λ - center)/width)²)`.
    pub fn gaussian_bump(model: &SpectralModel<T>, center: T, width: T) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::Argument("gaussian_bump needs width > 0".into()));
        }
        Ok(Self::from_profile(model, |l| {
            let x = (l - center) / width;
            (-x * x).exp()
        }))
    }

    /// Smooth bump `exp(1 - 1/(1 - x²))` supported on `lo < λ < hi`.
    pub fn compact_bump(model: &SpectralModel<T>, lo: T, hi: T) -> Result<Self> {
        if !(hi > lo) || lo < T::zero() {
            return Err(Error::Argument("compact_bump needs 0 <= lo < hi".into()));
        }
        let mid = T::c(0.5) * (lo + hi);
        let rad = T::c(0.5) * (hi - lo);
        Ok(Self::from_profile(model, |l| {
            let x = (l - mid) / rad;
            if x.abs() >= T::one() {
                T::zero()
            } else {
                (T::one() - T::one() / (T::one() - x * x)).exp()
            }
        }))
    }

    /// Data supported on the kernel modes only.
    pub fn kernel_only(model: &SpectralModel<T>, u1: Complex<T>, u2: Complex<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let u1s = model.points().iter().map(|p| if p.is_kernel() { u1 } else { zero }).collect();
        let u2s = model.points().iter().map(|p| if p.is_kernel() { u2 } else { zero }).collect();
        Self { u1: u1s, u2: u2s }
    }

    /// `V = (Λu₁, u₂)` per mode.
    pub fn to_v(&self, model: &SpectralModel<T>) -> Result<Vec<[Complex<T>; 2]>> {
        if self.len() != model.len() {
            return Err(misaligned(model.len(), self.len()));
        }
        Ok(model.points().iter().zip(self.u1.iter().zip(&self.u2)).map(|(p, (&a, &b))| [a * p.lambda, b]).collect())
    }

    /// Whether the data vanish on every kernel mode.
    pub fn vanishes_on_kernel(&self, model: &SpectralModel<T>) -> bool {
        let zero = Complex::new(T::zero(), T::zero());
        model.kernel_indices().iter().all(|&j| self.u1[j] == zero && self.u2[j] == zero)
    }
}

/// `‖(u₁, u₂)‖_E = (Σ w_j (λ_j²|u1_j|² + |u2_j|²))^(1/2)`.
pub fn energy_norm<T: Real>(model: &SpectralModel<T>, data: &DataVector<T>) -> Result<T> {
    model.v_norm(&data.to_v(model)?)
}

/// Bracket `[λ] = min(λ, N)`.
pub fn bracket<T: Real>(lambda: T, zone_n: T) -> T {
    lambda.min(zone_n)
}

/// Norm of the modified energy space `E^(γ)`:
/// `(Σ w_j (|[λ_j]^(-γ-1) λ_j u1_j|² + |[λ_j]^(-γ) u2_j|²))^(1/2)`, `[λ] = min(λ, N)`.
///
/// Kernel modes are excluded; for `γ > 0` they must carry zero data.
pub fn e_gamma_norm<T: Real>(model: &SpectralModel<T>, data: &DataVector<T>, gamma: T, zone_n: T) -> Result<T> {
    if data.len() != model.len() {
        return Err(misaligned(model.len(), data.len()));
    }
    if gamma < T::zero() || !(zone_n > T::zero()) {
        return Err(Error::Argument(format!("e_gamma_norm needs gamma >= 0 and zone_n > 0, got {} and {}", gamma, zone_n)));
    }
    let mut sum = T::zero();
    for (j, p) in model.points().iter().enumerate() {
        if p.is_kernel() {
            if gamma > T::zero() && (data.u1[j].norm() > T::zero() || data.u2[j].norm() > T::zero()) {
                return Err(Error::Domain(format!("mode {} lies in the kernel but carries data (gamma = {})", j, gamma)));
            }
            continue;
        }
        let br = bracket(p.lambda, zone_n);
        let f1 = br.powf(-gamma - T::one()) * p.lambda;
        let f2 = br.powf(-gamma);
        sum += p.weight * (data.u1[j].norm_sqr() * f1 * f1 + data.u2[j].norm_sqr() * f2 * f2);
    }
    Ok(sum.sqrt())
}
