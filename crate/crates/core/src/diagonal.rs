//! Two-step diagonalization in the hyperbolic zone.
//!
//! With `W = M⁻¹V` the system becomes `W' = (D - bJ)W`, `D = diag(-iλ, iλ)`, `J` the all-ones
//! matrix. Writing `D - bJ = D - bI - bσ_x`, the scalar part is removed by the factor `1/λ(t)`
//! and `N₁ = I - N⁽¹⁾` with `N⁽¹⁾ = iβ[[0, -1], [1, 0]]`, `β = b/(2λ)`, removes `-bσ_x` up to
//! the remainder
//!
//! `B⁽¹⁾ = ∂ₜN⁽¹⁾ + bσ_xN⁽¹⁾`, `R₁ = -N₁⁻¹B⁽¹⁾ = O(1/(λ(1+t)²))`.
//!
//! For `Z = N₁⁻¹W̃` this gives `Z' = (D - R₁)Z`, hence `Z(t) = Ẽ₀(t,s)Q₁(t,s)Z(s)` with
//! `∂ₜQ₁ = -𝓡Q₁`, `𝓡 = Ẽ₀(s,t)R₁Ẽ₀(t,s)`, and
//!
//! `𝓔(t,s) = (λ(s)/λ(t)) M N₁(t) Ẽ₀(t,s) Q₁(t,s) N₁(s)⁻¹ M⁻¹`.
//!
//! The diagonal of `R₁` does not oscillate and makes `Q₁(t)` converge only like `1/t`; it is
//! integrated in closed form (real part) or by quadrature (phase). `Q₁ = P Q̂` with
//! `P = diag(e^(-∫R₁₁), e^(-∫R₂₂))`, and `Q̂` solves `Q̂' = -P⁻¹OP Q̂` with `O` the off-diagonal
//! part of `𝓡`, which converges like `1/(λT)²`.

use num_complex::Complex;

use crate::coefficients::{shifted_log_grid, CoefficientModel};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat2C};
use crate::ode::{Dop853, OdeOptions};
use crate::quadrature::{self, cumulative_uniform, QuadOptions};
use crate::scalar::Real;
use crate::zones::t_xi;

fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `M = [[i, -i], [1, 1]]`, mapping diagonal variables to `V = (Λu, u')`.
pub fn m_matrix<T: Real>() -> Mat2C<T> {
    let (o, z) = (T::one(), T::zero());
    Mat2C::new(cx(z, o), cx(z, -o), cx(o, z), cx(o, z))
}

/// `M⁻¹ = ½[[-i, 1], [i, 1]]`.
pub fn m_inverse<T: Real>() -> Mat2C<T> {
    let (h, z) = (T::c(0.5), T::zero());
    Mat2C::new(cx(z, -h), cx(h, z), cx(z, h), cx(h, z))
}

/// `D = diag(-iλ, iλ)`.
pub fn d_matrix<T: Real>(lambda: T) -> Mat2C<T> {
    Mat2C::diag(cx(T::zero(), -lambda), cx(T::zero(), lambda))
}

/// `Ẽ₀(t,s) = diag(e^(-iλ(t-s)), e^(iλ(t-s)))`.
pub fn e0_tilde<T: Real>(lambda: T, t: T, s: T) -> Mat2C<T> {
    let th = lambda * (t - s);
    Mat2C::diag(cx(th.cos(), -th.sin()), cx(th.cos(), th.sin()))
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !(lambda > T::zero()) {
        return Err(Error::Argument(format!("diagonalization needs lambda > 0, got {}", lambda)));
    }
    Ok(())
}

/// `β = b/(2λ)`.
fn beta<T: Real>(coeff: &CoefficientModel<T>, t: T, lambda: T) -> T {
    coeff.b(t) / (T::c(2.0) * lambda)
}

/// `N⁽¹⁾ = iβ[[0, -1], [1, 0]]` for a given value `b`.
pub fn n_super1_of<T: Real>(b: T, lambda: T) -> Mat2C<T> {
    let beta = b / (T::c(2.0) * lambda);
    let z = T::zero();
    Mat2C::new(cx(z, z), cx(z, -beta), cx(z, beta), cx(z, z))
}

/// `N₁(t,ξ) = I - N⁽¹⁾(t,ξ)`.
pub fn n1<T: Real>(coeff: &CoefficientModel<T>, t: T, lambda: T) -> Result<Mat2C<T>> {
    check_lambda(lambda)?;
    Ok(Mat2C::identity() - n_super1_of(coeff.b(t), lambda))
}

/// `det N₁ = 1 - b²/(4λ²)`; a nonpositive value means the zone constant is too small.
pub fn det_n1<T: Real>(coeff: &CoefficientModel<T>, t: T, lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    let beta = beta(coeff, t, lambda);
    let det = T::one() - beta * beta;
    if !(det > T::zero()) {
        return Err(Error::ZoneConstant { lambda: lambda.to_f64_lossy(), t: t.to_f64_lossy(), det: det.to_f64_lossy() });
    }
    Ok(det)
}

/// `N₁⁻¹ = (I + N⁽¹⁾)/(1 - β²)`.
pub fn n1_inverse<T: Real>(coeff: &CoefficientModel<T>, t: T, lambda: T) -> Result<Mat2C<T>> {
    let det = det_n1(coeff, t, lambda)?;
    Ok((Mat2C::identity() + n_super1_of(coeff.b(t), lambda)).scale_re(T::one() / det))
}

/// `B⁽¹⁾ = ∂ₜN⁽¹⁾ + bσ_xN⁽¹⁾`.
pub fn b1<T: Real>(coeff: &CoefficientModel<T>, t: T, lambda: T) -> Result<Mat2C<T>> {
    check_lambda(lambda)?;
    let b = coeff.b(t);
    let dn = n_super1_of(coeff.b_prime(t), lambda);
    let (o, z) = (cx(T::one(), T::zero()), cx(T::zero(), T::zero()));
    let sigma_x = Mat2C::new(z, o, o, z);
    Ok(dn + (sigma_x * n_super1_of(b, lambda)).scale_re(b))
}

/// `R₁ = -N₁⁻¹B⁽¹⁾`.
pub fn r1<T: Real>(coeff: &CoefficientModel<T>, t: T, lambda: T) -> Result<Mat2C<T>> {
    Ok(-(n1_inverse(coeff, t, lambda)? * b1(coeff, t, lambda)?))
}

/// `𝓡(t,s) = Ẽ₀(s,t) R₁(t) Ẽ₀(t,s)`.
pub fn r_conjugated<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, t: T) -> Result<Mat2C<T>> {
    Ok(e0_tilde(lambda, s, t) * r1(coeff, t, lambda)? * e0_tilde(lambda, t, s))
}

/// Integrator for the factorized `Q₁ = P Q̂`.
///
/// State: `Q̂` (eight reals) and the phase `φ(t) = ∫ₛᵗ Im R₂₂`.
struct Q1Stepper<T: Real> {
    lambda: T,
    s: T,
    det_s: T,
}

impl<T: Real> Q1Stepper<T> {
    fn new(coeff: &CoefficientModel<T>, lambda: T, s: T) -> Result<Self> {
        let det_s = det_n1(coeff, s, lambda)?;
        Ok(Self { lambda, s, det_s })
    }

    fn initial(&self) -> [T; 9] {
        let mut y = [T::zero(); 9];
        y[..8].copy_from_slice(&Mat2C::<T>::identity().to_array());
        y
    }

    fn options(&self, tol: T) -> OdeOptions<T> {
        OdeOptions::new(tol).with_h_max(T::one() / self.lambda)
    }

    fn rhs<'a>(&self, coeff: &'a CoefficientModel<T>) -> impl FnMut(T, &[T; 9]) -> [T; 9] + 'a {
        let (lambda, s) = (self.lambda, self.s);
        move |t, y| {
            let r = match r1(coeff, t, lambda) {
                Ok(r) => r,
                Err(_) => return [T::nan(); 9],
            };
            let phi = y[8];
            // P⁻¹ 𝓡_offdiag P: phases e^{±2i(λ(t-s) - φ)}.
            let ang = T::c(2.0) * (lambda * (t - s) - phi);
            let rot = cx(ang.cos(), ang.sin());
            let o12 = rot * r.m[0][1];
            let o21 = rot.conj() * r.m[1][0];
            let q = Mat2C::from_slice(&y[..8]);
            let z = cx(T::zero(), T::zero());
            let d = -(Mat2C::new(z, o12, o21, z) * q);
            let mut out = [T::zero(); 9];
            out[..8].copy_from_slice(&d.to_array());
            out[8] = r.m[1][1].im;
            out
        }
    }

    /// `Q̂(∞) ≈ (I - ∫_T^∞ P⁻¹OP) Q̂(T)` with the oscillatory tail integrated by parts once:
    /// `∫_T^∞ e^(±iα)g ≈ ∓ e^(±iα(T)) g(T) / (iα'(T))`, `α = 2(λ(t-s) - φ)`.
    fn tail_corrected(&self, coeff: &CoefficientModel<T>, t: T, y: &[T; 9]) -> Result<[T; 8]> {
        let r = r1(coeff, t, self.lambda)?;
        let two = T::c(2.0);
        let ang = two * (self.lambda * (t - self.s) - y[8]);
        let dang = two * (self.lambda - r.m[1][1].im);
        let rot = cx(ang.cos(), ang.sin());
        let i_over = cx(T::zero(), T::one() / dang);
        let tail12 = i_over * rot * r.m[0][1];
        let tail21 = -(i_over * rot.conj() * r.m[1][0]);
        let z = cx(T::zero(), T::zero());
        let q = Mat2C::from_slice(&y[..8]);
        Ok((q - Mat2C::new(z, tail12, tail21, z) * q).to_array())
    }

    /// `P = sqrt((1-β²(s))/(1-β²(t))) diag(e^(iφ), e^(-iφ))` applied to `Q̂`.
    fn assemble(&self, det_t: T, phi: T, qhat: &[T]) -> Mat2C<T> {
        let rho = (self.det_s / det_t).sqrt();
        let p = Mat2C::diag(cx(phi.cos(), phi.sin()), cx(phi.cos(), -phi.sin())).scale_re(rho);
        p * Mat2C::from_slice(qhat)
    }
}

/// `Q₁(t_k, s)` for nondecreasing `t_k >= s`.
pub fn q1_series<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, times: &[T], tol: T) -> Result<Vec<Mat2C<T>>> {
    check_lambda(lambda)?;
    if !(tol > T::zero()) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let st = Q1Stepper::new(coeff, lambda, s)?;
    let mut solver = Dop853::new(st.rhs(coeff), s, st.initial(), st.options(tol));
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < solver.t() {
            return Err(Error::Argument(format!("times must be nondecreasing and >= s, got {}", t)));
        }
        let det_t = det_n1(coeff, t, lambda)?;
        let y = *solver.advance_to(t)?;
        out.push(st.assemble(det_t, y[8], &y[..8]));
    }
    Ok(out)
}

/// `Q₁(t, s, ξ)`, the solution of `∂ₜQ₁ = -𝓡Q₁`, `Q₁(s,s) = I`.
pub fn q1<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, t: T, tol: T) -> Result<Mat2C<T>> {
    Ok(q1_series(coeff, lambda, s, &[t], tol)?[0])
}

/// Truncated Peano–Baker series `I + Σ_k ∫ₛᵗ G(t₁)∫ₛ^{t₁} G(t₂)⋯` with cumulative fourth-order
/// quadrature on `nodes` uniform nodes.
pub fn peano_baker<T: Real>(generator: impl Fn(T) -> Mat2C<T>, s: T, t: T, terms: usize, nodes: usize) -> Result<Mat2C<T>> {
    if nodes < 4 || t < s {
        return Err(Error::Argument("peano_baker needs nodes >= 4 and t >= s".into()));
    }
    let h = (t - s) / T::c((nodes - 1) as f64);
    let gens: Vec<Mat2C<T>> = (0..nodes).map(|i| generator(s + h * T::c(i as f64))).collect();
    let mut term: Vec<Mat2C<T>> = vec![Mat2C::identity(); nodes];
    let mut total = Mat2C::identity();
    for _ in 0..terms {
        let integrand: Vec<[T; 8]> = gens.iter().zip(&term).map(|(g, x)| (*g * *x).to_array()).collect();
        let mut next = vec![[T::zero(); 8]; nodes];
        for c in 0..8 {
            let col: Vec<T> = integrand.iter().map(|a| a[c]).collect();
            for (i, v) in cumulative_uniform(&col, h).into_iter().enumerate() {
                next[i][c] = v;
            }
        }
        term = next.iter().map(|a| Mat2C::from_slice(a)).collect();
        total = total + term[nodes - 1];
    }
    Ok(total)
}

/// Peano–Baker oracle for `Q₁`: generator `-𝓡`.
pub fn q1_peano_baker<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    s: T,
    t: T,
    terms: usize,
    nodes: usize,
) -> Result<Mat2C<T>> {
    check_lambda(lambda)?;
    det_n1(coeff, s, lambda)?;
    det_n1(coeff, t, lambda)?;
    peano_baker(|tau| -r_conjugated(coeff, lambda, s, tau).unwrap_or(Mat2C::zero()), s, t, terms, nodes)
}

/// Relative threshold on the imaginary residue of assembled real matrices, in units of the
/// integration tolerance.
pub const IM_RESIDUE_FACTOR: f64 = 1e3;

/// Converts an assembled product back to a real matrix, checking the imaginary residue.
pub(crate) fn real_part_checked<T: Real>(m: &Mat2C<T>, tol: T, what: &str) -> Result<Mat2<T>> {
    let (re, im) = m.split_real();
    let bound = T::c(IM_RESIDUE_FACTOR) * tol.max(T::epsilon()) * re.max_abs().max(T::one());
    if !(im <= bound) {
        return Err(Error::Inconsistency(format!(
            "{}: imaginary residue {} exceeds {} (zone constant too small or tolerance too loose)",
            what, im, bound
        )));
    }
    Ok(re)
}

/// `𝓔(t,s,ξ) = (λ(s)/λ(t)) M N₁(t) Ẽ₀(t,s) Q₁(t,s) N₁(s)⁻¹ M⁻¹`.
pub fn hyperbolic_representation<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, t: T, tol: T) -> Result<Mat2<T>> {
    let prod = hyperbolic_representation_complex(coeff, lambda, s, t, tol)?;
    real_part_checked(&prod, tol, "hyperbolic representation")
}

/// The assembled complex product of [`hyperbolic_representation`] before its imaginary residue
/// is checked and discarded.
pub fn hyperbolic_representation_complex<T: Real>(
    coeff: &CoefficientModel<T>,
    lambda: T,
    s: T,
    t: T,
    tol: T,
) -> Result<Mat2C<T>> {
    if t < s || s < T::zero() {
        return Err(Error::Argument(format!("need 0 <= s <= t, got s = {}, t = {}", s, t)));
    }
    let q = q1(coeff, lambda, s, t, tol)?;
    let ratio = (-coeff.integral(s, t, &QuadOptions::default())?).exp();
    let prod = m_matrix() * n1(coeff, t, lambda)? * e0_tilde(lambda, t, s) * q * n1_inverse(coeff, s, lambda)? * m_inverse();
    Ok(prod.scale_re(ratio))
}

/// Tolerances and horizon policy for limits `t → ∞`.
#[derive(Debug, Clone, Copy)]
pub struct LimitOptions<T> {
    /// Integration tolerance.
    pub tol: T,
    /// Cauchy stopping threshold (Frobenius norm).
    pub limit_tol: T,
    pub horizon_cap: T,
}

impl<T: Real> Default for LimitOptions<T> {
    fn default() -> Self {
        Self { tol: T::c(1e-12), limit_tol: T::c(1e-9), horizon_cap: T::c(1e6) }
    }
}

/// Limit `Q₁(∞, s, ξ)` with its error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q1Limit<T> {
    pub value: Mat2C<T>,
    /// `max(cauchy_difference, tail_quadrature_error)`.
    pub conv_error: T,
    pub cauchy_difference: T,
    pub tail_quadrature_error: T,
    /// A-priori bound `∫_T^∞‖R₁‖ · exp(∫ₛ^T‖R₁‖)` at the final horizon.
    pub a_priori_bound: T,
    pub horizon: T,
}

/// First horizon of the doubling sequence for `Q₁` limits: eight oscillation periods past `s`.
fn first_horizon<T: Real>(lambda: T, s: T) -> T {
    s + T::c(8.0) * T::PI() / lambda.min(T::one()) + T::c(16.0)
}

/// `Q₁(∞, s, ξ)` by doubling horizons with Cauchy stopping. The non-oscillating diagonal factor
/// is extended to infinity analytically (modulus) and by tail quadrature (phase); the oscillatory
/// factor receives a first-order integration-by-parts tail correction at each horizon.
pub fn q1_limit<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, opts: &LimitOptions<T>) -> Result<Q1Limit<T>> {
    check_lambda(lambda)?;
    let st = Q1Stepper::new(coeff, lambda, s)?;
    let mut solver = Dop853::new(st.rhs(coeff), s, st.initial(), st.options(opts.tol));
    let quad = QuadOptions::default().with_rel_tol(T::c(1e-12).max(T::epsilon() * T::c(16.0)));
    let phase_density = |tau: T| {
        let beta = coeff.b(tau) / (T::c(2.0) * lambda);
        coeff.b(tau) * beta / (T::one() - beta * beta)
    };
    let mut horizon = first_horizon(lambda, s);
    let mut prev: Option<Mat2C<T>> = None;
    let mut last_diff = T::infinity();
    let mut k = 0;
    loop {
        let y = *solver.advance_to(horizon)?;
        let tail = quadrature::dyadic_to_infinity(phase_density, horizon, &quad)?;
        // β → 0 at infinity, so det N₁(∞) = 1.
        let phi_inf = y[8] + tail.value;
        let value = st.assemble(T::one(), phi_inf, &st.tail_corrected(coeff, horizon, &y)?);
        if let Some(p) = prev {
            last_diff = (value - p).frobenius();
            if k >= 2 && last_diff < opts.limit_tol {
                let a_priori = r1_tail_bound(coeff, lambda, s, horizon)?;
                let qerr = tail.error * value.frobenius();
                return Ok(Q1Limit {
                    value,
                    conv_error: last_diff.max(qerr),
                    cauchy_difference: last_diff,
                    tail_quadrature_error: qerr,
                    a_priori_bound: a_priori,
                    horizon,
                });
            }
        }
        prev = Some(value);
        k += 1;
        let next = s + (horizon - s) * T::c(2.0);
        if next > opts.horizon_cap {
            return Err(Error::Horizon { cap: opts.horizon_cap.to_f64_lossy(), difference: last_diff.to_f64_lossy() });
        }
        horizon = next;
    }
}

/// `∫_T^∞‖R₁‖ · exp(∫ₛ^T‖R₁‖)`, the a-priori bound on `‖Q₁(∞) - Q₁(T)‖`.
pub fn r1_tail_bound<T: Real>(coeff: &CoefficientModel<T>, lambda: T, s: T, horizon: T) -> Result<T> {
    let quad = QuadOptions::default().with_rel_tol(T::c(1e-8));
    let norm = |tau: T| r1(coeff, tau, lambda).map(|r| r.spectral_norm()).unwrap_or(T::infinity());
    let head = quadrature::dyadic(norm, s, horizon, &quad)?.value;
    let tail = quadrature::dyadic_to_infinity(norm, horizon, &quad)?.value;
    Ok(tail * head.exp())
}

/// Smallest `N = 2^k` (`k >= 0`) for which `det N₁ >= det_min` on the sampled hyperbolic zone of
/// every given frequency.
pub fn select_zone_n<T: Real>(coeff: &CoefficientModel<T>, lambdas: &[T], det_min: T) -> Result<T> {
    let mut zone_n = T::one();
    let mut worst = (T::zero(), T::zero(), T::zero());
    for _ in 0..40 {
        let mut ok = true;
        'scan: for &lambda in lambdas.iter().filter(|&&l| l > T::zero()) {
            let start = t_xi(lambda, zone_n)?;
            let end = (start + T::one()) * T::c(1e6);
            for t in shifted_log_grid(start, end, 48) {
                let beta = beta(coeff, t, lambda);
                let det = T::one() - beta * beta;
                if det < det_min {
                    ok = false;
                    worst = (lambda, t, det);
                    break 'scan;
                }
            }
        }
        if ok {
            return Ok(zone_n);
        }
        zone_n = zone_n * T::c(2.0);
    }
    Err(Error::ZoneConstant { lambda: worst.0.to_f64_lossy(), t: worst.1.to_f64_lossy(), det: worst.2.to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{free_propagator, integrate_fundamental};

    fn close(a: &Mat2C<f64>, b: &Mat2C<f64>, tol: f64) -> bool {
        (*a - *b).frobenius() <= tol
    }

    #[test]
    fn m_inverse_is_inverse() {
        assert!(close(&(m_matrix::<f64>() * m_inverse()), &Mat2C::identity(), 1e-15));
    }

    #[test]
    fn m_diagonalizes_the_system() {
        let (lambda, b) = (1.7, 0.4);
        let a = Mat2::new(0.0, lambda, -lambda, -2.0 * b).to_complex();
        let o = cx(b, 0.0);
        let expect = d_matrix(lambda) - Mat2C::new(o, o, o, o);
        assert!(close(&(m_inverse() * a * m_matrix()), &expect, 1e-15));
    }

    #[test]
    fn free_propagator_from_diagonal_form() {
        let (lambda, t, s) = (2.3, 5.0, 1.5);
        let e = m_matrix() * e0_tilde(lambda, t, s) * m_inverse();
        let (re, im) = e.split_real();
        assert!(im < 1e-15);
        assert!((re - free_propagator(lambda, t - s)).max_abs() < 1e-14);
    }

    #[test]
    fn n1_example() {
        let c = CoefficientModel::<f64>::custom("b=0.2", |_| 0.2, |_| 0.0, None);
        let n = n1(&c, 0.0, 1.0).unwrap();
        assert!(close(&n, &Mat2C::new(cx(1.0, 0.0), cx(0.0, 0.1), cx(0.0, -0.1), cx(1.0, 0.0)), 1e-16));
        assert!((det_n1(&c, 0.0, 1.0).unwrap() - 0.99).abs() < 1e-15);
        assert!((n.det().re - 0.99).abs() < 1e-15);
    }

    #[test]
    fn det_n1_rejects_small_zone_constant() {
        let c = CoefficientModel::<f64>::custom("b=3", |_| 3.0, |_| 0.0, None);
        assert!(matches!(det_n1(&c, 0.0, 1.0), Err(Error::ZoneConstant { .. })));
    }

    #[test]
    fn remainder_closed_form() {
        // R₁ = -(ββ'I + iβ'K + ibβσ_z - bβ²σ_x)/(1 - β²), K = [[0,-1],[1,0]].
        let c = CoefficientModel::<f64>::mu_over_1pt(0.3);
        let (t, lambda) = (2.0, 0.7);
        let b = c.b(t);
        let beta = b / (2.0 * lambda);
        let dbeta = c.b_prime(t) / (2.0 * lambda);
        let expect = Mat2C::new(
            cx(beta * dbeta, b * beta),
            cx(-b * beta * beta, -dbeta),
            cx(-b * beta * beta, dbeta),
            cx(beta * dbeta, -b * beta),
        )
        .scale_re(-1.0 / (1.0 - beta * beta));
        assert!(close(&r1(&c, t, lambda).unwrap(), &expect, 1e-15));
    }

    #[test]
    fn zero_damping_gives_identity() {
        let c = CoefficientModel::<f64>::zero();
        assert!(close(&q1(&c, 2.0, 0.0, 30.0, 1e-12).unwrap(), &Mat2C::identity(), 1e-15));
        let l = q1_limit(&c, 2.0, 0.0, &LimitOptions::default()).unwrap();
        assert!(close(&l.value, &Mat2C::identity(), 1e-15));
        assert_eq!(l.conv_error, 0.0);
    }

    #[test]
    fn representation_matches_integration() {
        let c = CoefficientModel::<f64>::mu_over_1pt(0.3);
        let direct = integrate_fundamental(&c, 1.0, 0.0, 50.0, 1e-13).unwrap();
        let rep = hyperbolic_representation(&c, 1.0, 0.0, 50.0, 1e-12).unwrap();
        assert!((direct - rep).frobenius() / direct.frobenius() < 1e-8);
    }

    #[test]
    fn q1_matches_peano_baker() {
        let c = CoefficientModel::<f64>::mu_over_1pt(0.3);
        let (lambda, s) = (5.0, 0.0);
        let ode = q1(&c, lambda, s, s + 1.0, 1e-13).unwrap();
        let pb = q1_peano_baker(&c, lambda, s, s + 1.0, 4, 4001).unwrap();
        assert!(close(&ode, &pb, 1e-8), "{}", (ode - pb).frobenius());
    }

    #[test]
    fn q1_limit_with_damping_converges() {
        let c = CoefficientModel::<f64>::mu_over_1pt(0.3);
        let opts = LimitOptions::default();
        let l = q1_limit(&c, 1.0, 0.0, &opts).unwrap();
        assert!(l.value.det().norm() > 0.5);
        let far = q1(&c, 1.0, 0.0, 4000.0, 1e-12).unwrap();
        assert!((far - l.value).frobenius() < 1e-3);
    }

    #[test]
    fn zone_constant_escalates() {
        let c = CoefficientModel::<f64>::mu_over_1pt(1.0);
        let lambdas: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
        assert_eq!(select_zone_n(&c, &lambdas, 0.9).unwrap(), 2.0);
        assert_eq!(select_zone_n(&CoefficientModel::<f64>::mu_over_1pt(0.3), &lambdas, 0.9).unwrap(), 1.0);
    }
}
