//! Dense 2×2 real and complex matrices.
//!
//! Everything per-frequency in this crate is a 2×2 system, so the matrices are stored inline
//! and all decompositions are closed form.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Real;

/// Real 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self { m: [[a11, a12], [a21, a22]] }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(a: T, b: T) -> Self {
        Self::new(a, T::zero(), T::zero(), b)
    }

    /// Rotation `[[cos θ, sin θ], [-sin θ, cos θ]]`.
    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s, -s, c)
    }

    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(Self::new(self.m[1][1] / d, -self.m[0][1] / d, -self.m[1][0] / d, self.m[0][0] / d))
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.m[0][0]), f(self.m[0][1]), f(self.m[1][0]), f(self.m[1][1]))
    }

    /// Entrywise absolute value `|A|`.
    pub fn abs(&self) -> Self {
        self.map(|x| x.abs())
    }

    pub fn entries(&self) -> [T; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn from_entries(e: [T; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn frobenius(&self) -> T {
        self.entries().iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.entries().iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Largest and smallest singular values.
    pub fn singular_values(&self) -> (T, T) {
        // Eigenvalues of AᵀA in closed form.
        let [a, b, c, d] = self.entries();
        let p = a * a + c * c;
        let q = b * b + d * d;
        let r = a * b + c * d;
        let half = T::c(0.5);
        let mean = half * (p + q);
        let rad = ((half * (p - q)).powi(2) + r * r).sqrt();
        let hi = (mean + rad).max(T::zero()).sqrt();
        // Product of singular values is |det|; avoids cancellation in mean - rad.
        let lo = if hi > T::zero() { self.det().abs() / hi } else { T::zero() };
        (hi, lo)
    }

    pub fn spectral_norm(&self) -> T {
        self.singular_values().0
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Applies the matrix to a complex vector.
    pub fn apply_c(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        [
            v[0].scale(self.m[0][0]) + v[1].scale(self.m[0][1]),
            v[0].scale(self.m[1][0]) + v[1].scale(self.m[1][1]),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.is_finite())
    }

    pub fn to_complex(&self) -> Mat2C<T> {
        Mat2C { m: [[self.m[0][0].into(), self.m[0][1].into()], [self.m[1][0].into(), self.m[1][1].into()]] }
    }
}

impl<T: Real> Index<(usize, usize)> for Mat2<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Mat2<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.m[i][j]
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let [a, b, c, d] = self.entries();
        let [e, f, g, h] = o.entries();
        Self::new(a + e, b + f, c + g, d + h)
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

/// Complex 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2C<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> Mat2C<T> {
    pub fn new(a11: Complex<T>, a12: Complex<T>, a21: Complex<T>, a22: Complex<T>) -> Self {
        Self { m: [[a11, a12], [a21, a22]] }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let o = Complex::new(T::one(), T::zero());
        Self::new(o, z, z, o)
    }

    pub fn diag(a: Complex<T>, b: Complex<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(a, z, z, b)
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn from_entries(e: [Complex<T>; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let [a, b, c, d] = self.entries();
        Self::new(f(a), f(b), f(c), f(d))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == T::zero() || !(d.re.is_finite() && d.im.is_finite()) {
            return None;
        }
        Some(Self::new(self.m[1][1] / d, -self.m[0][1] / d, -self.m[1][0] / d, self.m[0][0] / d))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m[0][0].conj(), self.m[1][0].conj(), self.m[0][1].conj(), self.m[1][1].conj())
    }

    pub fn frobenius(&self) -> T {
        self.entries().iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn spectral_norm(&self) -> T {
        // Largest eigenvalue of the Hermitian matrix AᴴA.
        let h = self.adjoint() * *self;
        let a = h.m[0][0].re;
        let d = h.m[1][1].re;
        let c = h.m[0][1].norm_sqr();
        let half = T::c(0.5);
        let top = half * (a + d) + ((half * (a - d)).powi(2) + c).sqrt();
        top.max(T::zero()).sqrt()
    }

    /// Real part and the largest absolute imaginary entry.
    pub fn split_real(&self) -> (Mat2<T>, T) {
        let [a, b, c, d] = self.entries();
        let im = a.im.abs().max(b.im.abs()).max(c.im.abs()).max(d.im.abs());
        (Mat2::new(a.re, b.re, c.re, d.re), im)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub(crate) fn to_array(self) -> [T; 8] {
        let e = self.entries();
        [e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, e[3].re, e[3].im]
    }

    pub(crate) fn from_slice(a: &[T]) -> Self {
        Self::new(
            Complex::new(a[0], a[1]),
            Complex::new(a[2], a[3]),
            Complex::new(a[4], a[5]),
            Complex::new(a[6], a[7]),
        )
    }
}

impl<T: Real> Mul for Mat2C<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl<T: Real> Add for Mat2C<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let [a, b, c, d] = self.entries();
        let [e, f, g, h] = o.entries();
        Self::new(a + e, b + f, c + g, d + h)
    }
}

impl<T: Real> Sub for Mat2C<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let [a, b, c, d] = self.entries();
        let [e, f, g, h] = o.entries();
        Self::new(a - e, b - f, c - g, d - h)
    }
}

impl<T: Real> Neg for Mat2C<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}
