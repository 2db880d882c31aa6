//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson slopes).

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct MonotoneCubic<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Argument(format!("spline needs >= 2 aligned samples, got {} and {}", n, y.len())));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("spline abscissae must be strictly increasing".into()));
        }
        let secant: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![T::zero(); n];
        d[0] = secant[0];
        d[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            let (s0, s1) = (secant[i - 1], secant[i]);
            if s0 * s1 <= T::zero() {
                d[i] = T::zero();
            } else {
                // Weighted harmonic mean keeps each cubic monotone on its interval.
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = T::c(2.0) * h1 + h0;
                let w2 = h1 + T::c(2.0) * h0;
                d[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
            }
        }
        Ok(Self { x, y, d })
    }

    pub fn x_min(&self) -> T {
        self.x[0]
    }

    pub fn x_max(&self) -> T {
        self.x[self.x.len() - 1]
    }

    fn locate(&self, t: T) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|p| p.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value and derivative; clamps `t` to the tabulated range.
    pub fn eval(&self, t: T) -> (T, T) {
        let t = t.max(self.x_min()).min(self.x_max());
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let two = T::c(2.0);
        let three = T::c(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = T::c(6.0) * (s2 - s);
        let dh10 = three * s2 - T::c(4.0) * s + T::one();
        let dh01 = -dh00;
        let dh11 = three * s2 - two * s;
        let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (value, deriv)
    }
}
