//! Explicit embedded Runge–Kutta integrator of order 8 with 5th and 3rd order error estimators
//! (Dormand–Prince 8(5,3) coefficients), for small fixed-size real systems.
//!
//! States are plain `[T; N]` arrays; matrix ODEs are flattened by the callers. Integration may
//! run backward in time when the target lies before the current time.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
mod tableau {
    pub(super) const A: [[f64; 11]; 11] = [
        [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0],
        [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0],
        [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0],
        [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0],
        [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636],
    ];
    pub(super) const B: [f64; 12] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];
    pub(super) const BHH: [f64; 3] = [0.2440944881889764, 0.7338466882816118, 0.022058823529411766];
    pub(super) const C: [f64; 12] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
    pub(super) const E: [f64; 12] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294];
}

/// Step-size and tolerance controls.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Upper bound on |h|; used to keep a fixed number of steps per oscillation period.
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> OdeOptions<T> {
    pub fn new(tol: T) -> Self {
        Self { rtol: tol, atol: tol, h_max: T::infinity(), max_steps: 50_000_000 }
    }

    pub fn with_h_max(mut self, h_max: T) -> Self {
        self.h_max = h_max;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrator state that can be advanced repeatedly through increasing (or decreasing) output
/// times without restarting the step-size controller.
pub struct Dop853<T, F, const N: usize> {
    f: F,
    t: T,
    y: [T; N],
    h_next: Option<T>,
    opts: OdeOptions<T>,
    stats: OdeStats,
}

impl<T, F, const N: usize> Dop853<T, F, N>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    pub fn new(f: F, t0: T, y0: [T; N], opts: OdeOptions<T>) -> Self {
        Self { f, t: t0, y: y0, h_next: None, opts, stats: OdeStats::default() }
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> &[T; N] {
        &self.y
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    fn eval(&mut self, t: T, y: &[T; N]) -> [T; N] {
        self.stats.evaluations += 1;
        (self.f)(t, y)
    }

    fn initial_step(&mut self, f0: &[T; N], span: T) -> T {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = self.opts.atol + self.opts.rtol * self.y[i].abs();
            d0 += (self.y[i] / sc).powi(2);
            d1 += (f0[i] / sc).powi(2);
        }
        let n = T::c(N as f64);
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h = if d0 < T::c(1e-5) || d1 < T::c(1e-5) { T::c(1e-6) } else { T::c(0.01) * d0 / d1 };
        h.min(self.opts.h_max).min(span)
    }

    /// Advances the solution to `t_end` exactly.
    pub fn advance_to(&mut self, t_end: T) -> Result<&[T; N]> {
        use tableau::*;
        let span = t_end - self.t;
        if span == T::zero() {
            return Ok(&self.y);
        }
        if !span.is_finite() {
            return Err(Error::Argument(format!("non-finite integration target {}", t_end.to_f64_lossy())));
        }
        let dir = span.signum();
        let mut k = [[T::zero(); N]; 12];
        k[0] = self.eval(self.t, &self.y.clone());
        let mut h = match self.h_next {
            Some(h) => h,
            None => self.initial_step(&k[0], span.abs()),
        }
        .min(self.opts.h_max);

        let safe = T::c(0.9);
        let uround = T::unit_roundoff();
        loop {
            let remaining = (t_end - self.t) * dir;
            if remaining <= T::zero() {
                break;
            }
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::StepBudget { t: self.t.to_f64_lossy(), steps: self.opts.max_steps });
            }
            if T::c(0.1) * h <= uround * self.t.abs() || h <= T::min_positive_value() {
                return Err(Error::Stiffness { t: self.t.to_f64_lossy() });
            }
            let natural_h = h;
            let last = T::c(1.01) * h >= remaining;
            // Step to a representable time so that the steps sum exactly to the elapsed time;
            // otherwise rounding of `t` accumulates into a phase error of order `λ·steps·ulp(t)`.
            let hs = if last { t_end - self.t } else { (self.t + h * dir) - self.t };
            h = hs * dir;

            for s in 1..12 {
                let mut ys = self.y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = T::c(A[s - 1][j]);
                    if a != T::zero() {
                        for i in 0..N {
                            ys[i] += hs * a * kj[i];
                        }
                    }
                }
                k[s] = self.eval(self.t + T::c(C[s]) * hs, &ys);
            }

            let mut y_new = self.y;
            let mut err_sq = T::zero();
            let mut err2_sq = T::zero();
            for i in 0..N {
                let mut incr = T::zero();
                let mut e5 = T::zero();
                for s in 0..12 {
                    incr += T::c(B[s]) * k[s][i];
                    e5 += T::c(E[s]) * k[s][i];
                }
                y_new[i] += hs * incr;
                let e3 = incr - T::c(BHH[0]) * k[0][i] - T::c(BHH[1]) * k[8][i] - T::c(BHH[2]) * k[11][i];
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y_new[i].abs());
                err_sq += (e5 / sc).powi(2);
                err2_sq += (e3 / sc).powi(2);
            }
            let mut deno = err_sq + T::c(0.01) * err2_sq;
            if deno <= T::zero() {
                deno = T::one();
            }
            let err = h * err_sq * (T::one() / (deno * T::c(N as f64))).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                h = h * T::c(0.1);
                continue;
            }

            let fac11 = err.powf(T::c(0.125));
            if err <= T::one() {
                self.stats.accepted += 1;
                self.t = if last { t_end } else { self.t + hs };
                self.y = y_new;
                k[0] = self.eval(self.t, &self.y.clone());
                let fac = (fac11 / safe).max(T::c(1.0 / 6.0)).min(T::c(3.0));
                let grown = (h / fac).min(self.opts.h_max);
                // A truncated final step says nothing about the natural step size.
                let proposed = if last { natural_h.max(grown) } else { grown };
                self.h_next = Some(proposed.min(self.opts.h_max));
                h = proposed.min(self.opts.h_max);
                if last {
                    break;
                }
            } else {
                self.stats.rejected += 1;
                h = h / (fac11 / safe).min(T::c(3.0));
            }
        }
        Ok(&self.y)
    }
}

/// One-shot integration from `t0` to `t1`.
pub fn integrate<T, F, const N: usize>(f: F, t0: T, y0: [T; N], t1: T, opts: OdeOptions<T>) -> Result<[T; N]>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let mut solver = Dop853::new(f, t0, y0, opts);
    solver.advance_to(t1)?;
    Ok(*solver.y())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_period() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = integrate(f, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, OdeOptions::new(1e-12)).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn non_autonomous_polynomial_is_exact() {
        // y' = 8 t^7 has solution t^8, integrated exactly by an order-8 method per step.
        let f = |t: f64, _y: &[f64; 1]| [8.0 * t.powi(7)];
        let opts = OdeOptions::new(1e-6).with_h_max(0.25);
        let y = integrate(f, 0.0, [0.0], 2.0, opts).unwrap();
        assert!((y[0] - 256.0).abs() < 1e-10, "{}", y[0]);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let f = |t: f64, y: &[f64; 2]| [y[1], -y[0] - 0.3 / (1.0 + t) * y[1]];
        let opts = OdeOptions::new(1e-12);
        let y1 = integrate(f, 0.0, [0.4, -1.2], 7.0, opts).unwrap();
        let y0 = integrate(f, 7.0, y1, 0.0, opts).unwrap();
        assert!((y0[0] - 0.4).abs() < 1e-9 && (y0[1] + 1.2).abs() < 1e-9);
    }

    #[test]
    fn stepping_through_outputs_matches_one_shot() {
        let f = |t: f64, y: &[f64; 1]| [-y[0] * (1.0 + t.sin())];
        let opts = OdeOptions::new(1e-12);
        let mut s = Dop853::new(f, 0.0, [1.0], opts);
        for i in 1..=10 {
            s.advance_to(i as f64 * 0.5).unwrap();
        }
        let exact = (-(5.0 + 1.0 - 5f64.cos())).exp();
        assert!((s.y()[0] - exact).abs() < 1e-11);
    }

    #[test]
    fn step_cap_is_respected() {
        let f = |_t: f64, _y: &[f64; 1]| [0.0];
        let mut s = Dop853::new(f, 0.0, [1.0], OdeOptions::new(1e-8).with_h_max(0.1));
        s.advance_to(10.0).unwrap();
        assert!(s.stats().accepted >= 100);
    }
}
