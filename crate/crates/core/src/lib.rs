//! Per-frequency analysis of abstract wave equations with weak time-dependent dissipation,
//! `u'' + 2b(t)u' + Au = 0`.
//!
//! After spectral reduction every frequency `ξ` carries the 2×2 system
//! `V' = [[0, Λ], [-Λ, -2b(t)]] V` for `V = (Λu, u')`. The crate integrates its fundamental
//! solution, implements the zone-wise and diagonalization representations, and builds the
//! (modified) wave operators that relate damped solutions to free waves.
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); `f64` aliases are exported at the
//! crate root.

pub mod coefficients;
pub mod diagonal;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod ode;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod scattering;
pub mod spectral;
pub mod spline;
pub mod zones;

pub use coefficients::{CoefficientKind, CoefficientModel, Regime, RegimeTag, TabulatedCoefficient};
pub use error::{Error, Result};
pub use linalg::{Mat2, Mat2C};
pub use scalar::Real;

pub type Mat2f64 = Mat2<f64>;
pub type Mat2Cf64 = Mat2C<f64>;
pub type Coefficientf64 = CoefficientModel<f64>;
