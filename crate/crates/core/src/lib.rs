//! Mild solutions of the fully nonlocal heat equation
//! `∂ₜᵅu + (−Δ)ᵝu = f`, `u(·,0) = 0`, in dimensions `N > 4β`, together with
//! the tooling needed to check their large-time decay and growth rates.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: problem parameters, critical exponents, regime classification.
//! * [`specfun`]: Mittag-Leffler, Bessel and gamma functions.
//! * [`quad`] and [`hankel`]: quadrature, sequence acceleration and the
//!   oscillatory radial Fourier inversion shared by the kernel and the solver.
//! * [`kernel`]: the self-similar profile of the Duhamel kernel `Y`.
//! * [`mildsol`]: radial mild solutions, a brute-force space-time oracle and a
//!   Caputo residual self-check.
//! * [`norms`]: region-restricted `Lᵖ` norms of radial slices.
//! * [`rates`]: the predicted rate tables, power-law fits and band checks.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod hankel;
pub mod kernel;
pub mod mildsol;
pub mod norms;
pub mod params;
pub mod quad;
pub mod rates;
pub mod specfun;

pub use error::{Error, Result};
pub use kernel::{Band, BandReport, KernelProfile, ProfileGrid, TailKind, TailSpec};
pub use mildsol::{Forcing, RadialSolutionSlice, SolverOptions, SpatialProfile};
pub use norms::{NormSeries, RegionSpec};
pub use params::{CriticalExponents, Exponent, PRegime, ProblemParams, Real};
pub use rates::{FitResult, RateMonomial, RatePrediction};
pub use specfun::MlfAccuracy;
