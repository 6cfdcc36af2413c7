//! Special functions: Mittag-Leffler on the negative real axis, Bessel
//! functions of the first kind of real order, and the gamma family.

mod bessel;
mod gamma;
mod mittag_leffler;

pub use bessel::{bessel_asymptotic_pq, bessel_j, bessel_j_series, BesselJ};
pub use gamma::{gamma, log_gamma, rgamma, sin_pi, unit_ball_volume, unit_sphere_area};
pub use mittag_leffler::{mittag_leffler, MittagLeffler, MlfAccuracy, MlfMethod};
