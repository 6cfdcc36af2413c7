//! Bessel functions of the first kind `J_ν(x)` for real `ν ≥ 0` (and
//! `ν = −1/2`), `x ≥ 0`.
//!
//! Half-integer orders use closed trigonometric forms, integer orders the
//! Bessel integral, other orders the Schläfli integral; small and large
//! arguments go to the power series and the Hankel expansion respectively.

use std::f64::consts::PI;

use super::gamma::{log_gamma, rgamma};
use crate::error::{Error, Result};
use crate::quad::gl32;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    /// ν = n + 1/2, n ≥ −1
    Half(i64),
    Integer(i64),
    General,
}

/// `J_ν` for a fixed order.
#[derive(Clone, Copy, Debug)]
pub struct BesselJ {
    nu: f64,
    kind: Kind,
}

impl BesselJ {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::InvalidParams(format!("Bessel order must be finite, got {nu}")));
        }
        let twice = 2.0 * nu;
        let kind = if twice == twice.round() && twice.round() as i64 % 2 != 0 && nu >= -0.5 {
            Kind::Half((nu - 0.5).round() as i64)
        } else if nu >= 0.0 && nu == nu.round() {
            Kind::Integer(nu as i64)
        } else if nu >= 0.0 {
            Kind::General
        } else {
            return Err(Error::InvalidParams(format!(
                "Bessel order must be ≥ 0 or −1/2, got {nu}"
            )));
        };
        Ok(Self { nu, kind })
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// Whether the Hankel expansion terminates (half-integer order).
    pub fn is_half_integer(&self) -> bool {
        matches!(self.kind, Kind::Half(_))
    }

    /// Argument above which the Hankel expansion is accurate to rounding.
    pub fn asymptotic_threshold(&self) -> f64 {
        match self.kind {
            Kind::Half(_) => 0.0,
            _ => 25.0 + 0.5 * self.nu * self.nu,
        }
    }

    /// `J_ν(x)` for `x ≥ 0`.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        if x == 0.0 {
            return match self.kind {
                Kind::Half(-1) => f64::INFINITY,
                _ if self.nu == 0.0 => 1.0,
                _ => 0.0,
            };
        }
        match self.kind {
            Kind::Half(n) => half_integer(n, x),
            Kind::Integer(n) => {
                if x < 8.0 + 0.5 * self.nu {
                    bessel_j_series(self.nu, x)
                } else if x >= self.asymptotic_threshold() {
                    hankel(self.nu, x)
                } else {
                    integer_integral(n, x)
                }
            }
            Kind::General => {
                if x < 8.0 + 0.5 * self.nu {
                    bessel_j_series(self.nu, x)
                } else if x >= self.asymptotic_threshold() {
                    hankel(self.nu, x)
                } else {
                    schlafli(self.nu, x)
                }
            }
        }
    }
}

/// `J_ν(x)`; see [`BesselJ`] for the admissible orders.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite and ≥ 0, got {x}")));
    }
    Ok(BesselJ::new(nu)?.eval(x))
}

/// Power series `Σ (−1)^k (x/2)^{2k+ν}/(k! Γ(k+ν+1))`.
pub fn bessel_j_series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let lead = if nu + 1.0 > 170.0 {
        (nu * half.ln() - log_gamma(nu + 1.0)).exp()
    } else {
        half.powf(nu) * rgamma(nu + 1.0)
    };
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Hankel's expansion `J_ν(x) = √(2/(πx)) (P cos χ − Q sin χ)`,
/// `χ = x − (ν/2 + 1/4)π`. Returns `(P, Q)`; for half-integer orders the
/// series terminates and the result is exact.
pub fn bessel_asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    let inv8x = 1.0 / (8.0 * x);
    let twice = 2.0 * nu;
    let terminates = twice.fract() == 0.0 && (twice as i64) % 2 != 0;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) * inv8x / kf;
        if a == 0.0 {
            break;
        }
        let mag = a.abs();
        if mag > last && !terminates {
            break;
        }
        last = mag;
        // a_k/x^k enters P for even k, Q for odd k, with sign (−1)^{⌊k/2⌋}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if mag < 1e-17 && !terminates {
            break;
        }
    }
    (p, q)
}

fn hankel(nu: f64, x: f64) -> f64 {
    let (p, q) = bessel_asymptotic_pq(nu, x);
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn half_integer(n: i64, x: f64) -> f64 {
    let nu = n as f64 + 0.5;
    let pref = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    match n {
        -1 => pref * c,
        0 => pref * s,
        _ => {
            if x < nu + 2.0 {
                return bessel_j_series(nu, x);
            }
            // x·j-type recurrence on g_k = J_{k+1/2}/pref
            let mut g0 = s;
            let mut g1 = s / x - c;
            for k in 1..n {
                let g2 = (2 * k + 1) as f64 / x * g1 - g0;
                g0 = g1;
                g1 = g2;
            }
            pref * g1
        }
    }
}

fn integer_integral(n: i64, x: f64) -> f64 {
    // Periodic trapezoid rule on (1/π)∫₀^π cos(nθ − x sinθ) dθ.
    let m = (x + n as f64 + 40.0).ceil() as usize;
    let h = PI / m as f64;
    let nf = n as f64;
    let mut s = 0.5 * (1.0 + (nf * PI).cos());
    for k in 1..m {
        let th = k as f64 * h;
        s += (nf * th - x * th.sin()).cos();
    }
    s / m as f64
}

fn schlafli(nu: f64, x: f64) -> f64 {
    let rule = gl32();
    let panels = (x / 2.0).ceil().max(4.0) as usize;
    let breaks: Vec<f64> = (0..=panels).map(|i| PI * i as f64 / panels as f64).collect();
    let first = rule.integrate_composite(&breaks, |th: f64| (nu * th - x * th.sin()).cos()) / PI;
    // e^{−x sinh t − νt} decays at least like e^{−x t}
    let t_max = (40.0 / x).asinh().max(40.0 / (x + nu));
    let tb: Vec<f64> = (0..=8).map(|i| t_max * i as f64 / 8.0).collect();
    let second = rule.integrate_composite(&tb, |t: f64| (-x * t.sinh() - nu * t).exp());
    first - (nu * PI).sin() / PI * second
}
