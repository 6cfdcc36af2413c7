//! Oscillatory radial integrals `∫₀^∞ a(ρ) J_μ(s₁ρ) [J_ν(s₂ρ)] dρ`.
//!
//! `[0, P]` is integrated by adaptive Gauss-Kronrod on breakpoints graded
//! geometrically toward `ρ = 0` and spaced by half periods further out. On
//! `[P, ∞)` each Bessel factor is replaced by its Hankel form
//! `J = Re[√(2/(πx)) (P + iQ) e^{iχ}]`, the product is split into the pure
//! frequencies `s₁ ± s₂`, and each frequency is integrated lobe by lobe (one
//! lobe per half period) with the lobe sums accelerated by the Levin
//! u-transform. `P` is chosen so that the Hankel forms are accurate there.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{gk_adaptive, levin_u, Tolerance};
use crate::specfun::{bessel_asymptotic_pq, BesselJ};

/// `J_ν(scale·ρ)`.
#[derive(Clone, Copy, Debug)]
pub struct BesselFactor {
    pub j: BesselJ,
    pub scale: f64,
}

impl BesselFactor {
    pub fn new(order: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("Bessel factor scale must be positive, got {scale}")));
        }
        Ok(Self { j: BesselJ::new(order)?, scale })
    }

    fn eval(&self, rho: f64) -> f64 {
        self.j.eval(self.scale * rho)
    }

    /// Argument from which the Hankel form is used.
    fn switch_argument(&self) -> f64 {
        let nu = self.j.order();
        if self.j.is_half_integer() {
            2.0 * nu + 8.0
        } else {
            30.0 + nu * nu
        }
    }

    /// Smooth envelope `E` with `J_ν(scale·ρ) = Re[E e^{i(scale·ρ + φ)}]`.
    fn envelope(&self, rho: f64) -> Complex64 {
        let x = self.scale * rho;
        let (p, q) = bessel_asymptotic_pq(self.j.order(), x);
        Complex64::new(p, q) * (2.0 / (PI * x)).sqrt()
    }

    /// Constant phase `φ = −(ν/2 + 1/4)π`.
    fn phase(&self) -> f64 {
        -(0.5 * self.j.order() + 0.25) * PI
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HankelOptions {
    pub rel_tol: f64,
    pub min_lobes: usize,
    pub max_lobes: usize,
    /// Upper bound on initial panels over `[0, P]`.
    pub max_panels: usize,
}

impl Default for HankelOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, min_lobes: 10, max_lobes: 64, max_panels: 400_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HankelValue {
    pub value: f64,
    pub abs_err: f64,
    /// Sum of the magnitudes of all pieces; the rounding floor is
    /// roughly `1e-16` of this.
    pub abs_mass: f64,
    pub converged: bool,
}

impl HankelValue {
    pub fn rel_err(&self) -> f64 {
        let floor = 4.0 * f64::EPSILON * self.abs_mass;
        (self.abs_err + floor) / self.value.abs()
    }
}

/// `∫₀^∞ amp(ρ) J(first) [J(second)] dρ`.
///
/// `amp` must be smooth on `(0, ∞)`, non-oscillatory beyond a few
/// `amp_scale`, and decay so that the integral converges.
pub fn hankel_integral<F>(
    amp: F,
    first: BesselFactor,
    second: Option<BesselFactor>,
    amp_scale: f64,
    opts: &HankelOptions,
) -> Result<HankelValue>
where
    F: Fn(f64) -> f64,
{
    if !(amp_scale > 0.0 && amp_scale.is_finite()) {
        return Err(Error::Domain(format!("amplitude scale must be positive, got {amp_scale}")));
    }
    let mut split = first.switch_argument() / first.scale;
    let mut omega_max = first.scale;
    if let Some(s) = &second {
        split = split.max(s.switch_argument() / s.scale);
        omega_max += s.scale;
    }
    split = split.max(4.0 * amp_scale);

    let breaks = finite_breaks(split, amp_scale, PI / omega_max, opts.max_panels)?;
    let tol = Tolerance { abs: 0.0, rel: opts.rel_tol, mass: 1e-3 * opts.rel_tol };
    let finite = gk_adaptive(&breaks, tol, 4 * breaks.len() + 500, |rho: f64| {
        let mut v = amp(rho) * first.eval(rho);
        if let Some(s) = &second {
            v *= s.eval(rho);
        }
        v
    });

    let mut value = finite.value;
    let mut abs_err = finite.abs_err;
    let mut abs_mass = finite.abs_mass;
    let mut converged = finite.converged;

    let mut add = |part: TailPart| {
        value += part.value;
        abs_err += part.abs_err;
        abs_mass += part.abs_mass;
        converged &= part.converged;
    };
    let scale = finite.value.abs().max(1e-3 * finite.abs_mass);
    match &second {
        None => {
            let part = oscillatory_tail(
                |rho: f64| first.envelope(rho) * amp(rho),
                split,
                first.scale,
                first.phase(),
                scale,
                opts,
            );
            add(part);
        }
        Some(s) => {
            // Re A Re B = ½ Re(AB + A B̄)
            let plus = oscillatory_tail(
                |rho: f64| first.envelope(rho) * s.envelope(rho) * (0.5 * amp(rho)),
                split,
                first.scale + s.scale,
                first.phase() + s.phase(),
                scale,
                opts,
            );
            add(plus);
            let minus = oscillatory_tail(
                |rho: f64| first.envelope(rho) * s.envelope(rho).conj() * (0.5 * amp(rho)),
                split,
                first.scale - s.scale,
                first.phase() - s.phase(),
                scale,
                opts,
            );
            add(minus);
        }
    }
    Ok(HankelValue { value, abs_err, abs_mass, converged })
}

fn finite_breaks(split: f64, amp_scale: f64, half_period: f64, max_panels: usize) -> Result<Vec<f64>> {
    let uniform = (split / half_period).ceil();
    if uniform > max_panels as f64 {
        return Err(Error::Quadrature(format!(
            "Hankel finite part needs {uniform} panels (limit {max_panels})"
        )));
    }
    let mut pts = vec![0.0, split];
    let mut g = amp_scale * 2f64.powi(-45);
    while g < split {
        pts.push(g);
        g *= 2.0;
    }
    let mut m = 1.0;
    while m * half_period < split {
        pts.push(m * half_period);
        m += 1.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * split);
    Ok(pts)
}

struct TailPart {
    value: f64,
    abs_err: f64,
    abs_mass: f64,
    converged: bool,
}

/// `Re ∫_start^∞ env(ρ) e^{i(ωρ + φ)} dρ` for a smooth envelope `env`.
fn oscillatory_tail<E>(
    env: E,
    start: f64,
    omega: f64,
    phase: f64,
    scale: f64,
    opts: &HankelOptions,
) -> TailPart
where
    E: Fn(f64) -> Complex64,
{
    let lobe_tol = Tolerance { abs: 0.0, rel: 1e-13, mass: 1e-14 };
    let rot = Complex64::from_polar(1.0, phase);
    if omega.abs() <= 1e-12 * start.recip() {
        // Non-oscillatory: ρ = start·eˢ; only the real part is integrable.
        let breaks = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let out = gk_adaptive(&breaks, lobe_tol, 400, |s: f64| {
            let rho = start * s.exp();
            (env(rho) * rot).re * rho
        });
        return TailPart {
            value: out.value,
            abs_err: out.abs_err,
            abs_mass: out.abs_mass,
            converged: out.converged,
        };
    }
    let lobe = PI / omega.abs();
    let rot0 = rot * Complex64::from_polar(1.0, omega * start);
    let mut terms: Vec<Complex64> = Vec::with_capacity(opts.max_lobes);
    let mut abs_mass = 0.0;
    let mut quad_err = 0.0;
    let mut quad_ok = true;
    let mut prev: Option<Complex64> = None;
    let mut est = Complex64::new(0.0, 0.0);
    let mut acc_err = f64::INFINITY;
    for m in 0..opts.max_lobes {
        let a = start + m as f64 * lobe;
        let b = a + lobe;
        let mut breaks = vec![a];
        let mut x = 2.0 * a;
        while x < b {
            breaks.push(x);
            x *= 2.0;
        }
        breaks.push(b);
        // e^{iωa} = e^{iω·start}(−1)^m keeps the phase argument small.
        let base = if m % 2 == 0 { rot0 } else { -rot0 };
        let out = gk_adaptive(&breaks, lobe_tol, 200, |rho: f64| {
            env(rho) * base * Complex64::from_polar(1.0, omega * (rho - a))
        });
        quad_err += out.abs_err;
        quad_ok &= out.converged;
        abs_mass += out.value.norm();
        terms.push(out.value);
        if terms.len() >= opts.min_lobes && terms.len() % 2 == 0 {
            let (e, _) = levin_u(&terms);
            if let Some(p) = prev {
                acc_err = (e - p).norm();
                est = e;
                if acc_err <= 0.1 * opts.rel_tol * scale.max(e.norm()) {
                    break;
                }
            }
            est = e;
            prev = Some(e);
        }
    }
    if prev.is_none() {
        est = terms.iter().sum();
        acc_err = terms.last().map_or(0.0, |t| t.norm());
    }
    let converged = quad_ok && acc_err <= opts.rel_tol * scale.max(est.norm());
    TailPart { value: est.re, abs_err: acc_err + quad_err, abs_mass, converged }
}
