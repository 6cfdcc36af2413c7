//! Radial mild solutions `u = ∫₀ᵗ Y(·, t−s) ∗ f(·, s) ds` for separable
//! forcings `f(x,t) = (1+t)^{−γ} h(|x|)`.
//!
//! The primary path works in Fourier variables: `û(ρ,t) = ĥ(ρ) H(ρ,t)` with
//! the mode response
//!
//! ```text
//! H(ρ,t) = ∫₀ᵗ τ^{α−1} E_{α,α}(−ρ^{2β}τᵅ) (1+t−τ)^{−γ} dτ,
//! ```
//!
//! tabulated in `ρ` for each output time and inverted with the Hankel
//! quadrature. Spatial parts are weighted sums of ball indicators, for which
//! the inversion reduces to a product of two Bessel functions.
//!
//! [`solve_direct_oracle`] is an unaccelerated space-time quadrature of the
//! same convolution, built on the tabulated kernel instead of the Fourier
//! symbol.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{hankel_integral, BesselFactor, HankelOptions};
use crate::kernel::KernelProfile;
use crate::params::{ProblemParams, Real};
use crate::quad::{geomspace, gk_adaptive, gl16, CubicSpline, Tolerance};
use crate::specfun::{bessel_j, gamma, unit_ball_volume, unit_sphere_area, MittagLeffler, MlfAccuracy};

/// Radial spatial part `h(|x|)` of a separable forcing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialProfile {
    BallIndicator { radius: f64 },
    ShellIndicator { inner: f64, outer: f64 },
    /// Step function: `values[i]` on `radii[i−1] ≤ |x| < radii[i]`
    /// (`radii[−1] = 0`), zero beyond the last radius.
    SampledRadial { radii: Vec<f64>, values: Vec<f64> },
}

impl SpatialProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::BallIndicator { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParams(format!("ball radius must be positive, got {radius}")));
                }
            }
            Self::ShellIndicator { inner, outer } => {
                if !(*inner > 0.0 && inner <= outer && outer.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "shell needs 0 < inner ≤ outer, got [{inner}, {outer}]"
                    )));
                }
            }
            Self::SampledRadial { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::InvalidParams("sampled profile needs matching nonempty grids".into()));
                }
                if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParams("sampled radii must be positive and increasing".into()));
                }
                if values.iter().any(|v| !v.is_finite()) || !radii.last().unwrap().is_finite() {
                    return Err(Error::InvalidParams("sampled profile must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// `h = Σ w_k χ_{B(R_k)}` as `(R_k, w_k)` with zero weights dropped.
    pub fn ball_decomposition(&self) -> Vec<(f64, f64)> {
        match self {
            Self::BallIndicator { radius } => vec![(*radius, 1.0)],
            Self::ShellIndicator { inner, outer } => {
                if inner == outer {
                    vec![]
                } else {
                    vec![(*outer, 1.0), (*inner, -1.0)]
                }
            }
            Self::SampledRadial { radii, values } => {
                let n = radii.len();
                (0..n)
                    .map(|i| {
                        let next = if i + 1 < n { values[i + 1] } else { 0.0 };
                        (radii[i], values[i] - next)
                    })
                    .filter(|(_, w)| *w != 0.0)
                    .collect()
            }
        }
    }

    /// Radius of the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            Self::BallIndicator { radius } => *radius,
            Self::ShellIndicator { outer, .. } => *outer,
            Self::SampledRadial { radii, .. } => *radii.last().unwrap(),
        }
    }

    /// `h(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::BallIndicator { radius } => f64::from(u8::from(r < *radius)),
            Self::ShellIndicator { inner, outer } => f64::from(u8::from(r >= *inner && r < *outer)),
            Self::SampledRadial { radii, values } => {
                let i = radii.partition_point(|x| *x <= r);
                if i < values.len() {
                    values[i]
                } else {
                    0.0
                }
            }
        }
    }

    /// Breakpoints of `h` (jump radii).
    pub fn jumps(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.ball_decomposition().iter().map(|(r, _)| *r).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `∫ |h| dx`.
    pub fn l1_mass(&self, dim: u32) -> f64 {
        let vol = unit_ball_volume(dim);
        let n = dim as i32;
        match self {
            Self::BallIndicator { radius } => vol * radius.powi(n),
            Self::ShellIndicator { inner, outer } => vol * (outer.powi(n) - inner.powi(n)),
            Self::SampledRadial { radii, values } => {
                let mut prev = 0.0;
                let mut m = 0.0;
                for (r, v) in radii.iter().zip(values) {
                    m += v.abs() * vol * (r.powi(n) - prev);
                    prev = r.powi(n);
                }
                m
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::BallIndicator { radius } => format!("ball(R={radius})"),
            Self::ShellIndicator { inner, outer } => format!("shell(R1={inner},R2={outer})"),
            Self::SampledRadial { radii, .. } => format!("sampled(n={})", radii.len()),
        }
    }
}

/// Which decay hypotheses on `f` hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// `‖f(·,t)‖₁ ≤ C(1+t)^{−γ}`.
    pub l1_time_decay: bool,
    /// `|f(x,t)| ≤ C(1+t)^{−γ}|x|^{−N}`.
    pub pointwise_decay: bool,
    /// `f(·,t) ∈ L^q` with the same time decay, for every `q`.
    pub q_integrability: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Forcing {
    pub gamma: Real,
    pub spatial: SpatialProfile,
    /// `N` in `|f| ≤ C|x|^{−N}`; any value works for compact support.
    pub pointwise_decay_exponent: Option<f64>,
    pub hypotheses: Hypotheses,
}

impl Forcing {
    pub fn new(gamma: Real, spatial: SpatialProfile) -> Result<Self> {
        spatial.validate()?;
        if !gamma.value().is_finite() {
            return Err(Error::InvalidParams("forcing gamma must be finite".into()));
        }
        // every spatial kind here is bounded with compact support
        Ok(Self {
            gamma,
            spatial,
            pointwise_decay_exponent: None,
            hypotheses: Hypotheses { l1_time_decay: true, pointwise_decay: true, q_integrability: true },
        })
    }

    /// `(1+t)^{−γ} χ_{B_R}` with `γ` taken from `params`.
    pub fn ball(params: &ProblemParams, radius: f64) -> Result<Self> {
        Self::new(params.gamma_real(), SpatialProfile::BallIndicator { radius })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.value()
    }

    /// `(1+t)^{−γ}`.
    pub fn time_factor(&self, t: f64) -> f64 {
        (1.0 + t).powf(-self.gamma())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let spatial = match &self.spatial {
            SpatialProfile::SampledRadial { radii, values } => SpatialProfile::SampledRadial {
                radii: radii.clone(),
                values: values.iter().map(|v| c * v).collect(),
            },
            other => {
                let radii: Vec<f64> = other.jumps();
                let values: Vec<f64> = radii.iter().map(|r| c * other.value(0.5 * r)).collect();
                if let SpatialProfile::ShellIndicator { inner, outer } = other {
                    SpatialProfile::SampledRadial { radii: vec![*inner, *outer], values: vec![0.0, c] }
                } else {
                    SpatialProfile::SampledRadial { radii, values }
                }
            }
        };
        Self { spatial, ..self.clone() }
    }

    /// `‖f(·,t)‖₁`.
    pub fn l1_norm(&self, dim: u32, t: f64) -> f64 {
        self.time_factor(t) * self.spatial.l1_mass(dim)
    }
}

/// `J_ν(x)/x^ν`, finite at `x = 0`.
fn bessel_over_power(nu: f64, x: f64) -> Result<f64> {
    if x < 1e-4 {
        let q = 0.25 * x * x;
        let lead = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
        Ok(lead * (1.0 - q / (nu + 1.0) + q * q / (2.0 * (nu + 1.0) * (nu + 2.0))))
    } else {
        Ok(bessel_j(nu, x)? / x.powf(nu))
    }
}

/// Radial Fourier transform `ĥ(ρ)` of the spatial part in `ℝᴺ`.
pub fn hat_spatial(forcing: &Forcing, dim: u32, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("frequency must be ≥ 0, got {rho}")));
    }
    let h = 0.5 * dim as f64;
    let mut s = 0.0;
    for (r, w) in forcing.spatial.ball_decomposition() {
        // (2π)^{N/2} R^N (Rρ)^{−N/2} J_{N/2}(Rρ)
        s += w * (2.0 * PI).powf(h) * r.powi(dim as i32) * bessel_over_power(h, r * rho)?;
    }
    Ok(s)
}

/// Substitution `w = τᵅ` turns `∫₀ᵗ τ^{α−1} E(−λτᵅ) F(t−τ) dτ` into
/// `α^{−1} ∫₀^{tᵅ} E(−λw) F(t − w^{1/α}) dw` with a bounded integrand. The
/// upper half runs in `v = tᵅ − w` so that `t − τ` is free of cancellation
/// where the forcing factor varies.
fn mode_response_raw(
    ml: &MittagLeffler,
    alpha: f64,
    gamma_exp: f64,
    lambda: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let w_max = t.powf(alpha);
    let half = 0.5 * w_max;
    let inv_alpha = 1.0 / alpha;
    // t − τ as a function of v
    let elapsed = |v: f64| -t * (inv_alpha * (-v / w_max).ln_1p()).exp_m1();
    let forcing = |d: f64| if gamma_exp == 0.0 { 1.0 } else { (1.0 + d).powf(-gamma_exp) };

    let mut w_breaks = vec![0.0, half];
    let mut v_breaks = vec![0.0, half];
    let add_w = |w: f64, wb: &mut Vec<f64>, vb: &mut Vec<f64>| {
        if w > 0.0 && w < half {
            wb.push(w);
        } else if w >= half && w < w_max {
            vb.push(w_max - w);
        }
    };
    if lambda > 0.0 {
        let mut w = 1.0 / lambda;
        while w < w_max {
            add_w(w, &mut w_breaks, &mut v_breaks);
            w *= 2.0;
        }
        let mut w = 0.5 / lambda;
        while w > w_max * 1e-12 {
            add_w(w, &mut w_breaks, &mut v_breaks);
            w *= 0.5;
        }
    }
    if gamma_exp != 0.0 {
        // forcing factor (1+t−τ)^{−γ} varies where t − τ is small
        let mut d = 1e-6;
        while d < t {
            let v = -w_max * (alpha * (-d / t).ln_1p()).exp_m1();
            if v < half {
                v_breaks.push(v);
            } else {
                w_breaks.push(w_max - v);
            }
            d *= 2.0;
        }
    }
    for b in [&mut w_breaks, &mut v_breaks] {
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, c| (*a - *c).abs() <= 1e-15 * w_max);
    }
    let failed = std::cell::Cell::new(None);
    let e_at = |w: f64| match ml.eval(-lambda * w) {
        Ok(e) => e,
        Err(err) => {
            failed.set(Some(err));
            0.0
        }
    };
    let tol = Tolerance { abs: 0.0, rel: tol, mass: 0.0 };
    let lower = gk_adaptive(&w_breaks, tol, 4000, |w: f64| e_at(w) * forcing(t - w.powf(inv_alpha)));
    let upper = gk_adaptive(&v_breaks, tol, 4000, |v: f64| e_at(w_max - v) * forcing(elapsed(v)));
    if let Some(err) = failed.take() {
        return Err(err);
    }
    if !(lower.converged && upper.converged) {
        return Err(Error::Quadrature(format!(
            "mode response at λ = {lambda:e}, t = {t} did not converge (error {:e})",
            lower.abs_err + upper.abs_err
        )));
    }
    Ok((lower.value + upper.value) * inv_alpha)
}

/// `û(ρ,t)` for one frequency.
pub fn duhamel_hat(params: &ProblemParams, forcing: &Forcing, rho: f64, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let ml = MittagLeffler::new(params.alpha(), params.alpha(), MlfAccuracy::default())?;
    let lambda = rho.powf(2.0 * params.beta());
    let h = mode_response_raw(&ml, params.alpha(), forcing.gamma(), lambda, t, tol)
        .map_err(|e| Error::Quadrature(format!("duhamel_hat(ρ = {rho}, t = {t}): {e}")))?;
    Ok(hat_spatial(forcing, params.dim(), rho)? * h)
}

/// `ρ ↦ H(ρ, t)` at a fixed time, tabulated on a logarithmic grid.
#[derive(Clone, Debug)]
pub struct ModeTable {
    pub t: f64,
    pub beta: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    h0: f64,
    h_lo: f64,
    spline: CubicSpline,
    /// `H ≈ c₁/λ + c₂/λ²` beyond `rho_hi`.
    c1: f64,
    c2: f64,
}

/// Options for [`ModeTable::build`] and [`solve_radial`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub mode_rel_tol: f64,
    pub points_per_decade: usize,
    /// Table spans `λ tᵅ` from `λ_lo_scaled` to `λ_hi_scaled`.
    pub lambda_lo_scaled: f64,
    pub lambda_hi_scaled: f64,
    pub hankel_rel_tol: f64,
    /// Fraction of radii allowed to fail before a slice is rejected.
    pub max_failed_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mode_rel_tol: 1e-11,
            points_per_decade: 128,
            lambda_lo_scaled: 1e-8,
            lambda_hi_scaled: 1e8,
            hankel_rel_tol: 1e-10,
            max_failed_fraction: 0.1,
        }
    }
}

impl ModeTable {
    pub fn build(params: &ProblemParams, gamma_exp: f64, t: f64, opts: &SolverOptions) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        let alpha = params.alpha();
        let beta = params.beta();
        let ml = MittagLeffler::new(alpha, alpha, MlfAccuracy::default())?;
        // λ tᵅ is the natural variable; ρ = λ^{1/(2β)}
        let ta = t.powf(alpha);
        let rho_of = |ls: f64| (ls / ta).powf(0.5 / beta);
        let rho_lo = rho_of(opts.lambda_lo_scaled);
        let rho_hi = rho_of(opts.lambda_hi_scaled);
        let decades = (rho_hi / rho_lo).log10();
        let n = (decades * opts.points_per_decade as f64).ceil() as usize + 1;
        let rhos = geomspace(rho_lo, rho_hi, n);
        let vals: Vec<f64> = rhos
            .par_iter()
            .map(|&r| mode_response_raw(&ml, alpha, gamma_exp, r.powf(2.0 * beta), t, opts.mode_rel_tol))
            .collect::<Result<_>>()?;
        if vals.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Quadrature(format!("mode response not positive at t = {t}")));
        }
        let h0 = mode_response_raw(&ml, alpha, gamma_exp, 0.0, t, opts.mode_rel_tol)?;
        let l1 = rhos[n - 2].powf(2.0 * beta);
        let l2 = rhos[n - 1].powf(2.0 * beta);
        // solve c1/λ + c2/λ² through the last two knots
        let (a1, a2) = (vals[n - 2] * l1, vals[n - 1] * l2);
        let c2 = (a1 - a2) / (1.0 / l1 - 1.0 / l2);
        let c1 = a2 - c2 / l2;
        let spline = CubicSpline::new(rhos.iter().map(|r| r.ln()).collect(), vals.iter().map(|v| v.ln()).collect())?;
        Ok(Self { t, beta, rho_lo, rho_hi, h0, h_lo: vals[0], spline, c1, c2 })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        if rho <= self.rho_lo {
            let s = (rho / self.rho_lo).powf(2.0 * self.beta);
            self.h0 + (self.h_lo - self.h0) * s
        } else if rho <= self.rho_hi {
            self.spline.eval(rho.ln()).exp()
        } else {
            let l = rho.powf(2.0 * self.beta);
            self.c1 / l + self.c2 / (l * l)
        }
    }

    /// `H(0, t)`.
    pub fn at_zero(&self) -> f64 {
        self.h0
    }
}

/// Radial solution at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialSolutionSlice {
    pub t: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Estimated relative error per radius; infinite where quadrature failed.
    pub accuracy: Vec<f64>,
}

impl RadialSolutionSlice {
    pub fn new(t: f64, radii: Vec<f64>, values: Vec<f64>, accuracy: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() != accuracy.len() || radii.is_empty() {
            return Err(Error::InvalidParams("slice arrays must be nonempty and of equal length".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
            return Err(Error::InvalidParams("slice radii must be positive and increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("slice values must be finite".into()));
        }
        Ok(Self { t, radii, values, accuracy })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV with a commented metadata header and rows `r,u,acc`.
    pub fn to_csv(&self, params: &ProblemParams, forcing: &Forcing) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# alpha={} beta={} dim={} gamma={} spatial={} t={:.16e}",
            params.alpha_real(),
            params.beta_real(),
            params.dim(),
            forcing.gamma,
            forcing.spatial.describe(),
            self.t
        );
        let _ = writeln!(s, "r,u,acc");
        for ((r, u), a) in self.radii.iter().zip(&self.values).zip(&self.accuracy) {
            let _ = writeln!(s, "{r:.16e},{u:.16e},{a:.3e}");
        }
        s
    }
}

/// Geometric grid, 64 points per decade, covering
/// `[1e−2·t^{α/(2β)}, 1e2·t^{α/(2β)}] ∪ [1e−2, 10]`.
pub fn default_slice_radii(params: &ProblemParams, t: f64, points_per_decade: usize) -> Vec<f64> {
    let s = t.powf(params.diffusive_exponent());
    let ranges = [(1e-2 * s, 1e2 * s), (1e-2, 10.0)];
    let lo = ranges[0].0.min(ranges[1].0);
    let hi = ranges[0].1.max(ranges[1].1);
    let overlap = ranges[0].0 <= ranges[1].1 && ranges[1].0 <= ranges[0].1;
    let span = |a: f64, b: f64| {
        let n = ((b / a).log10() * points_per_decade as f64).ceil() as usize + 1;
        geomspace(a, b, n.max(2))
    };
    if overlap {
        span(lo, hi)
    } else {
        let mut v = span(ranges[1].0.min(ranges[0].0), ranges[1].1.min(ranges[0].1));
        v.extend(span(ranges[1].0.max(ranges[0].0), hi));
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// `u(r,t)` from a prebuilt mode table.
pub fn solve_radial_with_table(
    params: &ProblemParams,
    forcing: &Forcing,
    table: &ModeTable,
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<RadialSolutionSlice> {
    let t = table.t;
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParams("output radii must be positive".into()));
    }
    let half = 0.5 * params.dim() as f64;
    let balls = forcing.spatial.ball_decomposition();
    let hopts = HankelOptions { rel_tol: opts.hankel_rel_tol, ..Default::default() };
    let amp_scale = t.powf(-params.diffusive_exponent());
    let rows: Vec<(f64, f64, bool)> = radii
        .par_iter()
        .map(|&r| {
            let mut value = 0.0;
            let mut err = 0.0;
            let mut floor = 0.0;
            let mut ok = true;
            for &(big_r, w) in &balls {
                let out = hankel_integral(
                    |rho: f64| table.eval(rho),
                    BesselFactor::new(half - 1.0, r)?,
                    Some(BesselFactor::new(half, big_r)?),
                    amp_scale,
                    &hopts,
                )?;
                let c = w * r.powf(1.0 - half) * big_r.powf(half);
                value += c * out.value;
                err += (c * out.abs_err).abs();
                floor += (c * out.abs_mass).abs() * 4.0 * f64::EPSILON;
                ok &= out.converged;
            }
            Ok((value, (err + floor) / value.abs(), ok))
        })
        .collect::<Result<_>>()?;
    let failed = rows.iter().filter(|r| !r.2).count();
    if failed as f64 > opts.max_failed_fraction * radii.len() as f64 {
        return Err(Error::Quadrature(format!(
            "{failed} of {} radii failed at t = {t}",
            radii.len()
        )));
    }
    let values = rows.iter().map(|r| r.0).collect();
    let accuracy = rows.iter().map(|r| if r.2 { r.1 } else { f64::INFINITY }).collect();
    RadialSolutionSlice::new(t, radii.to_vec(), values, accuracy)
}

/// `u(r,t)` on `radii` by Fourier-radial inversion.
pub fn solve_radial(
    params: &ProblemParams,
    forcing: &Forcing,
    t: f64,
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<RadialSolutionSlice> {
    let table = ModeTable::build(params, forcing.gamma(), t, opts)?;
    solve_radial_with_table(params, forcing, &table, radii, opts)
}

fn graded_breaks(a: f64, b: f64, focus: f64, ratio: f64, depth: usize) -> Vec<f64> {
    // Panels shrink geometrically toward `focus` ∈ [a, b].
    let mut pts = vec![a, b];
    if focus > a {
        let mut d = (focus - a) * ratio;
        for _ in 0..depth {
            pts.push(focus - d);
            d *= ratio;
        }
        pts.push(focus);
    }
    if focus < b {
        let mut d = (b - focus) * ratio;
        for _ in 0..depth {
            pts.push(focus + d);
            d *= ratio;
        }
        pts.push(focus);
    }
    pts.retain(|x| *x >= a && *x <= b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Time integral `∫₀ᵗ Y(d, τ) (1+t−τ)^{−γ} dτ` for a fixed distance `d > 0`.
fn oracle_time_integral(profile: &KernelProfile, gamma_exp: f64, d: f64, t: f64) -> Result<f64> {
    let a = profile.params.diffusive_exponent();
    // below τ_cut the argument d τ^{−a} leaves the tabulated range, where
    // Y(d,·) is negligible
    let xi_cut = *profile.radii.last().unwrap();
    let tau_cut = (d / xi_cut).powf(1.0 / a);
    let mut pts = vec![t];
    let mut tau = tau_cut.min(t);
    while tau < t {
        pts.push(tau);
        tau *= 2.0;
    }
    // (1+t−τ)^{−γ} varies on unit scale near τ = t
    let mut back = 1.0;
    while back < t {
        if t - back > tau_cut {
            pts.push(t - back);
        }
        back *= 2.0;
    }
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let rule = gl16();
    let mut s = 0.0;
    for w in pts.windows(2) {
        if w[0] == 0.0 {
            // [0, τ_cut]
            continue;
        }
        let mut err = None;
        s += rule.integrate(w[0], w[1], |tau: f64| match profile.eval_y(d, tau) {
            Ok(y) => y * (1.0 + t - tau).powf(-gamma_exp),
            Err(e) => {
                err = Some(e);
                0.0
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(s)
}

/// Direct quadrature of `∫₀ᵗ ∫ Y(x−y, t−s) f(y,s) dy ds` at `|x| = r`.
///
/// Slow by design: composite Gauss-Legendre on graded meshes, no sequence
/// acceleration, no Fourier transforms.
pub fn solve_direct_oracle(
    params: &ProblemParams,
    profile: &KernelProfile,
    forcing: &Forcing,
    r: f64,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) || !(r >= 0.0) {
        return Err(Error::Domain(format!("oracle needs r ≥ 0, t > 0; got r = {r}, t = {t}")));
    }
    if profile.params.alpha() != params.alpha()
        || profile.params.beta() != params.beta()
        || profile.params.dim() != params.dim()
    {
        return Err(Error::InvalidParams("profile parameters differ from the problem".into()));
    }
    let n = params.dim();
    if n < 2 {
        return Err(Error::InvalidParams("direct oracle needs N ≥ 2".into()));
    }
    let rule = gl16();
    let g = forcing.gamma();
    let mut jumps = forcing.spatial.jumps();
    jumps.insert(0, 0.0);
    let omega = unit_sphere_area(n - 1);
    let sin_pow = (n - 2) as i32;

    let mut total = 0.0;
    for seg in jumps.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h = forcing.spatial.value(0.5 * (a + b));
        if h == 0.0 {
            continue;
        }
        // |x − y| vanishes at ρ = r, θ = 0
        let inside = r > a && r < b;
        let rho_breaks = if inside {
            graded_breaks(a, b, r, 0.5, 16)
        } else {
            let near = if r <= a { a } else { b };
            graded_breaks(a, b, near, 0.5, if (r - near).abs() < 0.5 * (b - a) { 12 } else { 4 })
        };
        let mut seg_sum = 0.0;
        let mut err = None;
        for pw in rho_breaks.windows(2) {
            seg_sum += rule.integrate(pw[0], pw[1], |rho: f64| {
                if err.is_some() {
                    return 0.0;
                }
                // grade θ toward 0 when the singular point is close
                let gap = (rho - r).abs();
                let depth = if r > 0.0 && gap < 0.5 * r.max(1e-12) {
                    ((r / gap.max(1e-300)).log2().ceil() as usize + 2).min(24)
                } else {
                    4
                };
                let th_breaks = graded_breaks(0.0, PI, 0.0, 0.5, depth);
                let mut inner = 0.0;
                for tw in th_breaks.windows(2) {
                    inner += rule.integrate(tw[0], tw[1], |th: f64| {
                        let d2 = r * r + rho * rho - 2.0 * r * rho * th.cos();
                        let d = d2.max(0.0).sqrt();
                        if d == 0.0 {
                            return 0.0;
                        }
                        match oracle_time_integral(profile, g, d, t) {
                            Ok(w) => w * th.sin().powi(sin_pow),
                            Err(e) => {
                                err = Some(e);
                                0.0
                            }
                        }
                    });
                }
                inner * rho.powi(n as i32 - 1)
            });
        }
        if let Some(e) = err {
            return Err(e);
        }
        total += h * omega * seg_sum;
    }
    Ok(total)
}

/// Residuals of the L1 discretization at two mesh sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaputoReport {
    pub rho: f64,
    pub t_final: f64,
    pub m: usize,
    pub residual_m: f64,
    pub residual_2m: f64,
    /// Same maxima restricted to `t ≥ T/16` (diagnostic).
    pub late_residual_m: f64,
    pub late_residual_2m: f64,
}

impl CaputoReport {
    /// `residual(M)/residual(2M)`.
    pub fn contraction(&self) -> f64 {
        self.residual_m / self.residual_2m
    }
}

/// Graded mesh `t_k = T (k/M)^{2/α}`, `k = 0..=M`.
pub fn graded_mesh(alpha: f64, t_final: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|k| t_final * (k as f64 / m as f64).powf(2.0 / alpha)).collect()
}

/// `max_n |∂ₜᵅû(t_n) + ρ^{2β}û(t_n) − f̂(t_n)|` with `∂ₜᵅ` by the L1 scheme.
pub fn l1_residual(params: &ProblemParams, forcing: &Forcing, rho: f64, mesh: &[f64], u: &[f64]) -> Result<f64> {
    l1_residual_from(params, forcing, rho, mesh, u, 0.0)
}

/// [`l1_residual`] over nodes with `t_n ≥ t_from` only.
pub fn l1_residual_from(
    params: &ProblemParams,
    forcing: &Forcing,
    rho: f64,
    mesh: &[f64],
    u: &[f64],
    t_from: f64,
) -> Result<f64> {
    let alpha = params.alpha();
    let lambda = rho.powf(2.0 * params.beta());
    let fhat = hat_spatial(forcing, params.dim(), rho)?;
    let c = 1.0 / gamma(2.0 - alpha);
    let slopes: Vec<f64> = (1..mesh.len()).map(|k| (u[k] - u[k - 1]) / (mesh[k] - mesh[k - 1])).collect();
    let mut worst: f64 = 0.0;
    for n in 1..mesh.len() {
        let tn = mesh[n];
        let mut d = 0.0;
        for k in 1..=n {
            let w = (tn - mesh[k - 1]).powf(1.0 - alpha) - (tn - mesh[k]).powf(1.0 - alpha);
            d += slopes[k - 1] * w;
        }
        if tn < t_from {
            continue;
        }
        let res = c * d + lambda * u[n] - fhat * forcing.time_factor(tn);
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// L1-scheme residual of `∂ₜᵅû + ρ^{2β}û = f̂` for the computed `û` at
/// `M` and `2M` graded nodes on `(0, T]`.
pub fn caputo_residual_check(
    params: &ProblemParams,
    forcing: &Forcing,
    rho: f64,
    t_final: f64,
    m: usize,
) -> Result<CaputoReport> {
    if !(rho > 0.0) || !(t_final > 0.0) || m < 2 {
        return Err(Error::Domain("caputo check needs ρ > 0, T > 0, M ≥ 2".into()));
    }
    let ml = MittagLeffler::new(params.alpha(), params.alpha(), MlfAccuracy::default())?;
    let lambda = rho.powf(2.0 * params.beta());
    let fhat = hat_spatial(forcing, params.dim(), rho)?;
    let residual = |m: usize| -> Result<(f64, f64)> {
        let mesh = graded_mesh(params.alpha(), t_final, m);
        let u: Vec<f64> = mesh
            .par_iter()
            .map(|&t| {
                if t == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(fhat * mode_response_raw(&ml, params.alpha(), forcing.gamma(), lambda, t, 1e-12)?)
                }
            })
            .collect::<Result<_>>()?;
        Ok((
            l1_residual(params, forcing, rho, &mesh, &u)?,
            l1_residual_from(params, forcing, rho, &mesh, &u, t_final / 16.0)?,
        ))
    };
    let (residual_m, late_residual_m) = residual(m)?;
    let (residual_2m, late_residual_2m) = residual(2 * m)?;
    Ok(CaputoReport { rho, t_final, m, residual_m, residual_2m, late_residual_m, late_residual_2m })
}
