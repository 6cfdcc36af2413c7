//! Self-similar profile `G` of the Duhamel kernel,
//! `Y(x,t) = t^{α−1−αN/(2β)} G(|x| t^{−α/(2β)})`.
//!
//! `G` is the inverse radial Fourier transform of `ρ ↦ E_{α,α}(−ρ^{2β})`:
//!
//! ```text
//! G(r) = (2π)^{−N/2} r^{1−N/2} ∫₀^∞ E_{α,α}(−ρ^{2β}) J_{N/2−1}(rρ) ρ^{N/2} dρ
//! ```
//!
//! tabulated on a geometric grid. Between reliable grid points `log G` is a
//! natural cubic spline in `log r`. Below the grid the interior power
//! `c ξ^{4β−N}` is used, beyond the last reliable point a fitted tail.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{hankel_integral, BesselFactor, HankelOptions};
use crate::params::{critical_exponents, Exponent, ProblemParams, Real};
use crate::quad::CubicSpline;
use crate::specfun::{unit_sphere_area, MittagLeffler, MlfAccuracy};

/// Relative error below which a tabulated point is trusted.
pub const RELIABLE_REL_ERR: f64 = 1e-6;

const FORMAT_TAG: &str = "nlheat-profile v1";

/// Geometric grid of profile radii.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        Self { r_min: 1e-3, r_max: 1e3, points: 400 }
    }
}

impl ProfileGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 1e-4 && self.r_max <= 1e4 && self.r_min < self.r_max) {
            return Err(Error::InvalidParams(format!(
                "profile grid must lie within [1e-4, 1e4] with r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.points < 20 {
            return Err(Error::InvalidParams("profile grid needs at least 20 points".into()));
        }
        if self.r_max / self.r_min < 1e3 {
            return Err(Error::InvalidParams("profile grid must span at least three decades".into()));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        crate::quad::geomspace(self.r_min, self.r_max, self.points)
    }

    /// Same span with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { points: 2 * self.points - 1, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailKind {
    /// `β = 1`: `C ξ^κ exp(−σ ξ^{2/(2−α)})`, `κ = (N−2)(α−1)/(2−α)`.
    ExponentialBeta1,
    /// `β < 1`: `C ξ^{−(N+2β)}`.
    AlgebraicBetaLt1,
}

/// Fitted large-`ξ` form of `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub kind: TailKind,
    pub sigma_fitted: Option<f64>,
    pub coefficient: f64,
    pub power: f64,
    /// Exponent `2/(2−α)` of the stretched exponential; 0 for algebraic tails.
    pub stretch: f64,
    pub fit_window: (f64, f64),
}

impl TailSpec {
    pub fn ln_eval(&self, xi: f64) -> f64 {
        let mut v = self.coefficient.ln() + self.power * xi.ln();
        if let Some(s) = self.sigma_fitted {
            v -= s * xi.powf(self.stretch);
        }
        v
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.ln_eval(xi).exp()
    }
}

/// Tabulated profile `G` with its asymptotic continuations.
#[derive(Clone, Debug)]
pub struct KernelProfile {
    pub params: ProblemParams,
    pub grid: ProfileGrid,
    pub mlf: MlfAccuracy,
    pub radii: Vec<f64>,
    /// `G` at the grid radii; fallback points hold the tail value, floored at
    /// `f64::MIN_POSITIVE`.
    pub values: Vec<f64>,
    /// Estimated relative error; infinite at fallback points.
    pub accuracy: Vec<f64>,
    pub interior_exponent: f64,
    pub interior_coefficient: f64,
    pub exterior_tail: TailSpec,
    /// Largest radius of the leading run of reliable points.
    pub reliable_max: f64,
    spline: CubicSpline,
}

/// Single value `G(r)` by direct quadrature: `(value, relative error, converged)`.
pub fn profile_point(
    params: &ProblemParams,
    ml: &MittagLeffler,
    r: f64,
    opts: &HankelOptions,
) -> Result<(f64, f64, bool)> {
    let n = params.dim() as f64;
    let two_beta = 2.0 * params.beta();
    let failed = std::cell::Cell::new(None);
    let amp = |rho: f64| {
        let lam = if two_beta == 2.0 { rho * rho } else { rho.powf(two_beta) };
        match ml.eval(-lam) {
            Ok(e) => e * rho.powf(0.5 * n),
            Err(err) => {
                failed.set(Some(err));
                f64::NAN
            }
        }
    };
    let j = BesselFactor::new(0.5 * n - 1.0, r)?;
    let out = hankel_integral(amp, j, None, 1.0, opts)?;
    if let Some(err) = failed.take() {
        return Err(err);
    }
    let scale = (2.0 * std::f64::consts::PI).powf(-0.5 * n) * r.powf(1.0 - 0.5 * n);
    if !out.value.is_finite() {
        return Err(Error::Quadrature(format!("profile integral at r = {r} is not finite")));
    }
    Ok((out.value * scale, out.rel_err(), out.converged))
}

/// Tabulate `G` on `grid`; grid points are computed in parallel.
pub fn build_profile(params: &ProblemParams, grid: &ProfileGrid, acc: &MlfAccuracy) -> Result<KernelProfile> {
    grid.validate()?;
    let ml = MittagLeffler::new(params.alpha(), params.alpha(), *acc)?;
    let opts = HankelOptions::default();
    let radii = grid.radii();
    let raw: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let (v, rel, conv) = profile_point(params, &ml, r, &opts)?;
            if v < 0.0 && rel < 0.1 {
                return Err(Error::Quadrature(format!(
                    "profile value at r = {r:e} is negative ({v:e}) beyond its error estimate"
                )));
            }
            let rel = if conv { rel } else { rel.max(1.0) };
            Ok((v, rel))
        })
        .collect::<Result<_>>()?;
    let (values, accuracy): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
    KernelProfile::assemble(*params, *grid, *acc, radii, values, accuracy)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

impl KernelProfile {
    /// Build from raw tabulated values: find the reliable run, fit the
    /// interior constant and the exterior tail, and fill fallback points.
    pub fn assemble(
        params: ProblemParams,
        grid: ProfileGrid,
        mlf: MlfAccuracy,
        radii: Vec<f64>,
        mut values: Vec<f64>,
        mut accuracy: Vec<f64>,
    ) -> Result<Self> {
        let n = params.dim() as f64;
        let beta = params.beta();
        let alpha = params.alpha();
        let ok = |i: usize| values[i] > 0.0 && accuracy[i] <= RELIABLE_REL_ERR;
        let mut last = 0;
        while last < radii.len() && ok(last) {
            last += 1;
        }
        if last == 0 {
            return Err(Error::Quadrature(format!(
                "profile unreliable at the first grid point r = {:e}",
                radii[0]
            )));
        }
        let reliable_max = radii[last - 1];
        if reliable_max < 4.0 {
            return Err(Error::Quadrature(format!(
                "profile reliable only up to r = {reliable_max:e}; tail fit needs at least r = 4"
            )));
        }

        let interior_exponent = 4.0 * beta - n;
        let first_decade: Vec<f64> = (0..last)
            .take_while(|&i| radii[i] <= 10.0 * radii[0])
            .map(|i| (values[i] * radii[i].powf(-interior_exponent)).ln())
            .collect();
        let interior_coefficient = (first_decade.iter().sum::<f64>() / first_decade.len() as f64).exp();

        let exterior_tail = if beta == 1.0 {
            let stretch = 2.0 / (2.0 - alpha);
            let power = (n - 2.0) * (alpha - 1.0) / (2.0 - alpha);
            let window = (2.0, reliable_max);
            let (xs, ys): (Vec<f64>, Vec<f64>) = (0..last)
                .filter(|&i| radii[i] >= window.0)
                .map(|i| (radii[i].powf(stretch), values[i].ln() - power * radii[i].ln()))
                .unzip();
            if xs.len() < 5 {
                return Err(Error::Quadrature("too few reliable points for the exponential tail fit".into()));
            }
            let (slope, icpt) = least_squares(&xs, &ys);
            let sigma = -slope;
            if !(sigma > 0.0) {
                return Err(Error::Quadrature(format!("fitted tail rate σ = {sigma} is not positive")));
            }
            TailSpec {
                kind: TailKind::ExponentialBeta1,
                sigma_fitted: Some(sigma),
                coefficient: icpt.exp(),
                power,
                stretch,
                fit_window: window,
            }
        } else {
            // Each non-smooth term ρ^{2βk} of the symbol adds ξ^{−N−2βk}, so
            // G ξ^{N+2β} = C + D ξ^{−2β(k−1)} + … with k ≥ 2 the first index
            // for which 2βk is not an even integer.
            let power = -(n + 2.0 * beta);
            let k = (2..)
                .find(|&k| {
                    let e = 2.0 * beta * k as f64;
                    (e / 2.0 - (e / 2.0).round()).abs() > 1e-12
                })
                .unwrap_or(2);
            let corr = 2.0 * beta * (k - 1) as f64;
            let window = ((reliable_max / 10.0).max(2.0), reliable_max);
            let (xs, ys): (Vec<f64>, Vec<f64>) = (0..last)
                .filter(|&i| radii[i] >= window.0)
                .map(|i| (radii[i].powf(-corr), values[i] * radii[i].powf(-power)))
                .unzip();
            if xs.len() < 5 {
                return Err(Error::Quadrature("too few reliable points for the algebraic tail fit".into()));
            }
            let (_, c) = least_squares(&xs, &ys);
            if !(c > 0.0) {
                return Err(Error::Quadrature(format!("fitted tail constant {c} is not positive")));
            }
            TailSpec {
                kind: TailKind::AlgebraicBetaLt1,
                sigma_fitted: None,
                coefficient: c,
                power,
                stretch: 0.0,
                fit_window: window,
            }
        };

        for i in last..radii.len() {
            values[i] = exterior_tail.eval(radii[i]).max(f64::MIN_POSITIVE);
            accuracy[i] = f64::INFINITY;
        }
        let spline = CubicSpline::new(
            radii[..last].iter().map(|r| r.ln()).collect(),
            values[..last].iter().map(|v| v.ln()).collect(),
        )?;
        Ok(Self {
            params,
            grid,
            mlf,
            radii,
            values,
            accuracy,
            interior_exponent,
            interior_coefficient,
            exterior_tail,
            reliable_max,
            spline,
        })
    }

    /// Whether grid point `i` was replaced by the tail fit.
    pub fn is_fallback(&self, i: usize) -> bool {
        self.accuracy[i].is_infinite()
    }

    /// `G(ξ)` for any `ξ > 0`, floored at `f64::MIN_POSITIVE`.
    pub fn eval_g(&self, xi: f64) -> Result<f64> {
        Ok(self.ln_g(xi)?.exp().max(f64::MIN_POSITIVE))
    }

    pub fn ln_g(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::Range(format!("profile argument must be positive and finite, got {xi}")));
        }
        Ok(if xi < self.radii[0] {
            self.interior_coefficient.ln() + self.interior_exponent * xi.ln()
        } else if xi <= self.reliable_max {
            self.spline.eval(xi.ln())
        } else {
            self.exterior_tail.ln_eval(xi)
        })
    }

    /// `t^{α−1−αN/(2β)}`.
    pub fn time_factor(&self, t: f64) -> f64 {
        let p = &self.params;
        t.powf(p.alpha() - 1.0 - p.alpha() * p.dim() as f64 / (2.0 * p.beta()))
    }

    /// `Y(r, t)`.
    pub fn eval_y(&self, r: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) || !(r > 0.0) {
            return Err(Error::Domain(format!("Y needs r > 0 and t > 0, got r = {r}, t = {t}")));
        }
        let xi = r * t.powf(-self.params.diffusive_exponent());
        Ok(self.time_factor(t) * self.eval_g(xi)?)
    }

    /// `‖G‖_{Lᵖ(ℝᴺ)}` for `1 ≤ p < p_*`.
    pub fn lp_constant(&self, p: Exponent) -> Result<f64> {
        let p_star = critical_exponents(&self.params).p_star;
        if p.compare(&p_star) != std::cmp::Ordering::Less {
            return Err(Error::Domain(format!(
                "Y(·,t) ∉ Lᵖ for p ≥ p_* = {p_star}; got p = {p}"
            )));
        }
        let p = p.value();
        if p < 1.0 {
            return Err(Error::Domain(format!("p must be ≥ 1, got {p}")));
        }
        let n = self.params.dim() as f64;
        // ∫ Gᵖ r^{N} d(ln r) on the grid
        let f: Vec<f64> = self
            .radii
            .iter()
            .zip(&self.values)
            .map(|(r, g)| g.powf(p) * r.powf(n))
            .collect();
        let h = (self.radii[1] / self.radii[0]).ln();
        let mut integral = simpson(&f, h);
        let e_in = self.interior_exponent * p + n;
        integral += self.interior_coefficient.powf(p) * self.radii[0].powf(e_in) / e_in;
        if self.exterior_tail.kind == TailKind::AlgebraicBetaLt1 {
            let r_max = *self.radii.last().unwrap();
            let e_out = -self.exterior_tail.power * p - n;
            integral += self.exterior_tail.coefficient.powf(p) * r_max.powf(-e_out) / e_out;
        }
        Ok((unit_sphere_area(self.params.dim()) * integral).powf(1.0 / p))
    }

    /// `‖Y(·,t)‖_{Lᵖ} = ‖G‖_p t^{α−1−(αN/2β)(1−1/p)}`.
    pub fn y_lp_norm(&self, p: Exponent, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        let c = self.lp_constant(p)?;
        let par = &self.params;
        let e = par.alpha() - 1.0
            - par.alpha() * par.dim() as f64 / (2.0 * par.beta()) * (1.0 - 1.0 / p.value());
        Ok(c * t.powf(e))
    }

    /// Compensated bands for the two-sided profile bounds and the global and
    /// exterior bounds on `Y`.
    pub fn check_profile_bounds(&self) -> Result<BandReport> {
        if self.values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Domain("profile has non-positive values".into()));
        }
        let n = self.params.dim() as f64;
        let beta = self.params.beta();
        let alpha = self.params.alpha();
        let a = self.params.diffusive_exponent();
        let mut bands = Vec::new();

        let grid_in = |lo: f64, hi: f64| -> Vec<f64> {
            self.radii.iter().copied().filter(|r| *r >= lo && *r <= hi).collect()
        };
        let interior = grid_in(1e-2, 0.5);
        bands.push(Band::from_samples(
            "interior G·ξ^(N-4β)",
            (1e-2, 0.5),
            interior.iter().map(|&x| Ok(self.eval_g(x)? * x.powf(n - 4.0 * beta))),
        )?);
        let exterior = grid_in(2.0, self.reliable_max);
        bands.push(Band::from_samples(
            "exterior G/tail",
            (2.0, self.reliable_max),
            exterior.iter().map(|&x| Ok(self.eval_g(x)? / self.exterior_tail.eval(x))),
        )?);

        let times: [f64; 4] = [0.25, 1.0, 4.0, 100.0];
        let global = grid_in(1e-2, 1.0);
        let samples: Vec<(f64, f64)> = times
            .iter()
            .flat_map(|&t| global.iter().map(move |&x| (x * t.powf(a), t)))
            .collect();
        bands.push(Band::from_samples(
            "global Y·t^(1+α)·r^(N-4β)",
            (1e-2, 1.0),
            samples
                .iter()
                .map(|&(r, t)| Ok(self.eval_y(r, t)? * t.powf(1.0 + alpha) * r.powf(n - 4.0 * beta))),
        )?);

        let ext_hi = if self.exterior_tail.kind == TailKind::ExponentialBeta1 {
            2.0
        } else {
            self.reliable_max
        };
        let ext = grid_in(1.0, ext_hi);
        let samples: Vec<(f64, f64)> = times
            .iter()
            .flat_map(|&t| ext.iter().map(move |&x| (x * t.powf(a), t)))
            .collect();
        bands.push(Band::from_samples(
            "exterior Y·t^(1-2α)·r^(N+2β)",
            (1.0, ext_hi),
            samples
                .iter()
                .map(|&(r, t)| Ok(self.eval_y(r, t)? * t.powf(1.0 - 2.0 * alpha) * r.powf(n + 2.0 * beta))),
        )?);

        Ok(BandReport { bands, sigma_fitted: self.exterior_tail.sigma_fitted })
    }

    /// Versioned text export; floats carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_TAG}");
        let _ = writeln!(
            s,
            "alpha={} beta={} dim={} r_min={:.16e} r_max={:.16e} points={} mlf_rel_tol={:.16e} mlf_series_terms_max={} mlf_switch_lo={:.16e} mlf_switch_hi={:.16e}",
            p.alpha_real(),
            p.beta_real(),
            p.dim(),
            self.grid.r_min,
            self.grid.r_max,
            self.grid.points,
            self.mlf.rel_tol,
            self.mlf.series_terms_max,
            self.mlf.regime_switch_lo,
            self.mlf.regime_switch_hi,
        );
        for ((r, v), a) in self.radii.iter().zip(&self.values).zip(&self.accuracy) {
            let _ = writeln!(s, "{r:.16e} {v:.16e} {a:.16e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(FORMAT_TAG) {
            return Err(Error::Format(format!("missing header line `{FORMAT_TAG}`")));
        }
        let header = lines.next().ok_or_else(|| Error::Format("missing parameter line".into()))?;
        let mut kv = std::collections::BTreeMap::new();
        for item in header.split_whitespace() {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header field `{item}`")))?;
            kv.insert(k, v);
        }
        let get = |k: &str| -> Result<&str> {
            kv.get(k).copied().ok_or_else(|| Error::Format(format!("header lacks `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse::<f64>().map_err(|e| Error::Format(format!("`{k}`: {e}")))
        };
        let real = |k: &str| -> Result<Real> { get(k)?.parse::<Real>() };
        let dim: u32 = get("dim")?.parse().map_err(|e| Error::Format(format!("`dim`: {e}")))?;
        let params = ProblemParams::new(real("alpha")?, real("beta")?, dim, Real::int(0))?;
        let grid = ProfileGrid {
            r_min: num("r_min")?,
            r_max: num("r_max")?,
            points: get("points")?.parse().map_err(|e| Error::Format(format!("`points`: {e}")))?,
        };
        let mlf = MlfAccuracy {
            rel_tol: num("mlf_rel_tol")?,
            series_terms_max: get("mlf_series_terms_max")?
                .parse()
                .map_err(|e| Error::Format(format!("`mlf_series_terms_max`: {e}")))?,
            regime_switch_lo: num("mlf_switch_lo")?,
            regime_switch_hi: num("mlf_switch_hi")?,
        };
        let mut radii = Vec::with_capacity(grid.points);
        let mut values = Vec::with_capacity(grid.points);
        let mut accuracy = Vec::with_capacity(grid.points);
        for (no, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split_whitespace()
                .map(|w| w.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("data line {}: {e}", no + 3)))?;
            if f.len() != 3 {
                return Err(Error::Format(format!("data line {} needs 3 fields", no + 3)));
            }
            radii.push(f[0]);
            values.push(f[1]);
            accuracy.push(f[2]);
        }
        if radii.len() != grid.points {
            return Err(Error::Format(format!(
                "expected {} data lines, found {}",
                grid.points,
                radii.len()
            )));
        }
        Self::assemble(params, grid, mlf, radii, values, accuracy)
    }
}

/// Composite Simpson on equispaced samples; the 3/8 rule closes an odd
/// number of intervals.
fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    if n == 1 {
        return 0.5 * h * (f[0] + f[1]);
    }
    let (even_end, tail) = if n % 2 == 0 { (n, 0.0) } else {
        let k = n - 3;
        (k, 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]))
    };
    let mut s = f[0] + f[even_end];
    for i in 1..even_end {
        s += if i % 2 == 1 { 4.0 * f[i] } else { 2.0 * f[i] };
    }
    s * h / 3.0 + tail
}

/// Range of a compensated ratio over a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub label: String,
    pub window: (f64, f64),
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl Band {
    pub fn from_samples(
        label: &str,
        window: (f64, f64),
        samples: impl Iterator<Item = Result<f64>>,
    ) -> Result<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut count = 0;
        for v in samples {
            let v = v?;
            min = min.min(v);
            max = max.max(v);
            count += 1;
        }
        if count == 0 {
            return Err(Error::Coverage(format!("no samples for band `{label}` in {window:?}")));
        }
        Ok(Self { label: label.to_string(), window, min, max, samples: count })
    }

    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }

    pub fn is_finite(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandReport {
    pub bands: Vec<Band>,
    pub sigma_fitted: Option<f64>,
}

impl BandReport {
    /// Largest relative change of any band endpoint against `other`.
    pub fn max_relative_change(&self, other: &BandReport) -> f64 {
        self.bands
            .iter()
            .zip(&other.bands)
            .flat_map(|(a, b)| [(a.min, b.min), (a.max, b.max)])
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
            .fold(0.0, f64::max)
    }
}
