//! Region-restricted `Lᵖ` norms of radial slices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mildsol::{solve_radial_with_table, Forcing, ModeTable, RadialSolutionSlice, SolverOptions};
use crate::params::{Exponent, ProblemParams};
use crate::quad::{geomspace, GaussLegendre};
use crate::specfun::unit_sphere_area;

/// Radial region, possibly moving with `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Global,
    /// `|x| ≥ ν t^{α/(2β)}`.
    Exterior { nu: f64 },
    /// The ball `|x| ≤ R0`.
    Compact { r0: f64 },
    /// `ν ≤ |x|/t^θ ≤ μ`.
    Intermediate { nu: f64, mu: f64, theta: f64 },
}

impl RegionSpec {
    pub fn validate(&self, params: &ProblemParams) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        match *self {
            Self::Global => Ok(()),
            Self::Exterior { nu } if !(nu > 0.0 && nu.is_finite()) => bad(format!("exterior needs ν > 0, got {nu}")),
            Self::Compact { r0 } if !(r0 > 0.0 && r0.is_finite()) => bad(format!("compact needs R0 > 0, got {r0}")),
            Self::Intermediate { nu, mu, theta } => {
                let a = params.diffusive_exponent();
                if !(nu > 0.0 && mu > nu && mu.is_finite()) {
                    bad(format!("intermediate needs 0 < ν < μ, got ν = {nu}, μ = {mu}"))
                } else if !(theta > 0.0 && theta < a) {
                    bad(format!("intermediate needs 0 < θ < α/(2β) = {a}, got θ = {theta}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Radial interval `[a, b]` at time `t`; `b` may be infinite.
    pub fn interval(&self, params: &ProblemParams, t: f64) -> (f64, f64) {
        match *self {
            Self::Global => (0.0, f64::INFINITY),
            Self::Exterior { nu } => (nu * t.powf(params.diffusive_exponent()), f64::INFINITY),
            Self::Compact { r0 } => (0.0, r0),
            Self::Intermediate { nu, mu, theta } => {
                let g = t.powf(theta);
                (nu * g, mu * g)
            }
        }
    }

    /// `g(t)` exponent for intermediate regions, zero otherwise.
    pub fn g_exponent(&self) -> f64 {
        match *self {
            Self::Intermediate { theta, .. } => theta,
            _ => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Global => "global".into(),
            Self::Exterior { nu } => format!("exterior(nu={nu})"),
            Self::Compact { r0 } => format!("compact(R0={r0})"),
            Self::Intermediate { nu, mu, theta } => format!("intermediate(nu={nu},mu={mu},theta={theta})"),
        }
    }
}

/// Norm value with a propagated relative accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionNorm {
    pub value: f64,
    pub accuracy: f64,
}

fn interp(slice: &RadialSolutionSlice, i: usize, r: f64) -> f64 {
    let (r0, r1) = (slice.radii[i], slice.radii[i + 1]);
    let (u0, u1) = (slice.values[i], slice.values[i + 1]);
    if u0 * u1 > 0.0 {
        let s = (u1 / u0).ln() / (r1 / r0).ln();
        u0 * (r / r0).powf(s)
    } else {
        u0 + (u1 - u0) * (r - r0) / (r1 - r0)
    }
}

/// `∫_x^y |u|ᵖ r^{N−1} dr` on cell `i` of the slice.
fn cell_integral(slice: &RadialSolutionSlice, i: usize, x: f64, y: f64, p: f64, n: f64, rule: &GaussLegendre) -> f64 {
    let (r0, r1) = (slice.radii[i], slice.radii[i + 1]);
    let (u0, u1) = (slice.values[i], slice.values[i + 1]);
    if u0 * u1 > 0.0 {
        // power law: exact
        let s = (u1 / u0).ln() / (r1 / r0).ln();
        let e = p * s + n;
        let (lx, ly) = ((x / r0).ln(), (y / r0).ln());
        let scale = u0.abs().powf(p) * r0.powf(n);
        if (e * (ly - lx)).abs() < 1e-8 {
            scale * (ly - lx) * (1.0 + 0.5 * e * (ly + lx))
        } else {
            scale * ((e * ly).exp() - (e * lx).exp()) / e
        }
    } else {
        rule.integrate(x, y, |r: f64| interp(slice, i, r).abs().powf(p) * r.powf(n - 1.0))
    }
}

/// `‖u(·,t)‖_{Lᵖ(region(t))}` from a slice, with a relative accuracy
/// estimate weighted by the local contributions.
pub fn region_norm(
    slice: &RadialSolutionSlice,
    p: Exponent,
    region: &RegionSpec,
    params: &ProblemParams,
) -> Result<RegionNorm> {
    region.validate(params)?;
    let (a, b) = region.interval(params, slice.t);
    let radii = &slice.radii;
    let vals = &slice.values;
    let last = radii.len() - 1;
    let (r_lo, r_hi) = (radii[0], radii[last]);
    if a > 0.0 && a < r_lo {
        return Err(Error::Coverage(format!("slice at t = {} misses [{a:e}, {r_lo:e})", slice.t)));
    }
    if b.is_finite() && b > r_hi {
        return Err(Error::Coverage(format!("slice at t = {} misses ({r_hi:e}, {b:e}]", slice.t)));
    }
    if a >= b {
        return Ok(RegionNorm { value: 0.0, accuracy: 0.0 });
    }
    let acc_of = |i: usize| if slice.accuracy[i].is_finite() { slice.accuracy[i] } else { 1.0 };
    let cell_of = |r: f64| radii.partition_point(|x| *x <= r).clamp(1, last) - 1;

    if p.is_infinite() {
        let mut best = (0.0f64, 0.0f64);
        let mut consider = |v: f64, acc: f64| {
            if v.abs() > best.0 {
                best = (v.abs(), acc);
            }
        };
        for i in 0..=last {
            if radii[i] >= a && radii[i] <= b {
                consider(vals[i], acc_of(i));
            }
        }
        if a == 0.0 {
            consider(vals[0], acc_of(0));
        } else if a <= r_hi {
            let i = cell_of(a);
            consider(interp(slice, i, a), acc_of(i).max(acc_of(i + 1)));
        }
        if b < r_hi {
            let i = cell_of(b);
            consider(interp(slice, i, b), acc_of(i).max(acc_of(i + 1)));
        }
        return Ok(RegionNorm { value: best.0, accuracy: best.1 });
    }

    let pv = p.value();
    let n = params.dim() as f64;
    let rule = GaussLegendre::new(8);
    let mut total = 0.0;
    let mut weighted_acc = 0.0;
    if a < r_lo {
        // continue the first cell's power law to the origin; bounded
        // slices have a slope near zero
        let s = if vals[0] * vals[1] > 0.0 { (vals[1] / vals[0]).ln() / (radii[1] / r_lo).ln() } else { 0.0 };
        let e = pv * s.min(0.0) + n;
        if e <= 0.0 {
            return Err(Error::Coverage(format!(
                "slice at t = {} is not p-integrable near the origin (local slope {s:.3})",
                slice.t
            )));
        }
        let c = vals[0].abs().powf(pv) * r_lo.powf(n) / e;
        total += c;
        weighted_acc += c * acc_of(0);
    }
    for i in 0..last {
        let (x, y) = (radii[i].max(a), radii[i + 1].min(b));
        if x >= y {
            continue;
        }
        let c = cell_integral(slice, i, x, y, pv, n, &rule);
        total += c;
        weighted_acc += c * acc_of(i).max(acc_of(i + 1));
    }
    if b.is_infinite() && a < f64::INFINITY {
        let start = a.max(r_hi);
        let (u1, u0) = (vals[last], vals[last - 1]);
        let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // values at the noise floor carry no usable tail
        let noise = u1.abs() <= 1e-12 * peak;
        let s = if u0 * u1 > 0.0 { (u1 / u0).ln() / (r_hi / radii[last - 1]).ln() } else { f64::NAN };
        let e = pv * s + n;
        if e < 0.0 {
            let u_start = u1 * (start / r_hi).powf(s);
            let c = u_start.abs().powf(pv) * start.powf(n) / -e;
            total += c;
            weighted_acc += c * acc_of(last);
        } else if !noise {
            return Err(Error::Coverage(if s.is_nan() {
                format!("slice at t = {} ends at {r_hi:e} before u settles into a tail", slice.t)
            } else {
                format!("tail beyond {r_hi:e} not integrable at t = {} (local slope {s:.3})", slice.t)
            }));
        }
    }
    let omega = unit_sphere_area(params.dim());
    let value = (omega * total).powf(1.0 / pv);
    let accuracy = if total > 0.0 { weighted_acc / total / pv } else { 0.0 };
    Ok(RegionNorm { value, accuracy })
}

/// `(ω_{N−1} ∫ |u|ᵖ r^{N−1} dr)^{1/p}` over the region at the slice time.
pub fn lp_norm_region(
    slice: &RadialSolutionSlice,
    p: Exponent,
    region: &RegionSpec,
    params: &ProblemParams,
) -> Result<f64> {
    Ok(region_norm(slice, p, region, params)?.value)
}

/// Lebesgue measure of the region at time `t`.
pub fn region_measure(region: &RegionSpec, params: &ProblemParams, t: f64) -> f64 {
    let (a, b) = region.interval(params, t);
    let n = params.dim();
    unit_sphere_area(n) / n as f64 * (b.powi(n as i32) - a.powi(n as i32))
}

/// Radial grid at time `t` covering the default window and every region.
pub fn slice_radii(params: &ProblemParams, regions: &[RegionSpec], t: f64, points_per_decade: usize) -> Vec<f64> {
    let s = t.powf(params.diffusive_exponent());
    let mut lo = (1e-2 * s).min(1e-2);
    let mut hi = (1e2 * s).max(10.0);
    for reg in regions {
        let (a, b) = reg.interval(params, t);
        if a > 0.0 {
            lo = lo.min(0.5 * a);
        }
        if b.is_finite() {
            hi = hi.max(2.0 * b);
        }
    }
    let n = ((hi / lo).log10() * points_per_decade as f64).ceil() as usize + 1;
    geomspace(lo, hi, n)
}

/// Geometric time sequence with `n` points on `[t_lo, t_hi]`.
pub fn geometric_times(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    geomspace(t_lo, t_hi, n)
}

/// Options for slice generation in series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesOptions {
    pub points_per_decade: usize,
    pub solver: SolverOptions,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { points_per_decade: 64, solver: SolverOptions::default() }
    }
}

/// One slice per time, each covering every region.
pub fn solve_slices(
    params: &ProblemParams,
    forcing: &Forcing,
    regions: &[RegionSpec],
    times: &[f64],
    opts: &SeriesOptions,
) -> Result<Vec<RadialSolutionSlice>> {
    times
        .iter()
        .map(|&t| {
            let table = ModeTable::build(params, forcing.gamma(), t, &opts.solver)?;
            let radii = slice_radii(params, regions, t, opts.points_per_decade);
            solve_radial_with_table(params, forcing, &table, &radii, &opts.solver)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSeries {
    pub params: ProblemParams,
    pub forcing: Forcing,
    pub p: Exponent,
    pub region: RegionSpec,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub accuracy: Vec<f64>,
}

impl NormSeries {
    pub fn new(
        params: ProblemParams,
        forcing: Forcing,
        p: Exponent,
        region: RegionSpec,
        times: Vec<f64>,
        values: Vec<f64>,
        accuracy: Vec<f64>,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() || times.len() != accuracy.len() {
            return Err(Error::InvalidParams("series arrays must be nonempty and of equal length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("series times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParams("series values must be nonnegative".into()));
        }
        Ok(Self { params, forcing, p, region, times, values, accuracy })
    }

    pub fn from_slices(
        params: &ProblemParams,
        forcing: &Forcing,
        p: Exponent,
        region: RegionSpec,
        slices: &[RadialSolutionSlice],
    ) -> Result<Self> {
        let norms: Vec<RegionNorm> = slices
            .iter()
            .map(|s| region_norm(s, p, &region, params))
            .collect::<Result<_>>()?;
        Self::new(
            *params,
            forcing.clone(),
            p,
            region,
            slices.iter().map(|s| s.t).collect(),
            norms.iter().map(|n| n.value).collect(),
            norms.iter().map(|n| n.accuracy).collect(),
        )
    }

    /// CSV `t,norm,acc` after a commented metadata block.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "# alpha={} beta={} dim={}", p.alpha_real(), p.beta_real(), p.dim());
        let _ = writeln!(s, "# gamma={} spatial={}", self.forcing.gamma, self.forcing.spatial.describe());
        let _ = writeln!(s, "# p={} region={}", self.p, self.region.label());
        let _ = writeln!(s, "t,norm,acc");
        for ((t, v), a) in self.times.iter().zip(&self.values).zip(&self.accuracy) {
            let _ = writeln!(s, "{t:.16e},{v:.16e},{a:.3e}");
        }
        s
    }
}

/// Solve slices at `times` and reduce each to the region norm.
pub fn norm_series(
    params: &ProblemParams,
    forcing: &Forcing,
    p: Exponent,
    region: RegionSpec,
    times: &[f64],
    opts: &SeriesOptions,
) -> Result<NormSeries> {
    if times.first().is_some_and(|t| *t < 1.0) {
        return Err(Error::Domain("norm series times must be ≥ 1".into()));
    }
    region.validate(params)?;
    let slices = solve_slices(params, forcing, &[region], times, opts)?;
    NormSeries::from_slices(params, forcing, p, region, &slices)
}
