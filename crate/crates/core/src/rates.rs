//! Predicted decay/growth rates of region-restricted norms, power-law
//! fitting of computed series and compensated band checks.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelProfile;
use crate::mildsol::{Forcing, RadialSolutionSlice};
use crate::norms::{region_norm, slice_radii, NormSeries, RegionSpec, SeriesOptions};
use crate::params::{classify_p, critical_exponents, Exponent, PRegime, ProblemParams, Real};

/// `t^{t_exp} g(t)^{g_exp} (log t)^{log_exp}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateMonomial {
    pub t_exp: Real,
    pub log_exp: u8,
    pub g_exp: Real,
}

impl RateMonomial {
    pub fn power(t_exp: Real) -> Self {
        Self { t_exp, log_exp: 0, g_exp: Real::int(0) }
    }

    pub fn log(t_exp: Real) -> Self {
        Self { t_exp, log_exp: 1, g_exp: Real::int(0) }
    }

    fn with_g(self, g_exp: Real) -> Self {
        Self { g_exp, ..self }
    }

    /// Exponent of `t` once `g(t) = t^θ` is substituted.
    pub fn combined_exponent(&self, theta: f64) -> f64 {
        self.t_exp.value() + theta * self.g_exp.value()
    }

    pub fn eval(&self, t: f64, theta: f64) -> f64 {
        t.powf(self.combined_exponent(theta)) * t.ln().powi(i32::from(self.log_exp))
    }

    fn same(&self, other: &Self) -> bool {
        self.log_exp == other.log_exp
            && self.t_exp.compare(&other.t_exp) == Ordering::Equal
            && self.g_exp.compare(&other.g_exp) == Ordering::Equal
    }
}

/// Max-envelope of monomials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePrediction {
    pub monomials: Vec<RateMonomial>,
    pub boundary_flag: bool,
    /// `θ` in `g(t) = t^θ`; zero outside intermediate regions.
    pub theta: f64,
    /// Region and branch label of the table row.
    pub row: String,
}

impl RatePrediction {
    fn new(mut monomials: Vec<RateMonomial>, boundary_flag: bool, theta: f64, row: String) -> Self {
        let mut uniq: Vec<RateMonomial> = Vec::new();
        for m in monomials.drain(..) {
            if !uniq.iter().any(|u| u.same(&m)) {
                uniq.push(m);
            }
        }
        Self { monomials: uniq, boundary_flag, theta, row }
    }

    /// Asymptotically largest monomial; log powers break exponent ties.
    pub fn dominant(&self) -> RateMonomial {
        *self
            .monomials
            .iter()
            .max_by(|a, b| {
                let (ea, eb) = (a.combined_exponent(self.theta), b.combined_exponent(self.theta));
                if (ea - eb).abs() <= 1e-12 {
                    a.log_exp.cmp(&b.log_exp)
                } else {
                    ea.total_cmp(&eb)
                }
            })
            .expect("predictions are nonempty")
    }

    pub fn dominant_exponent(&self) -> f64 {
        self.dominant().combined_exponent(self.theta)
    }

    /// Whether a log factor is present in the dominant term.
    pub fn is_log_corrected(&self) -> bool {
        self.dominant().log_exp > 0
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.monomials.iter().map(|m| m.eval(t, self.theta)).fold(0.0, f64::max)
    }
}

/// `α − (αN/2β)(1 − 1/p)`.
fn exterior_shift(params: &ProblemParams, p: Exponent) -> Real {
    params.alpha_real().sub(params.alpha_n_over_two_beta().mul(p.conjugate_factor()))
}

/// Three-branch table shared by the exterior and the subcritical global case.
fn diffusive_rows(params: &ProblemParams, p: Exponent, name: &str) -> RatePrediction {
    let g = params.gamma_real();
    let shift = exterior_shift(params, p);
    let one = Real::int(1);
    match g.compare(&one) {
        Ordering::Less => {
            RatePrediction::new(vec![RateMonomial::power(shift.sub(g))], false, 0.0, format!("{name}: γ<1"))
        }
        Ordering::Equal => {
            RatePrediction::new(vec![RateMonomial::log(shift.sub(one))], true, 0.0, format!("{name}: γ=1"))
        }
        Ordering::Greater => {
            RatePrediction::new(vec![RateMonomial::power(shift.sub(one))], false, 0.0, format!("{name}: γ>1"))
        }
    }
}

/// Rows `t^{−γ}` below and `second` above the threshold `γ₀`, both at equality.
fn split_rows(
    gamma: Real,
    threshold: Real,
    second: RateMonomial,
    p_boundary: bool,
    name: &str,
    labels: [&str; 3],
) -> RatePrediction {
    let first = RateMonomial::power(gamma.neg());
    match gamma.compare(&threshold) {
        Ordering::Less => RatePrediction::new(vec![first], p_boundary, 0.0, format!("{name}: {}", labels[0])),
        Ordering::Equal => RatePrediction::new(vec![first, second], true, 0.0, format!("{name}: {}", labels[1])),
        Ordering::Greater => RatePrediction::new(vec![second], p_boundary, 0.0, format!("{name}: {}", labels[2])),
    }
}

/// The rate table for `‖u(·,t)‖_{Lᵖ(region)}` as `t → ∞`.
pub fn predict(params: &ProblemParams, p: Exponent, region: &RegionSpec) -> RatePrediction {
    let g = params.gamma_real();
    let one = Real::int(1);
    let one_plus_alpha = one.add(params.alpha_real());
    match *region {
        RegionSpec::Exterior { .. } => diffusive_rows(params, p, "exterior"),
        RegionSpec::Compact { .. } => split_rows(
            g,
            one_plus_alpha,
            RateMonomial::power(one_plus_alpha.neg()),
            false,
            "compact",
            ["γ<1+α", "γ=1+α", "γ>1+α"],
        ),
        RegionSpec::Intermediate { theta, .. } => {
            let two_beta = Real::int(2).mul(params.beta_real());
            let pre = two_beta.sub(params.dim_real().mul(p.conjugate_factor()));
            let late = RateMonomial::power(one_plus_alpha.neg()).with_g(pre.add(two_beta));
            let (monos, flag, label) = match g.compare(&one) {
                Ordering::Less => (vec![RateMonomial::power(g.neg()).with_g(pre)], false, "γ<1"),
                Ordering::Equal => (
                    vec![RateMonomial::power(one.neg()).with_g(pre), RateMonomial { log_exp: 1, ..late }],
                    true,
                    "γ=1",
                ),
                Ordering::Greater => (vec![RateMonomial::power(g.neg()).with_g(pre), late], false, "γ>1"),
            };
            let mut pred = RatePrediction::new(monos, flag, theta, format!("intermediate: {label}"));
            if pred.monomials.len() == 2 {
                let e: Vec<f64> = pred.monomials.iter().map(|m| m.combined_exponent(theta)).collect();
                pred.boundary_flag |= (e[0] - e[1]).abs() <= 1e-12;
            }
            pred
        }
        RegionSpec::Global => match classify_p(params, p) {
            PRegime::Subcritical => diffusive_rows(params, p, "global p<p_c"),
            PRegime::Critical => {
                if g.compare(&one) != Ordering::Greater {
                    RatePrediction::new(vec![RateMonomial::log(g.neg())], true, 0.0, "global p=p_c: γ≤1".into())
                } else {
                    RatePrediction::new(vec![RateMonomial::power(one.neg())], true, 0.0, "global p=p_c: γ>1".into())
                }
            }
            PRegime::MidSupercritical => {
                let shift = exterior_shift(params, p);
                let gamma_star = one.sub(shift);
                split_rows(
                    g,
                    gamma_star,
                    RateMonomial::power(shift.sub(one)),
                    false,
                    "global p_c<p<p_*",
                    ["γ<γ*", "γ=γ*", "γ>γ*"],
                )
            }
            PRegime::PStar => {
                if g.compare(&one_plus_alpha) == Ordering::Less {
                    RatePrediction::new(vec![RateMonomial::power(g.neg())], true, 0.0, "global p=p_*: γ<1+α".into())
                } else {
                    RatePrediction::new(
                        vec![RateMonomial::log(one_plus_alpha.neg())],
                        true,
                        0.0,
                        "global p=p_*: γ≥1+α".into(),
                    )
                }
            }
            PRegime::AbovePStar => split_rows(
                g,
                one_plus_alpha,
                RateMonomial::power(one_plus_alpha.neg()),
                false,
                "global p>p_*",
                ["γ<1+α", "γ=1+α", "γ>1+α"],
            ),
        },
    }
}

/// Least-squares line through `(log t, log value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

pub fn fit_power(series: &NormSeries, window: (f64, f64)) -> Result<FitResult> {
    fit_points(&series.times, &series.values, window)
}

pub fn fit_points(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let tol = 1e-12 * window.1;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 * (1.0 - 1e-12) && **t <= window.1 + tol)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Domain(format!(
            "fit needs ≥ 5 points in [{}, {}], got {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Domain(format!("nonpositive value {v:e} at t = {t}: solver noise floor reached")));
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= 1e-300 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, window })
}

/// Range of `value(t)/envelope(t)` over a series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompensatedBand {
    pub min: f64,
    pub max: f64,
}

impl CompensatedBand {
    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }
}

pub fn check_band(series: &NormSeries, prediction: &RatePrediction) -> CompensatedBand {
    band_points(&series.times, &series.values, prediction)
}

pub fn band_points(times: &[f64], values: &[f64], prediction: &RatePrediction) -> CompensatedBand {
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for (t, v) in times.iter().zip(values) {
        let c = v / prediction.envelope(*t);
        min = min.min(c);
        max = max.max(c);
    }
    CompensatedBand { min, max }
}

/// `M_∞ = ‖h‖₁ ∫₀^∞ (1+s)^{−γ} ds = ‖h‖₁/(γ−1)`.
pub fn total_forcing_mass(params: &ProblemParams, forcing: &Forcing) -> Result<f64> {
    let g = forcing.gamma();
    if !(g > 1.0) {
        return Err(Error::Domain(format!("total forcing mass is infinite for γ = {g} ≤ 1")));
    }
    Ok(forcing.spatial.l1_mass(params.dim()) / (g - 1.0))
}

/// `t^{1−α+(αN/2β)(1−1/p)} ‖u(·,t) − M_∞Y(·,t)‖_{Lᵖ}` from a slice at `t`.
pub fn limit_profile_deviation_from_slice(
    params: &ProblemParams,
    profile: &KernelProfile,
    forcing: &Forcing,
    p: Exponent,
    slice: &RadialSolutionSlice,
) -> Result<f64> {
    let crit = critical_exponents(params);
    if p.compare(&crit.p_c) != Ordering::Less || p.value() < 1.0 {
        return Err(Error::Domain(format!("limit profile needs 1 ≤ p < p_c = {}, got {p}", crit.p_c)));
    }
    let m_inf = total_forcing_mass(params, forcing)?;
    let t = slice.t;
    let values: Vec<f64> = slice
        .radii
        .iter()
        .zip(&slice.values)
        .map(|(r, u)| Ok(u - m_inf * profile.eval_y(*r, t)?))
        .collect::<Result<_>>()?;
    let diff = RadialSolutionSlice::new(t, slice.radii.clone(), values, slice.accuracy.clone())?;
    let norm = region_norm(&diff, p, &RegionSpec::Global, params)?.value;
    let w = Real::int(1).sub(exterior_shift(params, p)).value();
    Ok(t.powf(w) * norm)
}

/// Compensated deviation from the limit profile at time `t`.
pub fn limit_profile_deviation(
    params: &ProblemParams,
    profile: &KernelProfile,
    forcing: &Forcing,
    p: Exponent,
    t: f64,
    opts: &SeriesOptions,
) -> Result<f64> {
    if !(forcing.gamma() > 1.0) {
        return Err(Error::Domain(format!("limit profile needs γ > 1, got {}", forcing.gamma())));
    }
    let crit = critical_exponents(params);
    if p.compare(&crit.p_c) != Ordering::Less || p.value() < 1.0 {
        return Err(Error::Domain(format!("limit profile needs 1 ≤ p < p_c = {}, got {p}", crit.p_c)));
    }
    let radii = slice_radii(params, &[RegionSpec::Global], t, opts.points_per_decade);
    let slice = crate::mildsol::solve_radial(params, forcing, t, &radii, &opts.solver)?;
    limit_profile_deviation_from_slice(params, profile, forcing, p, &slice)
}

/// How a case is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseMethod {
    Slope,
    Band,
}

/// One verification case in a JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub params: ProblemParams,
    pub p: String,
    pub region: RegionSpec,
    pub row: String,
    pub prediction: RatePrediction,
    pub method: CaseMethod,
    pub predicted_exponent: f64,
    pub fit: Option<FitResult>,
    pub band: Option<CompensatedBand>,
    pub slope_tol: f64,
    pub band_max_ratio: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

/// Judge a series against its prediction: slope for pure powers, band for
/// log-corrected or boundary rows.
pub fn judge_series(
    name: &str,
    series: &NormSeries,
    window: (f64, f64),
    slope_tol: f64,
    band_max_ratio: f64,
) -> CaseReport {
    let prediction = predict(&series.params, series.p, &series.region);
    let method = if prediction.is_log_corrected() || prediction.boundary_flag { CaseMethod::Band } else { CaseMethod::Slope };
    let predicted_exponent = prediction.dominant_exponent();
    let band = Some(check_band(series, &prediction));
    let (fit, error) = match fit_power(series, window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let pass = match method {
        CaseMethod::Slope => fit.is_some_and(|f| (f.slope - predicted_exponent).abs() <= slope_tol),
        CaseMethod::Band => band.is_some_and(|b| b.min > 0.0 && b.ratio() < band_max_ratio),
    };
    CaseReport {
        name: name.to_string(),
        params: series.params,
        p: series.p.to_string(),
        region: series.region,
        row: prediction.row.clone(),
        prediction,
        method,
        predicted_exponent,
        fit,
        band,
        slope_tol,
        band_max_ratio,
        times: series.times.clone(),
        values: series.values.clone(),
        pass,
        error,
    }
}

/// Report entry for a case that could not be computed.
pub fn failed_case(
    name: &str,
    params: &ProblemParams,
    p: Exponent,
    region: RegionSpec,
    slope_tol: f64,
    band_max_ratio: f64,
    err: &Error,
) -> CaseReport {
    let prediction = predict(params, p, &region);
    CaseReport {
        name: name.to_string(),
        params: *params,
        p: p.to_string(),
        region,
        row: prediction.row.clone(),
        predicted_exponent: prediction.dominant_exponent(),
        method: if prediction.is_log_corrected() || prediction.boundary_flag { CaseMethod::Band } else { CaseMethod::Slope },
        prediction,
        fit: None,
        band: None,
        slope_tol,
        band_max_ratio,
        times: vec![],
        values: vec![],
        pass: false,
        error: Some(err.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(gamma: f64) -> ProblemParams {
        ProblemParams::from_f64(0.5, 1.0, 5, gamma).unwrap()
    }

    #[test]
    fn spec_rows() {
        let pr = predict(&a(2.0), Exponent::ratio(2, 1), &RegionSpec::Exterior { nu: 1.0 });
        assert_eq!(pr.monomials, vec![RateMonomial::power(Real::ratio(-9, 8))]);
        let pr = predict(&a(0.5), Exponent::ratio(3, 1), &RegionSpec::Compact { r0: 2.0 });
        assert_eq!(pr.dominant_exponent(), -0.5);
        let pr = predict(&a(0.0), Exponent::ratio(5, 3), &RegionSpec::Global);
        assert_eq!(pr.dominant(), RateMonomial::log(Real::int(0)));
        let pr = predict(&a(2.0), Exponent::Infinity, &RegionSpec::Intermediate { nu: 1.0, mu: 2.0, theta: 0.1 });
        assert!((pr.dominant_exponent() + 1.6).abs() < 1e-12);
    }

    #[test]
    fn fit_examples() {
        let times: Vec<f64> = crate::quad::geomspace(1e2, 1e4, 13);
        let v: Vec<f64> = times.iter().map(|t| 7.0 * t.powf(-1.25)).collect();
        let f = fit_points(&times, &v, (1e2, 1e4)).unwrap();
        assert!((f.slope + 1.25).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let v: Vec<f64> = times.iter().map(|t| t.ln() / t).collect();
        let f = fit_points(&times, &v, (1e2, 1e4)).unwrap();
        assert!(f.slope > -1.0 && f.slope < -0.8, "{}", f.slope);
        let f = fit_points(&times, &[3.0; 13], (1e2, 1e4)).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(fit_points(&times[..4], &[1.0; 4], (1e2, 1e4)).is_err());
        let mut bad = vec![1.0; 13];
        bad[3] = -1e-20;
        assert!(fit_points(&times, &bad, (1e2, 1e4)).is_err());
    }

    #[test]
    fn band_examples() {
        let times: Vec<f64> = crate::quad::geomspace(1e2, 1e4, 13);
        let pr = predict(&a(2.0), Exponent::ratio(2, 1), &RegionSpec::Exterior { nu: 1.0 });
        let exact: Vec<f64> = times.iter().map(|t| pr.envelope(*t)).collect();
        let b = band_points(&times, &exact, &pr);
        assert!((b.ratio() - 1.0).abs() < 1e-12);
        let third: Vec<f64> = exact.iter().map(|v| v / 3.0).collect();
        let b = band_points(&times, &third, &pr);
        assert!((b.ratio() - 1.0).abs() < 1e-12 && (b.max - 1.0 / 3.0).abs() < 1e-12);
        let off: Vec<f64> = times.iter().map(|t| pr.envelope(*t) * t.powf(0.25)).collect();
        let b = band_points(&times, &off, &pr);
        assert!((b.ratio() - 10f64.sqrt()).abs() < 1e-9);
    }
}
