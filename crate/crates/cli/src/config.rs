//! Experiment configuration (TOML), validated before any computation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nlheat_core::mildsol::SolverOptions;
use nlheat_core::norms::SeriesOptions;
use nlheat_core::{
    Exponent, Forcing, MlfAccuracy, ProblemParams, ProfileGrid, Real, RegionSpec, SpatialProfile,
};
use serde::{Deserialize, Serialize};

/// Marks errors that should exit with the configuration status.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub alpha: Real,
    pub beta: Real,
    pub dim: u32,
    pub gamma: Real,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseBlock {
    /// Defaults to a label built from `p`, `γ` and the region.
    pub name: Option<String>,
    pub p: Exponent,
    pub region: RegionSpec,
    /// Overrides `params.gamma` for this case.
    pub gamma: Option<Real>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesBlock {
    pub t_lo: f64,
    pub t_hi: f64,
    pub count: usize,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance of Mittag-Leffler evaluation.
    pub mlf: f64,
    /// Relative tolerance of the radial Fourier inversion.
    pub quadrature: f64,
    pub slope_tol: f64,
    pub band_max_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mlf: 1e-10, quadrature: 1e-10, slope_tol: 0.1, band_max_ratio: 3.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub profile: String,
    pub report: String,
    pub rates: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            profile: "profile.txt".into(),
            report: "report.json".into(),
            rates: "rates.csv".into(),
        }
    }
}

/// `(γ, p)` grid for `predict`; defaults cover every regime of the config.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictBlock {
    pub gammas: Vec<Real>,
    pub p: Vec<Exponent>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub params: ParamsBlock,
    pub forcing: SpatialProfile,
    #[serde(default)]
    pub cases: Vec<CaseBlock>,
    pub times: TimesBlock,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub predict: PredictBlock,
    #[serde(default)]
    pub profile_grid: ProfileGrid,
    /// Radial grid density of solution slices.
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
}

fn default_ppd() -> usize {
    64
}

/// A validated case.
#[derive(Clone, Debug)]
pub struct Case {
    pub name: String,
    pub params: ProblemParams,
    pub p: Exponent,
    pub region: RegionSpec,
}

/// A validated experiment.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub params: ProblemParams,
    pub spatial: SpatialProfile,
    pub cases: Vec<Case>,
    pub times: Vec<f64>,
    pub window: (f64, f64),
    pub tolerances: Tolerances,
    pub output: OutputBlock,
    pub predict_gammas: Vec<Real>,
    pub predict_p: Vec<Exponent>,
    pub profile_grid: ProfileGrid,
    pub mlf: MlfAccuracy,
    pub series: SeriesOptions,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).with_context(|| format!("config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        Self::validate(raw)
    }

    fn validate(raw: RawConfig) -> Result<Self> {
        let p = &raw.params;
        let params = ProblemParams::new(p.alpha, p.beta, p.dim, p.gamma).map_err(|e| invalid(format!("params: {e}")))?;
        raw.forcing.validate().map_err(|e| invalid(format!("forcing: {e}")))?;

        let t = &raw.times;
        if !(t.t_lo >= 1.0 && t.t_hi > t.t_lo && t.t_hi.is_finite()) {
            return Err(invalid(format!("times: need 1 ≤ t_lo < t_hi, got [{}, {}]", t.t_lo, t.t_hi)));
        }
        if t.count < 5 {
            return Err(invalid(format!("times: slope fits need count ≥ 5, got {}", t.count)));
        }
        let tol = &raw.tolerances;
        let positive = [("mlf", tol.mlf), ("quadrature", tol.quadrature), ("slope_tol", tol.slope_tol)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if !(tol.quadrature < 1e-3) {
            return Err(invalid(format!("tolerances.quadrature must be below 1e-3, got {}", tol.quadrature)));
        }
        if !(tol.band_max_ratio > 1.0) {
            return Err(invalid(format!("tolerances.band_max_ratio must exceed 1, got {}", tol.band_max_ratio)));
        }
        let mlf = MlfAccuracy { rel_tol: tol.mlf, ..MlfAccuracy::default() };
        mlf.validate().map_err(|e| invalid(format!("tolerances.mlf: {e}")))?;
        raw.profile_grid.validate().map_err(|e| invalid(format!("profile_grid: {e}")))?;
        if !(8..=1024).contains(&raw.points_per_decade) {
            return Err(invalid(format!("points_per_decade must lie in [8, 1024], got {}", raw.points_per_decade)));
        }

        let mut cases = Vec::with_capacity(raw.cases.len());
        for (i, c) in raw.cases.iter().enumerate() {
            let case_params = match c.gamma {
                Some(g) => ProblemParams::new(p.alpha, p.beta, p.dim, g).map_err(|e| invalid(format!("cases[{i}]: {e}")))?,
                None => params,
            };
            if c.p.value() < 1.0 {
                return Err(invalid(format!("cases[{i}]: p must be ≥ 1, got {}", c.p)));
            }
            c.region.validate(&case_params).map_err(|e| invalid(format!("cases[{i}]: {e}")))?;
            let name = c
                .name
                .clone()
                .unwrap_or_else(|| format!("{} p={} γ={}", c.region.label(), c.p, case_params.gamma_real()));
            if cases.iter().any(|k: &Case| k.name == name) {
                return Err(invalid(format!("cases[{i}]: duplicate case name `{name}`")));
            }
            cases.push(Case { name, params: case_params, p: c.p, region: c.region });
        }

        let crit = nlheat_core::params::critical_exponents(&params);
        let predict_gammas = if raw.predict.gammas.is_empty() {
            let alpha = params.alpha_real();
            let mut g = vec![Real::int(0), Real::ratio(1, 2), Real::int(1), Real::int(1).add(alpha), Real::int(2), Real::int(3)];
            g.sort_by(|a, b| a.compare(b));
            g.dedup_by(|a, b| a.compare(b).is_eq());
            g
        } else {
            raw.predict.gammas.clone()
        };
        let predict_p = if raw.predict.p.is_empty() {
            let mut ps = vec![Exponent::ratio(1, 1), Exponent::Finite(crit.p_c), Exponent::Finite(crit.p_star), Exponent::ratio(10, 1), Exponent::Infinity];
            let mid = Exponent::Finite(crit.p_c.add(crit.p_star).div(Real::int(2)));
            ps.insert(2, mid);
            ps
        } else {
            raw.predict.p.clone()
        };
        if let Some(bad) = predict_p.iter().find(|e| e.value() < 1.0) {
            return Err(invalid(format!("predict.p entries must be ≥ 1, got {bad}")));
        }
        if let Some(bad) = predict_gammas.iter().find(|g| !g.value().is_finite()) {
            return Err(invalid(format!("predict.gammas entries must be finite, got {bad}")));
        }

        let solver = SolverOptions { hankel_rel_tol: tol.quadrature, ..SolverOptions::default() };
        Ok(Self {
            params,
            spatial: raw.forcing,
            cases,
            times: nlheat_core::norms::geometric_times(t.t_lo, t.t_hi, t.count),
            window: (t.t_lo, t.t_hi),
            tolerances: raw.tolerances,
            output: raw.output,
            predict_gammas,
            predict_p,
            profile_grid: raw.profile_grid,
            mlf,
            series: SeriesOptions { points_per_decade: raw.points_per_decade, solver },
        })
    }

    pub fn forcing(&self, params: &ProblemParams) -> Result<Forcing> {
        Forcing::new(params.gamma_real(), self.spatial.clone()).map_err(|e| invalid(format!("forcing: {e}")))
    }

    /// Cases whose name contains `filter`.
    pub fn selected_cases(&self, filter: Option<&str>) -> Vec<Case> {
        self.cases.iter().filter(|c| filter.is_none_or(|f| c.name.contains(f))).cloned().collect()
    }

    /// Distinct regions across all cases, `Global` if there are none.
    pub fn regions(&self) -> Vec<RegionSpec> {
        let mut out: Vec<RegionSpec> = Vec::new();
        for c in &self.cases {
            if !out.contains(&c.region) {
                out.push(c.region);
            }
        }
        if out.is_empty() {
            out.push(RegionSpec::Global);
        }
        out
    }
}

/// Rejects unsupported combinations early.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    if dir.exists() && !dir.is_dir() {
        bail!(ConfigError(format!("output path {} is not a directory", dir.display())));
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
