//! `nlheat`: configuration-driven runner for profiles, solutions, norm
//! series, rate predictions and verification reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use nlheat_core::kernel::build_profile;
use nlheat_core::mildsol::{solve_radial_with_table, ModeTable};
use nlheat_core::norms::{slice_radii, solve_slices};
use nlheat_core::params::classify_p;
use nlheat_core::rates::{failed_case, judge_series, predict, CaseReport};
use nlheat_core::{BandReport, KernelProfile, NormSeries, ProblemParams, Real};
use rayon::prelude::*;
use serde::Serialize;

use config::{ensure_dir, Case, ConfigError, ExperimentConfig, Tolerances};

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "nlheat", version, about = "Decay-rate lab for the fully nonlocal heat equation")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent cases.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Only cases whose name contains this string.
    #[arg(long, global = true)]
    case: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the kernel profile and write it as text.
    Profile,
    /// Solve radial slices at the configured times (CSV per time).
    Solve,
    /// Norm series for each case (CSV per case).
    Norms,
    /// Symbolic rate table over a (γ, p) grid (CSV).
    Predict,
    /// Fit or band-check every case and write a JSON report.
    Verify,
    /// Summarize an existing JSON report.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.chain().any(|c| c.downcast_ref::<ConfigError>().is_some()) { EXIT_CONFIG } else { EXIT_NUMERIC };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let path = cli.config.as_deref().ok_or_else(|| anyhow!(ConfigError("--config is required".into())))?;
    let cfg = ExperimentConfig::load(path)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let jobs = cli.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(anyhow!(ConfigError("--jobs must be positive".into())));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    if !matches!(cli.command, Command::Report) {
        ensure_dir(&out)?;
    }
    pool.install(|| match cli.command {
        Command::Profile => cmd_profile(&cfg, &out),
        Command::Solve => cmd_solve(&cfg, &out),
        Command::Norms => cmd_norms(&cfg, &out, cli.case.as_deref()),
        Command::Predict => cmd_predict(&cfg, &out),
        Command::Verify => cmd_verify(&cfg, &out, cli.case.as_deref()),
        Command::Report => cmd_report(&cfg, &out),
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn slug(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    s.trim_matches('_').to_string()
}

fn cmd_profile(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let prof = build_profile(&cfg.params, &cfg.profile_grid, &cfg.mlf).context("building kernel profile")?;
    let path = out.join(&cfg.output.profile);
    write(&path, &prof.to_text())?;
    let fallback = (0..prof.values.len()).filter(|i| prof.is_fallback(*i)).count();
    println!(
        "profile: {} points, {} fallback, reliable up to ξ = {:.3e} -> {}",
        prof.values.len(),
        fallback,
        prof.reliable_max,
        path.display()
    );
    Ok(0)
}

/// Profile from the output directory when it matches, otherwise rebuilt.
fn load_or_build_profile(cfg: &ExperimentConfig, out: &Path) -> Result<KernelProfile> {
    let path = out.join(&cfg.output.profile);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(p) = KernelProfile::from_text(&text) {
            let q = cfg.params;
            if p.params.alpha_real() == q.alpha_real()
                && p.params.beta_real() == q.beta_real()
                && p.params.dim() == q.dim()
                && p.grid == cfg.profile_grid
            {
                return Ok(p);
            }
        }
    }
    let prof = build_profile(&cfg.params, &cfg.profile_grid, &cfg.mlf).context("building kernel profile")?;
    write(&path, &prof.to_text())?;
    Ok(prof)
}

fn cmd_solve(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let dir = out.join("slices");
    ensure_dir(&dir)?;
    let forcing = cfg.forcing(&cfg.params)?;
    let regions = cfg.regions();
    let solver = &cfg.series.solver;
    for (i, &t) in cfg.times.iter().enumerate() {
        let table = ModeTable::build(&cfg.params, forcing.gamma(), t, solver)
            .with_context(|| format!("mode table at t = {t}"))?;
        let radii = slice_radii(&cfg.params, &regions, t, cfg.series.points_per_decade);
        let slice = solve_radial_with_table(&cfg.params, &forcing, &table, &radii, solver)
            .with_context(|| format!("slice at t = {t}"))?;
        let path = dir.join(format!("u_{i:03}.csv"));
        write(&path, &slice.to_csv(&cfg.params, &forcing))?;
    }
    println!("solve: {} slices -> {}", cfg.times.len(), dir.display());
    Ok(0)
}

/// Cases sharing `γ` share slices.
fn group_by_gamma(cases: &[Case]) -> Vec<(Real, Vec<Case>)> {
    let mut groups: Vec<(Real, Vec<Case>)> = Vec::new();
    for c in cases {
        let g = c.params.gamma_real();
        match groups.iter_mut().find(|(k, _)| k.compare(&g).is_eq()) {
            Some((_, v)) => v.push(c.clone()),
            None => groups.push((g, vec![c.clone()])),
        }
    }
    groups
}

/// Norm series per case; a module error fails only the cases it touches.
fn case_series(cfg: &ExperimentConfig, cases: &[Case]) -> Vec<(Case, Result<NormSeries, nlheat_core::Error>)> {
    let groups = group_by_gamma(cases);
    let per_group: Vec<Vec<(Case, Result<NormSeries, nlheat_core::Error>)>> = groups
        .par_iter()
        .map(|(_, members)| {
            let params = members[0].params;
            let regions: Vec<_> = members.iter().map(|c| c.region).collect();
            let forcing = match nlheat_core::Forcing::new(params.gamma_real(), cfg.spatial.clone()) {
                Ok(f) => f,
                Err(e) => return members.iter().map(|c| (c.clone(), Err(e.clone()))).collect(),
            };
            match solve_slices(&params, &forcing, &regions, &cfg.times, &cfg.series) {
                Ok(slices) => members
                    .iter()
                    .map(|c| (c.clone(), NormSeries::from_slices(&params, &forcing, c.p, c.region, &slices)))
                    .collect(),
                Err(e) => members.iter().map(|c| (c.clone(), Err(e.clone()))).collect(),
            }
        })
        .collect();
    // restore configuration order
    let mut flat: Vec<_> = per_group.into_iter().flatten().collect();
    flat.sort_by_key(|(c, _)| cases.iter().position(|k| k.name == c.name));
    flat
}

fn cmd_norms(cfg: &ExperimentConfig, out: &Path, filter: Option<&str>) -> Result<u8> {
    let cases = cfg.selected_cases(filter);
    if cases.is_empty() {
        eprintln!("warning: no cases selected");
        return Ok(0);
    }
    let dir = out.join("norms");
    ensure_dir(&dir)?;
    let mut failed = Vec::new();
    for (case, series) in case_series(cfg, &cases) {
        match series {
            Ok(s) => write(&dir.join(format!("{}.csv", slug(&case.name))), &s.to_csv())?,
            Err(e) => failed.push(format!("{}: {e}", case.name)),
        }
    }
    if failed.is_empty() {
        println!("norms: {} series -> {}", cases.len(), dir.display());
        Ok(0)
    } else {
        Err(anyhow!("{} case(s) failed:\n  {}", failed.len(), failed.join("\n  ")))
    }
}

fn cmd_predict(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let mut csv = String::from("gamma,p,region,regime,t_exp,log_exp,g_exp\n");
    let mut rows = 0;
    for region in cfg.regions() {
        for &g in &cfg.predict_gammas {
            let params = cfg.params.with_gamma(g);
            for &p in &cfg.predict_p {
                let pred = predict(&params, p, &region);
                let regime = format!("{} [{}]", pred.row, classify_p(&params, p).label());
                for m in &pred.monomials {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{}",
                        g,
                        p,
                        region.label().replace(',', ";"),
                        regime,
                        m.t_exp.value(),
                        m.log_exp,
                        m.g_exp.value()
                    );
                    rows += 1;
                }
            }
        }
    }
    let path = out.join(&cfg.output.rates);
    write(&path, &csv)?;
    println!("predict: {rows} rows -> {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct ReportConfig<'a> {
    params: &'a ProblemParams,
    forcing: &'a nlheat_core::SpatialProfile,
    times: &'a [f64],
    window: (f64, f64),
    tolerances: &'a Tolerances,
    points_per_decade: usize,
}

#[derive(Serialize)]
struct Summary {
    total: usize,
    passed: usize,
    failed: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: ReportConfig<'a>,
    kernel_bands: Option<BandReport>,
    cases: Vec<CaseReport>,
    summary: Summary,
    warnings: Vec<String>,
}

fn cmd_verify(cfg: &ExperimentConfig, out: &Path, filter: Option<&str>) -> Result<u8> {
    let cases = cfg.selected_cases(filter);
    let mut warnings = Vec::new();
    if cases.is_empty() {
        let w = "no cases selected; report is vacuously passing".to_string();
        eprintln!("warning: {w}");
        warnings.push(w);
    }
    let profile = load_or_build_profile(cfg, out)?;
    let kernel_bands = match profile.check_profile_bounds() {
        Ok(b) => Some(b),
        Err(e) => {
            warnings.push(format!("kernel bands unavailable: {e}"));
            None
        }
    };
    let tol = &cfg.tolerances;
    let reports: Vec<CaseReport> = case_series(cfg, &cases)
        .into_iter()
        .map(|(case, series)| match series {
            Ok(s) => judge_series(&case.name, &s, cfg.window, tol.slope_tol, tol.band_max_ratio),
            Err(e) => failed_case(&case.name, &case.params, case.p, case.region, tol.slope_tol, tol.band_max_ratio, &e),
        })
        .collect();
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let report = Report {
        config: ReportConfig {
            params: &cfg.params,
            forcing: &cfg.spatial,
            times: &cfg.times,
            window: cfg.window,
            tolerances: tol,
            points_per_decade: cfg.series.points_per_decade,
        },
        kernel_bands,
        summary: Summary { total: reports.len(), passed: reports.len() - failed.len(), failed: failed.clone() },
        cases: reports,
        warnings,
    };
    let path = out.join(&cfg.output.report);
    write(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    print!("{}", summarize(&serde_json::to_value(&report)?));
    if failed.is_empty() {
        Ok(0)
    } else {
        Ok(EXIT_VERIFY)
    }
}

fn summarize(report: &serde_json::Value) -> String {
    let mut s = String::new();
    let empty = Vec::new();
    for case in report["cases"].as_array().unwrap_or(&empty) {
        let verdict = if case["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
        let measured = if let Some(err) = case["error"].as_str().filter(|_| case["fit"].is_null()) {
            format!("error: {err}")
        } else if case["method"] == "band" {
            let b = &case["band"];
            let ratio = b["max"].as_f64().unwrap_or(f64::NAN) / b["min"].as_f64().unwrap_or(f64::NAN);
            format!("band ratio {ratio:.3} (max {})", case["band_max_ratio"])
        } else {
            format!(
                "slope {:.4} vs {:.4} (±{})",
                case["fit"]["slope"].as_f64().unwrap_or(f64::NAN),
                case["predicted_exponent"].as_f64().unwrap_or(f64::NAN),
                case["slope_tol"]
            )
        };
        let _ = writeln!(s, "{verdict} {} [{}]: {measured}", case["name"].as_str().unwrap_or("?"), case["row"].as_str().unwrap_or("?"));
    }
    let sum = &report["summary"];
    let _ = writeln!(s, "{} of {} cases passed", sum["passed"], sum["total"]);
    s
}

fn cmd_report(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let path = out.join(&cfg.output.report);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| anyhow!(ConfigError(format!("cannot read report {}: {e} (run `verify` first)", path.display()))))?;
    let report: serde_json::Value = serde_json::from_str(&text).context("parsing report")?;
    let summary = summarize(&report);
    print!("{summary}");
    write(&out.join("report.txt"), &summary)?;
    let failed = report["summary"]["failed"].as_array().is_some_and(|f| !f.is_empty());
    Ok(if failed { EXIT_VERIFY } else { 0 })
}
