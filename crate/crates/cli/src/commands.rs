//! Subcommand implementations. Each returns an exit code and writes its
//! report to the supplied writer so tests can capture it.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bdflow::params::{admissibility_for_delta, wz_comparison};
use bdflow::stepper::Snapshot;
use bdflow::verify::mms_study;
use bdflow::{
    check_admissibility, find_delta_star, run, AdmissibilityReport, Error, PrimitiveState,
    RunOutput,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ConfigFile, MmsSettings, RunSettings, SweepSettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_SLOPE: i32 = 4;

pub const CSV_HEADER: &str =
    "t,mass,energy,bd_energy,diss_expansion,diss_shear,rho_sup,r_field_sup,\
wlp_u,wlp_v,moment_alpha,log_entropy,ru_l2,rv_l2,v_sup,picard_iters,gamma_last,admissible_flag";

/// 17 significant digits, always with a decimal point and exponent.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

fn report_lines(out: &mut dyn Write, r: &AdmissibilityReport) -> std::io::Result<()> {
    writeln!(out, "delta = {}", r.delta)?;
    writeln!(out, "K = {}", opt(r.k))?;
    writeln!(out, "p_star = {}", opt(r.p_star))?;
    writeln!(out, "p_min = {}", opt(r.p_min))?;
    writeln!(out, "p_max = {}", opt(r.p_max))?;
    writeln!(out, "viscosity_law_valid = {}", r.viscosity_law_valid)?;
    writeln!(out, "exponent_condition = {}", r.exponent_condition)?;
    writeln!(out, "admissible = {}", r.admissible)?;
    writeln!(out, "reason = {}", r.reason())
}

/// Arguments of `check`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckArgs {
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub p: Option<f64>,
    pub find_threshold: bool,
    pub tol: f64,
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| -> std::io::Result<i32> {
        if args.find_threshold {
            return Ok(match find_delta_star(args.tol) {
                Ok(star) => {
                    writeln!(out, "delta_star = {star:.4}")?;
                    writeln!(out, "delta_star_full = {}", num(star))?;
                    EXIT_OK
                }
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    EXIT_USAGE
                }
            });
        }
        let (Some(gamma), Some(delta)) = (args.gamma, args.delta) else {
            writeln!(
                err,
                "error: check needs --gamma and --delta (or --find-threshold)"
            )?;
            return Ok(EXIT_USAGE);
        };
        if !(gamma >= 1.0) || !gamma.is_finite() {
            writeln!(err, "error: gamma must be >= 1, got {gamma}")?;
            return Ok(EXIT_USAGE);
        }
        if !(delta > 0.0 && delta < 1.0) {
            writeln!(err, "error: delta must lie in (0, 1), got {delta}")?;
            return Ok(EXIT_USAGE);
        }
        let report = admissibility_for_delta(delta);
        writeln!(out, "gamma = {gamma}")?;
        report_lines(out, &report)?;
        if let Some(p) = args.p {
            if !(p >= 2.0) {
                writeln!(err, "error: p must be >= 2, got {p}")?;
                return Ok(EXIT_USAGE);
            }
            let inside =
                matches!((report.p_min, report.p_max), (Some(lo), Some(hi)) if lo <= p && p <= hi);
            writeln!(out, "p = {p}")?;
            writeln!(out, "p_in_range = {inside}")?;
            writeln!(out, "older_condition = {}", wz_comparison(gamma, delta, p))?;
        }
        Ok(if report.admissible {
            EXIT_OK
        } else {
            EXIT_INADMISSIBLE
        })
    })();
    result.unwrap_or(EXIT_USAGE)
}

/// Final diagnostics and bookkeeping written next to the CSV.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub error: Option<String>,
    pub failed_at: Option<f64>,
    pub wall_time_s: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub admissible: bool,
    pub compat_g_l2: Option<f64>,
    pub max_picard_ratio: Option<f64>,
    pub final_state: Option<FinalDiagnostics>,
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
pub struct FinalDiagnostics {
    pub t: f64,
    pub mass: f64,
    pub mass_drift: f64,
    pub energy: f64,
    pub bd_energy: f64,
    pub dissipation_integral: f64,
    pub energy_residual: f64,
    pub diss_expansion: f64,
    pub diss_shear: f64,
    pub rho_sup: f64,
    pub min_rho: f64,
    pub r_field_sup: f64,
    pub r_field_grad_l2: f64,
    pub wlp_u: f64,
    pub wlp_v: f64,
    pub moment_alpha: f64,
    pub log_entropy: Option<f64>,
    pub ru_l2: f64,
    pub rv_l2: f64,
    pub ru_r_l2: f64,
    pub v_sup: f64,
    pub u_sup: f64,
}

impl FinalDiagnostics {
    fn new(out: &RunOutput) -> Self {
        let last = out.final_snapshot();
        let r = &last.report;
        let m0 = out.initial_snapshot().report.mass;
        Self {
            t: last.t,
            mass: r.mass,
            mass_drift: (r.mass - m0).abs() / m0,
            energy: r.energy,
            bd_energy: r.bd_energy,
            dissipation_integral: last.dissipation_integral,
            energy_residual: out.energy_residual(out.snapshots.len() - 1),
            diss_expansion: r.diss_expansion,
            diss_shear: r.diss_shear,
            rho_sup: r.rho_sup,
            min_rho: last.min_rho,
            r_field_sup: r.r_field_sup,
            r_field_grad_l2: r.r_field_grad_l2,
            wlp_u: r.wlp_u,
            wlp_v: r.wlp_v,
            moment_alpha: r.moment_alpha,
            log_entropy: r.log_entropy,
            ru_l2: r.ru_l2,
            rv_l2: r.rv_l2,
            ru_r_l2: r.ru_r_l2,
            v_sup: r.v_sup,
            u_sup: r.u_sup,
        }
    }
}

fn csv_row(s: &Snapshot, admissible: bool) -> String {
    let r = &s.report;
    [
        num(s.t),
        num(r.mass),
        num(r.energy),
        num(r.bd_energy),
        num(r.diss_expansion),
        num(r.diss_shear),
        num(r.rho_sup),
        num(r.r_field_sup),
        num(r.wlp_u),
        num(r.wlp_v),
        num(r.moment_alpha),
        opt(r.log_entropy),
        num(r.ru_l2),
        num(r.rv_l2),
        num(r.v_sup),
        s.picard_iters.to_string(),
        num(s.gamma_last),
        u8::from(admissible).to_string(),
    ]
    .join(",")
}

/// The snapshot table of a finished run.
pub fn snapshot_csv(out: &RunOutput) -> String {
    let mut text = String::with_capacity(256 * (out.snapshots.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for s in &out.snapshots {
        text.push_str(&csv_row(s, out.admissible));
        text.push('\n');
    }
    text
}

/// `<output>.summary.json`
pub fn summary_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn config_error(err: &mut dyn Write, e: &ConfigError) -> i32 {
    let _ = writeln!(err, "config error: {e}");
    EXIT_USAGE
}

pub fn cmd_run(config: &Path, output: &Path, err: &mut dyn Write) -> i32 {
    let settings = match ConfigFile::read(config).and_then(|c| RunSettings::from_config(&c)) {
        Ok(s) => s,
        Err(e) => return config_error(err, &e),
    };
    let admissible = check_admissibility(&settings.params).admissible;
    if !admissible && !settings.run.override_admissibility {
        let _ = writeln!(
            err,
            "config error: delta = {} is not admissible (set override_admissibility = true to run anyway)",
            settings.params.delta()
        );
        return EXIT_USAGE;
    }
    let init = match settings
        .init
        .sample(&settings.grid)
        .and_then(|(rho, u)| PrimitiveState::new(&settings.grid, 0.0, rho, u))
    {
        Ok(init) => init,
        Err(e) => {
            let _ = writeln!(err, "config error: init: {e}");
            return EXIT_USAGE;
        }
    };

    let start = Instant::now();
    let result = run(&init, &settings.run, &settings.params, &settings.grid);
    let wall_time_s = start.elapsed().as_secs_f64();

    let (summary, code) = match result {
        Ok(out) => {
            if let Err(e) = std::fs::write(output, snapshot_csv(&out)) {
                let _ = writeln!(err, "error: cannot write {}: {e}", output.display());
                return EXIT_USAGE;
            }
            let summary = RunSummary {
                status: "ok",
                error: None,
                failed_at: None,
                wall_time_s,
                steps: out.steps,
                rejected_steps: out.rejected_steps,
                admissible: out.admissible,
                compat_g_l2: Some(out.compat_g_l2),
                max_picard_ratio: Some(out.max_ratio),
                final_state: Some(FinalDiagnostics::new(&out)),
                config: settings.echo.clone(),
            };
            (summary, EXIT_OK)
        }
        Err(e) => {
            let failed_at = match &e {
                Error::AtTime { t, .. } => Some(*t),
                _ => None,
            };
            let _ = writeln!(err, "solver error: {e}");
            let summary = RunSummary {
                status: "failed",
                error: Some(e.to_string()),
                failed_at,
                wall_time_s,
                steps: 0,
                rejected_steps: 0,
                admissible,
                compat_g_l2: None,
                max_picard_ratio: None,
                final_state: None,
                config: settings.echo.clone(),
            };
            (summary, EXIT_SOLVER)
        }
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Err(e) = std::fs::write(summary_path(output), json + "\n") {
        let _ = writeln!(err, "error: cannot write summary: {e}");
        return EXIT_USAGE;
    }
    code
}

pub fn cmd_mms(config: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let settings = match ConfigFile::read(config).and_then(|c| MmsSettings::from_config(&c)) {
        Ok(s) => s,
        Err(e) => return config_error(err, &e),
    };
    let report = match mms_study(
        settings.preset,
        &settings.ladder,
        &settings.setup,
        &settings.params,
    ) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = (|| -> std::io::Result<()> {
        writeln!(out, "preset = {}", report.preset.name())?;
        writeln!(out, "n,dr,error")?;
        for row in &report.rows {
            writeln!(out, "{},{},{}", row.n, num(row.dr), num(row.error))?;
        }
        writeln!(out, "slope = {:.4}", report.slope)?;
        writeln!(out, "min_slope = {}", report.min_slope)?;
        writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" })
    })();
    if written.is_err() {
        return EXIT_USAGE;
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_SLOPE
    }
}

/// The region table of a sweep, rows sorted by `(delta, gamma)`.
pub fn sweep_csv(settings: &SweepSettings) -> String {
    let deltas = settings.delta.points();
    let gammas = settings.gamma.points();
    let grid: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| gammas.iter().map(move |&g| (d, g)))
        .collect();
    let mut rows: Vec<(f64, f64, String)> = grid
        .par_iter()
        .map(|&(delta, gamma)| {
            let r = admissibility_for_delta(delta);
            let line = [
                num(delta),
                num(gamma),
                opt(r.k),
                opt(r.p_star),
                opt(r.p_max),
                u8::from(r.admissible).to_string(),
            ]
            .join(",");
            (delta, gamma, line)
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut text = String::from("delta,gamma,K,p_star,p_max,admissible\n");
    for (_, _, line) in rows {
        text.push_str(&line);
        text.push('\n');
    }
    text
}

pub fn cmd_sweep(
    config: &Path,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let settings = match ConfigFile::read(config).and_then(|c| SweepSettings::from_config(&c)) {
        Ok(s) => s,
        Err(e) => return config_error(err, &e),
    };
    let csv = sweep_csv(&settings);
    let written = match output {
        Some(path) => std::fs::write(path, csv),
        None => out.write_all(csv.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write sweep output: {e}");
            EXIT_USAGE
        }
    }
}
