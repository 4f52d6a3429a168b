//! The computing subcommands: beta, admissible, verify, and sweep.
//!
//! Each builds a plain serializable report struct first, then renders it in
//! the requested format, so the JSON output is the exact report and parses
//! back to the same value.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pascu_core::admissibility::{
    admissibility_report, default_eps_grid, eval_n_pi, N_PI_GRID_TOL,
};
use pascu_core::beta::{beta_from_moments, solve_beta, solve_beta_rho, BetaResult};
use pascu_core::grids::DiskGrid;
use pascu_core::verify::{
    apply_transform, apply_transform_rho, extremal_function, membership_min, sharpness_margin,
};
use pascu_core::{MuNuPair, PowerSeries};

use crate::config::{CliError, CliResult, RunConfig};
use crate::render::{csv_line, emit, to_json, verdict_str, witness_str, Format, CSV_SCHEMA_LINE};

/// Fixed reporting order; the map in the core report is alphabetical.
const CONDITIONS: [&str; 6] = [
    "range_closed_form",
    "final_cond",
    "additional_cond",
    "initial_cond",
    "monotone_decreasing",
    "n_pi_nonneg",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12}")).unwrap_or_default()
}

// ---------------------------------------------------------------- beta --

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaOut {
    pub kernel: String,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub rho: f64,
    pub x_value: f64,
    pub beta: f64,
    pub err_estimate: f64,
    /// Independent route: beta recomputed from the kernel moment series.
    pub series_beta: f64,
    pub cross_check_gap: f64,
    /// Blended-transform beta, present when rho != 0.
    pub rho_beta: Option<f64>,
}

pub fn cmd_beta(cfg: &RunConfig) -> CliResult<bool> {
    let munu = cfg.munu()?;
    let kernel = cfg.kernel()?;
    let plain = solve_beta(&kernel, &munu, cfg.xi, &cfg.policy, &cfg.quad)?;
    let series = beta_from_moments(&kernel, &munu, cfg.xi, &cfg.policy, &cfg.quad)?;
    let rho_beta = if cfg.rho != 0.0 {
        Some(solve_beta_rho(&kernel, &munu, cfg.xi, cfg.rho, &cfg.policy, &cfg.quad)?.beta)
    } else {
        None
    };
    let out = BetaOut {
        kernel: kernel.describe(),
        mu: munu.mu(),
        nu: munu.nu(),
        xi: cfg.xi,
        rho: cfg.rho,
        x_value: plain.x_value,
        beta: plain.beta,
        err_estimate: plain.err_estimate,
        series_beta: series.beta,
        cross_check_gap: (plain.beta - series.beta).abs(),
        rho_beta,
    };

    let body = match cfg.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let header = [
                "kernel", "mu", "nu", "xi", "rho", "x", "beta", "err_estimate",
                "series_beta", "cross_check_gap", "rho_beta",
            ];
            let row = vec![
                out.kernel.clone(),
                format!("{:.12}", out.mu),
                format!("{:.12}", out.nu),
                format!("{:.12}", out.xi),
                format!("{:.12}", out.rho),
                format!("{:.12}", out.x_value),
                format!("{:.12}", out.beta),
                format!("{:.3e}", out.err_estimate),
                format!("{:.12}", out.series_beta),
                format!("{:.3e}", out.cross_check_gap),
                fmt_opt(out.rho_beta),
            ];
            format!(
                "{CSV_SCHEMA_LINE}\n{}\n{}\n",
                header.join(","),
                csv_line(&row)
            )
        }
        Format::Text => {
            let mut s = format!(
                "kernel {}, mu = {}, nu = {}, xi = {}, rho = {}\n",
                out.kernel, out.mu, out.nu, out.xi, out.rho
            );
            s += &format!(
                "X = {:.12} (quadrature err estimate {:.3e})\n",
                out.x_value, out.err_estimate
            );
            s += &format!("beta = {:.12}\n", out.beta);
            s += &format!(
                "moment-series cross-check: beta = {:.12}, gap = {:.3e}\n",
                out.series_beta, out.cross_check_gap
            );
            if let Some(rb) = out.rho_beta {
                s += &format!("blended transform (rho = {}): beta = {rb:.12}\n", out.rho);
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(true)
}

// ---------------------------------------------------------- admissible --

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub condition: String,
    pub verdict: String,
    pub margin: Option<f64>,
    pub witness: Option<String>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleOut {
    pub kernel: String,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub rows: Vec<ConditionRow>,
    pub notes: Vec<String>,
    pub all_pass: bool,
}

pub fn cmd_admissible(cfg: &RunConfig) -> CliResult<bool> {
    let munu = cfg.munu()?;
    let kernel = cfg.kernel()?;
    let report = admissibility_report(&kernel, &munu, cfg.xi, &cfg.quad)?;
    let rows: Vec<ConditionRow> = CONDITIONS
        .iter()
        .map(|&name| ConditionRow {
            condition: name.to_string(),
            verdict: verdict_str(report.verdicts[name]).to_string(),
            margin: report.margins.get(name).copied(),
            witness: report.witnesses.get(name).map(witness_str),
        })
        .collect();
    let out = AdmissibleOut {
        kernel: kernel.describe(),
        mu: munu.mu(),
        nu: munu.nu(),
        xi: cfg.xi,
        rows,
        notes: report.notes.clone(),
        all_pass: report.all_pass_or_na(),
    };

    let body = match cfg.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let mut s = format!(
                "{CSV_SCHEMA_LINE}\nkernel,mu,nu,xi,condition,verdict,margin,witness\n"
            );
            for row in &out.rows {
                s += &csv_line(&[
                    out.kernel.clone(),
                    format!("{:.12}", out.mu),
                    format!("{:.12}", out.nu),
                    format!("{:.12}", out.xi),
                    row.condition.clone(),
                    row.verdict.clone(),
                    fmt_opt(row.margin),
                    row.witness.clone().unwrap_or_default(),
                ]);
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "kernel {}, mu = {}, nu = {}, xi = {}\n",
                out.kernel, out.mu, out.nu, out.xi
            );
            for row in &out.rows {
                s += &format!("  {:<22} {:<16}", row.condition, row.verdict);
                if let Some(m) = row.margin {
                    s += &format!(" margin {m:.4e}");
                }
                if let Some(w) = &row.witness {
                    s += &format!(" at {w}");
                }
                s.push('\n');
            }
            if !out.notes.is_empty() {
                s += "notes:\n";
                for n in &out.notes {
                    s += &format!("  - {n}\n");
                }
            }
            s += &format!(
                "overall: {}\n",
                if out.all_pass { "pass" } else { "fail" }
            );
            s
        }
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(out.all_pass)
}

// -------------------------------------------------------------- verify --

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipOut {
    pub verdict: String,
    pub min_re: f64,
    pub argmin_r: f64,
    pub argmin_theta: f64,
    pub functional: String,
    pub tail_bound: f64,
    pub boundary_limited: bool,
    pub note: Option<String>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct NPiOut {
    pub verdict: String,
    pub min_value: f64,
    pub argmin_z: (f64, f64),
    pub argmin_eps: (f64, f64),
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOut {
    pub kernel: String,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub rho: f64,
    pub sharp_beta: f64,
    pub beta_used: f64,
    /// Present when the user supplied beta; negative means below sharp.
    pub sharpness_margin: Option<f64>,
    pub membership: MembershipOut,
    pub n_pi: Option<NPiOut>,
    pub n_pi_note: Option<String>,
    pub pass: bool,
}

/// Solve, build the boundary extremal, transform, certify.
fn solve_for(cfg: &RunConfig, munu: &MuNuPair, kernel: &pascu_core::kernels::Kernel) -> CliResult<BetaResult> {
    Ok(if cfg.rho == 0.0 {
        solve_beta(kernel, munu, cfg.xi, &cfg.policy, &cfg.quad)?
    } else {
        solve_beta_rho(kernel, munu, cfg.xi, cfg.rho, &cfg.policy, &cfg.quad)?
    })
}

fn transformed_extremal(
    cfg: &RunConfig,
    munu: &MuNuPair,
    kernel: &pascu_core::kernels::Kernel,
    beta: f64,
) -> CliResult<PowerSeries> {
    let one = Complex64::new(1.0, 0.0);
    let f = extremal_function(beta, munu, one, -one, &cfg.policy)?;
    Ok(if cfg.rho == 0.0 {
        apply_transform(&f, kernel, &cfg.quad)?
    } else {
        apply_transform_rho(&f, kernel, cfg.rho, &cfg.quad)?
    })
}

pub fn cmd_verify(cfg: &RunConfig, user_beta: Option<f64>) -> CliResult<bool> {
    let munu = cfg.munu()?;
    let kernel = cfg.kernel()?;
    let solved = solve_for(cfg, &munu, &kernel)?;
    let beta_used = user_beta.unwrap_or(solved.beta);
    if !(beta_used < 1.0) {
        return Err(CliError::input(format!(
            "beta must be < 1, got {beta_used}"
        )));
    }
    let margin = user_beta.map(|b| sharpness_margin(b, solved.beta));

    let image = transformed_extremal(cfg, &munu, &kernel, beta_used)?;
    let grid = DiskGrid::new(24, cfg.radius, 48)?;
    let mem = membership_min(&image, cfg.xi, &grid)?;
    let membership = MembershipOut {
        verdict: if mem.is_pass() { "pass" } else { "fail" }.to_string(),
        min_re: mem.min_re,
        argmin_r: mem.argmin_r,
        argmin_theta: mem.argmin_theta,
        functional: mem.functional.to_string(),
        tail_bound: mem.tail_bound,
        boundary_limited: mem.boundary_limited,
        note: mem.note.clone(),
    };

    let (n_pi, n_pi_note) = if munu.is_gamma_zero() {
        (
            None,
            Some("duality functional skipped: gamma = 0 uses the monotone route".to_string()),
        )
    } else {
        let out = eval_n_pi(
            &kernel,
            &munu,
            cfg.xi,
            &DiskGrid::default_n_pi(),
            &default_eps_grid(),
            &cfg.quad,
        )?;
        let pass = out.min_value >= -N_PI_GRID_TOL;
        (
            Some(NPiOut {
                verdict: if pass { "pass" } else { "fail" }.to_string(),
                min_value: out.min_value,
                argmin_z: out.argmin_z,
                argmin_eps: out.argmin_eps,
            }),
            None,
        )
    };

    let pass = mem.is_pass() && n_pi.as_ref().map_or(true, |n| n.verdict == "pass");
    let out = VerifyOut {
        kernel: kernel.describe(),
        mu: munu.mu(),
        nu: munu.nu(),
        xi: cfg.xi,
        rho: cfg.rho,
        sharp_beta: solved.beta,
        beta_used,
        sharpness_margin: margin,
        membership,
        n_pi,
        n_pi_note,
        pass,
    };

    let body = match cfg.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let header = [
                "kernel", "mu", "nu", "xi", "rho", "sharp_beta", "beta_used",
                "sharpness_margin", "membership_verdict", "min_re", "n_pi_verdict",
                "n_pi_min", "pass",
            ];
            let row = vec![
                out.kernel.clone(),
                format!("{:.12}", out.mu),
                format!("{:.12}", out.nu),
                format!("{:.12}", out.xi),
                format!("{:.12}", out.rho),
                format!("{:.12}", out.sharp_beta),
                format!("{:.12}", out.beta_used),
                fmt_opt(out.sharpness_margin),
                out.membership.verdict.clone(),
                format!("{:.6}", out.membership.min_re),
                out.n_pi.as_ref().map(|n| n.verdict.clone()).unwrap_or_default(),
                out.n_pi
                    .as_ref()
                    .map(|n| format!("{:.6}", n.min_value))
                    .unwrap_or_default(),
                out.pass.to_string(),
            ];
            format!(
                "{CSV_SCHEMA_LINE}\n{}\n{}\n",
                header.join(","),
                csv_line(&row)
            )
        }
        Format::Text => {
            let mut s = format!(
                "kernel {}, mu = {}, nu = {}, xi = {}, rho = {}\n",
                out.kernel, out.mu, out.nu, out.xi, out.rho
            );
            s += &format!("sharp beta = {:.12}\n", out.sharp_beta);
            if let Some(m) = out.sharpness_margin {
                s += &format!(
                    "beta used = {:.12} (given), sharpness margin = {m:.6}\n",
                    out.beta_used
                );
            }
            s += &format!(
                "membership: min Re = {:.6} at r = {:.4}, theta = {:.4} -> {}\n",
                out.membership.min_re,
                out.membership.argmin_r,
                out.membership.argmin_theta,
                out.membership.verdict
            );
            if let Some(note) = &out.membership.note {
                s += &format!("  note: {note}\n");
            }
            match (&out.n_pi, &out.n_pi_note) {
                (Some(n), _) => {
                    s += &format!(
                        "duality functional: min = {:.6} at z = ({:.4}, {:.4}), eps = ({:.4}, {:.4}) -> {}\n",
                        n.min_value,
                        n.argmin_z.0,
                        n.argmin_z.1,
                        n.argmin_eps.0,
                        n.argmin_eps.1,
                        n.verdict
                    );
                }
                (None, Some(note)) => s += &format!("duality functional: {note}\n"),
                (None, None) => {}
            }
            s += &format!("overall: {}\n", if out.pass { "pass" } else { "fail" });
            s
        }
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(pass)
}

// --------------------------------------------------------------- sweep --

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOut {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

struct Axis {
    name: String,
    values: Vec<f64>,
}

fn parse_axis(s: &str) -> CliResult<Axis> {
    let err = || {
        CliError::input(format!(
            "sweep {s:?}: expected NAME=LO:HI:STEP with step > 0"
        ))
    };
    let (name, range) = s.split_once('=').ok_or_else(err)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(err());
    };
    let lo: f64 = lo.parse().map_err(|_| err())?;
    let hi: f64 = hi.parse().map_err(|_| err())?;
    let step: f64 = step.parse().map_err(|_| err())?;
    if !(step > 0.0) {
        return Err(err());
    }
    if hi < lo {
        return Err(CliError::input(format!(
            "sweep {}: empty range, {hi} < {lo}",
            name
        )));
    }
    // Small slack so an exactly-representable endpoint is included.
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let values = (0..n).map(|i| lo + i as f64 * step).collect();
    Ok(Axis {
        name: name.to_string(),
        values,
    })
}

fn sweep_row(cfg: &RunConfig, overrides: &[(&str, f64)]) -> CliResult<Vec<String>> {
    let mut point = cfg.clone();
    for (name, value) in overrides {
        point = point.with_param(name, *value)?;
    }
    let munu = point.munu()?;
    let kernel = point.kernel()?;
    let solved = solve_for(&point, &munu, &kernel)?;
    let report = admissibility_report(&kernel, &munu, point.xi, &point.quad)?;
    let image = transformed_extremal(&point, &munu, &kernel, solved.beta)?;
    let grid = DiskGrid::new(24, point.radius, 48)?;
    let mem = membership_min(&image, point.xi, &grid)?;

    let mut row: Vec<String> = overrides.iter().map(|(_, v)| format!("{v:.6}")).collect();
    row.push(format!("{:.12}", solved.x_value));
    row.push(format!("{:.12}", solved.beta));
    for name in CONDITIONS {
        row.push(verdict_str(report.verdicts[name]).to_string());
    }
    row.push(format!("{:.6}", mem.min_re));
    Ok(row)
}

pub fn cmd_sweep(cfg: &RunConfig, sweeps: &[String]) -> CliResult<bool> {
    if sweeps.is_empty() {
        return Err(CliError::input(
            "sweep needs at least one --sweep NAME=LO:HI:STEP",
        ));
    }
    if sweeps.len() > 2 {
        return Err(CliError::input("at most two parameters can be swept"));
    }
    let axes: Vec<Axis> = sweeps.iter().map(|s| parse_axis(s)).collect::<CliResult<_>>()?;
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if total > 1_000_000 {
        return Err(CliError::input(format!(
            "sweep would visit {total} points (limit 1000000)"
        )));
    }

    let points: Vec<Vec<(&str, f64)>> = match axes.as_slice() {
        [a] => a
            .values
            .iter()
            .map(|&v| vec![(a.name.as_str(), v)])
            .collect(),
        [a, b] => a
            .values
            .iter()
            .flat_map(|&va| {
                b.values
                    .iter()
                    .map(move |&vb| vec![(a.name.as_str(), va), (b.name.as_str(), vb)])
            })
            .collect(),
        _ => unreachable!("axis count validated above"),
    };

    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|overrides| sweep_row(cfg, overrides))
        .collect::<CliResult<Vec<_>>>()?;

    let mut columns: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    columns.extend(["x", "beta"].map(String::from));
    columns.extend(CONDITIONS.map(String::from));
    columns.push("min_re".to_string());
    let out = SweepOut { columns, rows };

    let body = match cfg.format {
        Format::Json => to_json(&out)?,
        // The text rendering of a sweep is its CSV; the product is tabular.
        Format::Csv | Format::Text => {
            let mut s = format!("{CSV_SCHEMA_LINE}\n{}\n", out.columns.join(","));
            for row in &out.rows {
                s += &csv_line(row);
                s.push('\n');
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(true)
}
