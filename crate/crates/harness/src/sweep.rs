//! The epsilon sweep: one hydrostatic run with its corrector, one anisotropic
//! run per epsilon, monitors, and slope fits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thinflow::ans::{error_vs_hydro, omega_remainder_ratio, AnsSolver, AnsState, Reference};
use thinflow::gevrey::GevreyWeight;
use thinflow::hydro::{ApproxSolution, FlowParams, HydroSolver};
use thinflow::{Error, Field64, Result};

use crate::config::ExperimentConfig;
use crate::datum::make_initial_datum;
use crate::fit::{fit_slope, SlopeFit};
use crate::report::{Check, Versions};

/// Pinned acceptance windows.
pub mod thresholds {
    pub const SLOPE_L2: (f64, f64) = (1.7, 2.3);
    pub const SLOPE_LINF: (f64, f64) = (1.6, 2.4);
    pub const REMAINDER_EXPONENT: (f64, f64) = (3.8, 4.2);
    pub const CANCELLATION: f64 = 1e-9;
    pub const NOSLIP: f64 = 1e-8;
    /// Allowed spread `max/min` of the bootstrap ratio across the sweep.
    pub const OMEGA_REMAINDER_SPREAD: f64 = 4.0;
    /// Fraction of the initial convexity margin that must persist.
    pub const CONVEXITY_FRACTION: f64 = 0.5;
}

pub const CSV_HEADER: &str = "epsilon,t_final,err_l2,err_linf,omegaR_ratio,convexity_min,noslip_defect,cancellation";

/// Samples of the approximate solution shared by every epsilon.
pub struct HydroRun {
    /// `(step, solution)` at step 0, every `monitor_stride` steps, and the last step.
    pub samples: Vec<(usize, ApproxSolution<f64>)>,
    pub steps: usize,
}

impl HydroRun {
    pub fn last(&self) -> &ApproxSolution<f64> {
        &self.samples.last().expect("at least the initial sample").1
    }
}

pub fn flow_params(cfg: &ExperimentConfig) -> FlowParams<f64> {
    FlowParams::new(cfg.dt, cfg.pressure_gradient)
}

/// Evolves the leading-order system and its corrector to `T_final`.
pub fn run_hydro(cfg: &ExperimentConfig, u0: &Field64) -> Result<HydroRun> {
    let mut solver = HydroSolver::with_corrector(u0.clone(), flow_params(cfg))?;
    let steps = cfg.steps();
    let snapshot = |s: &HydroSolver<f64>| s.solution().ok_or_else(|| Error::Contract("corrector missing".into()));
    let mut samples = vec![(0, snapshot(&solver)?)];
    for n in 1..=steps {
        solver.step()?;
        if n % cfg.monitor_stride == 0 || n == steps {
            samples.push((n, snapshot(&solver)?));
        }
    }
    Ok(HydroRun { samples, steps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

/// One epsilon. Failed rows carry `NaN` in every measured column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub t_final: f64,
    pub err_l2: f64,
    pub err_linf: f64,
    #[serde(rename = "omegaR_X2_over_eps3_max")]
    pub omega_r_ratio: f64,
    pub convexity_min: f64,
    pub noslip_defect_max: f64,
    pub cancellation_max: f64,
    /// Error against the corrected approximation `u_p^0 + eps^2 u_p^2`.
    pub err_l2_vs_corrected: f64,
    pub err_linf_vs_corrected: f64,
    /// `||R_1||_{L^2}` at `T_final`.
    pub remainder_l2: f64,
    pub status: RowStatus,
}

impl SweepRow {
    fn failed(epsilon: f64, t_final: f64, msg: String) -> Self {
        Self {
            epsilon,
            t_final,
            err_l2: f64::NAN,
            err_linf: f64::NAN,
            omega_r_ratio: f64::NAN,
            convexity_min: f64::NAN,
            noslip_defect_max: f64::NAN,
            cancellation_max: f64::NAN,
            err_l2_vs_corrected: f64::NAN,
            err_linf_vs_corrected: f64::NAN,
            remainder_l2: f64::NAN,
            status: RowStatus::Failed(msg),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

/// Runs the anisotropic system at one `eps` against the shared hydrostatic samples.
pub fn run_case(cfg: &ExperimentConfig, u0: &Field64, eps: f64, hydro: &HydroRun) -> Result<SweepRow> {
    let w = GevreyWeight::new(cfg.lambda)?;
    let mut solver = AnsSolver::new(AnsState::from_velocity(u0, eps, 0.0)?, flow_params(cfg))?;
    let first = &hydro.samples[0].1;
    let mut convexity = first.convexity_margin(eps)?;
    let m0 = solver.monitors()?;
    let (mut noslip, mut cancel) = (m0.noslip_defect, m0.cancellation_residual);
    let mut ratio = f64::NEG_INFINITY;
    let (mut sup_l2, mut sup_linf) = (0.0f64, 0.0f64);
    let mut next = 1;
    for n in 1..=hydro.steps {
        solver.step()?;
        let m = solver.monitors()?;
        noslip = noslip.max(m.noslip_defect);
        cancel = cancel.max(m.cancellation_residual);
        if next < hydro.samples.len() && hydro.samples[next].0 == n {
            let approx = &hydro.samples[next].1;
            convexity = convexity.min(approx.convexity_margin(eps)?);
            if n >= cfg.burn_in_steps {
                ratio = ratio.max(omega_remainder_ratio(solver.state(), approx, &w)?);
                let (l2, linf) = error_vs_hydro(solver.state(), Reference::Hydro(&approx.order0))?;
                sup_l2 = sup_l2.max(l2);
                sup_linf = sup_linf.max(linf);
            }
            next += 1;
        }
    }
    let last = hydro.last();
    let (mut l2, mut linf) = error_vs_hydro(solver.state(), Reference::Hydro(&last.order0))?;
    if cfg.monitors.sup_over_time {
        l2 = l2.max(sup_l2);
        linf = linf.max(sup_linf);
    }
    let (cl2, clinf) = error_vs_hydro(solver.state(), Reference::Approx(last))?;
    Ok(SweepRow {
        epsilon: eps,
        t_final: solver.time(),
        err_l2: l2,
        err_linf: linf,
        omega_r_ratio: ratio,
        convexity_min: convexity,
        noslip_defect_max: noslip,
        cancellation_max: cancel,
        err_l2_vs_corrected: cl2,
        err_linf_vs_corrected: clinf,
        remainder_l2: last.remainders(eps)?.r1.l2_norm(),
        status: RowStatus::Ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub fit_l2: Option<SlopeFit>,
    pub fit_linf: Option<SlopeFit>,
    /// Why a fit is missing, e.g. all errors zero.
    pub fit_notes: Vec<String>,
    /// Exponents `log(R_i / R_{i+1}) / log(eps_i / eps_{i+1})` of `||R_1||_{L^2}`.
    pub remainder_exponents: Vec<f64>,
    pub initial_convexity_margin: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub config: ExperimentConfig,
    pub versions: Versions,
}

fn fit_or_note(rows: &[(f64, f64)], what: &str, notes: &mut Vec<String>) -> Option<SlopeFit> {
    match fit_slope(rows) {
        Ok(f) => {
            notes.extend(f.warnings.iter().map(|w| format!("{what}: {w}")));
            Some(f)
        }
        Err(e) => {
            notes.push(format!("{what}: degenerate ({e})"));
            None
        }
    }
}

/// Assembles fits and checks from finished rows.
pub fn assemble(cfg: &ExperimentConfig, rows: Vec<SweepRow>, initial_margin: f64) -> SweepReport {
    let mut notes = Vec::new();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    let fit_l2 = fit_or_note(
        &ok.iter().map(|r| (r.epsilon, r.err_l2)).collect::<Vec<_>>(),
        "err_l2",
        &mut notes,
    );
    let fit_linf = fit_or_note(
        &ok.iter().map(|r| (r.epsilon, r.err_linf)).collect::<Vec<_>>(),
        "err_linf",
        &mut notes,
    );
    let remainder_exponents: Vec<f64> = ok
        .windows(2)
        .map(|w| (w[0].remainder_l2 / w[1].remainder_l2).ln() / (w[0].epsilon / w[1].epsilon).ln())
        .collect();

    let mon = &cfg.monitors;
    let mut checks = Vec::new();
    let all_ok = ok.len() == rows.len();
    checks.push(Check::new(
        "all_runs_completed",
        all_ok,
        ok.len() as f64,
        format!("== {}", rows.len()),
    ));
    if mon.convergence {
        let slope = |f: &Option<SlopeFit>| f.as_ref().map_or(f64::NAN, |f| f.slope);
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        let (s2, si) = (slope(&fit_l2), slope(&fit_linf));
        let (lo, hi) = thresholds::SLOPE_L2;
        checks.push(Check::new(
            "slope_err_l2",
            within(s2, thresholds::SLOPE_L2),
            s2,
            format!("in [{lo}, {hi}]"),
        ));
        let (lo, hi) = thresholds::SLOPE_LINF;
        checks.push(Check::new(
            "slope_err_linf",
            within(si, thresholds::SLOPE_LINF),
            si,
            format!("in [{lo}, {hi}]"),
        ));
    }
    if mon.remainder {
        let (lo, hi) = thresholds::REMAINDER_EXPONENT;
        let worst = remainder_exponents
            .iter()
            .copied()
            .max_by(|a, b| (a - 4.0).abs().total_cmp(&(b - 4.0).abs()))
            .unwrap_or(f64::NAN);
        let pass = !remainder_exponents.is_empty() && remainder_exponents.iter().all(|e| *e >= lo && *e <= hi);
        checks.push(Check::new(
            "remainder_exponent",
            pass,
            worst,
            format!("in [{lo}, {hi}]"),
        ));
    }
    let max_of = |f: fn(&SweepRow) -> f64| ok.iter().map(|r| f(r)).fold(f64::NAN, f64::max);
    let min_of = |f: fn(&SweepRow) -> f64| ok.iter().map(|r| f(r)).fold(f64::NAN, f64::min);
    if mon.cancellation {
        let v = max_of(|r| r.cancellation_max);
        checks.push(Check::new(
            "cancellation",
            v <= thresholds::CANCELLATION,
            v,
            format!("<= {:e}", thresholds::CANCELLATION),
        ));
    }
    if mon.noslip {
        let v = max_of(|r| r.noslip_defect_max);
        checks.push(Check::new(
            "noslip",
            v <= thresholds::NOSLIP,
            v,
            format!("<= {:e}", thresholds::NOSLIP),
        ));
    }
    if mon.omega_remainder {
        let spread = max_of(|r| r.omega_r_ratio) / min_of(|r| r.omega_r_ratio);
        let bound = thresholds::OMEGA_REMAINDER_SPREAD;
        checks.push(Check::new(
            "omega_remainder_spread",
            spread < bound,
            spread,
            format!("< {bound}"),
        ));
    }
    if mon.convexity {
        let v = min_of(|r| r.convexity_min);
        let floor = thresholds::CONVEXITY_FRACTION * initial_margin;
        checks.push(Check::new(
            "convexity_persistence",
            v >= floor,
            v,
            format!(">= {floor}"),
        ));
    }
    let pass = checks.iter().all(|c| c.pass);
    SweepReport {
        rows,
        fit_l2,
        fit_linf,
        fit_notes: notes,
        remainder_exponents,
        initial_convexity_margin: initial_margin,
        checks,
        pass,
        config: cfg.clone(),
        versions: Versions::current(),
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let (u0, _, compat) = make_initial_datum(cfg)?;
    let hydro = run_hydro(cfg, &u0)?;
    let t_final = cfg.steps() as f64 * cfg.dt;
    let rows: Vec<SweepRow> = cfg
        .eps_list
        .par_iter()
        .map(|&eps| run_case(cfg, &u0, eps, &hydro).unwrap_or_else(|e| SweepRow::failed(eps, t_final, e.to_string())))
        .collect();
    Ok(assemble(cfg, rows, compat.convexity_margin))
}

/// Shortest round-trip decimal, in exponent form outside `[1e-3, 1e7)`;
/// `NaN` marks a missing value.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let cols = [
            r.epsilon,
            r.t_final,
            r.err_l2,
            r.err_linf,
            r.omega_r_ratio,
            r.convexity_min,
            r.noslip_defect_max,
            r.cancellation_max,
        ];
        let line: Vec<String> = cols.iter().map(|v| format_number(*v)).collect();
        writeln!(out, "{}", line.join(",")).expect("writing to a String");
    }
    out
}

/// Writes `sweep.csv` and `sweep.json` into `dir`.
pub fn write_sweep(report: &SweepReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join("sweep.csv");
    let json = dir.join("sweep.json");
    std::fs::write(&csv, sweep_csv(report))?;
    std::fs::write(&json, crate::report::to_json(report)?)?;
    Ok((csv, json))
}
