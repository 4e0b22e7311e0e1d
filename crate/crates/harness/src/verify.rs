//! Symbol-level corrector verification and the influence-matrix probe.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinflow::corrector::{
    rbc_probe_for, scaling_fit, verify_multiplier_bounds, verify_trace_bounds, verify_weighted_vorticity_bounds,
    BoundReport, Multiplier, Quadrature, RbcProbe, ScalingFit, SymbolGrid,
};
use thinflow::{Grid64, Result};

use crate::config::ExperimentConfig;
use crate::report::{to_json, Check, Versions};

pub const THETA_PRIMES: [f64; 5] = [-0.5, 0.0, 0.5, 1.0, 2.0];
pub const THETAS: [f64; 3] = [0.0, 1.0, 2.0];
pub const TRACE_ORDERS: [u32; 3] = [0, 1, 2];
/// `eps` used for the scaling regressions; small enough that `eps|k|` stays below the Stokes rate.
pub const SCALING_EPS: f64 = 1e-3;
pub const SCALING_TOLERANCE: f64 = 0.1;
pub const CONDITION_LIMIT: f64 = 1e8;

/// The multipliers whose `(lambda, <k>)` rates are regressed.
pub fn scaling_multipliers() -> [Multiplier; 2] {
    [Multiplier::HalflineDecay, Multiplier::UnitInterval]
}

/// Probe of one `(eps, h)` pair at the configured resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub epsilon: f64,
    pub h: f64,
    pub probe: RbcProbe,
}

impl ProbeRow {
    pub fn pass(&self) -> bool {
        self.probe.pass() && self.probe.max_condition < CONDITION_LIMIT
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectorReport {
    pub bounds: Vec<BoundReport>,
    pub scaling: Vec<ScalingFit>,
    pub probes: Vec<ProbeRow>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub versions: Versions,
}

/// All symbol bounds on `grid`.
pub fn bound_reports(grid: &SymbolGrid) -> Result<Vec<BoundReport>> {
    let q = Quadrature::standard();
    let mut out = verify_multiplier_bounds(grid, &q)?;
    out.extend(verify_weighted_vorticity_bounds(&THETA_PRIMES, &THETAS, grid, &q)?);
    out.extend(verify_trace_bounds(&TRACE_ORDERS, grid)?);
    Ok(out)
}

pub fn scaling_fits() -> Result<Vec<ScalingFit>> {
    let q = Quadrature::standard();
    scaling_multipliers()
        .iter()
        .map(|m| scaling_fit(m, SCALING_EPS, &q, SCALING_TOLERANCE))
        .collect()
}

/// Probes the first-step (`h = dt`) and SBDF2 (`h = 2 dt / 3`) operators for every `eps`.
pub fn influence_probes(cfg: &ExperimentConfig) -> Result<Vec<ProbeRow>> {
    let grid = Grid64::new(cfg.nx, cfg.ny)?;
    let mut out = Vec::new();
    for &eps in &cfg.eps_list {
        for h in [cfg.dt, 2.0 * cfg.dt / 3.0] {
            out.push(ProbeRow {
                epsilon: eps,
                h,
                probe: rbc_probe_for(&grid, eps, h)?,
            });
        }
    }
    Ok(out)
}

pub fn verify_corrector(cfg: &ExperimentConfig, grid: &SymbolGrid) -> Result<CorrectorReport> {
    cfg.validate()?;
    let bounds = bound_reports(grid)?;
    let scaling = scaling_fits()?;
    let probes = influence_probes(cfg)?;
    let mut checks: Vec<Check> = bounds
        .iter()
        .map(|b| Check::new(&b.inequality, b.pass, b.measured_c, format!("<= {}", b.budget_c)))
        .collect();
    for f in &scaling {
        let dev = (f.lambda_exponent - f.expected.0)
            .abs()
            .max((f.k_exponent - f.expected.1).abs());
        checks.push(Check::new(
            &format!("scaling[{}]", f.inequality),
            f.pass,
            dev,
            format!("<= {}", f.tolerance),
        ));
    }
    let rho = probes.iter().map(|p| p.probe.rho).fold(0.0, f64::max);
    let cond = probes.iter().map(|p| p.probe.max_condition).fold(0.0, f64::max);
    checks.push(Check::new(
        "influence_contraction",
        probes.iter().all(|p| p.probe.pass()),
        rho,
        "< 1".into(),
    ));
    checks.push(Check::new(
        "influence_condition",
        cond < CONDITION_LIMIT,
        cond,
        format!("< {CONDITION_LIMIT:e}"),
    ));
    let pass = checks.iter().all(|c| c.pass);
    Ok(CorrectorReport {
        bounds,
        scaling,
        probes,
        checks,
        pass,
        versions: Versions::current(),
    })
}

/// Writes `bounds.json` (the bound reports as an array) and `corrector.json`.
pub fn write_corrector(report: &CorrectorReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let bounds = dir.join("bounds.json");
    let full = dir.join("corrector.json");
    std::fs::write(&bounds, to_json(&report.bounds)?)?;
    std::fs::write(&full, to_json(report)?)?;
    Ok((bounds, full))
}
