//! One anisotropic run with snapshots and a monitor time series.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinflow::ans::{omega_remainder, reconstruct_velocity, AnsSolver, AnsState};
use thinflow::gevrey::{norm_xr, GevreyWeight};
use thinflow::hydro::HydroSolver;
use thinflow::spectral::{diff_x, diff_y, io::write_snapshot};
use thinflow::{Error, Result};

use crate::config::ExperimentConfig;
use crate::datum::{make_initial_datum, CompatReport};
use crate::report::{to_json, Versions};
use crate::sweep::flow_params;

/// Monitors at one sampled time. Missing values are `NaN`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSample {
    pub t: f64,
    pub convexity_margin: f64,
    pub incompressibility_residual: f64,
    pub noslip_defect: f64,
    pub cancellation: f64,
    #[serde(rename = "omegaR_ratio")]
    pub omega_r_ratio: f64,
    /// `||omega^eps||_{X^2}`.
    pub omega_x2: f64,
    /// `||omega^R||_{X^2}`.
    pub omega_r_x2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub epsilon: f64,
    pub compat: CompatReport,
    pub samples: Vec<RunSample>,
    /// Set when the run stopped early; the series is truncated there.
    pub failure: Option<String>,
    pub snapshots: Vec<PathBuf>,
    pub versions: Versions,
}

impl RunLog {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

fn sample(
    solver: &AnsSolver<f64>,
    hydro: &HydroSolver<f64>,
    w: &GevreyWeight<f64>,
    burned_in: bool,
) -> Result<RunSample> {
    let state = solver.state();
    let eps = state.eps;
    let m = solver.monitors()?;
    let approx = hydro
        .solution()
        .ok_or_else(|| Error::Contract("corrector missing".into()))?;
    let (u, v) = reconstruct_velocity(state);
    let div = diff_x(&u, 1).try_add(&diff_y(&v, 1)?)?;
    let omega_x2 = norm_xr(&state.omega, 2.0, w, state.t)?;
    let omega_r_x2 = norm_xr(&omega_remainder(state, &approx)?, 2.0, w, state.t)?;
    Ok(RunSample {
        t: state.t,
        convexity_margin: approx.convexity_margin(eps)?,
        incompressibility_residual: div.max_abs_physical(),
        noslip_defect: m.noslip_defect,
        cancellation: m.cancellation_residual,
        omega_r_ratio: if burned_in { omega_r_x2 / eps.powi(3) } else { f64::NAN },
        omega_x2,
        omega_r_x2,
    })
}

fn snapshot_all(dir: &Path, tag: &str, state: &AnsState<f64>, out: &mut Vec<PathBuf>) -> Result<()> {
    let (u, v) = reconstruct_velocity(state);
    for (name, f) in [("u", &u), ("v", &v), ("omega", &state.omega), ("phi", &state.phi)] {
        let (csv, _) = write_snapshot(dir, &format!("{name}_{tag}"), f, state.t, state.eps, name)?;
        out.push(csv);
    }
    Ok(())
}

/// Runs the anisotropic system at `eps` to `T_final`, sampling every
/// `monitor_stride` steps and writing snapshots at start and end into `dir`.
pub fn simulate(cfg: &ExperimentConfig, eps: f64, dir: &Path) -> Result<RunLog> {
    let (u0, _, compat) = make_initial_datum(cfg)?;
    let params = flow_params(cfg);
    let w = GevreyWeight::new(cfg.lambda)?;
    let mut hydro = HydroSolver::with_corrector(u0.clone(), params)?;
    let mut solver = AnsSolver::new(AnsState::from_velocity(&u0, eps, 0.0)?, params)?;
    let mut snapshots = Vec::new();
    snapshot_all(dir, "initial", solver.state(), &mut snapshots)?;
    let mut samples = vec![sample(&solver, &hydro, &w, cfg.burn_in_steps == 0)?];
    let steps = cfg.steps();
    let mut failure = None;
    for n in 1..=steps {
        let advanced = hydro.step().and_then(|_| solver.step());
        if let Err(e) = advanced {
            failure = Some(e.to_string());
            break;
        }
        if n % cfg.monitor_stride == 0 || n == steps {
            samples.push(sample(&solver, &hydro, &w, n >= cfg.burn_in_steps)?);
        }
    }
    if failure.is_none() {
        snapshot_all(dir, "final", solver.state(), &mut snapshots)?;
    }
    Ok(RunLog {
        epsilon: eps,
        compat,
        samples,
        failure,
        snapshots,
        versions: Versions::current(),
    })
}

pub fn write_run(log: &RunLog, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("run.json");
    std::fs::write(&path, to_json(log)?)?;
    Ok(path)
}
