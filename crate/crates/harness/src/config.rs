//! Experiment configuration, read from a single JSON file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinflow::{Error, Result};

/// Parameters of the default datum `u0 = -y(1-y) + delta cos(ell x) h(y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatumConfig {
    pub delta: f64,
    pub ell: i64,
    /// Required floor `c0`: the datum must satisfy `min d_yy u0 >= 2 c0`.
    pub c0_floor: f64,
}

impl Default for DatumConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            ell: 1,
            c0_floor: 0.9,
        }
    }
}

/// Which checks run and gate the exit code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorFlags {
    pub convergence: bool,
    pub remainder: bool,
    pub cancellation: bool,
    pub noslip: bool,
    pub omega_remainder: bool,
    pub convexity: bool,
    /// Measure the error as a sup over sampled times instead of at `T_final`.
    pub sup_over_time: bool,
}

impl Default for MonitorFlags {
    fn default() -> Self {
        Self {
            convergence: true,
            remainder: true,
            cancellation: true,
            noslip: true,
            omega_remainder: true,
            convexity: true,
            sup_over_time: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub eps_list: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    #[serde(rename = "T_final")]
    pub t_final: f64,
    /// Gevrey radius decay rate.
    pub lambda: f64,
    pub datum: DatumConfig,
    /// Constant streamwise pressure gradient `G` acting on the mean flow.
    pub pressure_gradient: f64,
    pub monitors: MonitorFlags,
    /// Time steps between sampled monitors that need the approximate solution.
    pub monitor_stride: usize,
    /// Steps skipped before sampled monitors start.
    pub burn_in_steps: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            nx: 64,
            ny: 65,
            dt: 1e-4,
            t_final: 0.05,
            lambda: 8.0,
            datum: DatumConfig::default(),
            pressure_gradient: 2.0,
            monitors: MonitorFlags::default(),
            monitor_stride: 10,
            burn_in_steps: 5,
            seed: 20240601,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::Config(msg)
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of time steps to reach `T_final`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be >= 1, got {}", self.lambda)));
        }
        if !(self.t_final > 0.0) || !(self.t_final < 1.0 / (2.0 * self.lambda)) {
            return Err(invalid(format!(
                "T_final must lie in (0, 1/(2 lambda)) = (0, {}), got {}",
                1.0 / (2.0 * self.lambda),
                self.t_final
            )));
        }
        if !(self.dt > 0.0) || self.dt > self.t_final {
            return Err(invalid(format!("dt must lie in (0, T_final], got {}", self.dt)));
        }
        let n = self.t_final / self.dt;
        if (n - n.round()).abs() > 1e-9 * n {
            return Err(invalid(format!(
                "T_final = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.eps_list.len() < 4 {
            return Err(invalid(format!(
                "eps_list needs at least 4 entries, got {}",
                self.eps_list.len()
            )));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(invalid(format!("every eps must lie in (0, 1], got {e}")));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("eps_list must be strictly decreasing".into()));
        }
        if self.nx < 8 || !self.nx.is_multiple_of(2) {
            return Err(invalid(format!("nx must be even and >= 8, got {}", self.nx)));
        }
        if self.ny < 9 {
            return Err(invalid(format!("ny must be >= 9, got {}", self.ny)));
        }
        let d = &self.datum;
        if !(d.delta >= 0.0) || !d.delta.is_finite() {
            return Err(invalid(format!("datum.delta must be >= 0, got {}", d.delta)));
        }
        if d.ell < 1 || 3 * d.ell as usize > self.nx {
            return Err(invalid(format!("datum.ell must lie in [1, nx/3], got {}", d.ell)));
        }
        if !(d.c0_floor > 0.0 && d.c0_floor < 1.0) {
            return Err(invalid(format!(
                "datum.c0_floor must lie in (0, 1), got {}",
                d.c0_floor
            )));
        }
        if !self.pressure_gradient.is_finite() {
            return Err(invalid("pressure_gradient must be finite".into()));
        }
        if self.monitor_stride == 0 {
            return Err(invalid("monitor_stride must be positive".into()));
        }
        Ok(())
    }
}
