//! Deterministic pass/fail ledger over the property checks of every module.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thinflow::ans::{hydrostatic_trick_residual, AnsSolver, AnsState};
use thinflow::corrector::SymbolGrid;
use thinflow::gevrey::{norm_xr, subadditivity_defect, GevreyWeight};
use thinflow::hydro::HydroSolver;
use thinflow::spectral::wavenumber;
use thinflow::{Cx, Error, Field64, Grid64, Result};

use crate::config::ExperimentConfig;
use crate::datum::make_initial_datum;
use crate::report::{to_json, Check, Versions};
use crate::sweep::{flow_params, thresholds};
use crate::verify::{bound_reports, influence_probes, scaling_fits, CONDITION_LIMIT};

pub const SUBADDITIVITY_KMAX: i64 = 32;
pub const RANDOM_FIELDS: usize = 100;
pub const MONOTONICITY_ORDERS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];
pub const BRUTE_FORCE_TOLERANCE: f64 = 1e-10;
/// Steps of the short anisotropic run behind the cancellation and no-slip checks.
pub const SHORT_RUN_STEPS: usize = 20;
/// Steps of the hydrostatic run behind the remainder check.
pub const REMAINDER_RUN_STEPS: usize = 50;

/// Deliberate defects used to show that a check can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    #[default]
    None,
    /// Adds `y cos x + y^2 sin x` to the streamfunction before the
    /// cancellation residual is evaluated, so it no longer vanishes at the walls.
    CorruptWallValues,
}

/// Which symbol grid the exact chain check uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainGrid {
    #[default]
    Dense,
    Reference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantLedger {
    pub checks: Vec<Check>,
    pub pass: bool,
    pub seed: u64,
    pub mutation: Mutation,
    pub config: ExperimentConfig,
    pub versions: Versions,
}

/// Smooth field with random amplitudes on a handful of modes.
pub fn random_field(grid: &Grid64, rng: &mut ChaCha8Rng) -> Field64 {
    let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field64::from_fn(grid, |x, y| {
        c[0] * y
            + c[1] * (PI * y).sin() * x.cos()
            + c[2] * y * y * (2.0 * x).sin()
            + c[3] * (3.0 * x + c[4]).cos() * (1.0 - y)
            + c[5] * (4.0 * x).cos() * (c[6] * y).exp()
            + c[7]
    })
}

/// `||f||_{X^r}` at radius `tau` by a direct DFT of the nodal values.
pub fn brute_force_norm(f: &Field64, r: f64, tau: f64) -> f64 {
    let g = f.grid();
    let vals = f.to_physical();
    let (nx, ny) = (g.nx(), g.ny());
    let mut total = 0.0;
    for i in 0..nx {
        let k = wavenumber(i, nx) as f64;
        let twiddle: Vec<Cx<f64>> = (0..nx)
            .map(|j| Cx::new(0.0, -k * 2.0 * PI * j as f64 / nx as f64).exp() / nx as f64)
            .collect();
        let mass: f64 = (0..ny)
            .map(|m| {
                let p: Cx<f64> = (0..nx).map(|j| twiddle[j] * vals[[j, m]]).sum();
                p.norm_sqr() * g.weights()[m]
            })
            .sum();
        let b = (1.0 + k * k).sqrt();
        total += b.powf(2.0 * r) * (2.0 * tau * b.powf(2.0 / 3.0)).exp() * mass;
    }
    (2.0 * PI * total).sqrt()
}

pub fn gevrey_checks(cfg: &ExperimentConfig, checks: &mut Vec<Check>) -> Result<()> {
    let w = GevreyWeight::new(cfg.lambda)?;
    let mut defect = f64::NEG_INFINITY;
    for t in [0.0, cfg.t_final / 2.0, cfg.t_final] {
        defect = defect.max(subadditivity_defect(&w, t, SUBADDITIVITY_KMAX)?);
    }
    checks.push(Check::new("gevrey_subadditivity", defect <= 0.0, defect, "<= 0".into()));

    let grid = Grid64::new(cfg.nx, cfg.ny)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut worst_drop, mut worst_rel) = (f64::NEG_INFINITY, 0.0f64);
    let tau = w.tau(0.0)?;
    for _ in 0..RANDOM_FIELDS {
        let f = random_field(&grid, &mut rng);
        let norms: Vec<f64> = MONOTONICITY_ORDERS
            .iter()
            .map(|&r| norm_xr(&f, r, &w, 0.0))
            .collect::<Result<_>>()?;
        for p in norms.windows(2) {
            worst_drop = worst_drop.max(p[0] - p[1]);
        }
        for (r, n) in [(0usize, 0.0), (3, 2.0)] {
            let b = brute_force_norm(&f, n, tau);
            worst_rel = worst_rel.max((norms[r] - b).abs() / b.max(f64::MIN_POSITIVE));
        }
    }
    checks.push(Check::new(
        "gevrey_monotone_in_r",
        worst_drop <= 0.0,
        worst_drop,
        "<= 0".into(),
    ));
    checks.push(Check::new(
        "gevrey_brute_force_agreement",
        worst_rel <= BRUTE_FORCE_TOLERANCE,
        worst_rel,
        format!("<= {BRUTE_FORCE_TOLERANCE:e}"),
    ));
    Ok(())
}

fn corrector_checks(cfg: &ExperimentConfig, chain: ChainGrid, checks: &mut Vec<Check>) -> Result<()> {
    let grid = match chain {
        ChainGrid::Dense => SymbolGrid::dense(),
        ChainGrid::Reference => SymbolGrid::reference(),
    };
    let c = thinflow::corrector::verify_symbol_chain(&grid)?;
    checks.push(Check::new(
        "symbol_chain",
        c.pass,
        c.violations as f64,
        "== 0 violations".into(),
    ));
    for b in bound_reports(&SymbolGrid::reference())?
        .iter()
        .filter(|b| b.inequality != "symbol_chain")
    {
        checks.push(Check::new(
            &b.inequality,
            b.pass,
            b.measured_c,
            format!("<= {}", b.budget_c),
        ));
    }
    for f in scaling_fits()? {
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
    let probes = influence_probes(cfg)?;
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
    Ok(())
}

fn corrupt(phi: &Field64) -> Result<Field64> {
    let bad = Field64::from_fn(phi.grid(), |x, y| y * x.cos() + y * y * x.sin());
    phi.try_add(&bad)
}

fn solver_checks(cfg: &ExperimentConfig, mutation: Mutation, checks: &mut Vec<Check>) -> Result<()> {
    let (u0, _, compat) = make_initial_datum(cfg)?;
    checks.push(Check::new(
        "datum_compatibility",
        compat.pass(),
        compat.incompressibility_residual.max(compat.depth_average_residual),
        "<= 1e-12, margin >= 2 c0".into(),
    ));
    let params = flow_params(cfg);
    let eps = cfg.eps_list[0];
    let mut solver = AnsSolver::new(AnsState::from_velocity(&u0, eps, 0.0)?, params)?;
    let (mut cancel, mut noslip) = (0.0f64, 0.0f64);
    for n in 0..=SHORT_RUN_STEPS {
        if n > 0 {
            solver.step()?;
        }
        let s = solver.state();
        let phi = match mutation {
            Mutation::None => s.phi.clone(),
            Mutation::CorruptWallValues => corrupt(&s.phi)?,
        };
        cancel = cancel.max(hydrostatic_trick_residual(&phi, eps)?);
        noslip = noslip.max(s.noslip_defect());
    }
    checks.push(Check::new(
        "cancellation",
        cancel <= thresholds::CANCELLATION,
        cancel,
        format!("<= {:e}", thresholds::CANCELLATION),
    ));
    checks.push(Check::new(
        "noslip",
        noslip <= thresholds::NOSLIP,
        noslip,
        format!("<= {:e}", thresholds::NOSLIP),
    ));

    let mut hydro = HydroSolver::with_corrector(u0, params)?;
    for _ in 0..REMAINDER_RUN_STEPS.min(cfg.steps()) {
        hydro.step()?;
    }
    let approx = hydro
        .solution()
        .ok_or_else(|| Error::Contract("corrector missing".into()))?;
    let norms: Vec<f64> = cfg
        .eps_list
        .iter()
        .map(|&e| Ok(approx.remainders(e)?.r1.l2_norm()))
        .collect::<Result<_>>()?;
    let exps: Vec<f64> = norms
        .windows(2)
        .zip(cfg.eps_list.windows(2))
        .map(|(n, e)| (n[0] / n[1]).ln() / (e[0] / e[1]).ln())
        .collect();
    let (lo, hi) = thresholds::REMAINDER_EXPONENT;
    let worst = exps
        .iter()
        .copied()
        .max_by(|a, b| (a - 4.0).abs().total_cmp(&(b - 4.0).abs()))
        .unwrap_or(f64::NAN);
    checks.push(Check::new(
        "remainder_exponent",
        exps.iter().all(|e| *e >= lo && *e <= hi),
        worst,
        format!("in [{lo}, {hi}]"),
    ));
    Ok(())
}

/// Runs every check at the configured seed; failures are recorded, not raised.
pub fn run_invariant_suite(cfg: &ExperimentConfig, mutation: Mutation, chain: ChainGrid) -> Result<InvariantLedger> {
    cfg.validate()?;
    let mut checks = Vec::new();
    gevrey_checks(cfg, &mut checks)?;
    corrector_checks(cfg, chain, &mut checks)?;
    solver_checks(cfg, mutation, &mut checks)?;
    let pass = checks.iter().all(|c| c.pass);
    Ok(InvariantLedger {
        checks,
        pass,
        seed: cfg.seed,
        mutation,
        config: cfg.clone(),
        versions: Versions::current(),
    })
}

pub fn write_ledger(ledger: &InvariantLedger, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("invariants.json");
    std::fs::write(&path, to_json(ledger)?)?;
    Ok(path)
}
