//! Initial datum `u0 = -y(1-y) + delta cos(ell x) h(y)`, `h = y^2 (1-y)^2 (1-2y)`,
//! with its compatibility report.

use serde::{Deserialize, Serialize};
use thinflow::gevrey::datum_norm_m;
use thinflow::hydro::{convexity_margin, vertical_velocity};
use thinflow::spectral::{dealias_product, diff_x, diff_y};
use thinflow::{Cx, Error, Field64, Grid64, Result};

use crate::config::ExperimentConfig;

/// Zero-mean wall-compatible profile of the perturbation.
pub fn bump(y: f64) -> f64 {
    y * y * (1.0 - y) * (1.0 - y) * (1.0 - 2.0 * y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    /// `max |d_x u0 + d_y v0|`.
    pub incompressibility_residual: f64,
    /// `max_{k != 0} |int_0^1 u0_k dy|`.
    pub depth_average_residual: f64,
    /// `max |d_yy u0 - (int_0^1 (d_yy u0 - d_x u0^2) dy)_{k != 0} - G|` over both walls.
    pub wall_compatibility_residual: f64,
    pub convexity_margin: f64,
    /// `2 c0`.
    pub convexity_floor: f64,
    /// Largest `delta` keeping the margin above the floor.
    pub max_admissible_delta: f64,
    pub datum_norm_m: f64,
    pub v0_wall_defect: f64,
}

impl CompatReport {
    pub fn pass(&self) -> bool {
        self.incompressibility_residual <= 1e-12
            && self.depth_average_residual <= 1e-12
            && self.convexity_margin >= self.convexity_floor
            && self.datum_norm_m.is_finite()
    }
}

fn profile_field(grid: &Grid64, ell: i64) -> Field64 {
    Field64::from_fn(grid, |x, y| (ell as f64 * x).cos() * bump(y))
}

/// Wall value of `d_t u0` under the hydrostatic pressure and gradient `g`.
pub fn wall_compatibility_residual(u0: &Field64, g: f64) -> Result<f64> {
    let grid = u0.grid();
    let d2 = diff_y(u0, 2)?;
    let flux = diff_x(&dealias_product(u0, u0)?, 1);
    let src = d2.try_sub(&flux)?;
    let avg = src.depth_average();
    let ny = grid.ny();
    let mut wall = Field64::zeros(grid);
    for (i, k) in grid.wavenumbers() {
        let mut row = wall.coeffs_mut().row_mut(i);
        for m in [0, ny - 1] {
            row[m] = d2.row(i)[m] - if k == 0 { Cx::new(g, 0.0) } else { avg[i] };
        }
    }
    let phys = wall.to_physical();
    Ok(phys
        .column(0)
        .iter()
        .chain(phys.column(ny - 1).iter())
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// Builds `(u0, v0)` and the report; a datum below the convexity floor is a
/// configuration error naming the admissible range of `delta`.
pub fn make_initial_datum(cfg: &ExperimentConfig) -> Result<(Field64, Field64, CompatReport)> {
    cfg.validate()?;
    let grid = Grid64::new(cfg.nx, cfg.ny)?;
    let d = &cfg.datum;
    let base = Field64::from_fn(&grid, |_, y| -y * (1.0 - y));
    let pert = profile_field(&grid, d.ell);
    let u0 = base.axpy(d.delta, &pert)?;
    let v0 = vertical_velocity(&u0);

    let pert_curv = diff_y(&pert, 2)?.max_abs_physical();
    let base_curv = convexity_margin(&base)?;
    let floor = 2.0 * d.c0_floor;
    let max_delta = (base_curv - floor) / pert_curv;
    let margin = convexity_margin(&u0)?;
    if margin < floor {
        return Err(Error::Config(format!(
            "datum violates the convexity floor: min d_yy u0 = {margin} < 2 c0 = {floor}; delta must be <= {max_delta}"
        )));
    }

    let div = diff_x(&u0, 1).try_add(&diff_y(&v0, 1)?)?;
    let avg = u0.depth_average();
    let depth = grid
        .wavenumbers()
        .filter(|(_, k)| *k != 0)
        .fold(0.0f64, |m, (i, _)| m.max(avg[i].norm()));
    let wall_v = v0
        .wall(true)
        .iter()
        .chain(v0.wall(false).iter())
        .fold(0.0f64, |m, z| m.max(z.norm()));
    let report = CompatReport {
        incompressibility_residual: div.max_abs_physical(),
        depth_average_residual: depth,
        wall_compatibility_residual: wall_compatibility_residual(&u0, cfg.pressure_gradient)?,
        convexity_margin: margin,
        convexity_floor: floor,
        max_admissible_delta: max_delta,
        datum_norm_m: datum_norm_m(&u0)?,
        v0_wall_defect: wall_v,
    };
    Ok((u0, v0, report))
}
