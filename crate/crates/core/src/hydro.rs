//! Hydrostatic Navier-Stokes/Prandtl system and its order-`eps^2` corrector.
//!
//! Leading order (`eta = 1`):
//! `d_t u + u d_x u + v d_y u - d_yy u + d_x p + G = 0`, `d_y p = 0`,
//! `d_x u + d_y v = 0`, `u = v = 0` at `y = 0, 1`. `G` is a uniform mean
//! pressure gradient acting on the `k = 0` mode only.
//!
//! Order `eps^2`: `d_t u2 + u0 d_x u2 + v0 d_y u2 + u2 d_x u0 + v2 d_y u0
//! + d_x p2 - d_yy u2 = d_xx u0`, `d_y p2 = -(d_t v0 + u0 d_x v0 + v0 d_y v0 - d_yy v0)`.
//!
//! Time stepping is SBDF2 (backward Euler for the first step): `d_yy`
//! implicit, everything else extrapolated. The per-mode constant part of the
//! pressure is the multiplier that keeps `int_0^1 u_k dy = 0` exactly.

use ndarray::{Array1, ArrayView1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gevrey::{norm_xr, GevreyWeight};
use crate::linalg::matvec_c;
use crate::scalar::{czero, ik, Cx, Real};
use crate::spectral::{dealias_product, diff_x, diff_y, integrate_y_cumulative, DirichletSolver, Grid, SpectralField};

/// Amplitude beyond which a run is declared blown up.
pub const BLOWUP_BOUND: f64 = 1e6;

/// One hydrostatic-type state: velocity, pressure, time.
#[derive(Clone, Debug)]
pub struct HydroState<T: Real> {
    pub u: SpectralField<T>,
    /// `v = -int_0^y d_x u`.
    pub v: SpectralField<T>,
    /// Pressure; `y`-independent at leading order.
    pub p: SpectralField<T>,
    pub t: T,
}

/// `v = -int_0^y d_x u dy'`.
pub fn vertical_velocity<T: Real>(u: &SpectralField<T>) -> SpectralField<T> {
    integrate_y_cumulative(&diff_x(u, 1)).scale(-T::one())
}

impl<T: Real> HydroState<T> {
    /// Leading-order state from `u` alone (`v` and `p` derived).
    pub fn from_u(u: SpectralField<T>, t: T) -> Result<Self> {
        let v = vertical_velocity(&u);
        let mut s = Self {
            p: SpectralField::zeros(u.grid()),
            u,
            v,
            t,
        };
        let p = solve_pressure_hydro(&s)?;
        s.p = constant_profile(s.u.grid(), p.view());
        Ok(s)
    }

    pub fn zeros(grid: &Grid<T>, t: T) -> Self {
        Self {
            u: SpectralField::zeros(grid),
            v: SpectralField::zeros(grid),
            p: SpectralField::zeros(grid),
            t,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.u.grid()
    }

    /// `max |d_x u + d_y v|` over all coefficients.
    pub fn incompressibility_residual(&self) -> T {
        let dv = diff_y(&self.v, 1).expect("first derivative supported");
        (&diff_x(&self.u, 1) + &dv).max_abs_coeff()
    }

    /// `max_{k != 0} |int_0^1 u_k dy|`.
    pub fn depth_average_defect(&self) -> T {
        let g = self.grid();
        let avg = self.u.depth_average();
        g.wavenumbers()
            .filter(|&(_, k)| k != 0)
            .fold(T::zero(), |m, (i, _)| m.max(avg[i].norm()))
    }

    /// Largest wall value of `u` or `v`.
    pub fn wall_defect(&self) -> T {
        [
            self.u.wall(false),
            self.u.wall(true),
            self.v.wall(false),
            self.v.wall(true),
        ]
        .iter()
        .flat_map(|w| w.iter().map(|z| z.norm()))
        .fold(T::zero(), T::max)
    }
}

fn constant_profile<T: Real>(grid: &Grid<T>, per_k: ArrayView1<Cx<T>>) -> SpectralField<T> {
    let mut f = SpectralField::zeros(grid);
    for (i, mut row) in f.coeffs_mut().rows_mut().into_iter().enumerate() {
        row.fill(per_k[i]);
    }
    f
}

/// `u d_x u + v d_y u`, dealiased.
fn advection<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>, f: &SpectralField<T>) -> Result<SpectralField<T>> {
    let fx = diff_x(f, 1);
    let fy = diff_y(f, 1)?;
    Ok(&dealias_product(a, &fx)? + &dealias_product(b, &fy)?)
}

fn check_depth_average<T: Real>(u: &SpectralField<T>) -> Result<()> {
    let g = u.grid();
    let avg = u.depth_average();
    let scale = u.max_abs_coeff().max(T::one());
    for (i, k) in g.wavenumbers() {
        if k != 0 && avg[i].norm() > T::lit(1e-8) * scale {
            return Err(Error::Contract(format!(
                "depth average of mode k = {k} is {:e}, expected 0",
                avg[i].norm()
            )));
        }
    }
    Ok(())
}

/// Divides the depth average of a pressure-free tendency by `ik`: the
/// pressure that makes `d_t int_0^1 u_k dy = 0`. Zero for `k = 0`.
fn pressure_from_tendency<T: Real>(grid: &Grid<T>, tend: &SpectralField<T>) -> Array1<Cx<T>> {
    let avg = tend.depth_average();
    grid.wavenumbers()
        .map(|(i, k)| if k == 0 { czero() } else { avg[i] / ik::<T>(k) })
        .collect()
}

/// Per-mode hydrostatic pressure `p_k`, `k != 0`, from
/// `ik p = [d_y u]_0^1 - ik int_0^1 (u^2)_k dy`; `p_0 = 0` (gauge).
pub fn solve_pressure_hydro<T: Real>(state: &HydroState<T>) -> Result<Array1<Cx<T>>> {
    check_depth_average(&state.u)?;
    let g = state.grid();
    let ny = g.ny();
    let du = diff_y(&state.u, 1)?;
    let uu = dealias_product(&state.u, &state.u)?.depth_average();
    Ok(g.wavenumbers()
        .map(|(i, k)| {
            if k == 0 {
                czero()
            } else {
                let flux = du.row(i)[ny - 1] - du.row(i)[0];
                flux / ik::<T>(k) - uu[i]
            }
        })
        .collect())
}

/// Time stepping and physics knobs shared by both solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowParams<T> {
    pub dt: T,
    /// Mean pressure gradient `G` on the `k = 0` mode.
    pub forcing: T,
    /// Disable to integrate the Stokes (linear) system.
    pub nonlinear: bool,
}

impl<T: Real> FlowParams<T> {
    pub fn new(dt: T, forcing: T) -> Self {
        Self {
            dt,
            forcing,
            nonlinear: true,
        }
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }
}

/// Explicit leading-order terms `-N(u) - G delta_{k0}`.
fn explicit0<T: Real>(s: &HydroState<T>, params: &FlowParams<T>) -> Result<SpectralField<T>> {
    let mut t = if params.nonlinear {
        advection(&s.u, &s.v, &s.u)?.scale(-T::one())
    } else {
        SpectralField::zeros(s.grid())
    };
    sub_mean_forcing(&mut t, params.forcing);
    Ok(t)
}

fn sub_mean_forcing<T: Real>(f: &mut SpectralField<T>, g: T) {
    if g != T::zero() {
        f.mode_mut(0).mapv_inplace(|z| z - Cx::new(g, T::zero()));
    }
}

fn remove_gradient<T: Real>(tend: &SpectralField<T>, p: ArrayView1<Cx<T>>) -> SpectralField<T> {
    let grad = diff_x(&constant_profile(tend.grid(), p), 1);
    tend - &grad
}

/// `d_t u0` of the leading-order system with the continuous pressure rule.
pub fn hydro_tendency<T: Real>(s: &HydroState<T>, params: &FlowParams<T>) -> Result<SpectralField<T>> {
    let free = &explicit0(s, params)? + &diff_y(&s.u, 2)?;
    let p = pressure_from_tendency(s.grid(), &free);
    Ok(remove_gradient(&free, p.view()))
}

/// Explicit part of the corrector equation and the `y`-dependent pressure
/// `P_y = int_0^y d_y p2`.
fn corrector_parts<T: Real>(
    s0: &HydroState<T>,
    s2: &HydroState<T>,
    dt_u0: &SpectralField<T>,
    params: &FlowParams<T>,
) -> Result<(SpectralField<T>, SpectralField<T>)> {
    let dt_v0 = vertical_velocity(dt_u0);
    let mut q = &dt_v0 - &diff_y(&s0.v, 2)?;
    if params.nonlinear {
        q = &q + &advection(&s0.u, &s0.v, &s0.v)?;
    }
    let py = integrate_y_cumulative(&q).scale(-T::one());
    let mut e = &diff_x(&s0.u, 2) - &diff_x(&py, 1);
    if params.nonlinear {
        let lin = &advection(&s0.u, &s0.v, &s2.u)? + &advection(&s2.u, &s2.v, &s0.u)?;
        e = &e - &lin;
    }
    Ok((e, py))
}

/// `d_t u2` and the full `p2` at the current states.
pub fn corrector_tendency<T: Real>(
    s0: &HydroState<T>,
    s2: &HydroState<T>,
    params: &FlowParams<T>,
) -> Result<(SpectralField<T>, SpectralField<T>)> {
    let dt_u0 = hydro_tendency(s0, params)?;
    let (e, py) = corrector_parts(s0, s2, &dt_u0, params)?;
    let free = &e + &diff_y(&s2.u, 2)?;
    let p = pressure_from_tendency(s0.grid(), &free);
    let tend = remove_gradient(&free, p.view());
    let p2 = &constant_profile(s0.grid(), p.view()) + &py;
    Ok((tend, p2))
}

/// `(I - h d_yy) u = rhs - h (ik p) 1` with `u = 0` at the walls and `ik p`
/// chosen so that `int_0^1 u dy = 0` for `k != 0`.
#[derive(Clone, Debug)]
struct ProjectedSolve<T: Real> {
    op: DirichletSolver<T>,
    unit: Array1<Cx<T>>,
    unit_mean: Cx<T>,
}

impl<T: Real> ProjectedSolve<T> {
    fn new(grid: &Grid<T>, h: T) -> Result<Self> {
        let op = DirichletSolver::helmholtz(grid, T::zero(), h)?;
        let ny = grid.ny();
        let mut rhs = Array1::from_elem(ny, Cx::new(-h, T::zero()));
        rhs[0] = czero();
        rhs[ny - 1] = czero();
        let unit = op.solve(1, rhs.view());
        let unit_mean = grid.integrate_y(unit.view());
        Ok(Self { op, unit, unit_mean })
    }

    /// Returns the new profile and `ik p`.
    fn solve(&self, grid: &Grid<T>, k: i64, mut rhs: Array1<Cx<T>>) -> (Array1<Cx<T>>, Cx<T>) {
        let ny = rhs.len();
        rhs[0] = czero();
        rhs[ny - 1] = czero();
        let mut u = self.op.solve(k, rhs.view());
        if k == 0 {
            return (u, czero());
        }
        let ikp = -grid.integrate_y(u.view()) / self.unit_mean;
        u.zip_mut_with(&self.unit, |a, b| *a = *a + *b * ikp);
        (u, ikp)
    }

    fn solve_field(&self, rhs: &SpectralField<T>) -> (SpectralField<T>, Array1<Cx<T>>) {
        let g = rhs.grid();
        let mut out = rhs.clone();
        let mut p = Array1::from_elem(g.nx(), czero());
        for (i, k) in g.wavenumbers() {
            let (u, ikp) = self.solve(g, k, rhs.row(i).to_owned());
            out.coeffs_mut().row_mut(i).assign(&u);
            if k != 0 {
                p[i] = ikp / ik::<T>(k);
            }
        }
        (out, p)
    }
}

/// Second-order IMEX bookkeeping for one unknown.
#[derive(Clone, Debug)]
struct Sbdf2<T: Real> {
    be: ProjectedSolve<T>,
    bdf: ProjectedSolve<T>,
    dt: T,
}

impl<T: Real> Sbdf2<T> {
    fn new(grid: &Grid<T>, dt: T) -> Result<Self> {
        Ok(Self {
            be: ProjectedSolve::new(grid, dt)?,
            bdf: ProjectedSolve::new(grid, T::lit(2.0) * dt / T::lit(3.0))?,
            dt,
        })
    }

    /// Advances `u^n` given explicit terms `e^n` (and `e^{n-1}`, `u^{n-1}`
    /// once available) plus a known forcing at the new time level.
    fn advance(
        &self,
        u: &SpectralField<T>,
        e: &SpectralField<T>,
        prev: Option<(&SpectralField<T>, &SpectralField<T>)>,
        forcing: Option<&SpectralField<T>>,
    ) -> Result<(SpectralField<T>, Array1<Cx<T>>)> {
        let (solver, mut rhs, h) = match prev {
            None => (&self.be, u.axpy(self.dt, e)?, self.dt),
            Some((u_old, e_old)) => {
                let h = T::lit(2.0) * self.dt / T::lit(3.0);
                let hist = u
                    .scale(T::lit(4.0) / T::lit(3.0))
                    .axpy(-T::one() / T::lit(3.0), u_old)?;
                let ext = e.scale(T::lit(2.0)).try_sub(e_old)?;
                (&self.bdf, hist.axpy(h, &ext)?, h)
            }
        };
        if let Some(f) = forcing {
            rhs = rhs.axpy(h, f)?;
        }
        Ok(solver.solve_field(&rhs))
    }
}

fn check_blowup<T: Real>(f: &SpectralField<T>, t: T) -> Result<()> {
    if !f.is_finite() || f.max_abs_coeff() > T::lit(BLOWUP_BOUND) {
        return Err(Error::BlowUp {
            t: t.as_f64(),
            bound: BLOWUP_BOUND,
        });
    }
    Ok(())
}

/// Known source added to the corrector equation, evaluated at the new time.
pub type Forcing<T> = Box<dyn Fn(T) -> SpectralField<T> + Send + Sync>;

/// Leading-order and corrector states at one time, with `eps`.
#[derive(Clone, Debug)]
pub struct ApproxSolution<T: Real> {
    pub order0: HydroState<T>,
    pub order2: HydroState<T>,
    pub params: FlowParams<T>,
}

/// Remainders of the approximate solution in the anisotropic equations.
#[derive(Clone, Debug)]
pub struct Remainders<T: Real> {
    pub r1: SpectralField<T>,
    pub r2: SpectralField<T>,
}

impl<T: Real> Remainders<T> {
    /// `(||R1||^2 + ||R2||^2)^{1/2}` in `L^2`.
    pub fn l2(&self) -> T {
        self.r1.l2_norm().hypot(self.r2.l2_norm())
    }

    pub fn xr(&self, r: T, w: &GevreyWeight<T>, t: T) -> Result<T> {
        Ok(norm_xr(&self.r1, r, w, t)?.hypot(norm_xr(&self.r2, r, w, t)?))
    }
}

impl<T: Real> ApproxSolution<T> {
    pub fn t(&self) -> T {
        self.order0.t
    }

    /// `u^p = u0 + eps^2 u2`.
    pub fn u(&self, eps: T) -> SpectralField<T> {
        self.order0.u.axpy(eps * eps, &self.order2.u).expect("same grid")
    }

    pub fn v(&self, eps: T) -> SpectralField<T> {
        self.order0.v.axpy(eps * eps, &self.order2.v).expect("same grid")
    }

    pub fn p(&self, eps: T) -> SpectralField<T> {
        self.order0.p.axpy(eps * eps, &self.order2.p).expect("same grid")
    }

    /// `omega^p = d_y u^p - eps^2 d_x v^p`.
    pub fn vorticity(&self, eps: T) -> Result<SpectralField<T>> {
        Ok(&diff_y(&self.u(eps), 1)? - &diff_x(&self.v(eps), 1).scale(eps * eps))
    }

    /// `R1 = eps^4 (u2 d_x u2 + v2 d_y u2 - d_xx u2)` and
    /// `R2 = eps^4 (d_t v2 + u0 d_x v2 + u2 d_x v0 + eps^2 u2 d_x v2 + v0 d_y v2
    /// + v2 d_y v0 + eps^2 v2 d_y v2 - d_xx (v0 + eps^2 v2) - d_yy v2)`.
    pub fn remainders(&self, eps: T) -> Result<Remainders<T>> {
        if self.order0.t != self.order2.t {
            return Err(Error::TimeMismatch {
                a: self.order0.t.as_f64(),
                b: self.order2.t.as_f64(),
            });
        }
        let (s0, s2) = (&self.order0, &self.order2);
        let e2 = eps * eps;
        let e4 = e2 * e2;
        let nl = self.params.nonlinear;
        let mut r1 = diff_x(&s2.u, 2).scale(-T::one());
        if nl {
            r1 = &r1 + &advection(&s2.u, &s2.v, &s2.u)?;
        }
        let (dt_u2, _) = corrector_tendency(s0, s2, &self.params)?;
        let dt_v2 = vertical_velocity(&dt_u2);
        let mut r2 = &dt_v2 - &diff_x(&s0.v.axpy(e2, &s2.v)?, 2);
        r2 = &r2 - &diff_y(&s2.v, 2)?;
        if nl {
            r2 = &r2 + &advection(&s0.u, &s0.v, &s2.v)?;
            r2 = &r2 + &advection(&s2.u, &s2.v, &s0.v)?;
            r2 = r2.axpy(e2, &advection(&s2.u, &s2.v, &s2.v)?)?;
        }
        Ok(Remainders {
            r1: r1.scale(e4),
            r2: r2.scale(e4),
        })
    }

    /// `min d_yy u^p` over the collocation nodes.
    pub fn convexity_margin(&self, eps: T) -> Result<T> {
        convexity_margin(&self.u(eps))
    }
}

/// `min` over the nodes of `d_yy u`.
pub fn convexity_margin<T: Real>(u: &SpectralField<T>) -> Result<T> {
    let d2 = diff_y(u, 2)?.to_physical();
    Ok(d2.iter().copied().fold(T::infinity(), T::min))
}

/// SBDF2 integrator for the leading-order system, optionally with the
/// order-`eps^2` corrector in lockstep.
pub struct HydroSolver<T: Real> {
    params: FlowParams<T>,
    stepper: Sbdf2<T>,
    s0: HydroState<T>,
    s2: Option<HydroState<T>>,
    prev0: Option<(SpectralField<T>, SpectralField<T>)>,
    prev2: Option<(SpectralField<T>, SpectralField<T>)>,
    forcing2: Option<Forcing<T>>,
    steps: usize,
}

impl<T: Real> HydroSolver<T> {
    /// Leading order only.
    pub fn new(u0: SpectralField<T>, params: FlowParams<T>) -> Result<Self> {
        if !(params.dt > T::zero()) {
            return Err(Error::Config(format!("dt must be positive, got {}", params.dt)));
        }
        let grid = u0.grid().clone();
        Ok(Self {
            stepper: Sbdf2::new(&grid, params.dt)?,
            s0: HydroState::from_u(u0, T::zero())?,
            s2: None,
            prev0: None,
            prev2: None,
            forcing2: None,
            params,
            steps: 0,
        })
    }

    /// Leading order plus corrector, `u2(0) = 0`.
    pub fn with_corrector(u0: SpectralField<T>, params: FlowParams<T>) -> Result<Self> {
        let mut s = Self::new(u0, params)?;
        let mut s2 = HydroState::zeros(s.s0.grid(), T::zero());
        s2.p = corrector_tendency(&s.s0, &s2, &params)?.1;
        s.s2 = Some(s2);
        Ok(s)
    }

    /// Extra known source in the corrector equation (manufactured solutions).
    pub fn set_corrector_forcing(&mut self, f: Forcing<T>) {
        self.forcing2 = Some(f);
    }

    /// Replaces the corrector state (e.g. a manufactured initial value).
    pub fn set_corrector_state(&mut self, u2: SpectralField<T>) -> Result<()> {
        let mut s2 = HydroState {
            v: vertical_velocity(&u2),
            p: SpectralField::zeros(u2.grid()),
            u: u2,
            t: self.s0.t,
        };
        s2.p = corrector_tendency(&self.s0, &s2, &self.params)?.1;
        self.s2 = Some(s2);
        self.prev2 = None;
        Ok(())
    }

    pub fn params(&self) -> &FlowParams<T> {
        &self.params
    }

    pub fn time(&self) -> T {
        self.s0.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &HydroState<T> {
        &self.s0
    }

    pub fn corrector(&self) -> Option<&HydroState<T>> {
        self.s2.as_ref()
    }

    /// Snapshot of both orders; `None` without a corrector.
    pub fn solution(&self) -> Option<ApproxSolution<T>> {
        self.s2.as_ref().map(|s2| ApproxSolution {
            order0: self.s0.clone(),
            order2: s2.clone(),
            params: self.params,
        })
    }

    /// `0.5 min(dx / max|u|, dy_min / max|v|)`.
    pub fn cfl_limit(&self) -> T {
        cfl_limit(&self.s0.u, &self.s0.v)
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.params.dt;
        if self.params.nonlinear && dt > self.cfl_limit() {
            return Err(Error::Config(format!(
                "dt = {dt} exceeds the advective limit {} at t = {}",
                self.cfl_limit(),
                self.s0.t
            )));
        }
        let t_new = self.s0.t + dt;
        let e0 = explicit0(&self.s0, &self.params)?;
        let new2 = match &self.s2 {
            Some(s2) => {
                let dt_u0 = hydro_tendency(&self.s0, &self.params)?;
                let (e2, _) = corrector_parts(&self.s0, s2, &dt_u0, &self.params)?;
                let f = self.forcing2.as_ref().map(|f| f(t_new));
                let prev = self.prev2.as_ref().map(|(a, b)| (a, b));
                let (u2, _) = self.stepper.advance(&s2.u, &e2, prev, f.as_ref())?;
                check_blowup(&u2, t_new)?;
                Some((u2, e2))
            }
            None => None,
        };
        let prev = self.prev0.as_ref().map(|(a, b)| (a, b));
        let (u0, _) = self.stepper.advance(&self.s0.u, &e0, prev, None)?;
        check_blowup(&u0, t_new)?;
        let old0 = std::mem::replace(&mut self.s0, HydroState::from_u(u0, t_new)?);
        self.prev0 = Some((old0.u, e0));
        if let Some((u2, e2)) = new2 {
            let old2 = self.s2.take().expect("corrector present");
            let mut s2 = HydroState {
                v: vertical_velocity(&u2),
                p: SpectralField::zeros(u2.grid()),
                u: u2,
                t: t_new,
            };
            s2.p = corrector_tendency(&self.s0, &s2, &self.params)?.1;
            self.s2 = Some(s2);
            self.prev2 = Some((old2.u, e2));
        }
        self.steps += 1;
        Ok(())
    }

    /// Steps until `t >= t_end` (to within a tenth of a step).
    pub fn run_until(&mut self, t_end: T) -> Result<()> {
        while self.s0.t < t_end - self.params.dt / T::lit(10.0) {
            self.step()?;
        }
        Ok(())
    }
}

/// `0.5 min(dx / max|u|, dy_min / max|v|)` (infinite for a fluid at rest).
pub fn cfl_limit<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> T {
    let g = u.grid();
    let dx = T::lit(2.0) * T::PI() / T::from_index(g.nx());
    let dy = g.y(1) - g.y(0);
    let umax = u.max_abs_physical();
    let vmax = v.max_abs_physical();
    let a = if umax > T::zero() { dx / umax } else { T::infinity() };
    let b = if vmax > T::zero() { dy / vmax } else { T::infinity() };
    T::lit(0.5) * a.min(b)
}

type Profile<T> = Array1<Cx<T>>;

/// Per-mode growth rates of the hydrostatic system linearized about the
/// shear flow `U(y)` (nodal values, `U = 0` at the walls).
///
/// Each mode starts from a smooth zero-mean profile and is integrated to
/// `t_end`; the rate is the log-slope of `||u_k||` over the second half.
pub fn linear_growth_rates<T: Real>(grid: &Grid<T>, base: &[T], ks: &[i64], dt: T, t_end: T) -> Result<Vec<T>> {
    let ny = grid.ny();
    if base.len() != ny {
        return Err(Error::Shape {
            expected: (ny, 1),
            got: (base.len(), 1),
        });
    }
    let ops = grid.ops();
    let ub: Array1<T> = Array1::from(base.to_vec());
    let dub: Array1<T> = (0..ny).map(|m| (0..ny).map(|j| ops.d1[[m, j]] * ub[j]).sum()).collect();
    let stepper = Sbdf2::new(grid, dt)?;
    let seed: Array1<Cx<T>> = grid
        .y_nodes()
        .iter()
        .map(|&y| {
            let s = y * y * (T::one() - y) * (T::one() - y);
            Cx::new(s * (T::one() - T::lit(2.0) * y), s * T::lit(0.3))
        })
        .collect();
    let n_steps = (t_end / dt).round().to_usize().unwrap_or(0).max(2);
    let half = n_steps / 2;
    ks.iter()
        .map(|&k| {
            let ikc = ik::<T>(k);
            let tend = |u: &Array1<Cx<T>>| -> Array1<Cx<T>> {
                let ux = u.mapv(|z| z * ikc);
                let v = matvec_c(&ops.cumint, ux.view()).mapv(|z| -z);
                let mut e = Array1::from_elem(ny, czero());
                for m in 0..ny {
                    e[m] = -(ux[m] * ub[m] + v[m] * dub[m]);
                }
                e
            };
            let mut u = seed.clone();
            let mut prev: Option<(Profile<T>, Profile<T>)> = None;
            let mut mid_norm = T::zero();
            for n in 0..n_steps {
                let e = tend(&u);
                let (solver, rhs) = match &prev {
                    None => (&stepper.be, &u + &e.mapv(|z| z * dt)),
                    Some((uo, eo)) => {
                        let h = T::lit(2.0) * dt / T::lit(3.0);
                        let hist = u.mapv(|z| z * T::lit(4.0 / 3.0)) - uo.mapv(|z| z / T::lit(3.0));
                        let ext = e.mapv(|z| z * T::lit(2.0)) - eo;
                        (&stepper.bdf, hist + ext.mapv(|z| z * h))
                    }
                };
                let (un, _) = solver.solve(grid, k, rhs);
                prev = Some((std::mem::replace(&mut u, un), e));
                if n + 1 == half {
                    mid_norm = profile_norm(grid, &u);
                }
            }
            let end = profile_norm(grid, &u);
            let span = T::from_index(n_steps - half) * dt;
            Ok((end / mid_norm).ln() / span)
        })
        .collect()
}

fn profile_norm<T: Real>(grid: &Grid<T>, u: &Array1<Cx<T>>) -> T {
    grid.integrate_y(u.mapv(|z| z.norm_sqr()).view()).sqrt()
}
