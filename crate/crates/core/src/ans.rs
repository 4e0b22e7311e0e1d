//! Scaled anisotropic Navier-Stokes system in vorticity-streamfunction form.
//!
//! `omega = d_y u - eps^2 d_x v`, `Delta_eps phi = omega`, `u = d_y phi + ubar`,
//! `v = -d_x phi`. The streamfunction carries the `k != 0` modes only; the
//! mean flow `ubar(y)` obeys `d_t ubar + (u d_x u + v d_y u)_0 + G = d_yy ubar`.
//!
//! Each step solves the vorticity equation with `omega = 0` at the walls
//! (slip step), then adds the two wall-vorticity responses that restore
//! `d_y phi = 0` (influence-matrix correction).

use ndarray::Array1;
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gevrey::{norm_xr, GevreyWeight};
use crate::hydro::{cfl_limit, ApproxSolution, FlowParams, HydroState, BLOWUP_BOUND};
use crate::linalg::{cond2, eigenvalues2, matvec_c, solve2, Mat2};
use crate::scalar::{czero, Cx, Real};
use crate::spectral::{dealias_product, diff_x, diff_y, inner_product, DirichletSolver, Grid, SpectralField};

/// Condition-number ceiling for the per-mode 2x2 systems.
pub const MAX_INFLUENCE_COND: f64 = 1e8;

/// Vorticity, streamfunction and mean flow at one time.
#[derive(Clone, Debug)]
pub struct AnsState<T: Real> {
    pub omega: SpectralField<T>,
    /// Streamfunction of the `k != 0` part; its `k = 0` row is zero.
    pub phi: SpectralField<T>,
    /// Mean-flow profile at the `y` nodes.
    pub ubar: Array1<T>,
    pub eps: T,
    pub t: T,
}

impl<T: Real> AnsState<T> {
    /// State with velocity `u0` (the `k != 0` modes must have zero depth
    /// average so that `phi = int_0^y u` vanishes at both walls).
    pub fn from_velocity(u0: &SpectralField<T>, eps: T, t: T) -> Result<Self> {
        check_eps(eps)?;
        let g = u0.grid();
        let ops = g.ops();
        let mut phi = SpectralField::zeros(g);
        let mut ubar = Array1::zeros(g.ny());
        let scale = u0.max_abs_coeff().max(T::one());
        for (i, k) in g.wavenumbers() {
            if k == 0 {
                ubar = u0.row(i).mapv(|z| z.re);
                continue;
            }
            let p = matvec_c(&ops.cumint, u0.row(i));
            if p[g.ny() - 1].norm() > T::lit(1e-8) * scale {
                return Err(Error::Contract(format!(
                    "depth average of mode k = {k} is {:e}, expected 0",
                    p[g.ny() - 1].norm()
                )));
            }
            phi.coeffs_mut().row_mut(i).assign(&p);
        }
        let mut s = Self {
            omega: SpectralField::zeros(g),
            phi,
            ubar,
            eps,
            t,
        };
        s.omega = laplacian_eps(&s.phi, eps)?;
        s.set_mean_vorticity();
        Ok(s)
    }

    pub fn zeros(grid: &Grid<T>, eps: T) -> Self {
        Self {
            omega: SpectralField::zeros(grid),
            phi: SpectralField::zeros(grid),
            ubar: Array1::zeros(grid.ny()),
            eps,
            t: T::zero(),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.omega.grid()
    }

    fn set_mean_vorticity(&mut self) {
        let g = self.grid().clone();
        let ub = self.ubar.mapv(|x| Cx::new(x, T::zero()));
        let d = matvec_c(&g.ops().d1, ub.view());
        self.omega.mode_mut(0).assign(&d);
    }

    /// Largest wall value of `u` over all modes.
    pub fn noslip_defect(&self) -> T {
        let (u, _) = reconstruct_velocity(self);
        u.wall(false)
            .iter()
            .chain(u.wall(true).iter())
            .fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `max_m |Delta_eps phi - omega|` over interior nodes and `k != 0`.
    pub fn poisson_residual(&self) -> T {
        let lap = laplacian_eps(&self.phi, self.eps).expect("second derivative supported");
        let g = self.grid();
        let ny = g.ny();
        let mut worst = T::zero();
        for (i, k) in g.wavenumbers() {
            if k == 0 {
                continue;
            }
            for m in 1..ny - 1 {
                worst = worst.max((lap.row(i)[m] - self.omega.row(i)[m]).norm());
            }
        }
        worst
    }
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps <= T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("eps must lie in (0, 1], got {eps}")))
    }
}

/// `(eps^2 d_xx + d_yy) phi` by spectral differentiation.
pub fn laplacian_eps<T: Real>(phi: &SpectralField<T>, eps: T) -> Result<SpectralField<T>> {
    Ok(&diff_y(phi, 2)? + &diff_x(phi, 2).scale(eps * eps))
}

/// `u = d_y phi + ubar`, `v = -d_x phi`.
pub fn reconstruct_velocity<T: Real>(state: &AnsState<T>) -> (SpectralField<T>, SpectralField<T>) {
    let mut u = diff_y(&state.phi, 1).expect("first derivative supported");
    let ub = state.ubar.mapv(|x| Cx::new(x, T::zero()));
    u.mode_mut(0).assign(&ub);
    let v = diff_x(&state.phi, 1).scale(-T::one());
    (u, v)
}

/// `|int int d_x phi Delta_eps phi dx dy|` by quadrature; zero in exact
/// arithmetic when `phi` vanishes at both walls.
pub fn hydrostatic_trick_residual<T: Real>(phi: &SpectralField<T>, eps: T) -> Result<T> {
    let lap = laplacian_eps(phi, eps)?;
    Ok(inner_product(&diff_x(phi, 1), &lap)?.abs())
}

/// Per-mode responses to unit wall vorticity for one implicit operator.
#[derive(Clone, Debug)]
pub struct InfluenceOperator<T: Real> {
    /// `omega_j` with `omega_j = 1` at wall `j` and `0` at the other, per `|k|`.
    omega: Vec<[Array1<T>; 2]>,
    phi: Vec<[Array1<T>; 2]>,
    /// `matrix[|k|][i][j] = d_y phi_j` at wall `i`.
    matrix: Vec<Mat2<T>>,
    cond: Vec<T>,
}

impl<T: Real> InfluenceOperator<T> {
    /// Builds responses for `(I - h Delta_eps) omega = 0`, `Delta_eps phi = omega`.
    pub fn new(grid: &Grid<T>, helm: &DirichletSolver<T>, poisson: &DirichletSolver<T>) -> Result<Self> {
        let ny = grid.ny();
        let d1 = &grid.ops().d1;
        let kmax = grid.nx() / 2;
        let mut out = Self {
            omega: Vec::with_capacity(kmax + 1),
            phi: Vec::with_capacity(kmax + 1),
            matrix: Vec::with_capacity(kmax + 1),
            cond: Vec::with_capacity(kmax + 1),
        };
        for k in 0..=kmax as i64 {
            let mut om: [Array1<T>; 2] = [Array1::zeros(ny), Array1::zeros(ny)];
            let mut ph: [Array1<T>; 2] = [Array1::zeros(ny), Array1::zeros(ny)];
            let mut m: Mat2<T> = [[czero(); 2]; 2];
            for (j, wall) in [0, ny - 1].into_iter().enumerate() {
                let mut rhs = Array1::from_elem(ny, czero());
                rhs[wall] = Cx::new(T::one(), T::zero());
                let o = helm.solve(k, rhs.view());
                let mut r = o.clone();
                r[0] = czero();
                r[ny - 1] = czero();
                let p = poisson.solve(k, r.view());
                for (i, w) in [0, ny - 1].into_iter().enumerate() {
                    m[i][j] = (0..ny).fold(czero(), |s, n| s + p[n] * d1[[w, n]]);
                }
                om[j] = o.mapv(|z| z.re);
                ph[j] = p.mapv(|z| z.re);
            }
            let c = if k == 0 { T::one() } else { cond2(&m) };
            if k != 0 && !(c < T::lit(MAX_INFLUENCE_COND)) {
                return Err(Error::SingularInfluence { k, cond: c.as_f64() });
            }
            out.omega.push(om);
            out.phi.push(ph);
            out.matrix.push(m);
            out.cond.push(c);
        }
        Ok(out)
    }

    pub fn matrix(&self, k: i64) -> &Mat2<T> {
        &self.matrix[k.unsigned_abs() as usize]
    }

    /// Condition numbers for `k = 1 ..= nx/2`.
    pub fn condition_numbers(&self) -> &[T] {
        &self.cond[1..]
    }

    /// Wall-vorticity amplitudes cancelling the Neumann defect `[d_y phi(0), d_y phi(1)]`.
    pub fn amplitudes(&self, k: i64, defect: [Cx<T>; 2]) -> Result<[Cx<T>; 2]> {
        solve2(self.matrix(k), [-defect[0], -defect[1]]).ok_or(Error::SingularInfluence { k, cond: f64::INFINITY })
    }

    /// Adds the correction to one mode's provisional profiles; returns the amplitudes.
    pub fn correct_mode(
        &self,
        grid: &Grid<T>,
        k: i64,
        omega: &mut Array1<Cx<T>>,
        phi: &mut Array1<Cx<T>>,
    ) -> Result<[Cx<T>; 2]> {
        let d1 = &grid.ops().d1;
        let ny = grid.ny();
        let dphi = |w: usize| (0..ny).fold(czero(), |s, n| s + phi[n] * d1[[w, n]]);
        let a = self.amplitudes(k, [dphi(0), dphi(ny - 1)])?;
        let idx = k.unsigned_abs() as usize;
        for j in 0..2 {
            omega.zip_mut_with(&self.omega[idx][j], |z, r| *z = *z + a[j] * *r);
            phi.zip_mut_with(&self.phi[idx][j], |z, r| *z = *z + a[j] * *r);
        }
        Ok(a)
    }

    /// `rho(diag(M)^{-1} M - I)` for `k = 1 ..= nx/2`.
    pub fn contraction_radii(&self) -> Vec<T> {
        self.matrix
            .iter()
            .skip(1)
            .map(|m| {
                let r: Mat2<T> = [[czero(), m[0][1] / m[0][0]], [m[1][0] / m[1][1], czero()]];
                eigenvalues2(&r).iter().fold(T::zero(), |a, z| a.max(z.norm()))
            })
            .collect()
    }

    /// `max_k rho(diag(M)^{-1} M - I)` over `k != 0`, with the modes whose
    /// off-identity part is not a contraction.
    pub fn contraction_probe(&self) -> (T, Vec<i64>) {
        let radii = self.contraction_radii();
        let failing = (1..)
            .zip(&radii)
            .filter(|(_, r)| !(**r < T::one()))
            .map(|(k, _)| k)
            .collect();
        let worst = radii.iter().fold(T::zero(), |a, r| a.max(*r));
        (worst, failing)
    }
}

/// Implicit operators for one stepping coefficient `h`.
#[derive(Clone, Debug)]
struct StepOps<T: Real> {
    helm: DirichletSolver<T>,
    influence: InfluenceOperator<T>,
    h: T,
}

impl<T: Real> StepOps<T> {
    fn new(grid: &Grid<T>, eps: T, h: T, poisson: &DirichletSolver<T>) -> Result<Self> {
        let helm = DirichletSolver::helmholtz(grid, eps, h)?;
        let influence = InfluenceOperator::new(grid, &helm, poisson)?;
        Ok(Self { helm, influence, h })
    }
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AnsMonitors {
    pub t: f64,
    pub noslip_defect: f64,
    pub cancellation_residual: f64,
    pub poisson_residual: f64,
}

struct History<T: Real> {
    omega: SpectralField<T>,
    ubar: Array1<Cx<T>>,
    e_omega: SpectralField<T>,
    e_mean: Array1<Cx<T>>,
}

/// SBDF2 integrator with influence-matrix no-slip enforcement.
pub struct AnsSolver<T: Real> {
    params: FlowParams<T>,
    poisson: DirichletSolver<T>,
    be: StepOps<T>,
    bdf: StepOps<T>,
    state: AnsState<T>,
    prev: Option<History<T>>,
    steps: usize,
}

impl<T: Real> AnsSolver<T> {
    pub fn new(state: AnsState<T>, params: FlowParams<T>) -> Result<Self> {
        if !(params.dt > T::zero()) {
            return Err(Error::Config(format!("dt must be positive, got {}", params.dt)));
        }
        let grid = state.grid().clone();
        let eps = state.eps;
        let poisson = DirichletSolver::poisson(&grid, eps)?;
        let be = StepOps::new(&grid, eps, params.dt, &poisson)?;
        let bdf = StepOps::new(&grid, eps, T::lit(2.0) * params.dt / T::lit(3.0), &poisson)?;
        Ok(Self {
            params,
            poisson,
            be,
            bdf,
            state,
            prev: None,
            steps: 0,
        })
    }

    pub fn state(&self) -> &AnsState<T> {
        &self.state
    }

    pub fn time(&self) -> T {
        self.state.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn params(&self) -> &FlowParams<T> {
        &self.params
    }

    /// Influence operator of the second-order step (the one used after the first step).
    pub fn influence(&self) -> &InfluenceOperator<T> {
        &self.bdf.influence
    }

    /// Explicit terms: `-(u d_x omega + v d_y omega)` and the mean-flow
    /// row `-(u d_x u + v d_y u)_0 - G`.
    fn explicit_terms(&self) -> Result<(SpectralField<T>, Array1<Cx<T>>)> {
        let g = self.state.grid();
        let mut e_mean = Array1::from_elem(g.ny(), Cx::new(-self.params.forcing, T::zero()));
        if !self.params.nonlinear {
            return Ok((SpectralField::zeros(g), e_mean));
        }
        let (u, v) = reconstruct_velocity(&self.state);
        let w = &self.state.omega;
        let adv = &dealias_product(&u, &diff_x(w, 1))? + &dealias_product(&v, &diff_y(w, 1)?)?;
        let mom = &dealias_product(&u, &diff_x(&u, 1))? + &dealias_product(&v, &diff_y(&u, 1)?)?;
        e_mean.zip_mut_with(&mom.mode(0), |a, b| *a = *a - *b);
        Ok((adv.scale(-T::one()), e_mean))
    }

    /// Provisional vorticity and streamfunction with `omega = 0` at the walls,
    /// from the assembled right-hand side of the implicit step.
    pub fn slip_step(&self, rhs: &SpectralField<T>, first: bool) -> (SpectralField<T>, SpectralField<T>) {
        let ops = if first { &self.be } else { &self.bdf };
        let omega = ops.helm.solve_field(rhs, None, None);
        let phi = self.poisson.solve_field(&omega, None, None);
        (omega, phi)
    }

    /// Applies the per-mode wall correction so that `d_y phi = 0` at both walls.
    pub fn influence_correct(
        &self,
        omega: &mut SpectralField<T>,
        phi: &mut SpectralField<T>,
        first: bool,
    ) -> Result<()> {
        let ops = if first { &self.be } else { &self.bdf };
        let g = omega.grid().clone();
        for (i, k) in g.wavenumbers() {
            if k == 0 {
                continue;
            }
            let mut o = omega.row(i).to_owned();
            let mut p = phi.row(i).to_owned();
            ops.influence.correct_mode(&g, k, &mut o, &mut p)?;
            omega.coeffs_mut().row_mut(i).assign(&o);
            phi.coeffs_mut().row_mut(i).assign(&p);
        }
        Ok(())
    }

    /// `0.5 min(dx / max|u|, dy_min / max|v|)`.
    pub fn cfl_limit(&self) -> T {
        let (u, v) = reconstruct_velocity(&self.state);
        cfl_limit(&u, &v)
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.params.dt;
        if self.params.nonlinear && dt > self.cfl_limit() {
            return Err(Error::Config(format!(
                "dt = {dt} exceeds the advective limit {} at t = {}",
                self.cfl_limit(),
                self.state.t
            )));
        }
        let g = self.state.grid().clone();
        let (e_omega, e_mean) = self.explicit_terms()?;
        let ubar_c = self.state.ubar.mapv(|x| Cx::new(x, T::zero()));
        let first = self.prev.is_none();
        let (rhs, rhs_mean) = match &self.prev {
            None => (self.state.omega.axpy(dt, &e_omega)?, &ubar_c + &e_mean.mapv(|z| z * dt)),
            Some(h) => {
                let c = self.bdf.h;
                let four3 = T::lit(4.0) / T::lit(3.0);
                let third = T::one() / T::lit(3.0);
                let hist = self.state.omega.scale(four3).axpy(-third, &h.omega)?;
                let ext = e_omega.scale(T::lit(2.0)).try_sub(&h.e_omega)?;
                let mean = ubar_c.mapv(|z| z * four3) - h.ubar.mapv(|z| z * third)
                    + (e_mean.mapv(|z| z * T::lit(2.0)) - &h.e_mean).mapv(|z| z * c);
                (hist.axpy(c, &ext)?, mean)
            }
        };
        let (mut omega, mut phi) = self.slip_step(&rhs, first);
        self.influence_correct(&mut omega, &mut phi, first)?;
        phi.mode_mut(0).fill(czero());

        let ops = if first { &self.be } else { &self.bdf };
        let ny = g.ny();
        let mut r = rhs_mean;
        r[0] = czero();
        r[ny - 1] = czero();
        let ubar_new = ops.helm.solve(0, r.view());

        let t_new = self.state.t + dt;
        if !omega.is_finite() || omega.max_abs_coeff() > T::lit(BLOWUP_BOUND) {
            return Err(Error::BlowUp {
                t: t_new.as_f64(),
                bound: BLOWUP_BOUND,
            });
        }
        let eps = self.state.eps;
        let old = std::mem::replace(
            &mut self.state,
            AnsState {
                omega,
                phi,
                ubar: ubar_new.mapv(|z| z.re),
                eps,
                t: t_new,
            },
        );
        self.state.set_mean_vorticity();
        self.prev = Some(History {
            omega: old.omega,
            ubar: ubar_c,
            e_omega,
            e_mean,
        });
        self.steps += 1;
        Ok(())
    }

    pub fn monitors(&self) -> Result<AnsMonitors> {
        Ok(AnsMonitors {
            t: self.state.t.as_f64(),
            noslip_defect: self.state.noslip_defect().as_f64(),
            cancellation_residual: hydrostatic_trick_residual(&self.state.phi, self.state.eps)?.as_f64(),
            poisson_residual: self.state.poisson_residual().as_f64(),
        })
    }

    /// Steps until `t >= t_end` (to within a tenth of a step).
    pub fn run_until(&mut self, t_end: T) -> Result<()> {
        while self.state.t < t_end - self.params.dt / T::lit(10.0) {
            self.step()?;
        }
        Ok(())
    }
}

/// Reference flow for [`error_vs_hydro`].
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a, T: Real> {
    /// Leading-order hydrostatic solution `(u_p, v_p)`.
    Hydro(&'a HydroState<T>),
    /// Approximate solution `u^p = u_p^0 + eps^2 u_p^2`.
    Approx(&'a ApproxSolution<T>),
}

impl<T: Real> Reference<'_, T> {
    fn t(&self) -> T {
        match self {
            Reference::Hydro(s) => s.t,
            Reference::Approx(a) => a.t(),
        }
    }

    fn velocity(&self, eps: T) -> (SpectralField<T>, SpectralField<T>) {
        match self {
            Reference::Hydro(s) => (s.u.clone(), s.v.clone()),
            Reference::Approx(a) => (a.u(eps), a.v(eps)),
        }
    }
}

/// `L^2` and `L^infinity` norms of `(u^eps - u_p, eps (v^eps - v_p))`.
///
/// The `L^infinity` norm is the largest nodal Euclidean length of the pair.
pub fn error_vs_hydro<T: Real>(ans: &AnsState<T>, reference: Reference<'_, T>) -> Result<(T, T)> {
    let tol = T::lit(1e-9) * (T::one() + Float::abs(ans.t));
    if Float::abs(ans.t - reference.t()) > tol {
        return Err(Error::TimeMismatch {
            a: ans.t.as_f64(),
            b: reference.t().as_f64(),
        });
    }
    let eps = ans.eps;
    let (u, v) = reconstruct_velocity(ans);
    let (up, vp) = reference.velocity(eps);
    let du = u.try_sub(&up)?;
    let dv = v.try_sub(&vp)?.scale(eps);
    let l2 = du.l2_norm().hypot(dv.l2_norm());
    let a = du.to_physical();
    let b = dv.to_physical();
    let linf = a.iter().zip(b.iter()).fold(T::zero(), |m, (x, y)| m.max(x.hypot(*y)));
    Ok((l2, linf))
}

/// `omega^R = omega^eps - (d_y u^p - eps^2 d_x v^p)`.
pub fn omega_remainder<T: Real>(ans: &AnsState<T>, approx: &ApproxSolution<T>) -> Result<SpectralField<T>> {
    ans.omega.try_sub(&approx.vorticity(ans.eps)?)
}

/// `||omega^R||_{X^2} / eps^3` at the state's time.
pub fn omega_remainder_ratio<T: Real>(ans: &AnsState<T>, approx: &ApproxSolution<T>, w: &GevreyWeight<T>) -> Result<T> {
    let wr = omega_remainder(ans, approx)?;
    let e = ans.eps;
    Ok(norm_xr(&wr, T::lit(2.0), w, ans.t)? / (e * e * e))
}

/// Depth-integrated mean velocity `int_0^1 ubar dy`.
pub fn mean_flux<T: Real>(state: &AnsState<T>) -> T {
    state.grid().integrate_y(state.ubar.view())
}

/// `int_0^1 d_yy ubar dy`, the viscous part of the mean-flux tendency.
pub fn mean_wall_stress<T: Real>(state: &AnsState<T>) -> T {
    let g = state.grid();
    let d2 = &g.ops().d2;
    let ny = g.ny();
    let lap: Array1<T> = (0..ny)
        .map(|m| (0..ny).map(|n| d2[[m, n]] * state.ubar[n]).sum())
        .collect();
    g.integrate_y(lap.view())
}

/// Kinetic energy norm `||(u, eps v)||_{L^2}`.
pub fn energy_norm<T: Real>(state: &AnsState<T>) -> T {
    let (u, v) = reconstruct_velocity(state);
    u.l2_norm().hypot(state.eps * v.l2_norm())
}
