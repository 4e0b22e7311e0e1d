//! Per-mode solves of `(eps^2 d_xx + d_yy)`-type operators in `y`.

use ndarray::{Array1, Array2, ArrayView1};

use super::{Grid, SpectralField};
use crate::error::{Error, Result};
use crate::linalg::{matvec_c, Lu};
use crate::scalar::{czero, Cx, Real};

/// Boundary condition type for [`solve_anisotropic_poisson`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    /// `d_y phi` prescribed at both walls.
    NeumannPair,
}

/// Solves `(eps^2 d_xx + d_yy) phi = omega` mode by mode.
///
/// `bc_lo`/`bc_hi` hold per-row boundary values in FFT order; `None` means
/// homogeneous data. For `k = 0` with Neumann data the flux must match
/// `int omega`, otherwise a solvability error carries the defect; the
/// solution is then normalized by `phi(0) = 0`.
pub fn solve_anisotropic_poisson<T: Real>(
    omega: &SpectralField<T>,
    eps: T,
    bc_lo: Option<&[Cx<T>]>,
    bc_hi: Option<&[Cx<T>]>,
    kind: BoundaryKind,
) -> Result<SpectralField<T>> {
    let grid = omega.grid();
    let (nx, ny) = grid.shape();
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(Error::Config(format!("eps must lie in (0, 1], got {eps}")));
    }
    for bc in [bc_lo, bc_hi].into_iter().flatten() {
        if bc.len() != nx {
            return Err(Error::Shape {
                expected: (nx, 1),
                got: (bc.len(), 1),
            });
        }
    }
    let ops = grid.ops();
    let last = ny - 1;
    let mut out = SpectralField::zeros(grid);
    for i in 0..nx {
        let k = grid.wavenumber(i);
        let k2 = T::from_i64(k * k).expect("k^2 representable");
        let mut a = ops.d2.clone();
        for m in 0..ny {
            a[[m, m]] = a[[m, m]] - eps * eps * k2;
        }
        let mut rhs = omega.row(i).to_owned();
        let lo = bc_lo.map_or(czero(), |b| b[i]);
        let hi = bc_hi.map_or(czero(), |b| b[i]);
        let singular_neumann = kind == BoundaryKind::NeumannPair && k == 0;
        match kind {
            BoundaryKind::Dirichlet => {
                set_identity_row(&mut a, 0);
                set_identity_row(&mut a, last);
            }
            BoundaryKind::NeumannPair if singular_neumann => {
                // gauge phi(0) = 0, Neumann at the top; bottom flux is checked below
                set_identity_row(&mut a, 0);
                a.row_mut(last).assign(&ops.d1.row(last));
            }
            BoundaryKind::NeumannPair => {
                a.row_mut(0).assign(&ops.d1.row(0));
                a.row_mut(last).assign(&ops.d1.row(last));
            }
        }
        rhs[0] = if singular_neumann { czero() } else { lo };
        rhs[last] = hi;
        let lu = Lu::factor(a)
            .ok_or_else(|| Error::Config(format!("singular elliptic operator at k = {k} (eps = {eps})")))?;
        let phi = lu.solve_complex(rhs.view());
        if singular_neumann {
            let dphi0 = ops
                .d1
                .row(0)
                .iter()
                .zip(phi.iter())
                .fold(czero::<T>(), |s, (d, p)| s + *p * *d);
            let defect = (dphi0 - lo).norm();
            let scale = T::one() + lo.norm() + hi.norm() + omega.row(i).iter().fold(T::zero(), |m, z| m.max(z.norm()));
            if defect > T::lit(1e-8) * scale {
                return Err(Error::Solvability {
                    defect: defect.as_f64(),
                });
            }
        }
        out.coeffs_mut().row_mut(i).assign(&phi);
    }
    Ok(out)
}

fn set_identity_row<T: Real>(a: &mut Array2<T>, r: usize) {
    a.row_mut(r).fill(T::zero());
    a[[r, r]] = T::one();
}

/// Pre-factored `shift * I - diffusion * (d_yy - eps^2 k^2)` with Dirichlet
/// rows at both walls, one factorization per `|k|`.
#[derive(Clone, Debug)]
pub struct DirichletSolver<T> {
    lus: Vec<Lu<T>>,
    pub shift: T,
    pub diffusion: T,
    pub eps: T,
}

impl<T: Real> DirichletSolver<T> {
    pub fn new(grid: &Grid<T>, eps: T, shift: T, diffusion: T) -> Result<Self> {
        let ny = grid.ny();
        let ops = grid.ops();
        let kmax = grid.nx() / 2;
        let mut lus = Vec::with_capacity(kmax + 1);
        for k in 0..=kmax {
            let k2 = T::from_index(k * k);
            let mut a = ops.d2.mapv(|v| -diffusion * v);
            for m in 0..ny {
                a[[m, m]] = a[[m, m]] + shift + diffusion * eps * eps * k2;
            }
            set_identity_row(&mut a, 0);
            set_identity_row(&mut a, ny - 1);
            let lu = Lu::factor(a).ok_or_else(|| Error::Config(format!("singular Dirichlet operator at |k| = {k}")))?;
            lus.push(lu);
        }
        Ok(Self {
            lus,
            shift,
            diffusion,
            eps,
        })
    }

    /// Poisson operator `d_yy - eps^2 k^2`.
    pub fn poisson(grid: &Grid<T>, eps: T) -> Result<Self> {
        Self::new(grid, eps, T::zero(), -T::one())
    }

    /// Backward-Euler-type operator `I - h (d_yy - eps^2 k^2)`.
    pub fn helmholtz(grid: &Grid<T>, eps: T, h: T) -> Result<Self> {
        Self::new(grid, eps, T::one(), h)
    }

    /// Solves for wavenumber `k`; `rhs[0]` and `rhs[ny-1]` are the wall values.
    pub fn solve(&self, k: i64, rhs: ArrayView1<Cx<T>>) -> Array1<Cx<T>> {
        self.lus[k.unsigned_abs() as usize].solve_complex(rhs)
    }

    /// Applies the solve to every mode with the given wall values.
    pub fn solve_field(&self, rhs: &SpectralField<T>, lo: Option<&[Cx<T>]>, hi: Option<&[Cx<T>]>) -> SpectralField<T> {
        let grid = rhs.grid();
        let ny = grid.ny();
        let mut out = rhs.clone();
        for i in 0..grid.nx() {
            let mut r = rhs.row(i).to_owned();
            r[0] = lo.map_or(czero(), |b| b[i]);
            r[ny - 1] = hi.map_or(czero(), |b| b[i]);
            let x = self.solve(grid.wavenumber(i), r.view());
            out.coeffs_mut().row_mut(i).assign(&x);
        }
        out
    }
}

/// Per-mode residual `max_m |(d_yy - eps^2 k^2) phi - omega|` over interior
/// nodes, relative to `max |omega|` (absolute when `omega` vanishes).
pub fn poisson_residual<T: Real>(phi: &SpectralField<T>, omega: &SpectralField<T>, eps: T) -> T {
    let grid = phi.grid();
    let ny = grid.ny();
    let d2 = &grid.ops().d2;
    let mut worst = T::zero();
    for i in 0..grid.nx() {
        let k = grid.wavenumber(i);
        let k2 = T::from_i64(k * k).expect("k^2 representable");
        let lap = matvec_c(d2, phi.row(i));
        let om = omega.row(i);
        let mut scale = om.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        if scale == T::zero() {
            scale = T::one();
        }
        for m in 1..ny - 1 {
            let r = (lap[m] - phi.row(i)[m] * (eps * eps * k2) - om[m]).norm() / scale;
            worst = worst.max(r);
        }
    }
    worst
}
