//! Fourier-in-`x`, collocation-in-`y` discretization of the strip
//! `T x (0, 1)`.
//!
//! Convention: `f(x, y) = sum_k f_k(y) e^{ikx}` and
//! `||f||^2_{L^2(T)} = 2 pi sum_k |f_k|^2`. Coefficients are stored in FFT
//! order: row `i` holds wavenumber `i` for `i < nx/2` and `i - nx` otherwise.

pub mod chebyshev;
pub mod elliptic;
pub mod io;

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1, Axis};
use num_complex::Complex;
use num_traits::Float;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::matvec_c;
use crate::scalar::{czero, ik, Cx, Real};
pub use chebyshev::YOperators;
pub use elliptic::{solve_anisotropic_poisson, BoundaryKind, DirichletSolver};

/// Fraction of the Fourier band kept after nonlinear products (`num/den`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DealiasFraction {
    pub num: u32,
    pub den: u32,
}

impl DealiasFraction {
    pub const TWO_THIRDS: Self = Self { num: 2, den: 3 };
}

impl Default for DealiasFraction {
    fn default() -> Self {
        Self::TWO_THIRDS
    }
}

/// Wavenumber of FFT-order row `i` out of `n`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Tensor grid: `nx` equispaced points in `x`, `ny` clustered nodes in `y`.
#[derive(Clone)]
pub struct Grid<T: Real> {
    nx: usize,
    ny: usize,
    dealias: DealiasFraction,
    ops: Arc<YOperators<T>>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dealias == other.dealias
    }
}

impl<T: Real> Grid<T> {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        Self::with_dealias(nx, ny, DealiasFraction::default())
    }

    pub fn with_dealias(nx: usize, ny: usize, dealias: DealiasFraction) -> Result<Self> {
        if nx < 8 || !nx.is_multiple_of(2) {
            return Err(Error::Config(format!("nx must be even and >= 8, got {nx}")));
        }
        if ny < 9 {
            return Err(Error::Config(format!("ny must be >= 9, got {ny}")));
        }
        if dealias.den == 0 || dealias.num == 0 || dealias.num > dealias.den {
            return Err(Error::Config(format!(
                "dealias fraction must lie in (0, 1], got {}/{}",
                dealias.num, dealias.den
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            nx,
            ny,
            dealias,
            ops: Arc::new(YOperators::new(ny)),
            fwd: planner.plan_fft_forward(nx),
            inv: planner.plan_fft_inverse(nx),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dealias(&self) -> DealiasFraction {
        self.dealias
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn ops(&self) -> &YOperators<T> {
        &self.ops
    }

    /// Wavenumber stored in row `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.nx)
    }

    /// Row holding wavenumber `k`, if it is resolved.
    pub fn index(&self, k: i64) -> Option<usize> {
        let h = (self.nx / 2) as i64;
        if k >= -h && k < h {
            Some(if k >= 0 {
                k as usize
            } else {
                (k + self.nx as i64) as usize
            })
        } else {
            None
        }
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        (0..self.nx).map(move |i| (i, self.wavenumber(i)))
    }

    /// True when mode `k` is removed by the dealiasing rule.
    pub fn is_truncated(&self, k: i64) -> bool {
        2 * self.dealias.den as u64 * k.unsigned_abs() > self.dealias.num as u64 * self.nx as u64
    }

    pub fn x(&self, j: usize) -> T {
        T::lit(2.0) * T::PI() * T::from_index(j) / T::from_index(self.nx)
    }

    pub fn y(&self, m: usize) -> T {
        self.ops.nodes[m]
    }

    pub fn y_nodes(&self) -> &[T] {
        &self.ops.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.ops.weights
    }

    /// Samples `f(x, y)` on the grid, shape `(nx, ny)`.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Array2<T> {
        Array2::from_shape_fn((self.nx, self.ny), |(j, m)| f(self.x(j), self.y(m)))
    }

    /// Quadrature `int_0^1 f dy` of nodal values.
    pub fn integrate_y<S>(&self, f: ArrayView1<S>) -> S
    where
        S: Copy + num_traits::Zero + Mul<T, Output = S>,
    {
        f.iter()
            .zip(self.ops.weights.iter())
            .fold(S::zero(), |acc, (&v, &w)| acc + v * w)
    }
}

/// Scalar field as Fourier coefficients in `x` at the `y` nodes.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Real> {
    grid: Grid<T>,
    coeffs: Array2<Cx<T>>,
    parity_real: bool,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: Array2::from_elem(grid.shape(), czero()),
            parity_real: true,
        }
    }

    /// Wraps coefficients given in FFT order.
    pub fn from_coeffs(grid: &Grid<T>, coeffs: Array2<Cx<T>>, parity_real: bool) -> Result<Self> {
        if coeffs.dim() != grid.shape() {
            return Err(Error::Shape {
                expected: grid.shape(),
                got: coeffs.dim(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            parity_real,
        })
    }

    /// Field `sum_k g_k(y) e^{ikx}` built from per-mode profiles.
    pub fn from_modes(grid: &Grid<T>, modes: &[(i64, Vec<Cx<T>>)], parity_real: bool) -> Result<Self> {
        let mut f = Self::zeros(grid);
        f.parity_real = parity_real;
        for (k, prof) in modes {
            let i = grid
                .index(*k)
                .ok_or_else(|| Error::Config(format!("wavenumber {k} not resolved")))?;
            if prof.len() != grid.ny() {
                return Err(Error::Shape {
                    expected: (1, grid.ny()),
                    got: (1, prof.len()),
                });
            }
            for (m, v) in prof.iter().enumerate() {
                f.coeffs[[i, m]] = f.coeffs[[i, m]] + *v;
            }
        }
        Ok(f)
    }

    /// Samples a real function and transforms it.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        transform_x(grid, &grid.sample(f)).expect("sampled array matches grid")
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Cx<T>> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Cx<T>> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Cx<T>> {
        self.coeffs
    }

    pub fn parity_real(&self) -> bool {
        self.parity_real
    }

    /// Coefficient profile of wavenumber `k` (zero view panics if unresolved).
    pub fn mode(&self, k: i64) -> ArrayView1<'_, Cx<T>> {
        let i = self.grid.index(k).expect("wavenumber resolved");
        self.coeffs.row(i)
    }

    pub fn mode_mut(&mut self, k: i64) -> ArrayViewMut1<'_, Cx<T>> {
        let i = self.grid.index(k).expect("wavenumber resolved");
        self.coeffs.row_mut(i)
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, Cx<T>> {
        self.coeffs.row(i)
    }

    /// Maximal violation of `f_{-k} = conj(f_k)` over `0 < |k| < nx/2`.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let h = (self.grid.nx() / 2) as i64;
        let mut d = T::zero();
        for k in 0..h {
            let a = self.mode(k);
            let b = self.mode(-k);
            for (p, q) in a.iter().zip(b.iter()) {
                d = d.max((*p - q.conj()).norm());
            }
        }
        d
    }

    /// Nodal values in physical space (real part).
    pub fn to_physical(&self) -> Array2<T> {
        self.to_physical_complex().mapv(|z| z.re)
    }

    pub fn to_physical_complex(&self) -> Array2<Cx<T>> {
        let (nx, ny) = self.grid.shape();
        let mut out = Array2::from_elem((nx, ny), czero());
        let mut buf = vec![czero::<T>(); nx];
        for m in 0..ny {
            for i in 0..nx {
                buf[i] = self.coeffs[[i, m]];
            }
            self.grid.inv.process(&mut buf);
            for j in 0..nx {
                out[[j, m]] = buf[j];
            }
        }
        out
    }

    /// Values at the wall `y = 0` (`upper = false`) or `y = 1` per row.
    pub fn wall(&self, upper: bool) -> Array1<Cx<T>> {
        let m = if upper { self.grid.ny() - 1 } else { 0 };
        self.coeffs.column(m).to_owned()
    }

    /// `L^2(T x (0,1))` norm via the discrete Parseval identity.
    pub fn l2_norm(&self) -> T {
        let w = self.grid.weights();
        let mut s = T::zero();
        for row in self.coeffs.rows() {
            for (z, &wm) in row.iter().zip(w) {
                s = s + z.norm_sqr() * wm;
            }
        }
        (T::lit(2.0) * T::PI() * s).sqrt()
    }

    pub fn max_abs_physical(&self) -> T {
        self.to_physical().iter().fold(T::zero(), |m, v| m.max(Float::abs(*v)))
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, a: T) -> Self {
        self.map_coeffs(|z| z * a)
    }

    pub fn map_coeffs(&self, f: impl Fn(Cx<T>) -> Cx<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.mapv(f),
            parity_real: self.parity_real,
        }
    }

    /// Multiplies mode `k` by `symbol(k)`.
    pub fn apply_symbol(&self, symbol: impl Fn(i64) -> Cx<T>) -> Self {
        let mut out = self.clone();
        for (i, mut row) in out.coeffs.axis_iter_mut(Axis(0)).enumerate() {
            let s = symbol(self.grid.wavenumber(i));
            row.mapv_inplace(|z| z * s);
        }
        out
    }

    /// Applies a real `ny x ny` matrix to every mode profile.
    pub fn apply_y(&self, a: &Array2<T>) -> Self {
        let mut out = self.clone();
        for (i, row) in self.coeffs.rows().into_iter().enumerate() {
            let r = matvec_c(a, row);
            out.coeffs.row_mut(i).assign(&r);
        }
        out
    }

    /// Zeroes modes removed by the dealiasing rule.
    pub fn truncate(&mut self) {
        for i in 0..self.grid.nx() {
            if self.grid.is_truncated(self.grid.wavenumber(i)) {
                self.coeffs.row_mut(i).fill(czero());
            }
        }
    }

    /// Per-mode `int_0^1 f_k dy`.
    pub fn depth_average(&self) -> Array1<Cx<T>> {
        self.coeffs
            .rows()
            .into_iter()
            .map(|r| self.grid.integrate_y(r))
            .collect()
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            coeffs: &self.coeffs + &other.coeffs,
            parity_real: self.parity_real && other.parity_real,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            coeffs: &self.coeffs - &other.coeffs,
            parity_real: self.parity_real && other.parity_real,
        })
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: T, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut c = self.coeffs.clone();
        c.zip_mut_with(&other.coeffs, |p, q| *p = *p + *q * a);
        Ok(Self {
            grid: self.grid.clone(),
            coeffs: c,
            parity_real: self.parity_real && other.parity_real,
        })
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        self.try_add(rhs).expect("operands share a grid")
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        self.try_sub(rhs).expect("operands share a grid")
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: T) -> SpectralField<T> {
        self.scale(rhs)
    }
}

/// Physical nodal values `(nx, ny)` -> Fourier coefficients in `x`.
pub fn transform_x<T: Real>(grid: &Grid<T>, values: &Array2<T>) -> Result<SpectralField<T>> {
    if values.dim() != grid.shape() {
        return Err(Error::Shape {
            expected: grid.shape(),
            got: values.dim(),
        });
    }
    let (nx, ny) = grid.shape();
    let scale = T::one() / T::from_index(nx);
    let mut coeffs = Array2::from_elem((nx, ny), czero());
    let mut buf = vec![czero::<T>(); nx];
    for m in 0..ny {
        for j in 0..nx {
            buf[j] = Complex::new(values[[j, m]], T::zero());
        }
        grid.fwd.process(&mut buf);
        for i in 0..nx {
            coeffs[[i, m]] = buf[i] * scale;
        }
    }
    Ok(SpectralField {
        grid: grid.clone(),
        coeffs,
        parity_real: true,
    })
}

/// Inverse of [`transform_x`].
pub fn inverse_x<T: Real>(f: &SpectralField<T>) -> Array2<T> {
    f.to_physical()
}

/// `d^order/dx^order`: mode `k` multiplied by `(ik)^order`.
pub fn diff_x<T: Real>(f: &SpectralField<T>, order: u32) -> SpectralField<T> {
    if order == 0 {
        return f.clone();
    }
    f.apply_symbol(|k| ik::<T>(k).powu(order))
}

/// Collocation derivative in `y`, `order <= 4`.
pub fn diff_y<T: Real>(f: &SpectralField<T>, order: u32) -> Result<SpectralField<T>> {
    if order == 0 {
        return Ok(f.clone());
    }
    let a = f
        .grid
        .ops()
        .deriv(order as usize)
        .ok_or_else(|| Error::Unsupported(format!("y-derivative of order {order} (max 4)")))?;
    Ok(f.apply_y(a))
}

/// `int_0^y f dy'` per mode; vanishes at `y = 0`.
pub fn integrate_y_cumulative<T: Real>(f: &SpectralField<T>) -> SpectralField<T> {
    f.apply_y(&f.grid.ops().cumint)
}

/// Pointwise product in physical space followed by dealiasing truncation.
pub fn dealias_product<T: Real>(f: &SpectralField<T>, g: &SpectralField<T>) -> Result<SpectralField<T>> {
    f.check_same_grid(g)?;
    let a = f.to_physical();
    let b = g.to_physical();
    let mut out = transform_x(&f.grid, &(&a * &b))?;
    out.parity_real = f.parity_real && g.parity_real;
    out.truncate();
    Ok(out)
}

/// `int int f g dx dy` of two real fields (trapezoid in `x`, Clenshaw-Curtis in `y`).
pub fn inner_product<T: Real>(f: &SpectralField<T>, g: &SpectralField<T>) -> Result<T> {
    f.check_same_grid(g)?;
    let w = f.grid.weights();
    let mut s = T::zero();
    for (rf, rg) in f.coeffs.rows().into_iter().zip(g.coeffs.rows()) {
        for ((a, b), &wm) in rf.iter().zip(rg.iter()).zip(w) {
            s = s + (*a * b.conj()).re * wm;
        }
    }
    Ok(T::lit(2.0) * T::PI() * s)
}

#[cfg(test)]
mod tests;
