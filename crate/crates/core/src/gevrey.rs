//! Gevrey-3/2 weights `e^{Phi(t,k)}`, `Phi = (1 - lambda t) <k>^{2/3}`, and
//! the anisotropic `X^r` norms built on them.
//!
//! Weights are handled in log space; a norm whose value leaves the
//! floating-point range is an error, never `inf`.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{japanese_bracket, Cx, Real};
use crate::spectral::{diff_y, wavenumber, SpectralField};

/// Exponent of `<k>` in the Gevrey multiplier.
pub const GEVREY_EXPONENT: f64 = 2.0 / 3.0;

/// Multiplier data `(lambda, 2/3, tau0 = 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GevreyWeight<T> {
    lambda: T,
}

impl<T: Real> GevreyWeight<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !(lambda >= T::one()) || !lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 1, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Radius `tau(t) = 1 - lambda t`; an error once it is no longer positive.
    pub fn tau(&self, t: T) -> Result<T> {
        let tau = T::one() - self.lambda * t;
        if tau > T::zero() {
            Ok(tau)
        } else {
            Err(Error::RadiusExhausted {
                t: t.as_f64(),
                limit: (T::one() / self.lambda).as_f64(),
            })
        }
    }

    /// `Phi(t, k)`.
    pub fn phi(&self, t: T, k: i64) -> Result<T> {
        Ok(self.tau(t)? * bracket_pow(k))
    }
}

/// `<k>^{2/3}`.
pub fn bracket_pow<T: Real>(k: i64) -> T {
    japanese_bracket(T::from_i64(k).expect("wavenumber representable")).powf(T::lit(GEVREY_EXPONENT))
}

/// Largest violation of `Phi(k) <= Phi(k - l) + Phi(l)` over `|k|, |l| <= kmax`
/// (non-positive when the inequality holds everywhere).
pub fn subadditivity_defect<T: Real>(w: &GevreyWeight<T>, t: T, kmax: i64) -> Result<T> {
    let mut worst = T::neg_infinity();
    for k in -kmax..=kmax {
        for l in -kmax..=kmax {
            let d = w.phi(t, k)? - w.phi(t, k - l)? - w.phi(t, l)?;
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn log_max<T: Real>() -> T {
    T::max_value().ln()
}

/// Mode `k` multiplied by `e^{Phi(t,k)}`.
pub fn apply_weight<T: Real>(f: &SpectralField<T>, w: &GevreyWeight<T>, t: T) -> Result<SpectralField<T>> {
    let tau = w.tau(t)?;
    let mut out = f.clone();
    let grid = f.grid().clone();
    for (i, k) in grid.wavenumbers() {
        let lf = tau * bracket_pow::<T>(k);
        let amp = f.row(i).iter().fold(T::zero(), |m, z| m.max(z.norm()));
        if lf > log_max::<T>() || (amp > T::zero() && lf + amp.ln() > log_max::<T>()) {
            return Err(Error::WeightOverflow { k });
        }
        let s = lf.exp();
        out.coeffs_mut().row_mut(i).mapv_inplace(|z| z * s);
    }
    Ok(out)
}

/// `sqrt(sum_k exp(l_k))` for log-terms `l_k`, guarded against overflow.
fn sqrt_sum_exp<T: Real>(terms: &[(i64, T)]) -> Result<T> {
    let finite: Vec<&(i64, T)> = terms.iter().filter(|(_, l)| *l > T::neg_infinity()).collect();
    let Some(&&(kmax, lmax)) = finite.iter().max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite logs")) else {
        return Ok(T::zero());
    };
    let s: T = finite.iter().map(|(_, l)| (*l - lmax).exp()).sum();
    let log_half = (lmax + s.ln()) / T::lit(2.0);
    if !(log_half < log_max::<T>()) {
        return Err(Error::WeightOverflow { k: kmax });
    }
    Ok(log_half.exp())
}

/// `||f||_{H^{r,0}}` of `e^{tau <D>^{2/3}} f`, the common kernel of the norms below.
fn weighted_norm<T: Real>(f: &SpectralField<T>, r: T, tau: T) -> Result<T> {
    let grid = f.grid();
    let two = T::lit(2.0);
    let base = (two * T::PI()).ln();
    let mut terms = Vec::with_capacity(grid.nx());
    for (i, k) in grid.wavenumbers() {
        let mass = grid.integrate_y(f.row(i).mapv(|z| z.norm_sqr()).view());
        let l = if mass > T::zero() {
            let bk = japanese_bracket(T::from_i64(k).expect("wavenumber representable"));
            base + two * tau * bracket_pow::<T>(k) + two * r * bk.ln() + mass.ln()
        } else {
            T::neg_infinity()
        };
        terms.push((k, l));
    }
    sqrt_sum_exp(&terms)
}

fn check_order<T: Real>(r: T) -> Result<()> {
    if r >= T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("Sobolev order must be >= 0, got {r}")))
    }
}

/// `||f||_{X^r_tau} = (2 pi sum_k <k>^{2r} e^{2 Phi(t,k)} ||f_k||^2_{L^2_y})^{1/2}`.
pub fn norm_xr<T: Real>(f: &SpectralField<T>, r: T, w: &GevreyWeight<T>, t: T) -> Result<T> {
    check_order(r)?;
    weighted_norm(f, r, w.tau(t)?)
}

/// Boundary version of [`norm_xr`]: `values` holds one coefficient per
/// wavenumber in FFT order.
pub fn trace_norm_xr<T: Real>(values: ArrayView1<Cx<T>>, r: T, w: &GevreyWeight<T>, t: T) -> Result<T> {
    check_order(r)?;
    let tau = w.tau(t)?;
    let n = values.len();
    let two = T::lit(2.0);
    let base = (two * T::PI()).ln();
    let terms: Vec<(i64, T)> = values
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let k = wavenumber(i, n);
            let a = z.norm_sqr();
            let l = if a > T::zero() {
                let bk = japanese_bracket(T::from_i64(k).expect("wavenumber representable"));
                base + two * tau * bracket_pow::<T>(k) + two * r * bk.ln() + a.ln()
            } else {
                T::neg_infinity()
            };
            (k, l)
        })
        .collect();
    sqrt_sum_exp(&terms)
}

/// `M = ||e^{<D>^{2/3}} d_y u0||_{H^{14,0}} + ||e^{<D>^{2/3}} d_y^3 u0||_{H^{10,0}}`.
pub fn datum_norm_m<T: Real>(u0: &SpectralField<T>) -> Result<T> {
    let d1 = diff_y(u0, 1)?;
    let d3 = diff_y(u0, 3)?;
    Ok(weighted_norm(&d1, T::lit(14.0), T::one())? + weighted_norm(&d3, T::lit(10.0), T::one())?)
}

/// One `(t, ||.||_{X^r})` sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreySample {
    pub t: f64,
    pub value: f64,
}

/// Time series of one monitored norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyReport {
    pub field: String,
    pub r: f64,
    pub lambda: f64,
    pub samples: Vec<GevreySample>,
}

impl GevreyReport {
    pub fn new(field: impl Into<String>, r: f64, lambda: f64) -> Self {
        Self {
            field: field.into(),
            r,
            lambda,
            samples: Vec::new(),
        }
    }

    /// Appends `||f||_{X^r}` at time `t`; non-finite values are rejected.
    pub fn record<T: Real>(&mut self, f: &SpectralField<T>, w: &GevreyWeight<T>, t: T) -> Result<T> {
        let value = norm_xr(f, T::lit(self.r), w, t)?;
        self.samples.push(GevreySample {
            t: t.as_f64(),
            value: value.as_f64(),
        });
        Ok(value)
    }

    pub fn max(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.value).reduce(f64::max)
    }
}
