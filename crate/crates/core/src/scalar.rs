//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point type the solvers are generic over (`f32` or `f64`).
///
/// `FftNum` pulls in `num_traits::Signed`, whose `abs`/`signum` collide with
/// the `Float` methods; call those as `Float::abs(x)` in generic code.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + LowerExp + Sum {
    /// Converts an `f64` literal. Infallible for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_index(i: usize) -> Self {
        Self::from_usize(i).expect("index representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over [`Real`].
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

/// `i * k` as a complex number.
#[inline]
pub(crate) fn ik<T: Real>(k: i64) -> Cx<T> {
    Complex::new(T::zero(), T::from_i64(k).expect("wavenumber representable"))
}

/// `<k> = (1 + k^2)^{1/2}`.
#[inline]
pub fn japanese_bracket<T: Real>(k: T) -> T {
    (T::one() + k * k).sqrt()
}
