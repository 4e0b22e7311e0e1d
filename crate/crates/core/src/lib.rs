//! Pseudo-spectral solvers and verification kit for 2-D incompressible flow
//! in the thin strip `T x (0, 1)`.

pub mod ans;
pub mod corrector;
pub mod error;
pub mod gevrey;
pub mod hydro;
pub mod linalg;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};
pub use spectral::{Grid, SpectralField};

pub type Grid64 = Grid<f64>;
pub type Field64 = SpectralField<f64>;
pub type Grid32 = Grid<f32>;
pub type Field32 = SpectralField<f32>;
