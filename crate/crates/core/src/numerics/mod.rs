//! Measurement instruments: grids, norms, numerical Fourier transforms,
//! quadrature and quadrature convolution.

mod convolve;
mod grid;
mod oscillatory;
mod quad;

pub use convolve::{convolve_with_density, integrate_against_density};
pub use grid::{fmt_f64, GridFunction, GridSpec, NormReport};
pub use oscillatory::{cosine_tail, sine_tail};
pub use quad::{uniform_breaks, Integrator, Quad};
