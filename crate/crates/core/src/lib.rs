//! Kernel density estimation for densities analytic in a strip.
//!
//! The estimator uses Fejér-type kernels k(x; θ) rescaled to an exponential
//! type N = ln n / (2γ), with θ_n = 1 − 1/N and bandwidth h_n = θ_n / N, so
//! that the kernel's Fourier transform is identically one on [−N, N]. The
//! crate also contains the measurement machinery used to check the method:
//! quadrature, L_p norms on grids, numerical Fourier transforms, and a
//! reproducible Monte Carlo harness for the normalized L_p risk.

pub mod densities;
pub mod error;
pub mod estimator;
pub mod kernels;
pub mod numerics;
pub mod report;
pub mod risk;
pub mod selfcheck;

pub use densities::{AnalyticDensity, BoundaryFunction, DensityKind, TailCondition};
pub use error::{Error, Result};
pub use estimator::{EstimateResult, ErrorDecomposition, PointwiseMoments};
pub use kernels::{BandwidthSchedule, KernelSpec, ScaledKernel};
pub use numerics::{GridFunction, GridSpec};
pub use risk::{LossSpec, RiskReport};

use serde::{Deserialize, Serialize};

/// A nonnegative quantity that may be infinite (divergent integrals are a
/// value, not a failure).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaybeInfinite {
    Finite(f64),
    Infinite,
}

impl MaybeInfinite {
    pub fn finite(self) -> Option<f64> {
        match self {
            MaybeInfinite::Finite(v) => Some(v),
            MaybeInfinite::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MaybeInfinite::Infinite)
    }
}
