use rayon::prelude::*;

use super::grid::{GridFunction, GridSpec};
use super::quad::{uniform_breaks, Integrator};
use crate::densities::AnalyticDensity;
use crate::error::{Error, Result};

/// Tail mass of the density ignored outside the integration window.
const NEGLECTED_MASS: f64 = 1e-13;
/// Window cap for heavy-tailed densities, in units of the strip width.
const HEAVY_TAIL_WINDOW: f64 = 1e3;

/// ∫ kernel(x − y) f(y) dy by adaptive quadrature.
///
/// `scale` is the oscillation length of the kernel (its bandwidth); the
/// window is split into pieces of that length near `x` and four times that
/// length elsewhere. For heavy-tailed densities the window is capped at
/// 10³ strip widths, so kernels must decay at least like |z|⁻².
pub fn integrate_against_density<K: Fn(f64) -> f64>(
    kernel: K,
    scale: f64,
    d: &AnalyticDensity,
    x: f64,
    abs_tol: f64,
) -> Result<f64> {
    let radius = if d.is_heavy_tailed() {
        HEAVY_TAIL_WINDOW * d.strip()
    } else {
        d.effective_radius(NEGLECTED_MASS)
    };
    let (lo, hi) = (-radius, radius);
    let near = 40.0 * scale;
    let (nlo, nhi) = ((x - near).max(lo), (x + near).min(hi));
    let mut breaks = Vec::new();
    if nlo < nhi {
        if lo < nlo {
            breaks.extend(uniform_breaks(lo, nlo, ((nlo - lo) / (4.0 * scale)).ceil() as usize));
            breaks.pop();
        }
        breaks.extend(uniform_breaks(nlo, nhi, ((nhi - nlo) / scale).ceil() as usize));
        if nhi < hi {
            breaks.pop();
            breaks.extend(uniform_breaks(nhi, hi, ((hi - nhi) / (4.0 * scale)).ceil() as usize));
        }
    } else {
        breaks = uniform_breaks(lo, hi, ((hi - lo) / (4.0 * scale)).ceil() as usize);
    }
    let q = Integrator::new()
        .abs_tol(abs_tol)
        .rel_tol(1e-12)
        .max_intervals(breaks.len() * 16 + 1000)
        .integrate_pieces(|y| kernel(x - y) * d.eval(y), &breaks)
        .map_err(|e| match e {
            Error::Quadrature { value, error, intervals, .. } => Error::Quadrature {
                value,
                error,
                intervals,
                at: Some(x),
            },
            other => other,
        })?;
    Ok(q.value)
}

/// (kernel * f) tabulated on `grid`, each point to absolute error `1e-10`.
/// Points are computed in parallel; each value depends only on its point.
pub fn convolve_with_density<K: Fn(f64) -> f64 + Sync>(
    kernel: K,
    scale: f64,
    d: &AnalyticDensity,
    grid: &GridSpec,
) -> Result<GridFunction> {
    let values: Result<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| integrate_against_density(&kernel, scale, d, grid.point(i), 1e-10))
        .collect();
    GridFunction::new(grid.left(), grid.step, values?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BandwidthSchedule;

    #[test]
    fn approximate_identity() {
        let d = AnalyticDensity::sech(1.0).unwrap();
        let k = BandwidthSchedule::new(0.5, 10u64.pow(12)).unwrap().scaled_kernel();
        let grid = GridSpec::new(4.0, 0.5).unwrap();
        let conv = convolve_with_density(|z| k.eval(z), k.h, &d, &grid).unwrap();
        for (i, v) in conv.values.iter().enumerate() {
            assert!((v - d.eval(grid.point(i))).abs() < 1e-9);
        }
    }

    #[test]
    fn translation_commutes() {
        let d = AnalyticDensity::sech(1.0).unwrap();
        let shift = 0.75;
        let shifted = AnalyticDensity::convolution(
            1.0,
            crate::densities::BoundaryFunction::PointMasses { locations: vec![shift], weights: vec![1.0] },
        )
        .unwrap();
        let k = BandwidthSchedule::new(0.5, 1000).unwrap().scaled_kernel();
        let grid = GridSpec::new(3.0, 0.25).unwrap();
        let a = convolve_with_density(|z| k.eval(z), k.h, &d, &grid).unwrap();
        let b = convolve_with_density(|z| k.eval(z), k.h, &shifted, &grid).unwrap();
        for i in 0..grid.len() - 3 {
            // shift of 0.75 is three grid steps
            assert!((b.values[i + 3] - a.values[i]).abs() < 1e-6);
        }
    }
}
