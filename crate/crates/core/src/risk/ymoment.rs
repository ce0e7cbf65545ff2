//! E|Y_n|^λ for Y_n with density k_n² / ‖k_n‖₂², k_n = k(·; θ_n).

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::kernels::{kernel_norms, BandwidthSchedule};
use crate::numerics::{cosine_tail, uniform_breaks, Integrator};

/// Quadrature runs to Y = TAIL_START·max(N, 1); the rest is an asymptotic
/// expansion of the oscillatory tail.
const TAIL_START: f64 = 2000.0;
/// E|Y_n|^λ = (8 / (π² ‖k_n‖₂²)) ∫₀^∞ sin²(y(1+θ)/2) sin²(y(1−θ)/2) / ((1−θ)² y^{4−λ}) dy,
/// for λ ∈ (0, 2].
pub fn y_moment(lambda: f64, sched: &BandwidthSchedule) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 2.0) {
        return Err(invalid("lambda", format!("must lie in (0, 2], got {lambda}")));
    }
    let theta = sched.theta_n;
    let s = 4.0 - lambda;
    let (a, b) = (0.5 * (1.0 + theta), 0.5 * (1.0 - theta));
    let integrand = |y: f64| ((a * y).sin() * (b * y).sin()).powi(2) * y.powf(-s);

    let upper = TAIL_START * sched.big_n.max(1.0);
    let inv_h = 1.0 / sched.h_n;
    let mut breaks = vec![0.0, 1.0];
    // pieces of a quarter period of the fast factor
    let piece = PI / (2.0 * (1.0 + theta));
    for (lo, hi) in [(1.0, inv_h.max(1.0)), (inv_h.max(1.0), upper)] {
        if hi > lo {
            let mut seg = uniform_breaks(lo, hi, ((hi - lo) / piece).ceil() as usize);
            seg.remove(0);
            breaks.extend(seg);
        }
    }
    let body = Integrator::new()
        .abs_tol(1e-14)
        .rel_tol(1e-11)
        .max_intervals(4 * breaks.len() + 1000)
        .integrate_pieces(integrand, &breaks)?;

    // sin²(ay) sin²(by) = ¼[1 − cos 2ay − cos 2by + ½cos 2(a+b)y + ½cos 2(a−b)y]
    let tail = 0.25
        * (cosine_tail(0.0, s, upper)?
            - cosine_tail(2.0 * a, s, upper)?
            - cosine_tail(2.0 * b, s, upper)?
            + 0.5 * cosine_tail(2.0 * (a + b), s, upper)?
            + 0.5 * cosine_tail(2.0 * (a - b), s, upper)?);

    let l2_sq = kernel_norms(sched.kernel_spec()).l2_sq;
    let scale = 8.0 / (PI * PI * l2_sq * (1.0 - theta).powi(2));
    Ok(scale * (body.value + tail))
}
