//! Tails of oscillatory power-law integrals.

use num_complex::Complex64;

use super::quad::{uniform_breaks, Integrator};
use crate::error::Result;

/// Below this value of ωY the cosine tail is integrated numerically.
const ASYMPTOTIC_PHASE: f64 = 50.0;

/// ∫_Y^∞ e^{iωy} y^{−s} dy ≈ −e^{iωY} Y^{−s}/(iω) Σ_k (s)_k / (iωY)^k, truncated
/// at its smallest term.
fn asymptotic_tail(omega: f64, s: f64, y: f64) -> Complex64 {
    let iwy = Complex64::new(0.0, omega * y);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..60 {
        let next = term * (s + k as f64) / iwy;
        if next.norm() >= term.norm() || next.norm() < 1e-17 * sum.norm() {
            break;
        }
        term = next;
        sum += term;
    }
    -Complex64::from_polar(1.0, omega * y) * y.powf(-s) / Complex64::new(0.0, omega) * sum
}

/// ∫_Y^∞ cos(ωy) y^{−s} dy for s > 1 (or ω > 0 and s > 0).
pub fn cosine_tail(omega: f64, s: f64, y: f64) -> Result<f64> {
    if omega == 0.0 {
        return Ok(y.powf(1.0 - s) / (s - 1.0));
    }
    oscillatory_tail(omega, s, y, f64::cos, |z| z.re)
}

/// ∫_Y^∞ sin(ωy) y^{−s} dy for ω ≥ 0 and s > 0.
pub fn sine_tail(omega: f64, s: f64, y: f64) -> Result<f64> {
    if omega == 0.0 {
        return Ok(0.0);
    }
    oscillatory_tail(omega, s, y, f64::sin, |z| z.im)
}

fn oscillatory_tail(omega: f64, s: f64, y: f64, trig: fn(f64) -> f64, part: fn(Complex64) -> f64) -> Result<f64> {
    if omega * y >= ASYMPTOTIC_PHASE {
        return Ok(part(asymptotic_tail(omega, s, y)));
    }
    // u = ωy
    let a = omega * y;
    let breaks = uniform_breaks(a, ASYMPTOTIC_PHASE, ((ASYMPTOTIC_PHASE - a) / 1.5).ceil() as usize);
    let body = Integrator::new().abs_tol(1e-15).integrate_pieces(|u| trig(u) * u.powf(-s), &breaks)?;
    let tail = part(asymptotic_tail(1.0, s, ASYMPTOTIC_PHASE));
    Ok(omega.powf(s - 1.0) * (body.value + tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_quadrature() {
        // ∫_Y^∞ cos(ωy)/y² dy, with the far part bounded by 1/Z
        for (omega, y) in [(1.0f64, 30.0), (0.3, 5.0), (0.01, 20.0), (2.5, 100.0)] {
            let z = 2.0e5;
            let breaks = uniform_breaks(y, z, ((z - y) * omega.max(0.5)).ceil() as usize);
            let q = Integrator::new()
                .max_intervals(4 * breaks.len())
                .integrate_pieces(|u| (omega * u).cos() / (u * u), &breaks)
                .unwrap();
            let far = asymptotic_tail(omega, 2.0, z).re;
            let got = cosine_tail(omega, 2.0, y).unwrap();
            assert!((got - q.value - far).abs() < 1e-10, "ω = {omega}, Y = {y}: {got} vs {}", q.value + far);
        }
        assert!((cosine_tail(0.0, 3.0, 2.0).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sine_integral_tail() {
        // ∫_0^∞ sin(y)/y dy = π/2, with ∫_0^2 by quadrature
        let head = Integrator::new().integrate(|u: f64| u.sin() / u, 0.0, 2.0).unwrap().value;
        assert!((head + sine_tail(1.0, 1.0, 2.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let head = Integrator::new().integrate(|u: f64| u.sin() / u, 0.0, 80.0).unwrap().value;
        assert!((head + sine_tail(1.0, 1.0, 80.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
