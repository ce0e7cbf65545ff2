//! Fejér-type kernels k(x; θ) = (cos θx − cos x) / (π(1−θ)x²), their Fourier
//! transforms and norms, and the log-n bandwidth schedule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{cosine_tail, sine_tail, uniform_breaks, Integrator};
use crate::MaybeInfinite;

/// Below this |x| the kernel is evaluated from its two-term Taylor series.
pub const SERIES_SWITCH: f64 = 1e-4;

/// Shape parameter of the Fejér-type family. θ = 0 is Fejér, θ = 1/2 is
/// de la Vallée-Poussin, θ = 1 is the sinc kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    theta: f64,
}

impl KernelSpec {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(invalid("theta", format!("must lie in [0, 1], got {theta}")));
        }
        Ok(Self { theta })
    }

    pub const FEJER: KernelSpec = KernelSpec { theta: 0.0 };
    pub const VALLEE_POUSSIN: KernelSpec = KernelSpec { theta: 0.5 };
    pub const SINC: KernelSpec = KernelSpec { theta: 1.0 };

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_sinc(&self) -> bool {
        self.theta == 1.0
    }

    /// k(x; θ). Even in x; finite everywhere.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.theta;
        let ax = x.abs();
        if ax < SERIES_SWITCH {
            return self.taylor(ax);
        }
        if self.is_sinc() {
            return ax.sin() / (PI * ax);
        }
        // cos θx − cos x = 2 sin((1+θ)x/2) sin((1−θ)x/2), free of cancellation.
        let one_minus = 1.0 - t;
        2.0 * (0.5 * (1.0 + t) * ax).sin() * (0.5 * one_minus * ax).sin() / (PI * one_minus * ax * ax)
    }

    /// Two-term Taylor expansion about 0.
    #[inline]
    pub fn taylor(&self, x: f64) -> f64 {
        let t = self.theta;
        (1.0 + t) / (2.0 * PI) - x * x * (1.0 + t) * (1.0 + t * t) / (24.0 * PI)
    }

    /// k̂(t; θ): 1 on |t| ≤ θ, linear ramp to 0 at |t| = 1.
    #[inline]
    pub fn ft(&self, t: f64) -> f64 {
        let at = t.abs();
        if at <= self.theta {
            1.0
        } else if at <= 1.0 {
            (1.0 - at) / (1.0 - self.theta)
        } else {
            0.0
        }
    }
}

/// Checked evaluation of k(x; θ).
pub fn fejer_kernel_eval(x: f64, spec: KernelSpec) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid("x", format!("must be finite, got {x}")));
    }
    Ok(spec.eval(x))
}

pub fn fejer_kernel_ft(t: f64, spec: KernelSpec) -> f64 {
    spec.ft(t)
}

/// Closed-form L2 norm and the classical two-sided L1 bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelNorms {
    pub l2_sq: f64,
    pub l1_lower: MaybeInfinite,
    pub l1_upper: MaybeInfinite,
}

pub fn kernel_norms(spec: KernelSpec) -> KernelNorms {
    let t = spec.theta;
    // Plancherel on the trapezoid k̂: (1/π)(θ + (1−θ)/3)
    let l2_sq = (1.0 + 2.0 * t) / (3.0 * PI);
    if spec.is_sinc() {
        return KernelNorms {
            l2_sq,
            l1_lower: MaybeInfinite::Infinite,
            l1_upper: MaybeInfinite::Infinite,
        };
    }
    let log_term = 4.0 / (PI * PI) * ((1.0 + t) / (1.0 - t)).ln();
    KernelNorms {
        l2_sq,
        l1_lower: MaybeInfinite::Finite(log_term + 1.0 / 3.0),
        l1_upper: MaybeInfinite::Finite(log_term + 2.0),
    }
}

/// ∫ k² over [−10⁶, 10⁶] by adaptive quadrature.
pub fn kernel_l2_sq_quadrature(spec: KernelSpec) -> Result<f64> {
    let half = 1e6;
    let breaks = oscillation_breaks(0.0, half, 4.0);
    let q = Integrator::new()
        .rel_tol(1e-9)
        .abs_tol(1e-13)
        .max_intervals(breaks.len() * 4)
        .integrate_pieces(|x| spec.eval(x).powi(2), &breaks)?;
    Ok(2.0 * q.value)
}

/// ∫|k| over [−10⁴/(1−θ), 10⁴/(1−θ)]; infinite for the sinc kernel.
pub fn kernel_l1_quadrature(spec: KernelSpec) -> Result<MaybeInfinite> {
    if spec.is_sinc() {
        return Ok(MaybeInfinite::Infinite);
    }
    let half = 1e4 / (1.0 - spec.theta);
    // Pieces of about a quarter period keep the kinks of |k| near piece ends.
    let breaks = oscillation_breaks(0.0, half, 0.5);
    let q = Integrator::new()
        .rel_tol(1e-8)
        .abs_tol(1e-12)
        .max_intervals(breaks.len() * 8)
        .integrate_pieces(|x| spec.eval(x).abs(), &breaks)?;
    Ok(MaybeInfinite::Finite(2.0 * q.value))
}

/// ∫ h⁻¹k(x/h; θ) e^{−itx} dx: adaptive quadrature on |x| ≤ 200h plus the
/// exact oscillatory tail of the closed form beyond. For the sinc kernel the
/// integral converges only conditionally and is taken as a principal value.
pub fn kernel_ft_quadrature(spec: KernelSpec, h: f64, t: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0 && t.is_finite()) {
        return Err(invalid("h", format!("need finite h > 0 and finite t, got h = {h}, t = {t}")));
    }
    let theta = spec.theta;
    let cut = 200.0 * h;
    let breaks = oscillation_breaks(0.0, cut, 1.0 / (1.0 / h + t.abs()));
    let body = Integrator::new()
        .abs_tol(1e-13)
        .max_intervals(breaks.len() * 8)
        .integrate_pieces(|x| spec.eval(x / h) / h * (t * x).cos(), &breaks)?;
    let (a, b) = (theta / h, 1.0 / h);
    let tail = if spec.is_sinc() {
        // sin(x/h) cos(tx) / (πx)
        let sn = |w: f64| sine_tail(w.abs(), 1.0, cut).map(|v| v * w.signum());
        0.5 / PI * (sn(b + t)? + sn(b - t)?)
    } else {
        // h (cos(θx/h) − cos(x/h)) cos(tx) / (π(1−θ)x²)
        let c = |w: f64| cosine_tail(w.abs(), 2.0, cut);
        0.5 * h / (PI * (1.0 - theta)) * (c(a - t)? + c(a + t)? - c(b - t)? - c(b + t)?)
    };
    Ok(2.0 * (body.value + tail))
}

pub(crate) fn oscillation_breaks(a: f64, b: f64, piece: f64) -> Vec<f64> {
    uniform_breaks(a, b, ((b - a) / piece).ceil() as usize)
}

/// The deterministic schedule N = ln n / (2γ), θ_n = 1 − 1/N, h_n = θ_n / N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSchedule {
    pub gamma: f64,
    pub n: u64,
    /// Exponential type N.
    pub big_n: f64,
    pub theta_n: f64,
    pub h_n: f64,
}

impl BandwidthSchedule {
    pub fn new(gamma: f64, n: u64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if n < 2 {
            return Err(invalid("n", format!("sample size must be at least 2, got {n}")));
        }
        let big_n = (n as f64).ln() / (2.0 * gamma);
        if big_n <= 1.0 {
            return Err(Error::SubcriticalSampleSize {
                n,
                gamma,
                big_n,
                min_n: min_sample_size(gamma),
            });
        }
        let theta_n = 1.0 - 1.0 / big_n;
        Ok(Self {
            gamma,
            n,
            big_n,
            theta_n,
            h_n: theta_n / big_n,
        })
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        KernelSpec { theta: self.theta_n }
    }

    pub fn scaled_kernel(&self) -> ScaledKernel {
        ScaledKernel {
            spec: self.kernel_spec(),
            h: self.h_n,
        }
    }

    /// n·h_n, the effective number of observations per unit length.
    pub fn n_h(&self) -> f64 {
        self.n as f64 * self.h_n
    }
}

/// Smallest n with ln(n) > 2γ.
pub fn min_sample_size(gamma: f64) -> u64 {
    let bound = (2.0 * gamma).exp();
    let mut n = bound.floor() as u64;
    while (n as f64).ln() <= 2.0 * gamma {
        n += 1;
    }
    n.max(2)
}

pub fn bandwidth_schedule(gamma: f64, n: u64) -> Result<BandwidthSchedule> {
    BandwidthSchedule::new(gamma, n)
}

/// h⁻¹ k(x/h; θ): a Fejér-type kernel at bandwidth h, or the sinc kernel
/// when θ = 1. Its Fourier transform is k̂(ht; θ), supported on |t| ≤ 1/h and
/// identically 1 on |t| ≤ θ/h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledKernel {
    pub spec: KernelSpec,
    pub h: f64,
}

impl ScaledKernel {
    /// The sinc baseline with h = 2γ / ln n.
    pub fn sinc(gamma: f64, n: u64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if n < 2 {
            return Err(invalid("n", format!("sample size must be at least 2, got {n}")));
        }
        Ok(Self {
            spec: KernelSpec::SINC,
            h: 2.0 * gamma / (n as f64).ln(),
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.spec.eval(x / self.h) / self.h
    }

    #[inline]
    pub fn ft(&self, t: f64) -> f64 {
        self.spec.ft(self.h * t)
    }

    pub fn peak(&self) -> f64 {
        (1.0 + self.spec.theta) / (2.0 * PI * self.h)
    }

    /// Frequency up to which k̂ ≡ 1.
    pub fn plateau_end(&self) -> f64 {
        self.spec.theta / self.h
    }

    /// Frequency beyond which k̂ ≡ 0.
    pub fn support_end(&self) -> f64 {
        1.0 / self.h
    }

    pub fn l2_sq(&self) -> f64 {
        kernel_norms(self.spec).l2_sq / self.h
    }
}

pub fn scaled_kernel_eval(x: f64, sched: &BandwidthSchedule) -> f64 {
    sched.scaled_kernel().eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(x: f64, t: f64) -> f64 {
        ((t * x).cos() - x.cos()) / (PI * (1.0 - t) * x * x)
    }

    #[test]
    fn ft_quadrature_matches_closed_form() {
        for theta in [0.0, 0.5, 0.9] {
            let spec = KernelSpec::new(theta).unwrap();
            for t in [0.0, 0.3, theta, 0.95, 1.0, 1.7] {
                let q = kernel_ft_quadrature(spec, 1.0, t).unwrap();
                assert!((q - spec.ft(t)).abs() < 1e-8, "θ = {theta}, t = {t}: {q}");
            }
            let h = 0.07;
            let q = kernel_ft_quadrature(spec, h, 0.5 / h).unwrap();
            assert!((q - spec.ft(0.5)).abs() < 1e-8);
        }
        for t in [0.0, 0.5, 0.99, 1.01, 3.0] {
            let q = kernel_ft_quadrature(KernelSpec::SINC, 1.0, t).unwrap();
            assert!((q - KernelSpec::SINC.ft(t)).abs() < 1e-8, "sinc, t = {t}: {q}");
        }
    }

    #[test]
    fn value_at_origin_matches_naive_limit() {
        let s = KernelSpec::new(0.5).unwrap();
        assert!((s.eval(0.0) - 1.5 / (2.0 * PI)).abs() < 1e-15);
        // direct formula a little away from zero
        assert!((naive(1e-3, 0.5) - 1.5 / (2.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn table_rows() {
        // Fejér: 2 sin²(x/2) / (πx²) at x = π
        assert!((KernelSpec::FEJER.eval(PI) - 2.0 / PI.powi(3)).abs() < 1e-15);
        // Vallée-Poussin: 2(cos(x/2) − cos x)/(πx²)
        let x: f64 = 2.3;
        let vp = 2.0 * ((x / 2.0).cos() - x.cos()) / (PI * x * x);
        assert!((KernelSpec::VALLEE_POUSSIN.eval(x) - vp).abs() < 1e-15);
        assert!(KernelSpec::SINC.eval(PI).abs() < 1e-16);
    }

    #[test]
    fn agrees_with_textbook_formula() {
        for &t in &[0.0, 0.3, 0.9] {
            for &x in &[0.5, 1.0, 7.0, 123.4] {
                assert!((KernelSpec::new(t).unwrap().eval(x) - naive(x, t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn series_switch_is_continuous() {
        for &t in &[0.0, 0.25, 0.5, 0.9, 0.99, 1.0] {
            let s = KernelSpec::new(t).unwrap();
            let x = SERIES_SWITCH;
            let direct = if s.is_sinc() {
                x.sin() / (PI * x)
            } else {
                2.0 * (0.5 * (1.0 + t) * x).sin() * (0.5 * (1.0 - t) * x).sin() / (PI * (1.0 - t) * x * x)
            };
            let rel = (direct - s.taylor(x)).abs() / direct;
            assert!(rel < 1e-8, "theta {t}: rel {rel}");
        }
    }

    #[test]
    fn fourier_transform_shape() {
        let s = KernelSpec::new(0.5).unwrap();
        assert_eq!(fejer_kernel_ft(0.3, s), 1.0);
        assert!((fejer_kernel_ft(0.75, s) - 0.5).abs() < 1e-15);
        assert_eq!(fejer_kernel_ft(-1.2, s), 0.0);
        assert_eq!(fejer_kernel_ft(1.0, KernelSpec::SINC), 1.0);
        assert_eq!(fejer_kernel_ft(1.01, KernelSpec::SINC), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(KernelSpec::new(1.1).is_err());
        assert!(KernelSpec::new(-0.1).is_err());
        assert!(fejer_kernel_eval(f64::NAN, KernelSpec::FEJER).is_err());
        assert!(fejer_kernel_eval(f64::INFINITY, KernelSpec::FEJER).is_err());
    }

    #[test]
    fn norm_formulas() {
        assert!((kernel_norms(KernelSpec::SINC).l2_sq - 1.0 / PI).abs() < 1e-16);
        assert!((kernel_norms(KernelSpec::FEJER).l2_sq - 1.0 / (3.0 * PI)).abs() < 1e-16);
        let n = kernel_norms(KernelSpec::new(0.9).unwrap());
        let log_term = 4.0 / (PI * PI) * 19f64.ln();
        assert!((n.l1_lower.finite().unwrap() - (log_term + 1.0 / 3.0)).abs() < 1e-15);
        assert!((n.l1_upper.finite().unwrap() - (log_term + 2.0)).abs() < 1e-15);
        assert!((log_term + 1.0 / 3.0 - 1.526_67).abs() < 1e-5);
        assert!(kernel_norms(KernelSpec::SINC).l1_upper.is_infinite());
    }

    #[test]
    fn l2_quadrature_matches_closed_form() {
        for &t in &[0.0, 0.5, 0.99] {
            let s = KernelSpec::new(t).unwrap();
            let q = kernel_l2_sq_quadrature(s).unwrap();
            let exact = kernel_norms(s).l2_sq;
            assert!((q - exact).abs() / exact < 1e-4, "theta {t}: {q} vs {exact}");
        }
    }

    #[test]
    fn l1_quadrature_inside_bracket() {
        let s = KernelSpec::new(0.9).unwrap();
        let q = kernel_l1_quadrature(s).unwrap().finite().unwrap();
        let n = kernel_norms(s);
        assert!(n.l1_lower.finite().unwrap() < q && q < n.l1_upper.finite().unwrap(), "{q}");
        assert!(kernel_l1_quadrature(KernelSpec::SINC).unwrap().is_infinite());
    }

    #[test]
    fn schedule_examples() {
        let s = bandwidth_schedule(0.5, 22027).unwrap();
        assert!((s.big_n - 22027f64.ln()).abs() < 1e-12);
        assert!((s.big_n - 10.000_024_3).abs() < 1e-7);
        assert!((s.theta_n - 0.9).abs() < 1e-6);
        assert!((s.h_n - 0.089_999_8).abs() < 1e-7);

        let s = bandwidth_schedule(0.5, 1000).unwrap();
        assert!((s.big_n - 6.907_755_3).abs() < 1e-6);
        assert!((s.theta_n - 0.855_235_2).abs() < 1e-7);
        assert!((s.h_n - 0.123_808_0).abs() < 1e-7);

        assert!(bandwidth_schedule(1.0, 10).is_ok());
        match bandwidth_schedule(1.2, 10) {
            Err(Error::SubcriticalSampleSize { min_n, big_n, .. }) => {
                assert_eq!(min_n, 12);
                assert!((big_n - 0.959_4).abs() < 1e-3);
            }
            other => panic!("expected subcritical error, got {other:?}"),
        }
        assert!(bandwidth_schedule(0.0, 100).is_err());
    }

    #[test]
    fn scaled_kernel_peak() {
        let s = bandwidth_schedule(0.5, 22027).unwrap();
        let peak = scaled_kernel_eval(0.0, &s);
        assert!((peak - (1.0 + s.theta_n) / (2.0 * PI * s.h_n)).abs() < 1e-12);
        assert!((peak - 3.3598).abs() < 1e-3);
        // asymptotic statement 1/(π h_n) is only a limit
        assert!(peak < 1.0 / (PI * s.h_n));
    }

    #[test]
    fn sinc_baseline_bandwidth() {
        let k = ScaledKernel::sinc(0.5, 1000).unwrap();
        assert!((k.h - 1.0 / 1000f64.ln()).abs() < 1e-15);
        assert!((k.eval(0.0) - 1.0 / (PI * k.h)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kernel_is_even(x in -1e4f64..1e4, t in 0.0f64..=1.0) {
            let s = KernelSpec::new(t).unwrap();
            prop_assert_eq!(s.eval(x), s.eval(-x));
        }

        #[test]
        fn schedule_invariants(gamma in 0.05f64..3.0, extra in 1.0f64..1e6) {
            let n = (min_sample_size(gamma) as f64 * extra) as u64;
            let s = BandwidthSchedule::new(gamma, n).unwrap();
            prop_assert!(s.big_n > 1.0);
            prop_assert!(s.theta_n > 0.0 && s.theta_n < 1.0);
            prop_assert!((s.h_n * s.big_n - s.theta_n).abs() < 1e-15);
            prop_assert_eq!(s.theta_n, 1.0 - 1.0 / s.big_n);
        }

        #[test]
        fn ft_is_continuous_and_bounded(t in -2.0f64..2.0, th in 0.0f64..0.999) {
            let s = KernelSpec::new(th).unwrap();
            let v = s.ft(t);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((s.ft(t + 1e-9) - v).abs() <= 1e-9 / (1.0 - th) + 1e-15);
        }
    }
}
