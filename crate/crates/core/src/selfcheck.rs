//! Deterministic quadrature-versus-closed-form checks.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::densities::AnalyticDensity;
use crate::error::Result;
use crate::estimator::{expected_estimate, pointwise_moments};
use crate::kernels::{
    kernel_ft_quadrature, kernel_l1_quadrature, kernel_l2_sq_quadrature, kernel_norms, BandwidthSchedule, KernelSpec,
    SERIES_SWITCH,
};
use crate::numerics::{GridSpec, Integrator};
use crate::risk::{beta_p, gaussian_abs_moment, y_moment};

/// Deliberate corruptions used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Reference ‖k‖₂² constant off by 1%.
    KernelL2Constant,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "kernel-l2-constant" => Ok(Fault::KernelL2Constant),
            _ => Err(format!("unknown fault {s:?}; known: kernel-l2-constant")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = (String, Box<dyn Fn() -> Result<(bool, String)>>);

fn close(got: f64, want: f64, tol: f64) -> (bool, String) {
    let err = (got - want).abs();
    (err <= tol, format!("got {got:.12e}, expected {want:.12e}, |diff| {err:.2e} ≤ {tol:.0e}"))
}

fn rel_close(got: f64, want: f64, tol: f64) -> (bool, String) {
    let err = ((got - want) / want).abs();
    (err <= tol, format!("got {got:.12e}, expected {want:.12e}, rel {err:.2e} ≤ {tol:.0e}"))
}

fn checks(fault: Option<Fault>) -> Vec<Check> {
    let mut v: Vec<Check> = Vec::new();
    let l2_factor = if fault == Some(Fault::KernelL2Constant) { 1.01 } else { 1.0 };
    for theta in [0.0, 0.5, 0.9] {
        v.push((
            format!("kernel_l2_sq[theta={theta}]"),
            Box::new(move || {
                let spec = KernelSpec::new(theta)?;
                let want = (1.0 + 2.0 * theta) / (3.0 * PI) * l2_factor;
                Ok(rel_close(kernel_l2_sq_quadrature(spec)?, want, 1e-4))
            }),
        ));
    }
    for theta in [0.5, 0.9] {
        v.push((
            format!("kernel_l1_bracket[theta={theta}]"),
            Box::new(move || {
                let spec = KernelSpec::new(theta)?;
                let norms = kernel_norms(spec);
                let (lo, hi) = (norms.l1_lower.finite().unwrap(), norms.l1_upper.finite().unwrap());
                let q = kernel_l1_quadrature(spec)?.finite().unwrap();
                Ok((lo <= q && q <= hi, format!("{lo:.6} ≤ {q:.6} ≤ {hi:.6}")))
            }),
        ));
    }
    v.push((
        "kernel_ft_plateau[theta=0.5]".into(),
        Box::new(|| {
            let spec = KernelSpec::VALLEE_POUSSIN;
            let mut worst: f64 = 0.0;
            for i in 0..=40 {
                let t = -2.0 + 0.1 * i as f64;
                worst = worst.max((kernel_ft_quadrature(spec, 1.0, t)? - spec.ft(t)).abs());
            }
            Ok((worst < 1e-6, format!("max |numerical − closed form| = {worst:.2e} over 41 points")))
        }),
    ));
    v.push((
        "series_switch_continuity".into(),
        Box::new(|| {
            let mut worst: f64 = 0.0;
            for theta in [0.0, 0.3, 0.9, 0.999] {
                let spec = KernelSpec::new(theta)?;
                let below = spec.eval(SERIES_SWITCH * (1.0 - 1e-12));
                let above = spec.eval(SERIES_SWITCH * (1.0 + 1e-12));
                worst = worst.max((below - above).abs() / spec.eval(0.0));
            }
            Ok((worst < 1e-10, format!("max relative jump {worst:.2e}")))
        }),
    ));
    v.push((
        "scaled_kernel_peak[gamma=0.5,n=1e5]".into(),
        Box::new(|| {
            let s = BandwidthSchedule::new(0.5, 100_000)?;
            let k = s.scaled_kernel();
            Ok(rel_close(k.eval(0.0), (1.0 + s.theta_n) / (2.0 * PI * s.h_n), 1e-12))
        }),
    ));
    v.push((
        "multiplier_l2_asymptotics[gamma=0.5,n=1e5]".into(),
        Box::new(|| {
            let s = BandwidthSchedule::new(0.5, 100_000)?;
            let ratio = PI / s.big_n * s.scaled_kernel().l2_sq();
            let bound = 2.0 / s.big_n;
            Ok(((ratio - 1.0).abs() <= bound, format!("|π‖k_h‖²/N − 1| = {:.4} ≤ {bound:.4}", (ratio - 1.0).abs())))
        }),
    ));
    for p in [1.0, 3.0, 4.0] {
        v.push((
            format!("gaussian_abs_moment[p={p}]"),
            Box::new(move || {
                let q = Integrator::new().abs_tol(1e-15).rel_tol(1e-13).integrate_upper_tail(
                    |x| x.powf(p) * (-0.5 * x * x).exp(),
                    0.0,
                )?;
                let want = (2.0 * q.value / (2.0 * PI).sqrt()).powf(1.0 / p);
                Ok(close(gaussian_abs_moment(p), want, 1e-10))
            }),
        ));
    }
    for spec in ["sech:1", "cauchy:1", "conv-uniform:1:0.5"] {
        v.push((
            format!("density_normalization[{spec}]"),
            Box::new(move || {
                let d: AnalyticDensity = spec.parse()?;
                Ok(close(d.norm(1.0)?, 1.0, 1e-9))
            }),
        ));
    }
    v.push((
        "sech_l2_norm".into(),
        Box::new(|| Ok(close(AnalyticDensity::sech(1.0)?.norm(2.0)?, PI.powf(-0.5), 1e-10))),
    ));
    v.push((
        "beta_4[sech:1]".into(),
        Box::new(|| {
            let d = AnalyticDensity::sech(1.0)?;
            Ok(close(beta_p(&d, 4.0)?, PI.powf(-0.75) * 3f64.powf(0.25), 1e-10))
        }),
    ));
    v.push((
        "sech_char_fn[t=1.3]".into(),
        Box::new(|| {
            let d = AnalyticDensity::sech(1.0)?;
            let q = Integrator::new()
                .abs_tol(1e-14)
                .integrate_upper_tail(|x| 2.0 * (1.3 * x).cos() * d.eval(x), 0.0)?;
            Ok(close(q.value, 1.0 / 1.3f64.cosh(), 1e-10))
        }),
    ));
    v.push((
        "y_moment_second[gamma=0.5,n=1e4]".into(),
        Box::new(|| {
            let s = BandwidthSchedule::new(0.5, 10_000)?;
            Ok(rel_close(y_moment(2.0, &s)?, 3.0 / ((1.0 - s.theta_n) * (1.0 + 2.0 * s.theta_n)), 1e-6))
        }),
    ));
    v.push((
        "grid_l2_norm[sech:1]".into(),
        Box::new(|| {
            let d = AnalyticDensity::sech(1.0)?;
            let f = GridSpec::default().tabulate(|x| d.eval(x));
            Ok(close(f.lp_norm(2.0), PI.powf(-0.5), 1e-10))
        }),
    ));
    v.push((
        "expected_estimate_vs_quadrature[sech:1,n=1e3]".into(),
        Box::new(|| {
            let d = AnalyticDensity::sech(1.0)?;
            let s = BandwidthSchedule::new(0.5, 1000)?;
            let grid = GridSpec::new(3.0, 1.0)?;
            let m = expected_estimate(&s.scaled_kernel(), &d, &grid)?;
            let mut worst: f64 = 0.0;
            for i in 0..grid.len() {
                worst = worst.max((m.values[i] - pointwise_moments(&s, &d, grid.point(i))?.mean).abs());
            }
            Ok((worst < 1e-10, format!("max |spectral − quadrature| = {worst:.2e}")))
        }),
    ));
    v
}

/// Runs every check; a check that errors counts as failed.
pub fn run_selfcheck(fault: Option<Fault>) -> Vec<CheckResult> {
    checks(fault)
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
