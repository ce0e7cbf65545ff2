//! Browser bindings: a kernel explorer, an estimator run on a simulated
//! sample, and the schedule/rate table. Each binding returns JSON.

use serde::Serialize;
use stripkde::kernels::{kernel_norms, KernelSpec};
use stripkde::risk::psi_from_parts;
use stripkde::risk::validate_class;
use stripkde::{AnalyticDensity, BandwidthSchedule, EstimateResult, GridSpec};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct KernelProfile {
    pub theta: f64,
    pub x: Vec<f64>,
    pub k: Vec<f64>,
    pub t: Vec<f64>,
    pub k_hat: Vec<f64>,
    pub peak: f64,
    pub l2_sq: f64,
    pub l1_lower: Option<f64>,
    pub l1_upper: Option<f64>,
}

/// k(x; θ) on [−x_max, x_max] and k̂(t) on [−1.5, 1.5].
pub fn kernel_profile(theta: f64, x_max: f64, points: usize) -> stripkde::Result<KernelProfile> {
    let spec = KernelSpec::new(theta)?;
    let points = points.clamp(16, 20_000);
    let x_max = if x_max.is_finite() && x_max > 0.0 { x_max } else { 30.0 };
    let x: Vec<f64> = (0..points).map(|i| -x_max + 2.0 * x_max * i as f64 / (points - 1) as f64).collect();
    let t: Vec<f64> = (0..301).map(|i| -1.5 + 0.01 * i as f64).collect();
    let norms = kernel_norms(spec);
    Ok(KernelProfile {
        theta,
        k: x.iter().map(|&v| spec.eval(v)).collect(),
        k_hat: t.iter().map(|&v| spec.ft(v)).collect(),
        x,
        t,
        peak: spec.eval(0.0),
        l2_sq: norms.l2_sq,
        l1_lower: norms.l1_lower.finite(),
        l1_upper: norms.l1_upper.finite(),
    })
}

#[derive(Debug, Serialize)]
pub struct EstimateView {
    pub density: String,
    pub n: u64,
    pub big_n: f64,
    pub theta_n: f64,
    pub h_n: f64,
    pub x: Vec<f64>,
    pub estimate: Vec<f64>,
    pub truth: Vec<f64>,
    pub sup_error: f64,
    pub l2_error: f64,
}

/// Draws a sample of size `n` and evaluates the estimator on [−L, L].
pub fn estimate(density: &str, gamma: f64, n: u64, seed: u64, half_width: f64) -> stripkde::Result<EstimateView> {
    let d: AnalyticDensity = density.parse()?;
    if n > 200_000 {
        return Err(stripkde::Error::InvalidParameter {
            name: "n",
            reason: format!("at most 200000 in the browser, got {n}"),
        });
    }
    let grid = GridSpec::new(half_width, (half_width / 400.0).max(0.005))?;
    let est = EstimateResult::simulate(&d, gamma, n, seed, &grid)?;
    let truth = grid.tabulate(|x| d.eval(x));
    let err = est.f_n.sub(&truth)?;
    Ok(EstimateView {
        density: d.id(),
        n,
        big_n: est.sched.big_n,
        theta_n: est.sched.theta_n,
        h_n: est.sched.h_n,
        x: grid.points(),
        estimate: est.f_n.values.clone(),
        truth: truth.values.clone(),
        sup_error: err.max_abs(),
        l2_error: err.lp_norm(2.0),
    })
}

#[derive(Debug, Serialize)]
pub struct ScheduleRow {
    pub n: u64,
    pub big_n: f64,
    pub theta_n: f64,
    pub h_n: f64,
    pub psi_p: f64,
}

#[derive(Debug, Serialize)]
pub struct ScheduleTable {
    pub density: String,
    pub gamma: f64,
    pub p: f64,
    pub beta_p: f64,
    pub rows: Vec<ScheduleRow>,
}

/// N, θ_n, h_n and ψ_p(n) for sample sizes 10^k_min … 10^k_max.
pub fn schedule_table(density: &str, gamma: f64, p: f64, k_min: u32, k_max: u32) -> stripkde::Result<ScheduleTable> {
    let d: AnalyticDensity = density.parse()?;
    let class = validate_class(&d, gamma, p)?;
    let mut rows = Vec::new();
    for k in k_min.max(1)..=k_max.min(12) {
        let n = 10u64.pow(k);
        let Ok(s) = BandwidthSchedule::new(gamma, n) else { continue };
        rows.push(ScheduleRow {
            n,
            big_n: s.big_n,
            theta_n: s.theta_n,
            h_n: s.h_n,
            psi_p: psi_from_parts(n, gamma, p, class.norm_half_p)?,
        });
    }
    Ok(ScheduleTable {
        density: d.id(),
        gamma,
        p,
        beta_p: stripkde::risk::beta_from_norm(class.norm_half_p, p),
        rows,
    })
}

fn to_js<T: Serialize>(r: stripkde::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = kernelProfile)]
pub fn kernel_profile_js(theta: f64, x_max: f64, points: usize) -> Result<String, JsError> {
    to_js(kernel_profile(theta, x_max, points))
}

#[wasm_bindgen(js_name = estimate)]
pub fn estimate_js(density: &str, gamma: f64, n: u32, seed: u32, half_width: f64) -> Result<String, JsError> {
    to_js(estimate(density, gamma, n as u64, seed as u64, half_width))
}

#[wasm_bindgen(js_name = scheduleTable)]
pub fn schedule_table_js(density: &str, gamma: f64, p: f64, k_min: u32, k_max: u32) -> Result<String, JsError> {
    to_js(schedule_table(density, gamma, p, k_min, k_max))
}

