//! Acceptance criteria, one test each. Every test writes a PASS/FAIL line
//! straight to stdout (bypassing output capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use stripkde::estimator::{bias_function, pointwise_moments};
use stripkde::kernels::{kernel_ft_quadrature, kernel_l1_quadrature, kernel_l2_sq_quadrature, kernel_norms};
use stripkde::numerics::Integrator;
use stripkde::report::{risk_report_csv, Provenance};
use stripkde::risk::{gaussian_abs_moment, mc_covariance, mc_risk, y_moment, CovarianceConfig, RiskConfig};
use stripkde::{AnalyticDensity, BandwidthSchedule, GridSpec, KernelSpec, LossSpec, RiskReport};

const SEED: u64 = 42;

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{verdict} criterion {id:>2} ({name}): {detail}").unwrap();
    assert!(passed, "criterion {id} ({name}) failed: {detail}");
}

fn sech1() -> AnalyticDensity {
    AnalyticDensity::sech(1.0).unwrap()
}

fn risk_config(p: f64) -> RiskConfig {
    RiskConfig {
        density: sech1(),
        gamma: 0.5,
        p,
        loss: LossSpec::Identity,
        n_list: vec![1000, 100_000],
        replicates: 200,
        master_seed: SEED,
        grid: GridSpec::default(),
    }
}

fn p2_run() -> &'static RiskReport {
    static RUN: OnceLock<RiskReport> = OnceLock::new();
    RUN.get_or_init(|| mc_risk(&risk_config(2.0)).unwrap())
}

const THETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.9, 0.99];

#[test]
fn criterion_01_kernel_l2_norm() {
    let mut worst_stated: f64 = 0.0;
    let mut worst_plancherel: f64 = 0.0;
    let mut parts = Vec::new();
    for theta in THETAS {
        let q = kernel_l2_sq_quadrature(KernelSpec::new(theta).unwrap()).unwrap();
        let stated = (1.0 + theta) / (2.0 * PI);
        let rel = ((q - stated) / stated).abs();
        worst_stated = worst_stated.max(rel);
        worst_plancherel = worst_plancherel.max(((q - kernel_norms(KernelSpec::new(theta).unwrap()).l2_sq) / q).abs());
        parts.push(format!("θ={theta}: quad {q:.8}, (1+θ)/(2π) {stated:.8}, rel {rel:.1e}"));
    }
    let detail = format!(
        "{}; max rel vs (1+θ)/(2π) = {worst_stated:.2e} (limit 1e-4); max rel vs (1+2θ)/(3π) = {worst_plancherel:.2e}",
        parts.join("; ")
    );
    report(1, "kernel L2 norm", worst_stated < 1e-4, &detail);
}

#[test]
fn criterion_02_fourier_plateau() {
    let mut worst: f64 = 0.0;
    for theta in THETAS {
        let spec = KernelSpec::new(theta).unwrap();
        for i in 0..401 {
            let t = -2.0 + 0.01 * i as f64;
            worst = worst.max((kernel_ft_quadrature(spec, 1.0, t).unwrap() - spec.ft(t)).abs());
        }
    }
    let s = BandwidthSchedule::new(0.5, 10_000).unwrap();
    let mut worst_scaled: f64 = 0.0;
    for i in 0..401 {
        let t = s.big_n * (-1.0 + 0.005 * i as f64);
        worst_scaled = worst_scaled.max((kernel_ft_quadrature(s.kernel_spec(), s.h_n, t).unwrap() - 1.0).abs());
    }
    report(
        2,
        "Fourier plateau",
        worst < 1e-3 && worst_scaled < 1e-3,
        &format!("max |FT − closed form| = {worst:.2e}; scaled max |FT − 1| on |t| ≤ N = {worst_scaled:.2e} (limit 1e-3)"),
    );
}

#[test]
fn criterion_03_l1_bracket() {
    let mut ok = true;
    let mut parts = Vec::new();
    for theta in [0.5, 0.9, 0.99] {
        let spec = KernelSpec::new(theta).unwrap();
        let q = kernel_l1_quadrature(spec).unwrap().finite().unwrap();
        let n = kernel_norms(spec);
        let (lo, hi) = (n.l1_lower.finite().unwrap(), n.l1_upper.finite().unwrap());
        ok &= lo <= q && q <= hi;
        parts.push(format!("θ={theta}: {lo:.5} ≤ {q:.5} ≤ {hi:.5}"));
    }
    report(3, "L1 bracket", ok, &parts.join("; "));
}

#[test]
fn criterion_04_gaussian_moments() {
    let mut worst: f64 = 0.0;
    for p in [1.0, 2.0, 3.0, 4.0] {
        let q = Integrator::new()
            .abs_tol(1e-16)
            .rel_tol(1e-14)
            .integrate_upper_tail(|x: f64| x.powf(p) * (-0.5 * x * x).exp(), 0.0)
            .unwrap();
        let oracle = (2.0 * q.value / (2.0 * PI).sqrt()).powf(1.0 / p);
        worst = worst.max((gaussian_abs_moment(p) - oracle).abs());
    }
    let m2 = gaussian_abs_moment(2.0);
    let m4 = gaussian_abs_moment(4.0);
    let m4_err = (m4 - 3f64.powf(0.25)).abs();
    report(
        4,
        "M_p closed form",
        worst < 1e-10 && m2 == 1.0 && m4_err <= 4.0 * f64::EPSILON,
        &format!("max |M_p − oracle| = {worst:.2e}; M_2 = {m2}; |M_4 − 3^(1/4)| = {m4_err:.1e}"),
    );
}

#[test]
fn criterion_05_bias_decay() {
    let d = sech1();
    let grid = GridSpec::new(20.0, 0.01).unwrap();
    let pts: Vec<(f64, f64)> = [1000u64, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let s = BandwidthSchedule::new(0.5, n).unwrap();
            (s.big_n, bias_function(&s, &d, &grid).unwrap().max_abs())
        })
        .collect();
    let decreasing = pts[0].1 > pts[1].1 && pts[1].1 > pts[2].1;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / 3.0,
        pts.iter().map(|p| p.1.ln()).sum::<f64>() / 3.0,
    );
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    report(
        5,
        "bias decay",
        decreasing && slope <= -0.8 * 0.5,
        &format!(
            "sup|b_n| = {:.3e}, {:.3e}, {:.3e} at N = {:.3}, {:.3}, {:.3}; slope {slope:.3} (limit −0.4)",
            pts[0].1, pts[1].1, pts[2].1, pts[0].0, pts[1].0, pts[2].0
        ),
    );
}

#[test]
fn criterion_06_pointwise_variance() {
    let d = sech1();
    let s = BandwidthSchedule::new(0.5, 100_000).unwrap();
    let m = pointwise_moments(&s, &d, 0.0).unwrap();
    let rel = (PI * s.h_n * m.second_moment - d.eval(0.0)).abs() / d.eval(0.0);
    report(
        6,
        "pointwise variance",
        rel < 0.1,
        &format!("πh·E k_h²(−X) = {:.5}, f(0) = 0.5, rel {rel:.4} (limit 0.1)", PI * s.h_n * m.second_moment),
    );
}

#[test]
fn criterion_07_y_moment_scaling() {
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [1.0, 2.0] {
        let v: Vec<f64> = [1000u64, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let s = BandwidthSchedule::new(0.5, n).unwrap();
                s.h_n.powf(lambda) * y_moment(lambda, &s).unwrap()
            })
            .collect();
        ok &= v[0] > v[1] && v[1] > v[2];
        parts.push(format!("λ={lambda}: {:.5} > {:.5} > {:.5}", v[0], v[1], v[2]));
    }
    report(7, "y_moment scaling", ok, &parts.join("; "));
}

#[test]
fn criterion_08_xi_moment() {
    let row = &p2_run().rows[1];
    let target = 1.0 / PI;
    let rel = (row.mean_xi_moment - target).abs() / target;
    report(
        8,
        "E‖ξ_n‖₂²",
        rel < 0.15,
        &format!("estimate {:.5} ± {:.5}, target 1/π = {target:.5}, rel {rel:.4} (limit 0.15)", row.mean_xi_moment, (row.xi_moment_variance / 200.0).sqrt()),
    );
}

#[test]
fn criterion_09_xi_variance_decay() {
    let rows = &p2_run().rows;
    let (v3, v5) = (rows[0].xi_moment_variance, rows[1].xi_moment_variance);
    report(9, "Var ‖ξ_n‖₂² decay", v5 < v3, &format!("n=1e3: {v3:.4e}, n=1e5: {v5:.4e}"));
}

#[test]
fn criterion_10_normalized_risk() {
    let r2 = p2_run();
    let (a2, b2) = (r2.rows[0].mean_risk, r2.rows[1].mean_risk);
    let ok2 = (0.8..=1.2).contains(&b2) && (b2 - 1.0).abs() < (a2 - 1.0).abs();
    let r4 = mc_risk(&risk_config(4.0)).unwrap();
    let (a4, b4) = (r4.rows[0].mean_risk, r4.rows[1].mean_risk);
    let ok4 = (0.7..=1.3).contains(&b4) && (b4 - 1.0).abs() < (a4 - 1.0).abs();
    report(
        10,
        "normalized risk",
        ok2 && ok4,
        &format!(
            "p=2: n=1e3 {a2:.4} ± {:.4}, n=1e5 {b2:.4} ± {:.4} (interval [0.8, 1.2]); p=4: n=1e3 {a4:.4}, n=1e5 {b4:.4} ± {:.4} (interval [0.7, 1.3])",
            r2.rows[0].std_error, r2.rows[1].std_error, r4.rows[1].std_error
        ),
    );
}

#[test]
fn criterion_11_decorrelation() {
    let d = sech1();
    let cfg = CovarianceConfig {
        density: d.clone(),
        gamma: 0.5,
        n: 100_000,
        replicates: 500,
        master_seed: SEED,
        pairs: vec![(0.0, 1.0)],
        delta: 0.5,
    };
    let rep = mc_covariance(&cfg).unwrap();
    let row = &rep.rows[0];
    let limit = d.eval(0.0) / PI;
    let var_rel = (row.var_x - limit).abs() / limit;
    let exact_corr = row.exact_cov / (row.exact_var_x * row.exact_var_y).sqrt();
    report(
        11,
        "decorrelation on D_n",
        row.in_d_n && row.corr.abs() < 0.1 && var_rel < 0.1,
        &format!(
            "corr(ξ(0), ξ(1)) = {:.4} (limit 0.1, exact {exact_corr:.4}); Var ξ(0) = {:.5} vs f(0)/π = {limit:.5}, rel {var_rel:.4} (limit 0.1, exact variance {:.5})",
            row.corr, row.var_x, row.exact_var_x
        ),
    );
}

#[test]
fn criterion_12_bias_ratio() {
    let row = &p2_run().rows[1];
    let ratio = row.bias_norm / row.mean_stochastic_norm;
    report(
        12,
        "bias vs stochastic error",
        ratio < 0.1,
        &format!("‖b_n‖₂ = {:.3e}, mean ‖f_n − E f_n‖₂ = {:.3e}, ratio {ratio:.3e} (limit 0.1)", row.bias_norm, row.mean_stochastic_norm),
    );
}

#[test]
fn criterion_13_determinism() {
    let cfg = risk_config(2.0);
    let prov = Provenance::new(&cfg);
    let first = risk_report_csv(p2_run(), &prov);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let second = risk_report_csv(&pool.install(|| mc_risk(&cfg)).unwrap(), &prov);
    report(
        13,
        "determinism",
        first.as_bytes() == second.as_bytes(),
        &format!("two runs of the criterion 10 configuration, {} CSV bytes each, identical: {}", first.len(), first == second),
    );
}
