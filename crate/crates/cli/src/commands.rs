//! One function per subcommand. Each prints a table and, with `--out`,
//! writes a JSON document plus CSV (and SVG where a chart applies).

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use stripkde::estimator::{bias_function, pointwise_moments};
use stripkde::kernels::{kernel_l1_quadrature, kernel_l2_sq_quadrature, kernel_norms};
use stripkde::numerics::fmt_f64;
use stripkde::report::{
    bias_chart, covariance_csv, csv_table, json_document, risk_chart, risk_report_csv, LineChart, Provenance,
};
use stripkde::risk::{
    beta_from_norm, mc_covariance, mc_risk, mc_xi_moment, psi_from_parts, y_moment, CovarianceConfig, RiskConfig,
};
use stripkde::selfcheck::{run_selfcheck, Fault};
use stripkde::MaybeInfinite;

use crate::config::Resolved;
use crate::Failure;

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn print(&self) {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| short(c)).collect()).collect();
        let mut width: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &cells {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: &[&str]| {
            let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
            println!("{}", padded.join("  ").trim_end());
        };
        line(&self.header);
        for r in &cells {
            line(&r.iter().map(String::as_str).collect::<Vec<_>>());
        }
    }

    fn csv(&self, prov: &Provenance) -> String {
        csv_table(&prov.comment_lines(), &self.header, &self.rows)
    }
}

/// Seven significant digits for the terminal; files keep full precision.
fn short(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(0.0) => "0".into(),
        Ok(v) if cell.contains(['.', 'e']) && v.is_finite() => {
            if (1e-3..1e6).contains(&v.abs()) {
                let digits = 6usize.saturating_sub(v.abs().log10().floor().max(0.0) as usize);
                format!("{v:.digits$}")
            } else {
                format!("{v:.6e}")
            }
        }
        _ => cell.to_string(),
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Writes `<out>`, `<out>.csv` and optionally `<out>.svg`.
fn emit<T: Serialize>(
    r: &Resolved,
    result: &T,
    csv: impl FnOnce(&Provenance) -> String,
    chart: Option<LineChart>,
) -> Result<(), Failure> {
    let Some(out) = &r.out else { return Ok(()) };
    let prov = Provenance::new(r);
    let json_path = if out.extension().is_some() { out.clone() } else { out.with_extension("json") };
    write(&json_path, &json_document(result, &prov))?;
    write(&out.with_extension("csv"), &csv(&prov))?;
    if let Some(c) = chart {
        write(&out.with_extension("svg"), &c.to_svg())?;
    }
    Ok(())
}

fn opt(v: MaybeInfinite) -> String {
    match v {
        MaybeInfinite::Finite(x) => fmt_f64(x),
        MaybeInfinite::Infinite => "inf".into(),
    }
}

pub fn kernel_info(r: Resolved) -> Result<(), Failure> {
    let mut t = Table::new(&[
        "n", "big_n", "theta_n", "h_n", "k0", "k_h_peak", "l2_sq", "l2_sq_quad", "l1_quad", "l1_lower", "l1_upper",
    ]);
    let mut result = Vec::new();
    for s in &r.parsed.schedules {
        let spec = s.kernel_spec();
        let norms = kernel_norms(spec);
        let l2_quad = kernel_l2_sq_quadrature(spec)?;
        let l1 = kernel_l1_quadrature(spec)?;
        let k0 = spec.eval(0.0);
        let peak = s.scaled_kernel().peak();
        t.rows.push(vec![
            s.n.to_string(),
            fmt_f64(s.big_n),
            fmt_f64(s.theta_n),
            fmt_f64(s.h_n),
            fmt_f64(k0),
            fmt_f64(peak),
            fmt_f64(norms.l2_sq),
            fmt_f64(l2_quad),
            opt(l1),
            opt(norms.l1_lower),
            opt(norms.l1_upper),
        ]);
        result.push(json!({
            "schedule": s, "k0": k0, "k_h_peak": peak, "l2_sq": norms.l2_sq, "l2_sq_quadrature": l2_quad,
            "l1_quadrature": l1, "l1_lower": norms.l1_lower, "l1_upper": norms.l1_upper,
        }));
    }
    t.print();
    emit(&r, &result, |p| t.csv(p), None)
}

pub fn bias(r: Resolved) -> Result<(), Failure> {
    let norm = r.check_class()?;
    let d = &r.parsed.density;
    let mut t = Table::new(&["n", "big_n", "h_n", "sup_bias", "lp_bias", "psi_p", "lp_bias_over_psi"]);
    let mut points = Vec::new();
    let mut result = Vec::new();
    for s in &r.parsed.schedules {
        let b = bias_function(s, d, &r.parsed.grid)?;
        let sup = b.max_abs();
        let lp = b.lp_norm(r.p);
        let psi = psi_from_parts(s.n, r.gamma, r.p, norm)?;
        points.push((s.big_n, sup));
        t.rows.push(vec![
            s.n.to_string(),
            fmt_f64(s.big_n),
            fmt_f64(s.h_n),
            fmt_f64(sup),
            fmt_f64(lp),
            fmt_f64(psi),
            fmt_f64(lp / psi),
        ]);
        result.push(json!({"schedule": s, "sup_bias": sup, "lp_bias": lp, "psi_p": psi}));
    }
    t.print();
    let chart = bias_chart(&r.density, &points);
    emit(&r, &result, |p| t.csv(p), Some(chart))
}

pub fn moments(r: Resolved) -> Result<(), Failure> {
    r.check_class()?;
    let d = &r.parsed.density;
    let xs = r.x.clone().unwrap_or_default();
    let mut t = Table::new(&["n", "x", "f", "mean", "second_moment", "var_xi", "limit_var"]);
    let mut result = Vec::new();
    for s in &r.parsed.schedules {
        for &x in &xs {
            let m = pointwise_moments(s, d, x)?;
            let f = d.eval(x);
            let var = s.h_n * (m.second_moment - m.mean * m.mean);
            t.rows.push(vec![
                s.n.to_string(),
                fmt_f64(x),
                fmt_f64(f),
                fmt_f64(m.mean),
                fmt_f64(m.second_moment),
                fmt_f64(var),
                fmt_f64(f / PI),
            ]);
            result.push(json!({"n": s.n, "x": x, "f": f, "moments": m, "var_xi": var, "limit_var": f / PI}));
        }
    }
    t.print();
    emit(&r, &result, |p| t.csv(p), None)
}

fn risk_config(r: &Resolved) -> RiskConfig {
    RiskConfig {
        density: r.parsed.density.clone(),
        gamma: r.gamma,
        p: r.p,
        loss: r.parsed.loss,
        n_list: r.n.clone(),
        replicates: r.reps,
        master_seed: r.seed,
        grid: r.parsed.grid,
    }
}

pub fn risk(r: Resolved) -> Result<(), Failure> {
    let cfg = risk_config(&r);
    cfg.validate()?;
    let report = mc_risk(&cfg)?;
    let mut t = Table::new(&["n", "big_n", "psi_p", "mean_risk", "std_error", "bias_norm", "mean_xi_moment", "tail_flags"]);
    for row in &report.rows {
        t.rows.push(vec![
            row.n.to_string(),
            fmt_f64(row.big_n),
            fmt_f64(row.psi_p),
            fmt_f64(row.mean_risk),
            fmt_f64(row.std_error),
            fmt_f64(row.bias_norm),
            fmt_f64(row.mean_xi_moment),
            row.tail_flags.to_string(),
        ]);
    }
    t.print();
    println!("beta_p = {}", short(&fmt_f64(report.beta_p)));
    emit(&r, &report, |p| risk_report_csv(&report, p), Some(risk_chart(&report)))
}

pub fn xi_moment(r: Resolved) -> Result<(), Failure> {
    let norm = r.check_class()?;
    let mut t = Table::new(&["n", "estimate", "std_error", "target", "ratio"]);
    let mut result = Vec::new();
    for &n in &r.n {
        let x = mc_xi_moment(&r.parsed.density, r.gamma, r.p, n, r.reps, r.seed, r.parsed.grid)?;
        t.rows.push(vec![
            n.to_string(),
            fmt_f64(x.estimate),
            fmt_f64(x.std_error),
            fmt_f64(x.target),
            fmt_f64(x.estimate / x.target),
        ]);
        result.push(x);
    }
    t.print();
    println!("beta_p = {}", short(&fmt_f64(beta_from_norm(norm, r.p))));
    emit(&r, &result, |p| t.csv(p), None)
}

pub fn cov(r: Resolved) -> Result<(), Failure> {
    r.check_class()?;
    let pairs: Vec<(f64, f64)> = r.pairs.clone().unwrap_or_default().iter().map(|p| (p[0], p[1])).collect();
    let mut reports = Vec::new();
    for &n in &r.n {
        reports.push(mc_covariance(&CovarianceConfig {
            density: r.parsed.density.clone(),
            gamma: r.gamma,
            n,
            replicates: r.reps,
            master_seed: r.seed,
            pairs: pairs.clone(),
            delta: r.delta,
        })?);
    }
    let mut t = Table::new(&["n", "x", "y", "in_d_n", "cov", "corr", "exact_cov", "var_x", "exact_var_x", "limit_var_x"]);
    for rep in &reports {
        for row in &rep.rows {
            t.rows.push(vec![
                rep.n.to_string(),
                fmt_f64(row.x),
                fmt_f64(row.y),
                row.in_d_n.to_string(),
                fmt_f64(row.cov),
                fmt_f64(row.corr),
                fmt_f64(row.exact_cov),
                fmt_f64(row.var_x),
                fmt_f64(row.exact_var_x),
                fmt_f64(row.limit_var_x),
            ]);
        }
    }
    t.print();
    emit(
        &r,
        &reports,
        |p| reports.iter().map(|rep| covariance_csv(rep, p)).collect::<Vec<_>>().join("\n"),
        None,
    )
}

pub fn ymoment(r: Resolved) -> Result<(), Failure> {
    let lambdas = r.lambda.clone().unwrap_or_default();
    let mut t = Table::new(&["n", "theta_n", "lambda", "moment", "h_pow_moment"]);
    let mut result = Vec::new();
    for s in &r.parsed.schedules {
        for &l in &lambdas {
            let m = y_moment(l, s)?;
            let scaled = s.h_n.powf(l) * m;
            t.rows.push(vec![s.n.to_string(), fmt_f64(s.theta_n), fmt_f64(l), fmt_f64(m), fmt_f64(scaled)]);
            result.push(json!({"n": s.n, "theta_n": s.theta_n, "lambda": l, "moment": m, "h_pow_moment": scaled}));
        }
    }
    t.print();
    emit(&r, &result, |p| t.csv(p), None)
}

pub fn selfcheck(fault: Option<Fault>) -> Result<(), Failure> {
    let results = run_selfcheck(fault);
    let width = results.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &results {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {:<width$}  {:>7.3}s  {}", c.name, c.seconds, c.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    println!("{} checks, {} failed", results.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("self-check failed: {}", failed.join(", "))))
    }
}
