use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{beta_from_norm, gaussian_abs_moment, validate_class, LossSpec};
use crate::densities::AnalyticDensity;
use crate::error::{invalid, Result};
use crate::estimator::{expected_estimate, kde_at, kde_evaluate_spectral, pointwise_moments};
use crate::kernels::BandwidthSchedule;
use crate::numerics::{integrate_against_density, GridFunction, GridSpec};

/// Version of the report layouts.
pub const SCHEMA: u32 = 1;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r` at sample size `n`.
pub fn replicate_seed(master: u64, n: u64, r: u64) -> u64 {
    let mut s = master;
    let mut s = splitmix64(&mut s) ^ n;
    let mut s = splitmix64(&mut s) ^ r;
    splitmix64(&mut s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub density: AnalyticDensity,
    pub gamma: f64,
    pub p: f64,
    pub loss: LossSpec,
    pub n_list: Vec<u64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub grid: GridSpec,
}

impl RiskConfig {
    /// Checks everything that can be checked before sampling.
    pub fn validate(&self) -> Result<f64> {
        self.loss.validate()?;
        if self.replicates < 2 {
            return Err(invalid("replicates", format!("need at least 2, got {}", self.replicates)));
        }
        if self.n_list.is_empty() {
            return Err(invalid("n_list", "must list at least one sample size"));
        }
        let class = validate_class(&self.density, self.gamma, self.p)?;
        for &n in &self.n_list {
            BandwidthSchedule::new(self.gamma, n)?;
        }
        Ok(class.norm_half_p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub n: u64,
    pub big_n: f64,
    pub theta_n: f64,
    pub h_n: f64,
    pub psi_p: f64,
    /// Mean of l(ψ_p⁻¹ ‖f_n − f‖_p).
    pub mean_risk: f64,
    pub std_error: f64,
    pub replicates: usize,
    /// Mean of ψ_p⁻¹ ‖f_n − f‖_p before the loss is applied.
    pub mean_normalized_error: f64,
    /// ‖b_n‖_p; deterministic, so its mean is the value itself.
    pub bias_norm: f64,
    /// Mean of ‖ξ_n‖_p^p.
    pub mean_xi_moment: f64,
    /// Replicate variance of ‖ξ_n‖_p^p.
    pub xi_moment_variance: f64,
    /// Mean of ‖f_n − E f_n‖_p.
    pub mean_stochastic_norm: f64,
    /// Replicates whose error did not vanish at the grid edge.
    pub tail_flags: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub schema: u32,
    pub density: String,
    pub density_params: AnalyticDensity,
    pub gamma: f64,
    pub p: f64,
    pub loss: LossSpec,
    /// ‖f‖_{p/2}, from which every ψ_p is recomputable.
    pub norm_half_p: f64,
    pub m_p: f64,
    pub beta_p: f64,
    pub grid: GridSpec,
    pub master_seed: u64,
    pub rows: Vec<RiskRow>,
}

struct Replicate {
    normalized: f64,
    loss: f64,
    xi_moment: f64,
    stochastic_norm: f64,
    tail: bool,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64, f64) {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        f64::NAN
    };
    (mean, (var / r).sqrt(), var)
}

fn run_level(cfg: &RiskConfig, norm_half_p: f64, n: u64) -> Result<RiskRow> {
    let d = &cfg.density;
    let p = cfg.p;
    let sched = BandwidthSchedule::new(cfg.gamma, n)?;
    let kernel = sched.scaled_kernel();
    let psi = beta_from_norm(norm_half_p, p) / sched.n_h().sqrt();
    let truth = cfg.grid.tabulate(|x| d.eval(x));
    let mean = expected_estimate(&kernel, d, &cfg.grid)?;
    let bias = mean.sub(&truth)?;
    let root = sched.n_h().sqrt();
    let reps: Result<Vec<Replicate>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let sample = d.sample(replicate_seed(cfg.master_seed, n, r), n as usize);
            let f_n = kde_evaluate_spectral(&sample, &kernel, &cfg.grid)?;
            let err = f_n.sub(&truth)?.lp_norm_checked(p);
            let stoch: GridFunction = f_n.sub(&mean)?;
            let stochastic_norm = stoch.lp_norm(p);
            let normalized = err.value / psi;
            Ok(Replicate {
                normalized,
                loss: cfg.loss.apply(normalized),
                xi_moment: root.powf(p) * stoch.lp_norm_pow(p),
                stochastic_norm,
                tail: err.tail_risk,
            })
        })
        .collect();
    let reps = reps?;
    let col = |f: fn(&Replicate) -> f64| reps.iter().map(f).collect::<Vec<_>>();
    let (mean_risk, std_error, _) = mean_and_stderr(&col(|r| r.loss));
    let (mean_xi_moment, _, xi_moment_variance) = mean_and_stderr(&col(|r| r.xi_moment));
    Ok(RiskRow {
        n,
        big_n: sched.big_n,
        theta_n: sched.theta_n,
        h_n: sched.h_n,
        psi_p: psi,
        mean_risk,
        std_error,
        replicates: cfg.replicates,
        mean_normalized_error: mean_and_stderr(&col(|r| r.normalized)).0,
        bias_norm: bias.lp_norm(p),
        mean_xi_moment,
        xi_moment_variance,
        mean_stochastic_norm: mean_and_stderr(&col(|r| r.stochastic_norm)).0,
        tail_flags: reps.iter().filter(|r| r.tail).count(),
    })
}

/// Monte Carlo estimate of the normalized risk at each listed n.
/// Replicate r at size n draws its sample with `replicate_seed(master, n, r)`.
pub fn mc_risk(cfg: &RiskConfig) -> Result<RiskReport> {
    let norm_half_p = cfg.validate()?;
    let rows = cfg
        .n_list
        .iter()
        .map(|&n| run_level(cfg, norm_half_p, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(RiskReport {
        schema: SCHEMA,
        density: cfg.density.id(),
        density_params: cfg.density.clone(),
        gamma: cfg.gamma,
        p: cfg.p,
        loss: cfg.loss,
        norm_half_p,
        m_p: gaussian_abs_moment(cfg.p),
        beta_p: beta_from_norm(norm_half_p, cfg.p),
        grid: cfg.grid,
        master_seed: cfg.master_seed,
        rows,
    })
}

/// Risk over a finite set of densities near a reference one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VicinityReport {
    pub reports: Vec<RiskReport>,
    /// (n, largest mean risk over the set, density attaining it).
    pub max_risk: Vec<(u64, f64, String)>,
}

pub fn vicinity_max_risk(cfg: &RiskConfig, densities: &[AnalyticDensity]) -> Result<VicinityReport> {
    if densities.is_empty() {
        return Err(invalid("vicinity", "needs at least one density"));
    }
    let reports = densities
        .iter()
        .map(|d| mc_risk(&RiskConfig { density: d.clone(), ..cfg.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let max_risk = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let best = reports
                .iter()
                .max_by(|a, b| a.rows[i].mean_risk.total_cmp(&b.rows[i].mean_risk))
                .expect("non-empty");
            (n, best.rows[i].mean_risk, best.density.clone())
        })
        .collect();
    Ok(VicinityReport { reports, max_risk })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiMomentReport {
    pub n: u64,
    /// Mean of ‖ξ_n‖_p^p over replicates.
    pub estimate: f64,
    pub std_error: f64,
    /// Replicate variance of ‖ξ_n‖_p^p.
    pub replicate_variance: f64,
    /// β_p^p.
    pub target: f64,
    pub replicates: usize,
}

/// E‖ξ_n‖_p^p by Monte Carlo; same seeds as [`mc_risk`].
pub fn mc_xi_moment(
    d: &AnalyticDensity,
    gamma: f64,
    p: f64,
    n: u64,
    replicates: usize,
    master_seed: u64,
    grid: GridSpec,
) -> Result<XiMomentReport> {
    let cfg = RiskConfig {
        density: d.clone(),
        gamma,
        p,
        loss: LossSpec::Identity,
        n_list: vec![n],
        replicates,
        master_seed,
        grid,
    };
    let norm = cfg.validate()?;
    let row = run_level(&cfg, norm, n)?;
    Ok(XiMomentReport {
        n,
        estimate: row.mean_xi_moment,
        std_error: (row.xi_moment_variance / replicates as f64).sqrt(),
        replicate_variance: row.xi_moment_variance,
        target: beta_from_norm(norm, p).powf(p),
        replicates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceConfig {
    pub density: AnalyticDensity,
    pub gamma: f64,
    pub n: u64,
    pub replicates: usize,
    pub master_seed: u64,
    pub pairs: Vec<(f64, f64)>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub x: f64,
    pub y: f64,
    pub in_d_n: bool,
    pub cov: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub corr: f64,
    /// Cov(ξ_n(x), ξ_n(y)) by quadrature.
    pub exact_cov: f64,
    pub exact_var_x: f64,
    pub exact_var_y: f64,
    /// f(x)/π, the limit of Var ξ_n(x).
    pub limit_var_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub schema: u32,
    pub density: String,
    pub n: u64,
    pub big_n: f64,
    pub h_n: f64,
    pub delta: f64,
    /// Minimum separation N^{−(1−δ)/2} defining D_n.
    pub separation: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub rows: Vec<CovarianceRow>,
}

/// h·(E k_h(x−X)k_h(y−X) − E k_h(x−X) E k_h(y−X)).
fn exact_covariance(sched: &BandwidthSchedule, d: &AnalyticDensity, x: f64, y: f64, mx: f64, my: f64) -> Result<f64> {
    let k = sched.scaled_kernel();
    let shift = y - x;
    let joint = integrate_against_density(|z| k.eval(z) * k.eval(z + shift), k.h, d, x, 1e-11)?;
    Ok(sched.h_n * (joint - mx * my))
}

/// Sample covariances of (ξ_n(x), ξ_n(y)) across replicates.
pub fn mc_covariance(cfg: &CovarianceConfig) -> Result<CovarianceReport> {
    if cfg.replicates < 50 {
        return Err(invalid("replicates", format!("need at least 50, got {}", cfg.replicates)));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {}", cfg.delta)));
    }
    if cfg.pairs.is_empty() {
        return Err(invalid("pairs", "need at least one (x, y) pair"));
    }
    if cfg.pairs.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(invalid("pairs", "points must be finite"));
    }
    validate_class(&cfg.density, cfg.gamma, 2.0)?;
    let d = &cfg.density;
    let sched = BandwidthSchedule::new(cfg.gamma, cfg.n)?;
    let kernel = sched.scaled_kernel();
    let mut points: Vec<f64> = cfg.pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let index = |v: f64| points.iter().position(|&q| q == v).expect("point listed");
    let means = points
        .iter()
        .map(|&x| pointwise_moments(&sched, d, x).map(|m| m.mean))
        .collect::<Result<Vec<_>>>()?;
    let root = sched.n_h().sqrt();
    let xi: Vec<Vec<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let sample = d.sample(replicate_seed(cfg.master_seed, cfg.n, r), cfg.n as usize);
            kde_at(&sample, &kernel, &points)
                .into_iter()
                .zip(&means)
                .map(|(f, m)| root * (f - m))
                .collect()
        })
        .collect();
    let reps = cfg.replicates as f64;
    let column_mean = |j: usize| xi.iter().map(|v| v[j]).sum::<f64>() / reps;
    let cov_of = |a: usize, b: usize| {
        let (ma, mb) = (column_mean(a), column_mean(b));
        xi.iter().map(|v| (v[a] - ma) * (v[b] - mb)).sum::<f64>() / (reps - 1.0)
    };
    let separation = sched.big_n.powf(-(1.0 - cfg.delta) / 2.0);
    let rows = cfg
        .pairs
        .iter()
        .map(|&(x, y)| {
            let (i, j) = (index(x), index(y));
            let (cov, var_x, var_y) = (cov_of(i, j), cov_of(i, i), cov_of(j, j));
            Ok(CovarianceRow {
                x,
                y,
                in_d_n: (x - y).abs() >= separation,
                cov,
                var_x,
                var_y,
                corr: cov / (var_x * var_y).sqrt(),
                exact_cov: exact_covariance(&sched, d, x, y, means[i], means[j])?,
                exact_var_x: exact_covariance(&sched, d, x, x, means[i], means[i])?,
                exact_var_y: exact_covariance(&sched, d, y, y, means[j], means[j])?,
                limit_var_x: d.eval(x) / std::f64::consts::PI,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CovarianceReport {
        schema: SCHEMA,
        density: d.id(),
        n: cfg.n,
        big_n: sched.big_n,
        h_n: sched.h_n,
        delta: cfg.delta,
        separation,
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        rows,
    })
}
