//! Rate constants, loss functions, and the Monte Carlo harness for the
//! normalized L_p risk ψ_p(n)⁻¹ ‖f_n − f‖_p.

mod harness;
mod ymoment;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::densities::AnalyticDensity;
use crate::error::{invalid, Error, Result};
use crate::kernels::BandwidthSchedule;
use libm::lgamma as ln_gamma;
use crate::MaybeInfinite;

pub use harness::{
    mc_covariance, mc_risk, mc_xi_moment, replicate_seed, vicinity_max_risk, CovarianceConfig,
    CovarianceReport, CovarianceRow, RiskConfig, RiskReport, RiskRow, VicinityReport, XiMomentReport, SCHEMA,
};
pub use ymoment::y_moment;

/// M_p = (E|Z|^p)^{1/p} for standard normal Z.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    if p == 2.0 {
        return 1.0;
    }
    2f64.sqrt() * ((ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln()) / p).exp()
}

/// β_p = π^{−1/2} ‖f‖_{p/2}^{1/2} M_p.
pub fn beta_p(d: &AnalyticDensity, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(beta_from_norm(d.norm(0.5 * p)?, p))
}

pub fn beta_from_norm(norm_half_p: f64, p: f64) -> f64 {
    norm_half_p.sqrt() * gaussian_abs_moment(p) / PI.sqrt()
}

/// ψ_p(n) = β_p (n h_n)^{−1/2}.
pub fn rate_psi(n: u64, gamma: f64, p: f64, d: &AnalyticDensity) -> Result<f64> {
    let sched = BandwidthSchedule::new(gamma, n)?;
    Ok(beta_p(d, p)? / sched.n_h().sqrt())
}

/// ψ_p recomputed from stored report fields.
pub fn psi_from_parts(n: u64, gamma: f64, p: f64, norm_half_p: f64) -> Result<f64> {
    let sched = BandwidthSchedule::new(gamma, n)?;
    Ok(beta_from_norm(norm_half_p, p) / sched.n_h().sqrt())
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(invalid("p", format!("must be a finite number ≥ 1, got {p}")));
    }
    Ok(())
}

/// A loss of the admissible class: non-decreasing, l(0) = 0, continuous at
/// 1, and bounded by A e^{Bx}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Identity,
    Power { q: f64 },
    Capped { cap: f64 },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Identity => Ok(()),
            LossSpec::Power { q } if q.is_finite() && q >= 1.0 => Ok(()),
            LossSpec::Power { q } => Err(invalid("loss", format!("power exponent must be ≥ 1, got {q}"))),
            LossSpec::Capped { cap } if cap.is_finite() && cap > 0.0 => Ok(()),
            LossSpec::Capped { cap } => Err(invalid("loss", format!("cap must be positive, got {cap}"))),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            LossSpec::Identity => x,
            LossSpec::Power { q } => x.powf(q),
            LossSpec::Capped { cap } => x.min(cap),
        }
    }

    /// (A, B) with l(x) ≤ A e^{Bx} for x ≥ 0.
    pub fn growth_bound(&self) -> (f64, f64) {
        match *self {
            LossSpec::Identity => (1.0, 1.0),
            // max_x x^q e^{−x} = (q/e)^q
            LossSpec::Power { q } => ((q / std::f64::consts::E).powf(q), 1.0),
            LossSpec::Capped { cap } => (cap, 0.0),
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossSpec::Identity => write!(f, "identity"),
            LossSpec::Power { q } => write!(f, "power:{q}"),
            LossSpec::Capped { cap } => write!(f, "capped:{cap}"),
        }
    }
}

impl FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("loss", format!("expected identity, power:Q or capped:C, got {s:?}"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.parse::<f64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let loss = match (head, arg) {
            ("identity", None) => LossSpec::Identity,
            ("power", Some(q)) => LossSpec::Power { q },
            ("capped", Some(cap)) => LossSpec::Capped { cap },
            _ => return Err(bad()),
        };
        loss.validate()?;
        Ok(loss)
    }
}

/// Outcome of the class-membership check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMembership {
    /// ‖f‖_{p/2}.
    pub norm_half_p: f64,
    /// Moment exponent λ ∈ ((2−p)/p, 2] with E|X|^λ < ∞, needed when p < 2.
    pub lambda: Option<f64>,
}

/// Checks that (d, γ, p) lies in the class where the risk asymptotics hold:
/// γ below the strip half-width, p ≥ 1, ‖f‖_{p/2} finite, and for p < 2 a
/// finite absolute moment of order λ > (2−p)/p.
pub fn validate_class(d: &AnalyticDensity, gamma: f64, p: f64) -> Result<ClassMembership> {
    check_p(p)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    if gamma >= d.strip() {
        return Err(Error::ClassViolation(format!(
            "gamma = {gamma} must be below the strip half-width {} of {d}",
            d.strip()
        )));
    }
    let lambda = if p < 2.0 {
        let lower = (2.0 - p) / p;
        // moments of every order exist for the light-tailed kinds; a Cauchy
        // law has E|X|^λ < ∞ exactly for λ < 1
        let sup = if d.is_heavy_tailed() { 1.0 } else { f64::INFINITY };
        if lower >= sup.min(2.0) {
            return Err(Error::ClassViolation(format!(
                "{d} with p = {p}: the risk bound needs E|X|^λ < ∞ for some λ in ({lower}, 2], \
                 but E|X|^λ is infinite for λ ≥ {sup}; use p > {}",
                2.0 / (1.0 + sup)
            )));
        }
        let lambda = if sup > 2.0 { 2.0 } else { 0.5 * (lower + sup) };
        match d.abs_moment(lambda)? {
            MaybeInfinite::Finite(_) => Some(lambda),
            MaybeInfinite::Infinite => {
                return Err(Error::ClassViolation(format!("{d}: E|X|^{lambda} is infinite")))
            }
        }
    } else {
        None
    };
    let norm_half_p = d.norm(0.5 * p)?;
    Ok(ClassMembership { norm_half_p, lambda })
}
