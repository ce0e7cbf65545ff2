//! Test densities analytic in a horizontal strip, with exact evaluators,
//! inverse-CDF samplers and the class constants used by the rate function.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{uniform_breaks, Integrator};
use libm::lgamma as ln_gamma;
use crate::MaybeInfinite;

/// The weight u in f = G * u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryFunction {
    /// Uniform density on [-half_width, half_width].
    Uniform { half_width: f64 },
    /// Finite mixture of point masses.
    PointMasses { locations: Vec<f64>, weights: Vec<f64> },
}

impl BoundaryFunction {
    fn validate(&self) -> Result<()> {
        match self {
            BoundaryFunction::Uniform { half_width } => {
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return Err(invalid("half_width", format!("must be positive, got {half_width}")));
                }
            }
            BoundaryFunction::PointMasses { locations, weights } => {
                if locations.is_empty() || locations.len() != weights.len() {
                    return Err(invalid("weights", "need one weight per location, at least one"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(invalid("weights", "weights must be nonnegative"));
                }
                if locations.iter().any(|s| !s.is_finite()) {
                    return Err(invalid("locations", "locations must be finite"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid("weights", format!("must sum to 1, got {total}")));
                }
            }
        }
        Ok(())
    }

    /// Largest |s| in the support.
    fn reach(&self) -> f64 {
        match self {
            BoundaryFunction::Uniform { half_width } => *half_width,
            BoundaryFunction::PointMasses { locations, .. } => {
                locations.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
            }
        }
    }

    /// E e^{itS} for S ~ u.
    fn char_fn(&self, t: f64) -> Complex64 {
        match self {
            BoundaryFunction::Uniform { half_width } => {
                let z = half_width * t;
                let v = if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z };
                Complex64::new(v, 0.0)
            }
            BoundaryFunction::PointMasses { locations, weights } => locations
                .iter()
                .zip(weights)
                .map(|(s, w)| Complex64::from_polar(*w, t * s))
                .sum(),
        }
    }

    /// ∫ g(s) u(s) ds.
    fn average(&self, g: impl Fn(f64) -> f64) -> f64 {
        match self {
            BoundaryFunction::Uniform { half_width } => {
                let c = *half_width;
                let breaks = uniform_breaks(-c, c, 8);
                Integrator::new()
                    .abs_tol(1e-13)
                    .rel_tol(1e-12)
                    .integrate_pieces(&g, &breaks)
                    .map(|q| q.value / (2.0 * c))
                    // smooth integrand on a compact interval; best effort is fine
                    .unwrap_or_else(|e| match e {
                        Error::Quadrature { value, .. } => value / (2.0 * c),
                        _ => f64::NAN,
                    })
            }
            BoundaryFunction::PointMasses { locations, weights } => {
                locations.iter().zip(weights).map(|(s, w)| w * g(*s)).sum()
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            BoundaryFunction::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            BoundaryFunction::PointMasses { locations, weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (s, w) in locations.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *s;
                    }
                }
                *locations.last().unwrap()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    /// G(x) = 1 / (2γ₀ cosh(πx / 2γ₀)).
    Sech { gamma0: f64 },
    /// a / (π(x² + a²)).
    Cauchy { scale: f64 },
    /// G_{γ₀} * u.
    Convolution { gamma0: f64, u: BoundaryFunction },
}

/// A probability density analytic in the strip |Im z| < `strip()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDensity {
    kind: DensityKind,
}

/// Which tail integral to inspect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailCondition {
    /// ∫_{|x|>B} f^{p/2}
    PowerHalfP { p: f64 },
    /// ∫_{|x|>B} |x|^λ f
    Moment { lambda: f64 },
}

fn sech_pdf(gamma0: f64, x: f64) -> f64 {
    1.0 / (2.0 * gamma0 * (PI * x / (2.0 * gamma0)).cosh())
}

fn sech_cdf(gamma0: f64, x: f64) -> f64 {
    let z = PI * x / (2.0 * gamma0);
    if z > 0.0 {
        // 1 − (2/π) arctan(e^{−z}) keeps precision in the right tail
        1.0 - 2.0 / PI * (-z).exp().atan()
    } else {
        2.0 / PI * z.exp().atan()
    }
}

fn sech_pdf_complex(gamma0: f64, z: Complex64) -> Complex64 {
    // sech w = 2e^{−w} / (1 + e^{−2w}) on Re w ≥ 0, even in w
    let mut w = z * (PI / (2.0 * gamma0));
    if w.re < 0.0 {
        w = -w;
    }
    let e = (-w).exp();
    e * 2.0 / ((e * e + 1.0) * (2.0 * gamma0))
}

impl AnalyticDensity {
    pub fn sech(gamma0: f64) -> Result<Self> {
        check_positive("gamma0", gamma0)?;
        Ok(Self {
            kind: DensityKind::Sech { gamma0 },
        })
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        Ok(Self {
            kind: DensityKind::Cauchy { scale },
        })
    }

    pub fn convolution(gamma0: f64, u: BoundaryFunction) -> Result<Self> {
        check_positive("gamma0", gamma0)?;
        u.validate()?;
        Ok(Self {
            kind: DensityKind::Convolution { gamma0, u },
        })
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// Half-width of the strip of analyticity.
    pub fn strip(&self) -> f64 {
        match &self.kind {
            DensityKind::Sech { gamma0 } | DensityKind::Convolution { gamma0, .. } => *gamma0,
            DensityKind::Cauchy { scale } => *scale,
        }
    }

    pub fn is_heavy_tailed(&self) -> bool {
        matches!(self.kind, DensityKind::Cauchy { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::Sech { gamma0 } => sech_pdf(*gamma0, x),
            DensityKind::Cauchy { scale } => scale / (PI * (x * x + scale * scale)),
            DensityKind::Convolution { gamma0, u } => u.average(|s| sech_pdf(*gamma0, x - s)),
        }
    }

    /// Analytic continuation f(x + iy); finite for |y| < strip().
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            DensityKind::Sech { gamma0 } => sech_pdf_complex(*gamma0, z),
            DensityKind::Cauchy { scale } => {
                Complex64::new(*scale / PI, 0.0) / (z * z + scale * scale)
            }
            DensityKind::Convolution { gamma0, u } => {
                let re = u.average(|s| sech_pdf_complex(*gamma0, z - s).re);
                let im = u.average(|s| sech_pdf_complex(*gamma0, z - s).im);
                Complex64::new(re, im)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::Sech { gamma0 } => sech_cdf(*gamma0, x),
            DensityKind::Cauchy { scale } => 0.5 + (x / scale).atan() / PI,
            DensityKind::Convolution { gamma0, u } => u.average(|s| sech_cdf(*gamma0, x - s)),
        }
    }

    /// φ(t) = E e^{itX}.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        match &self.kind {
            DensityKind::Sech { gamma0 } => Complex64::new(1.0 / (gamma0 * t).cosh(), 0.0),
            DensityKind::Cauchy { scale } => Complex64::new((-scale * t.abs()).exp(), 0.0),
            DensityKind::Convolution { gamma0, u } => u.char_fn(t) / (gamma0 * t).cosh(),
        }
    }

    /// Largest |s| at which the characteristic function picks up phase.
    pub(crate) fn char_fn_frequency(&self) -> f64 {
        match &self.kind {
            DensityKind::Convolution { u, .. } => u.reach(),
            _ => 0.0,
        }
    }

    /// Inverse-CDF draw from a uniform variate in (0, 1) (sech and Cauchy),
    /// or G-draw plus u-draw for the convolution kind.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng);
        match &self.kind {
            DensityKind::Sech { gamma0 } => sech_quantile(*gamma0, u),
            DensityKind::Cauchy { scale } => scale * (PI * (u - 0.5)).tan(),
            DensityKind::Convolution { gamma0, u: bf } => sech_quantile(*gamma0, u) + bf.sample(rng),
        }
    }

    /// Quantile function for kinds with a closed form.
    pub fn quantile(&self, u: f64) -> Option<f64> {
        match &self.kind {
            DensityKind::Sech { gamma0 } => Some(sech_quantile(*gamma0, u)),
            DensityKind::Cauchy { scale } => Some(scale * (PI * (u - 0.5)).tan()),
            DensityKind::Convolution { .. } => None,
        }
    }

    /// n i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    /// R with ∫_{|x|>R} f < eps (capped at 10⁶ for heavy tails).
    pub fn effective_radius(&self, eps: f64) -> f64 {
        match &self.kind {
            DensityKind::Sech { gamma0 } => sech_radius(*gamma0, eps),
            DensityKind::Convolution { gamma0, u } => sech_radius(*gamma0, eps) + u.reach(),
            // two-sided tail mass (2/π) arctan(a/R) ≤ 2a/(πR)
            DensityKind::Cauchy { scale } => (2.0 * scale / (PI * eps)).min(1e6 * scale),
        }
    }

    fn real_line_breaks(&self, radius: f64) -> Vec<f64> {
        let mut b = uniform_breaks(-radius, radius, 16);
        if let DensityKind::Convolution { u: BoundaryFunction::PointMasses { locations, .. }, .. } = &self.kind {
            b.extend(locations.iter().filter(|s| s.abs() < radius));
            b.sort_by(f64::total_cmp);
            b.dedup();
        }
        b
    }

    /// ∫ g(f(x), x) dx over ℝ for a nonnegative integrand of light-tailed
    /// densities; the tails beyond the effective radius use mapped quadrature.
    fn integrate_light(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let r = self.effective_radius(1e-3).max(1.0);
        let integ = Integrator::new().abs_tol(1e-15).rel_tol(1e-12);
        let mid = integ.integrate_pieces(&g, &self.real_line_breaks(r))?;
        let hi = integ.integrate_upper_tail(&g, r)?;
        let lo = integ.integrate_lower_tail(&g, -r)?;
        Ok(lo.value + mid.value + hi.value)
    }

    /// (∫ f^q)^{1/q}.
    pub fn norm(&self, q: f64) -> Result<f64> {
        if !(q.is_finite() && q > 0.0) {
            return Err(invalid("q", format!("must be positive, got {q}")));
        }
        if q == 1.0 {
            return Ok(1.0);
        }
        let integral = match &self.kind {
            DensityKind::Cauchy { scale } => {
                let a = *scale;
                if q <= 0.5 {
                    return Err(Error::Divergent(format!(
                        "Cauchy density is not in L_q for q = {q} <= 1/2"
                    )));
                }
                let r = 100.0 * a;
                let breaks = uniform_breaks(0.0, r, 64);
                let core = Integrator::new()
                    .abs_tol(1e-15)
                    .rel_tol(1e-12)
                    .integrate_pieces(|x| self.eval(x).powf(q), &breaks)?;
                2.0 * (core.value + cauchy_power_tail(a, q, r))
            }
            _ => self.integrate_light(|x| self.eval(x).powf(q))?,
        };
        Ok(integral.powf(1.0 / q))
    }

    /// E|X|^λ, or `Infinite` when the tail integral diverges.
    pub fn abs_moment(&self, lambda: f64) -> Result<MaybeInfinite> {
        if !(lambda > 0.0 && lambda <= 2.0) {
            return Err(invalid("lambda", format!("must lie in (0, 2], got {lambda}")));
        }
        match &self.kind {
            DensityKind::Cauchy { scale } => {
                if lambda >= 1.0 {
                    return Ok(MaybeInfinite::Infinite);
                }
                let a = *scale;
                let r = 100.0 * a;
                let breaks = uniform_breaks(0.0, r, 64);
                let core = Integrator::new()
                    .abs_tol(1e-15)
                    .rel_tol(1e-12)
                    .integrate_pieces(|x| x.powf(lambda) * self.eval(x), &breaks)?;
                Ok(MaybeInfinite::Finite(2.0 * (core.value + cauchy_moment_tail(a, lambda, r))))
            }
            _ => self
                .integrate_light(|x| x.abs().powf(lambda) * self.eval(x))
                .map(MaybeInfinite::Finite),
        }
    }

    /// ∫_{|x|>B} of the chosen tail integrand.
    pub fn tail_integral(&self, cond: TailCondition, b: f64) -> Result<MaybeInfinite> {
        let integrand = |x: f64| match cond {
            TailCondition::PowerHalfP { p } => self.eval(x).powf(p / 2.0),
            TailCondition::Moment { lambda } => x.abs().powf(lambda) * self.eval(x),
        };
        if let DensityKind::Cauchy { scale } = &self.kind {
            let a = *scale;
            // closed-form tails beyond max(B, 100a) plus quadrature in between
            let r = b.max(100.0 * a);
            let tail = match cond {
                TailCondition::PowerHalfP { p } => {
                    if p <= 1.0 {
                        return Ok(MaybeInfinite::Infinite);
                    }
                    cauchy_power_tail(a, p / 2.0, r)
                }
                TailCondition::Moment { lambda } => {
                    if lambda >= 1.0 {
                        return Ok(MaybeInfinite::Infinite);
                    }
                    cauchy_moment_tail(a, lambda, r)
                }
            };
            let mid = if r > b {
                Integrator::new()
                    .abs_tol(1e-15)
                    .integrate_pieces(integrand, &uniform_breaks(b, r, 64))?
                    .value
            } else {
                0.0
            };
            return Ok(MaybeInfinite::Finite(2.0 * (mid + tail)));
        }
        let integ = Integrator::new().abs_tol(1e-16).rel_tol(1e-10);
        let hi = integ.integrate_upper_tail(integrand, b)?;
        let lo = integ.integrate_lower_tail(integrand, -b)?;
        Ok(MaybeInfinite::Finite(hi.value + lo.value))
    }

    /// Smallest power-of-two-refined B (to within 1%) with tail integral < eps.
    pub fn tail_radius(&self, cond: TailCondition, eps: f64) -> Result<Option<f64>> {
        let below = |b: f64| -> Result<bool> {
            Ok(matches!(self.tail_integral(cond, b)?, MaybeInfinite::Finite(v) if v < eps))
        };
        let mut hi = 1.0;
        while !below(hi)? {
            hi *= 2.0;
            if hi > 1e12 {
                return Ok(None);
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        while hi - lo > 0.01 * hi {
            let mid = 0.5 * (lo + hi);
            if below(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }

    /// ‖Re f(· + iγ)‖_p: the boundary function u of the representation
    /// f = G_γ * u, for a schedule strip γ < strip().
    pub fn boundary_norm(&self, gamma: f64, p: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma < self.strip()) {
            return Err(invalid(
                "gamma",
                format!("must lie in (0, {}), got {gamma}", self.strip()),
            ));
        }
        let g = |x: f64| self.eval_complex(Complex64::new(x, gamma)).re.abs().powf(p);
        let r = self.effective_radius(1e-6).clamp(10.0, 1e4);
        let breaks = self.real_line_breaks(r);
        let integ = Integrator::new().abs_tol(1e-14).rel_tol(1e-10).max_intervals(200_000);
        let mid = integ.integrate_pieces(g, &breaks)?;
        let hi = integ.integrate_upper_tail(g, r)?;
        let lo = integ.integrate_lower_tail(g, -r)?;
        Ok((mid.value + hi.value + lo.value).powf(1.0 / p))
    }

    /// Short identifier used in reports, e.g. `sech:1`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// x = (2γ₀/π) ln tan(πU/2).
pub fn sech_quantile(gamma0: f64, u: f64) -> f64 {
    // ln tan(πu/2) = 2 artanh(tan(π(u − 1/2)/2))
    4.0 * gamma0 / PI * (FRAC_PI_2 * (u - 0.5)).tan().atanh()
}

fn sech_radius(gamma0: f64, eps: f64) -> f64 {
    // two-sided tail mass (4/π) arctan(e^{−πR/2γ₀}) ≤ (4/π) e^{−πR/2γ₀}
    (2.0 * gamma0 / PI * (4.0 / (PI * eps)).ln()).max(0.0)
}

/// ∫_R^∞ (a/π)^q (x² + a²)^{−q} dx by the binomial series in (a/x)².
fn cauchy_power_tail(a: f64, q: f64, r: f64) -> f64 {
    let mut coef = 1.0;
    let mut sum = 0.0;
    for k in 0..12 {
        let kf = k as f64;
        sum += coef * a.powf(2.0 * kf) * r.powf(1.0 - 2.0 * q - 2.0 * kf) / (2.0 * q + 2.0 * kf - 1.0);
        coef *= -(q + kf) / (kf + 1.0);
    }
    (a / PI).powf(q) * sum
}

/// ∫_R^∞ x^λ a / (π(x² + a²)) dx, λ < 1.
fn cauchy_moment_tail(a: f64, lambda: f64, r: f64) -> f64 {
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 0..12 {
        let kf = k as f64;
        sum += sign * a.powf(2.0 * kf) * r.powf(lambda - 1.0 - 2.0 * kf) / (1.0 + 2.0 * kf - lambda);
        sign = -sign;
    }
    a / PI * sum
}

/// The class sup bound C(γ, p, M) = M / ((2γ)^{1/p} π^{1/q}) (∫₀^∞ cosh^{−q})^{1/q},
/// 1/p + 1/q = 1, with the p = 1 limit M / (2γ).
pub fn sup_bound(gamma: f64, p: f64, m: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    check_positive("M", m)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("must be >= 1, got {p}")));
    }
    if p == 1.0 {
        return Ok(m / (2.0 * gamma));
    }
    let q = p / (p - 1.0);
    Ok(m / ((2.0 * gamma).powf(1.0 / p) * PI.powf(1.0 / q)) * sech_power_half_integral(q).powf(1.0 / q))
}

/// ‖G_γ‖_q · M: Hölder's bound with the exact L_q norm of G_γ. Exceeds
/// [`sup_bound`] by the factor 2^{1/q}.
pub fn holder_sup_bound(gamma: f64, p: f64, m: f64) -> Result<f64> {
    let c = sup_bound(gamma, p, m)?;
    if p == 1.0 {
        return Ok(c);
    }
    let q = p / (p - 1.0);
    Ok(c * 2f64.powf(1.0 / q))
}

/// ∫₀^∞ cosh^{−q}(x) dx = B(q/2, 1/2) / 2.
pub fn sech_power_half_integral(q: f64) -> f64 {
    0.5 * (ln_gamma(q / 2.0) + ln_gamma(0.5) - ln_gamma((q + 1.0) / 2.0)).exp()
}

impl fmt::Display for AnalyticDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DensityKind::Sech { gamma0 } => write!(f, "sech:{gamma0}"),
            DensityKind::Cauchy { scale } => write!(f, "cauchy:{scale}"),
            DensityKind::Convolution { gamma0, u } => match u {
                BoundaryFunction::Uniform { half_width } => write!(f, "conv-uniform:{gamma0}:{half_width}"),
                BoundaryFunction::PointMasses { locations, weights } => {
                    write!(f, "conv-points:{gamma0}")?;
                    for (s, w) in locations.iter().zip(weights) {
                        write!(f, ":{s}/{w}")?;
                    }
                    Ok(())
                }
            },
        }
    }
}

/// Parses `sech:G0`, `cauchy:A`, `conv-uniform:G0:C` and
/// `conv-points:G0:S1/W1:S2/W2...`.
impl FromStr for AnalyticDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let num = |v: Option<&str>, name: &'static str| -> Result<f64> {
            v.ok_or_else(|| invalid("density", format!("`{s}`: missing {name}")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid("density", format!("`{s}`: {name} is not a number")))
        };
        let d = match kind {
            "sech" => AnalyticDensity::sech(num(parts.next(), "gamma0")?)?,
            "cauchy" => AnalyticDensity::cauchy(num(parts.next(), "scale")?)?,
            "conv-uniform" => {
                let g0 = num(parts.next(), "gamma0")?;
                let c = num(parts.next(), "half-width")?;
                AnalyticDensity::convolution(g0, BoundaryFunction::Uniform { half_width: c })?
            }
            "conv-points" => {
                let g0 = num(parts.next(), "gamma0")?;
                let mut locations = Vec::new();
                let mut weights = Vec::new();
                for pair in parts.by_ref() {
                    let (l, w) = pair
                        .split_once('/')
                        .ok_or_else(|| invalid("density", format!("`{s}`: expected LOCATION/WEIGHT, got `{pair}`")))?;
                    locations.push(num(Some(l), "location")?);
                    weights.push(num(Some(w), "weight")?);
                }
                AnalyticDensity::convolution(g0, BoundaryFunction::PointMasses { locations, weights })?
            }
            other => {
                return Err(invalid(
                    "density",
                    format!("unknown kind `{other}` (expected sech, cauchy, conv-uniform or conv-points)"),
                ))
            }
        };
        if parts.next().is_some() {
            return Err(invalid("density", format!("`{s}`: trailing fields")));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech1() -> AnalyticDensity {
        AnalyticDensity::sech(1.0).unwrap()
    }

    #[test]
    fn evaluator_examples() {
        assert_eq!(sech1().eval(0.0), 0.5);
        let c = AnalyticDensity::cauchy(1.0).unwrap();
        assert!((c.eval(1.0) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let conv = AnalyticDensity::convolution(
            1.0,
            BoundaryFunction::PointMasses { locations: vec![0.0], weights: vec![1.0] },
        )
        .unwrap();
        for x in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(conv.eval(x), sech1().eval(x));
        }
    }

    #[test]
    fn uniform_convolution_matches_cdf_difference() {
        // oracle: (F_G(x + c) − F_G(x − c)) / 2c
        let c = 0.8;
        let d = AnalyticDensity::convolution(1.0, BoundaryFunction::Uniform { half_width: c }).unwrap();
        for x in [-4.0, -0.3, 0.0, 1.1, 6.0] {
            let oracle = (sech_cdf(1.0, x + c) - sech_cdf(1.0, x - c)) / (2.0 * c);
            assert!((d.eval(x) - oracle).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn cdf_derivative_recovers_density() {
        let d = AnalyticDensity::sech(1.3).unwrap();
        let h = 1e-5;
        for x in [-2.0, 0.0, 0.4, 3.0] {
            let num = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            assert!((num - d.eval(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(sech1().quantile(0.5).unwrap(), 0.0);
        let c = AnalyticDensity::cauchy(2.0).unwrap();
        assert!((c.quantile(0.75).unwrap() - 2.0).abs() < 1e-14);
        // quantile inverts cdf
        let d = AnalyticDensity::sech(0.7).unwrap();
        for u in [0.01, 0.3, 0.9] {
            assert!((d.cdf(d.quantile(u).unwrap()) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn normalization() {
        let all = [
            sech1(),
            AnalyticDensity::sech(0.4).unwrap(),
            AnalyticDensity::cauchy(1.0).unwrap(),
            AnalyticDensity::convolution(1.0, BoundaryFunction::Uniform { half_width: 1.5 }).unwrap(),
            AnalyticDensity::convolution(
                0.8,
                BoundaryFunction::PointMasses { locations: vec![-2.0, 1.0], weights: vec![0.25, 0.75] },
            )
            .unwrap(),
        ];
        for d in &all {
            let n = d.norm(1.0).unwrap();
            assert_eq!(n, 1.0);
            // actually integrate rather than trusting the shortcut
            let total = if d.is_heavy_tailed() {
                2.0 * (Integrator::new().integrate_upper_tail(|x| d.eval(x), 0.0).unwrap().value)
            } else {
                d.integrate_light(|x| d.eval(x)).unwrap()
            };
            assert!((total - 1.0).abs() < 1e-6, "{d}: {total}");
        }
    }

    #[test]
    fn l2_norms_match_closed_forms() {
        // ∫ sech²(ax) = 2/a ⇒ ‖G‖₂ = (πγ₀)^{-1/2}
        assert!((sech1().norm(2.0).unwrap() - PI.powf(-0.5)).abs() < 1e-9);
        let d = AnalyticDensity::sech(0.5).unwrap();
        assert!((d.norm(2.0).unwrap() - (PI * 0.5).powf(-0.5)).abs() < 1e-9);
        // ∫ (π(1+x²))^{-2} = 1/(2π)
        let c = AnalyticDensity::cauchy(1.0).unwrap();
        assert!((c.norm(2.0).unwrap() - (2.0 * PI).powf(-0.5)).abs() < 1e-9);
    }

    #[test]
    fn cauchy_fractional_norm_matches_beta_function() {
        // ∫ (a/(π(x²+a²)))^q = (a/π)^q a^{1−2q} √π Γ(q−½)/Γ(q)
        let a = 1.5;
        let c = AnalyticDensity::cauchy(a).unwrap();
        for q in [0.75, 1.5, 2.0, 3.0] {
            let exact = ((a / PI).powf(q)
                * a.powf(1.0 - 2.0 * q)
                * (0.5 * PI.ln() + ln_gamma(q - 0.5) - ln_gamma(q)).exp())
            .powf(1.0 / q);
            let got = c.norm(q).unwrap();
            assert!((got - exact).abs() / exact < 1e-6, "q = {q}: {got} vs {exact}");
        }
        assert!(matches!(c.norm(0.5), Err(Error::Divergent(_))));
    }

    #[test]
    fn moments() {
        // the standard hyperbolic secant law has unit variance
        let m = sech1().abs_moment(2.0).unwrap().finite().unwrap();
        assert!((m - 1.0).abs() < 1e-9);
        let m = AnalyticDensity::sech(2.0).unwrap().abs_moment(2.0).unwrap().finite().unwrap();
        assert!((m - 4.0).abs() < 1e-8);
        let c = AnalyticDensity::cauchy(1.0).unwrap();
        assert!(c.abs_moment(1.0).unwrap().is_infinite());
        // E|X|^λ = 1/cos(πλ/2) for the standard Cauchy law
        let got = c.abs_moment(0.5).unwrap().finite().unwrap();
        assert!((got - 1.0 / (PI / 4.0).cos()).abs() < 1e-8, "{got}");
        assert!(sech1().abs_moment(0.0).is_err());
    }

    #[test]
    fn sup_bound_values() {
        assert_eq!(sup_bound(0.5, 1.0, 3.0).unwrap(), 3.0);
        let v = sup_bound(0.7, 2.0, 1.0).unwrap();
        assert!((v - 1.0 / (1.4f64.sqrt() * PI.sqrt())).abs() < 1e-14);
        // closed form of ∫₀^∞ sech^q against quadrature
        for q in [1.5, 2.0, 3.0, 7.0] {
            let quad = Integrator::new().integrate_upper_tail(|x| x.cosh().powf(-q), 0.0).unwrap().value;
            assert!((sech_power_half_integral(q) - quad).abs() < 1e-10);
        }
        assert!(sup_bound(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn holder_bound_is_exact_norm_of_g() {
        // ‖G_γ‖_q · M with M = 1 against quadrature of G_γ
        let gamma = 0.5;
        for p in [1.5, 2.0, 4.0] {
            let q = p / (p - 1.0);
            let g = AnalyticDensity::sech(gamma).unwrap();
            let norm_g = g.norm(q).unwrap();
            assert!((holder_sup_bound(gamma, p, 1.0).unwrap() - norm_g).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn membership_sanity() {
        // Sech(1) as G_γ * u with u = Re G₁(· + iγ), γ = 1/2
        let d = sech1();
        for p in [1.0, 2.0, 4.0] {
            let m = d.boundary_norm(0.5, p).unwrap();
            let c = holder_sup_bound(0.5, p, m).unwrap();
            for x in [0.0, 0.3, 2.0] {
                assert!(d.eval(x) <= c, "p = {p}, x = {x}");
            }
        }
        // p = 1: M = ‖u‖₁ = 1 since Re G(·+iy) has unit mass
        assert!((d.boundary_norm(0.5, 1.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn strip_validity() {
        let d = AnalyticDensity::sech(1.0).unwrap();
        for y in [0.0, 0.5, 0.9, 0.99] {
            for x in [-2.0, 0.0, 1.0] {
                let v = d.eval_complex(Complex64::new(x, y));
                assert!(v.re.is_finite() && v.im.is_finite());
            }
        }
        // pole at i γ₀
        assert!(d.eval_complex(Complex64::new(0.0, 0.999_999)).norm() > 1e4);
        let c = AnalyticDensity::cauchy(1.0).unwrap();
        assert!(c.eval_complex(Complex64::new(0.0, 0.5)).re.is_finite());
    }

    #[test]
    fn characteristic_functions_against_quadrature() {
        let ds = [
            sech1(),
            AnalyticDensity::convolution(1.0, BoundaryFunction::Uniform { half_width: 0.6 }).unwrap(),
            AnalyticDensity::convolution(
                1.0,
                BoundaryFunction::PointMasses { locations: vec![-1.0, 2.0], weights: vec![0.4, 0.6] },
            )
            .unwrap(),
        ];
        for d in &ds {
            for t in [0.0, 0.8, 2.5] {
                let re = d.integrate_light(|x| d.eval(x) * (t * x).cos()).unwrap();
                let im = d.integrate_light(|x| d.eval(x) * (t * x).sin()).unwrap();
                let cf = d.char_fn(t);
                assert!((cf.re - re).abs() < 1e-8 && (cf.im - im).abs() < 1e-8, "{d} t={t}");
            }
        }
    }

    #[test]
    fn tail_conditions_are_monotone() {
        for d in [sech1(), AnalyticDensity::cauchy(1.0).unwrap()] {
            let cond = TailCondition::PowerHalfP { p: 4.0 };
            let mut prev = f64::INFINITY;
            for b in [1.0, 2.0, 5.0, 10.0, 50.0] {
                let v = d.tail_integral(cond, b).unwrap().finite().unwrap();
                assert!(v < prev);
                prev = v;
            }
            let b = d.tail_radius(cond, 1e-4).unwrap().unwrap();
            assert!(d.tail_integral(cond, b).unwrap().finite().unwrap() < 1e-4);
        }
        let c = AnalyticDensity::cauchy(1.0).unwrap();
        assert!(c.tail_integral(TailCondition::Moment { lambda: 1.5 }, 3.0).unwrap().is_infinite());
        let b = sech1().tail_radius(TailCondition::Moment { lambda: 2.0 }, 1e-4).unwrap().unwrap();
        assert!(b > 1.0 && b < 20.0);
    }

    #[test]
    fn parse_and_display() {
        for s in ["sech:1", "cauchy:2.5", "conv-uniform:1:0.5", "conv-points:1:-1/0.5:1/0.5"] {
            let d: AnalyticDensity = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("sech".parse::<AnalyticDensity>().is_err());
        assert!("gauss:1".parse::<AnalyticDensity>().is_err());
        assert!("sech:-1".parse::<AnalyticDensity>().is_err());
        assert!("conv-points:1:0/0.3".parse::<AnalyticDensity>().is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = sech1();
        assert_eq!(d.sample(7, 100), d.sample(7, 100));
        assert_ne!(d.sample(7, 100), d.sample(8, 100));
    }
}
