use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A symmetric uniform grid `[-half_width, half_width]` with the given step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 50.0,
            step: 0.01,
        }
    }
}

impl GridSpec {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("half_width", format!("must be positive and finite, got {half_width}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("step", format!("must be positive and finite, got {step}")));
        }
        let cells = 2.0 * half_width / step;
        if (cells - cells.round()).abs() > 1e-6 * cells.max(1.0) {
            return Err(invalid(
                "step",
                format!("2*half_width/step = {cells} is not an integer"),
            ));
        }
        Ok(Self { half_width, step })
    }

    pub fn len(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn left(&self) -> f64 {
        -self.half_width
    }

    pub fn point(&self, i: usize) -> f64 {
        self.left() + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Tabulate `f` on this grid. Evaluation is parallel; output order is fixed.
    pub fn tabulate<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> GridFunction {
        let values = (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect();
        GridFunction {
            left: self.left(),
            step: self.step,
            values,
        }
    }
}

/// Uniform-grid tabulation: `values[i] ≈ g(left + i*step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub left: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

/// L_p norm together with the truncation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub value: f64,
    /// Boundary values exceed 1e-6 of the peak: mass may lie outside the grid.
    pub tail_risk: bool,
}

impl GridFunction {
    pub fn new(left: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("step", format!("must be positive, got {step}")));
        }
        if values.is_empty() {
            return Err(invalid("values", "grid function must be non-empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite value at index {i}")));
        }
        Ok(Self { left, step, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.left + i as f64 * self.step
    }

    pub fn right(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn spec(&self) -> Option<GridSpec> {
        GridSpec::new(-self.left, self.step)
            .ok()
            .filter(|g| g.len() == self.len())
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len() && self.left == other.left && self.step == other.step
    }

    fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                self.left,
                self.step,
                self.len(),
                other.left,
                other.step,
                other.len()
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            left: self.left,
            step: self.step,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_grid(other)?;
        Ok(GridFunction {
            left: self.left,
            step: self.step,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Composite trapezoid ∫g.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.step, |v| v)
    }

    /// Composite trapezoid ∫|g|^p (no root taken).
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        if p == 1.0 {
            trapezoid(&self.values, self.step, f64::abs)
        } else if p == 2.0 {
            trapezoid(&self.values, self.step, |v| v * v)
        } else {
            trapezoid(&self.values, self.step, |v| v.abs().powf(p))
        }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_norm_checked(p).value
    }

    pub fn lp_norm_checked(&self, p: f64) -> NormReport {
        assert!(p >= 1.0, "lp_norm requires p >= 1, got {p}");
        let value = self.lp_norm_pow(p).powf(1.0 / p);
        let edge = self.values[0].abs().max(self.values[self.len() - 1].abs());
        NormReport {
            value,
            tail_risk: edge > 1e-6 * self.max_abs(),
        }
    }

    /// Trapezoid approximation of ĝ(t) = ∫ g(x) e^{-itx} dx.
    pub fn numerical_ft(&self, t: f64) -> Complex64 {
        let n = self.len();
        let rot = Complex64::from_polar(1.0, -t * self.step);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = Complex64::new(0.0, 0.0);
        for (i, &v) in self.values.iter().enumerate() {
            // Reseed the rotation periodically to bound drift.
            if i % 512 == 0 {
                phase = Complex64::from_polar(1.0, -t * self.x(i));
            } else {
                phase *= rot;
            }
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += phase * (w * v);
        }
        acc * self.step
    }

    /// Linear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let s = (x - self.left) / self.step;
        if s < 0.0 || s > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(self.len() - 2);
        let frac = s - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Two-column CSV `x,value` with 17 significant digits. `comments` are
    /// written first, each prefixed with `# `.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", fmt_f64(self.x(i)), fmt_f64(*v))?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<GridFunction> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Io(format!("malformed CSV line: {line}")))
            };
            xs.push(parse(it.next())?);
            vs.push(parse(it.next())?);
        }
        if xs.len() < 2 {
            return Err(Error::Io("CSV needs at least two rows".into()));
        }
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        GridFunction::new(xs[0], step, vs)
    }
}

fn trapezoid(values: &[f64], step: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    if n == 1 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().map(|&v| f(v)).sum();
    step * (inner + 0.5 * (f(values[0]) + f(values[n - 1])))
}

/// Locale-free float formatting with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
