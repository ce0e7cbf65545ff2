//! Frequency-side evaluation of multiplier-kernel estimates.
//!
//! A scaled kernel k_h has k̂_h supported on |t| ≤ 1/h, so for any
//! probability measure μ
//!
//!   (k_h * μ)(x) = (1/π) ∫₀^{1/h} k̂_h(t) Re(e^{itx} conj(φ_μ(t))) dt.
//!
//! The integrand is entire on each linear piece of k̂_h, so panelled
//! Gauss–Legendre reaches machine precision with about one node per radian
//! of phase. This turns the O(n·m) direct sum into O((n + m)·K).

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::kernels::ScaledKernel;
use gauss_quad::GaussLegendre;

const NODES_PER_PANEL: usize = 32;
/// Maximum phase ω·w swept by one panel.
const PANEL_PHASE: f64 = 28.0;

/// Nodes and weights on [-1, 1].
fn panel_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = std::num::NonZeroUsize::new(NODES_PER_PANEL).unwrap();
        GaussLegendre::new(n).as_node_weight_pairs().to_vec()
    })
}

#[derive(Debug, Clone)]
struct Piece {
    start: f64,
    width: f64,
    panels: usize,
    /// Node offsets within a panel, in [0, width].
    offsets: Vec<f64>,
}

/// Quadrature nodes in t together with weights w_k k̂_h(t_k) / π.
#[derive(Debug, Clone)]
pub(crate) struct SpectralRule {
    pieces: Vec<Piece>,
    pub(crate) nodes: Vec<f64>,
    pub(crate) weights: Vec<f64>,
}

impl SpectralRule {
    /// `omega` bounds the phase rate |x − X| of every term to be resolved.
    pub(crate) fn new(kernel: &ScaledKernel, omega: f64) -> Self {
        let gl = panel_rule();
        let omega = omega.max(1.0);
        let plateau = kernel.plateau_end();
        let support = kernel.support_end();
        let mut spans = Vec::new();
        if plateau > 0.0 {
            spans.push((0.0, plateau));
        }
        if support > plateau {
            spans.push((plateau, support));
        }
        let mut pieces = Vec::new();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (a, b) in spans {
            let len = b - a;
            let panels = ((len * omega / PANEL_PHASE).ceil() as usize).max(1);
            let width = len / panels as f64;
            let offsets: Vec<f64> = gl.iter().map(|&(s, _)| 0.5 * width * (1.0 + s)).collect();
            for p in 0..panels {
                let left = a + p as f64 * width;
                for (off, &(_, gw)) in offsets.iter().zip(gl) {
                    let t = left + off;
                    nodes.push(t);
                    weights.push(0.5 * width * gw * kernel.ft(t) / std::f64::consts::PI);
                }
            }
            pieces.push(Piece {
                start: a,
                width,
                panels,
                offsets,
            });
        }
        Self {
            pieces,
            nodes,
            weights,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Σ_i e^{−i t_k X_i} / n_total for every node, summed in slice order.
    pub(crate) fn empirical_transform(&self, sample: &[f64], n_total: usize) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.len()];
        let mut offs = vec![Complex64::new(0.0, 0.0); NODES_PER_PANEL];
        for &x in sample {
            let mut k = 0;
            for piece in &self.pieces {
                for (o, &off) in offs.iter_mut().zip(&piece.offsets) {
                    *o = Complex64::from_polar(1.0, -off * x);
                }
                let step = Complex64::from_polar(1.0, -piece.width * x);
                let mut base = Complex64::from_polar(1.0, -piece.start * x);
                for p in 0..piece.panels {
                    if p > 0 && p % 64 == 0 {
                        base = Complex64::from_polar(1.0, -(piece.start + p as f64 * piece.width) * x);
                    }
                    for o in &offs {
                        acc[k] += base * o;
                        k += 1;
                    }
                    base *= step;
                }
            }
        }
        let inv = 1.0 / n_total as f64;
        for a in &mut acc {
            *a *= inv;
        }
        acc
    }

    /// Σ_k W_k Re(e^{i t_k x_j} S_k) at x_j = left + j·step.
    pub(crate) fn evaluate_on_grid(&self, transform: &[Complex64], left: f64, step: f64, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for ((&t, &w), s) in self.nodes.iter().zip(&self.weights).zip(transform) {
            let ws = s * w;
            let rot = Complex64::from_polar(1.0, t * step);
            let mut phase = Complex64::new(0.0, 0.0);
            for (j, o) in out.iter_mut().enumerate() {
                if j % 256 == 0 {
                    phase = Complex64::from_polar(1.0, t * (left + j as f64 * step));
                } else {
                    phase *= rot;
                }
                *o += phase.re * ws.re - phase.im * ws.im;
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn evaluate_at(&self, transform: &[Complex64], x: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(transform)
            .map(|((&t, &w), s)| w * (Complex64::from_polar(1.0, t * x) * s).re)
            .sum()
    }
}
