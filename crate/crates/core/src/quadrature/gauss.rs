use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights mapped to `[a, b]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPanel {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize, a: f64, b: f64) -> GaussPanel {
    let n = NonZeroUsize::new(n.max(1)).expect("nonzero");
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    GaussPanel {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

impl GaussPanel {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        super::compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }
}

/// Geometrically graded panels on `[0, len]` clustering toward 0:
/// `[len q^(l+1), len q^l]` for `l < levels` plus the innermost `[0, len q^levels]`.
pub(crate) fn graded_toward_zero(len: f64, levels: usize, ratio: f64, per_panel: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let inner = len * ratio.powi(levels as i32);
    for (x, w) in panel_pairs(per_panel, 0.0, inner) {
        out.push((x, w));
    }
    for l in (0..levels).rev() {
        let lo = len * ratio.powi(l as i32 + 1);
        let hi = len * ratio.powi(l as i32);
        out.extend(panel_pairs(per_panel, lo, hi));
    }
    out
}

fn panel_pairs(n: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let p = gauss_legendre(n, a, b);
    p.nodes.into_iter().zip(p.weights)
}
