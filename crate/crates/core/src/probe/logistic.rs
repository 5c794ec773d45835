use serde::{Deserialize, Serialize};

use super::optim::{minimize, LbfgsOptions};
use super::scale::Standardizer;
use crate::embedding::{pair_loss, sigmoid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrConfig {
    pub l2: f64,
    pub gradient_tol: f64,
    pub max_iter: usize,
    pub standardize: bool,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            l2: 1e-4,
            gradient_tol: 1e-6,
            max_iter: 2000,
            standardize: false,
        }
    }
}

/// Mean logistic loss plus `l2/2·‖w‖²` and its gradient. `params` holds the
/// weights followed by the bias; the bias is not regularized.
pub fn lr_loss_and_grad(params: &[f64], x: &[Vec<f64>], y: &[bool], l2: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (xi, &yi) in x.iter().zip(y) {
        let s = b + xi.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        loss += pair_loss(s, yi);
        let r = sigmoid(s) - if yi { 1.0 } else { 0.0 };
        for (g, &v) in grad.iter_mut().zip(xi) {
            *g += r * v;
        }
        grad[d] += r;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (g, &v) in grad.iter_mut().zip(w) {
        *g += l2 * v;
    }
    (loss, grad)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticRegression {
    scaler: Standardizer,
    weights: Vec<f64>,
    bias: f64,
    pub gradient_norm: f64,
}

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[bool], cfg: &LrConfig) -> Self {
        let d = x[0].len();
        let scaler = if cfg.standardize {
            Standardizer::fit(x)
        } else {
            Standardizer::identity(d)
        };
        let xs = scaler.apply_all(x);
        let opts = LbfgsOptions {
            gradient_tol: cfg.gradient_tol,
            max_iter: cfg.max_iter,
            ..LbfgsOptions::default()
        };
        let min = minimize(|p| lr_loss_and_grad(p, &xs, y, cfg.l2), vec![0.0; d + 1], opts);
        if min.gradient_norm >= cfg.gradient_tol {
            log::debug!(
                "logistic regression stopped at gradient norm {:.2e} after {} iterations",
                min.gradient_norm,
                min.iterations
            );
        }
        LogisticRegression {
            scaler,
            bias: min.x[d],
            weights: min.x[..d].to_vec(),
            gradient_norm: min.gradient_norm,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let xs = self.scaler.apply(x);
        sigmoid(self.bias + xs.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }
}
