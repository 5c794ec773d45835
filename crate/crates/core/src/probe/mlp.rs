//! One-hidden-layer perceptron with ReLU units and a logistic output, trained
//! with mini-batch Adam and early stopping on a held-out slice.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scale::Standardizer;
use crate::embedding::{pair_loss, sigmoid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    /// Hidden width; `None` means `max(64, 2·#classes)`.
    pub hidden: Option<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Lower bound on optimizer steps, so tiny training sets still converge.
    pub min_steps: usize,
    pub l2: f64,
    /// Share of the training rows held out for early stopping.
    pub validation_fraction: f64,
    /// Early stopping is skipped when the held-out slice would be smaller.
    pub min_validation: usize,
    pub patience: usize,
    pub standardize: bool,
    /// Independent initializations; the one with the lowest final loss wins.
    pub restarts: usize,
    /// Networks trained from independent initializations whose
    /// probabilities are averaged; each member uses `restarts`.
    pub ensemble: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: None,
            learning_rate: 0.005,
            batch_size: 32,
            max_epochs: 200,
            min_steps: 2000,
            l2: 1e-4,
            validation_fraction: 0.1,
            min_validation: 10,
            patience: 20,
            standardize: false,
            restarts: 1,
            ensemble: 1,
        }
    }
}

impl MlpConfig {
    pub fn hidden_width(&self, n_classes: usize) -> usize {
        self.hidden.unwrap_or_else(|| 64.max(2 * n_classes))
    }
}

/// Parameter layout: `W1` (hidden × input, row-major), `b1`, `w2`, `b2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: usize,
}

impl MlpShape {
    pub fn n_params(&self) -> usize {
        self.hidden * self.input + 2 * self.hidden + 1
    }

    fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], f64) {
        let (w1, rest) = p.split_at(self.hidden * self.input);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        (w1, b1, w2, rest[0])
    }
}

fn forward(shape: MlpShape, p: &[f64], x: &[f64], hidden: &mut [f64]) -> f64 {
    let (w1, b1, w2, b2) = shape.split(p);
    let mut s = b2;
    for j in 0..shape.hidden {
        let row = &w1[j * shape.input..(j + 1) * shape.input];
        let z = b1[j] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        hidden[j] = z.max(0.0);
        s += w2[j] * hidden[j];
    }
    s
}

/// Mean logistic loss over `rows` plus `l2/2·(‖W1‖² + ‖w2‖²)`, and its gradient.
pub fn mlp_loss_and_grad(
    shape: MlpShape,
    params: &[f64],
    x: &[Vec<f64>],
    y: &[bool],
    l2: f64,
) -> (f64, Vec<f64>) {
    let idx: Vec<usize> = (0..x.len()).collect();
    batch_loss_and_grad(shape, params, x, y, &idx, l2)
}

fn batch_loss_and_grad(
    shape: MlpShape,
    params: &[f64],
    x: &[Vec<f64>],
    y: &[bool],
    batch: &[usize],
    l2: f64,
) -> (f64, Vec<f64>) {
    let (h, d) = (shape.hidden, shape.input);
    let (_, _, w2, _) = shape.split(params);
    let mut grad = vec![0.0; params.len()];
    let mut hidden = vec![0.0; h];
    let mut loss = 0.0;
    for &i in batch {
        let s = forward(shape, params, &x[i], &mut hidden);
        loss += pair_loss(s, y[i]);
        let r = sigmoid(s) - if y[i] { 1.0 } else { 0.0 };
        let (gw1, rest) = grad.split_at_mut(h * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        gb2[0] += r;
        for j in 0..h {
            gw2[j] += r * hidden[j];
            if hidden[j] > 0.0 {
                let delta = r * w2[j];
                gb1[j] += delta;
                for (g, &v) in gw1[j * d..(j + 1) * d].iter_mut().zip(&x[i]) {
                    *g += delta * v;
                }
            }
        }
    }
    let n = batch.len() as f64;
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    let (w1, _, w2, _) = shape.split(params);
    loss += 0.5 * l2 * (w1.iter().chain(w2).map(|v| v * v).sum::<f64>());
    for (g, &v) in grad[..h * d].iter_mut().zip(w1) {
        *g += l2 * v;
    }
    let w2_start = h * d + h;
    for (g, &v) in grad[w2_start..w2_start + h].iter_mut().zip(w2) {
        *g += l2 * v;
    }
    (loss, grad)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    shape: MlpShape,
    members: Vec<Vec<f64>>,
    scaler: Standardizer,
}

impl Mlp {
    pub fn fit(x: &[Vec<f64>], y: &[bool], hidden: usize, cfg: &MlpConfig, seed: u64) -> Self {
        let shape = MlpShape {
            input: x[0].len(),
            hidden: hidden.max(1),
        };
        let scaler = if cfg.standardize {
            Standardizer::fit(x)
        } else {
            Standardizer::identity(shape.input)
        };
        let xs = scaler.apply_all(x);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..cfg.ensemble.max(1))
            .map(|_| {
                let mut best: Option<(f64, Vec<f64>)> = None;
                for _ in 0..cfg.restarts.max(1) {
                    let run = train_once(shape, &xs, y, cfg, &mut rng);
                    if best.as_ref().is_none_or(|b| run.0 < b.0) {
                        best = Some(run);
                    }
                }
                best.expect("at least one run").1
            })
            .collect();
        Mlp {
            shape,
            members,
            scaler,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let xs = self.scaler.apply(x);
        let mut hidden = vec![0.0; self.shape.hidden];
        let total: f64 = self
            .members
            .iter()
            .map(|p| sigmoid(forward(self.shape, p, &xs, &mut hidden)))
            .sum();
        total / self.members.len() as f64
    }
}

/// One Adam run from a fresh initialization. Returns the selection loss
/// (held-out when early stopping is active, training otherwise) and the
/// parameters.
fn train_once(
    shape: MlpShape,
    xs: &[Vec<f64>],
    y: &[bool],
    cfg: &MlpConfig,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let mut params = init_params(shape, rng);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.shuffle(rng);
    let n_val = (xs.len() as f64 * cfg.validation_fraction).round() as usize;
    let (val, mut train) = if n_val >= cfg.min_validation && n_val < xs.len() {
        (order[..n_val].to_vec(), order[n_val..].to_vec())
    } else {
        (Vec::new(), order)
    };

    let batch = cfg.batch_size.max(1).min(train.len());
    let steps_per_epoch = train.len().div_ceil(batch);
    let epochs = cfg.max_epochs.max(cfg.min_steps.div_ceil(steps_per_epoch));

    let mut adam = Adam::new(params.len(), cfg.learning_rate);
    let mut best = (f64::INFINITY, params.clone());
    let mut stale = 0;
    for _ in 0..epochs {
        train.shuffle(rng);
        for chunk in train.chunks(batch) {
            let (_, g) = batch_loss_and_grad(shape, &params, xs, y, chunk, cfg.l2);
            adam.step(&mut params, &g);
        }
        if !val.is_empty() {
            let (vl, _) = batch_loss_and_grad(shape, &params, xs, y, &val, 0.0);
            if vl < best.0 - 1e-9 {
                best = (vl, params.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
    }
    if val.is_empty() {
        let (loss, _) = batch_loss_and_grad(shape, &params, xs, y, &train, 0.0);
        (loss, params)
    } else {
        best
    }
}

/// He-uniform hidden weights, Glorot-uniform output weights, zero biases.
pub fn init_params<R: Rng>(shape: MlpShape, rng: &mut R) -> Vec<f64> {
    let mut p = Vec::with_capacity(shape.n_params());
    let a1 = (6.0 / shape.input as f64).sqrt();
    p.extend((0..shape.hidden * shape.input).map(|_| rng.random_range(-a1..a1)));
    p.extend(std::iter::repeat_n(0.0, shape.hidden));
    let a2 = (6.0 / (shape.hidden + 1) as f64).sqrt();
    p.extend((0..shape.hidden).map(|_| rng.random_range(-a2..a2)));
    p.push(0.0);
    p
}

struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}
