//! Skip-gram negative-sampling objective for a single (center, output) pair.

use num_traits::Float;

pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<F: Float>(z: F) -> F {
    z.max(F::zero()) + (-z.abs()).exp().ln_1p()
}

/// `−[y·ln σ(s) + (1−y)·ln σ(−s)]` for score `s` and label `y`.
pub fn pair_loss<F: Float>(score: F, label: bool) -> F {
    if label {
        softplus(-score)
    } else {
        softplus(score)
    }
}

pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Accumulates the center-vector step into `center_grad` and applies the
/// output-vector step in place. Returns the loss before the update.
#[inline]
pub fn accumulate_pair<F: Float>(
    center: &[F],
    output: &mut [F],
    center_grad: &mut [F],
    label: bool,
    lr: F,
) -> F {
    let score = dot(center, output);
    let target = if label { F::one() } else { F::zero() };
    let g = (target - sigmoid(score)) * lr;
    for ((cg, o), &c) in center_grad.iter_mut().zip(output.iter_mut()).zip(center) {
        *cg = *cg + g * *o;
        *o = *o + g * c;
    }
    pair_loss(score, label)
}

/// One gradient step on both vectors for a positive (`label = true`) or
/// negative pair. Returns the loss before the step.
pub fn sgns_pair_update<F: Float>(center: &mut [F], output: &mut [F], label: bool, lr: F) -> F {
    assert_eq!(center.len(), output.len(), "vectors must share a dimension");
    let mut grad = vec![F::zero(); center.len()];
    let loss = accumulate_pair(center, output, &mut grad, label, lr);
    for (c, g) in center.iter_mut().zip(&grad) {
        *c = *c + *g;
    }
    loss
}
