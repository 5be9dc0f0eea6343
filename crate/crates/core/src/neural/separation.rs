//! Reusing a batch `M` times versus one step at an `M`-times larger rate.

use super::net::{DenseNet, Gradients};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Separation {
    pub theta_smr: DenseNet,
    pub theta_scaled: DenseNet,
    /// Euclidean distance between the two parameter vectors.
    pub distance: f64,
    /// Gradients met along the SMR path, one per step.
    pub smr_grads: Vec<Gradients>,
}

/// Runs `M` plain SGD steps at rate `alpha` on a fixed loss, and a single
/// step at rate `M * alpha` from the same start.
///
/// The two agree only when the gradient does not change along the SMR
/// path, e.g. for losses linear in the parameters.
pub fn smr_vs_scaled_lr<F>(theta0: &DenseNet, grad: F, alpha: f64, m: usize) -> Result<Separation>
where
    F: Fn(&DenseNet) -> Result<Gradients>,
{
    if m < 1 {
        return Err(Error::invalid("SMR ratio M must be at least 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("learning rate must be positive, got {alpha}")));
    }
    let mut theta_smr = theta0.clone();
    let mut smr_grads = Vec::with_capacity(m);
    for _ in 0..m {
        let g = grad(&theta_smr)?;
        theta_smr.sgd_step(&g, alpha);
        smr_grads.push(g);
    }
    let mut theta_scaled = theta0.clone();
    theta_scaled.sgd_step(&grad(theta0)?, m as f64 * alpha);
    let distance = theta_smr
        .params()
        .iter()
        .zip(theta_scaled.params())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(Separation {
        theta_smr,
        theta_scaled,
        distance,
        smr_grads,
    })
}

/// Gradient of `(1/N) sum_j sum_k f(x_j)_k`. For a single identity layer
/// this does not depend on the parameters.
pub fn mean_output_grad(net: &DenseNet, inputs: &[Vec<f64>]) -> Result<Gradients> {
    if inputs.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let upstream = vec![1.0 / inputs.len() as f64; net.output_dim()];
    let mut total = Gradients::zeros_like(net);
    let mut cache = Default::default();
    for x in inputs {
        net.forward_cached(x, &mut cache)?;
        net.backward_cached(&cache, &upstream, &mut total)?;
    }
    Ok(total)
}
