//! Dense feed-forward network with hand-written reverse mode.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    #[inline]
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Affine layer; `weights` is row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layer_dims: Vec<usize>,
    layers: Vec<Layer>,
    hidden_activation: Activation,
    output_activation: Activation,
}

/// Parameter gradients with the same layout as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer pre-activations and outputs of one forward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.post.last().map_or(&[], Vec::as_slice)
    }
}

impl DenseNet {
    /// PyTorch-style init: weights and biases uniform in `+-1/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(
        layer_dims: &[usize],
        hidden_activation: Activation,
        output_activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_dims, hidden_activation, output_activation)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.in_dim as f64).sqrt();
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(layer_dims: &[usize], hidden_activation: Activation, output_activation: Activation) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::invalid("a network needs at least input and output dimensions"));
        }
        if layer_dims.contains(&0) {
            return Err(Error::invalid(format!(
                "layer dimensions must be positive: {layer_dims:?}"
            )));
        }
        let layers = layer_dims
            .windows(2)
            .map(|w| Layer {
                in_dim: w[0],
                out_dim: w[1],
                weights: vec![0.0; w[0] * w[1]],
                biases: vec![0.0; w[1]],
            })
            .collect();
        Ok(DenseNet {
            layer_dims: layer_dims.to_vec(),
            layers,
            hidden_activation,
            output_activation,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("at least two dims")
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut cache = ForwardCache::default();
        self.forward_cached(x, &mut cache)?;
        Ok(cache.post.pop().unwrap_or_default())
    }

    /// Forward pass that keeps everything backward needs. Reuses the
    /// cache's buffers.
    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(self.input_dim(), x.len()));
        }
        let n = self.layers.len();
        cache.input.clear();
        cache.input.extend_from_slice(x);
        cache.pre.resize_with(n, Vec::new);
        cache.post.resize_with(n, Vec::new);
        for (l, layer) in self.layers.iter().enumerate() {
            let act = self.activation_of(l);
            let (before, after) = cache.post.split_at_mut(l);
            let input: &[f64] = if l == 0 { &cache.input } else { &before[l - 1] };
            let pre = &mut cache.pre[l];
            let post = &mut after[0];
            pre.clear();
            post.clear();
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let z = layer.biases[o] + dot(row, input);
                pre.push(z);
                post.push(act.apply(z));
            }
        }
        Ok(())
    }

    /// Reverse pass for the scalar `upstream . f(x)` recorded in `cache`.
    /// Adds parameter gradients into `grads` and returns `d/dx`.
    pub fn backward_cached(&self, cache: &ForwardCache, upstream: &[f64], grads: &mut Gradients) -> Result<Vec<f64>> {
        if upstream.len() != self.output_dim() {
            return Err(Error::shape(self.output_dim(), upstream.len()));
        }
        if cache.post.len() != self.layers.len() {
            return Err(Error::invalid("forward cache does not belong to this network"));
        }
        let mut delta: Vec<f64> = Vec::with_capacity(self.output_dim());
        let last = self.layers.len() - 1;
        let out_act = self.activation_of(last);
        delta.extend(
            upstream
                .iter()
                .zip(&cache.pre[last])
                .zip(&cache.post[last])
                .map(|((g, &z), &y)| g * out_act.derivative(z, y)),
        );
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input: &[f64] = if l == 0 { &cache.input } else { &cache.post[l - 1] };
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for (o, &d) in delta.iter().enumerate() {
                gb[o] += d;
                if d != 0.0 {
                    let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (g, &xi) in row.iter_mut().zip(input) {
                        *g += d * xi;
                    }
                }
            }
            let mut prev = vec![0.0; layer.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
            }
            if l > 0 {
                let act = self.activation_of(l - 1);
                for ((p, &z), &y) in prev.iter_mut().zip(&cache.pre[l - 1]).zip(&cache.post[l - 1]) {
                    *p *= act.derivative(z, y);
                }
            }
            delta = prev;
        }
        Ok(delta)
    }

    /// Parameter gradients of `upstream . f(x)` and the input gradient.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let mut cache = ForwardCache::default();
        self.forward_cached(x, &mut cache)?;
        let mut grads = Gradients::zeros_like(self);
        let dx = self.backward_cached(&cache, upstream, &mut grads)?;
        Ok((grads, dx))
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::shape(self.num_params(), flat.len()));
        }
        let mut i = 0;
        for l in &mut self.layers {
            for p in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *p = flat[i];
                i += 1;
            }
        }
        Ok(())
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    fn params_iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    /// `self <- tau * online + (1 - tau) * self`.
    pub fn soft_update_from(&mut self, online: &DenseNet, tau: f64) {
        debug_assert_eq!(self.layer_dims, online.layer_dims);
        for (t, &o) in self.params_mut().zip(online.params_iter()) {
            *t = tau * o + (1.0 - tau) * *t;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params_iter().all(|p| p.is_finite())
    }

    /// `theta <- theta - lr * grad`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        for (p, g) in self.params_mut().zip(grads.iter()) {
            *p -= lr * g;
        }
    }

    pub(crate) fn zip_params_grads<'a>(
        &'a mut self,
        grads: &'a Gradients,
    ) -> impl Iterator<Item = (&'a mut f64, f64)> + 'a {
        self.params_mut().zip(grads.iter())
    }
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()))
            .copied()
    }

    /// Same ordering as [`DenseNet::params`].
    pub fn flat(&self) -> Vec<f64> {
        self.iter().collect()
    }

    pub fn scale(&mut self, k: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()).flatten() {
            *v *= k;
        }
    }

    pub fn fill_zero(&mut self) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()).flatten() {
            *v = 0.0;
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
