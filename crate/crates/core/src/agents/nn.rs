//! Minimal multilayer perceptron with ELU hidden activations, a linear
//! output layer, and exact reverse-mode gradients. Parameters live in one
//! flat vector so the optimizer and checkpoints stay simple.

use rand::Rng;

pub fn elu(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

/// Derivative of ELU given the pre-activation.
pub fn elu_prime(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Feedforward network `dims[0] -> dims[1] -> ... -> dims.last()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    /// Concatenated `[W1, b1, W2, b2, ...]`; weights are row-major
    /// `[out][in]`.
    pub params: Vec<f64>,
}

/// Activations recorded during a forward pass, for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    /// Pre-activations per layer.
    zs: Vec<Vec<f64>>,
    /// Post-activations per layer (the last one is the network output).
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least one layer")
    }
}

impl Mlp {
    pub fn param_count_for(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Zero-initialized network.
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.len() >= 2);
        Mlp { dims: dims.to_vec(), params: vec![0.0; Self::param_count_for(dims)] }
    }

    /// Uniform Glorot initialization of weights; biases start at zero.
    pub fn init<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(dims);
        for l in 0..net.layer_count() {
            let (in_dim, out_dim) = (net.dims[l], net.dims[l + 1]);
            let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let (w_off, _) = net.offsets(l);
            for i in 0..in_dim * out_dim {
                net.params[w_off + i] = rng.gen_range(-limit..limit);
            }
        }
        net
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// (weight offset, bias offset) of layer `l` in the flat vector.
    fn offsets(&self, layer: usize) -> (usize, usize) {
        let mut off = 0;
        for l in 0..layer {
            off += self.dims[l] * self.dims[l + 1] + self.dims[l + 1];
        }
        (off, off + self.dims[layer] * self.dims[layer + 1])
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut cache = self.forward_cached(input);
        cache.activations.pop().expect("at least one layer")
    }

    pub fn forward_cached(&self, input: &[f64]) -> ForwardCache {
        assert_eq!(input.len(), self.input_dim());
        let last = self.layer_count() - 1;
        let mut a = input.to_vec();
        let mut zs = Vec::with_capacity(self.layer_count());
        let mut activations = Vec::with_capacity(self.layer_count());
        for l in 0..self.layer_count() {
            let (in_dim, out_dim) = (self.dims[l], self.dims[l + 1]);
            let (w_off, b_off) = self.offsets(l);
            let mut z = vec![0.0; out_dim];
            for i in 0..out_dim {
                let row = &self.params[w_off + i * in_dim..w_off + (i + 1) * in_dim];
                let mut acc = self.params[b_off + i];
                for (w, x) in row.iter().zip(a.iter()) {
                    acc += w * x;
                }
                z[i] = acc;
            }
            let out: Vec<f64> =
                if l == last { z.clone() } else { z.iter().map(|&v| elu(v)).collect() };
            zs.push(z);
            activations.push(out.clone());
            a = out;
        }
        ForwardCache { input: input.to_vec(), zs, activations }
    }

    /// Gradients of a scalar loss with respect to every parameter, given
    /// the loss gradient at the network output. Accumulates into `grads`.
    pub fn backward_into(&self, cache: &ForwardCache, output_grad: &[f64], grads: &mut [f64]) {
        assert_eq!(grads.len(), self.params.len());
        assert_eq!(output_grad.len(), self.output_dim());
        let mut delta = output_grad.to_vec();
        for l in (0..self.layer_count()).rev() {
            let (in_dim, out_dim) = (self.dims[l], self.dims[l + 1]);
            let (w_off, b_off) = self.offsets(l);
            let a_prev: &[f64] =
                if l == 0 { &cache.input } else { &cache.activations[l - 1] };
            for i in 0..out_dim {
                grads[b_off + i] += delta[i];
                let row = &mut grads[w_off + i * in_dim..w_off + (i + 1) * in_dim];
                for (g, x) in row.iter_mut().zip(a_prev.iter()) {
                    *g += delta[i] * x;
                }
            }
            if l > 0 {
                let mut prev_delta = vec![0.0; in_dim];
                for i in 0..out_dim {
                    let row = &self.params[w_off + i * in_dim..w_off + (i + 1) * in_dim];
                    for (j, w) in row.iter().enumerate() {
                        prev_delta[j] += delta[i] * w;
                    }
                }
                for (d, z) in prev_delta.iter_mut().zip(cache.zs[l - 1].iter()) {
                    *d *= elu_prime(*z);
                }
                delta = prev_delta;
            }
        }
    }

    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Vec<f64> {
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(cache, output_grad, &mut grads);
        grads
    }

    /// True when every parameter is finite.
    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}
