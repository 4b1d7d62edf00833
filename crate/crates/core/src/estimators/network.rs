use crate::rng::Rng;

/// Exact GELU, `x·Φ(x)`.
fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2))
}

fn gelu_grad(x: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    cdf + x * pdf
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    /// Offset of the row-major `fan_out × fan_in` weights; biases follow.
    offset: usize,
}

/// Fully connected GELU network with a linear output layer. All parameters
/// live in one flat vector so the optimizer can treat them uniformly.
#[derive(Debug, Clone)]
pub struct GeneratorNetwork {
    layers: Vec<Layer>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `inputs[l]` feeds layer `l`; `pre[l]` is its pre-activation.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl GeneratorNetwork {
    /// Xavier-uniform weights, zero biases.
    pub fn new(widths: &[usize], rng: &mut Rng) -> Self {
        assert!(widths.len() >= 2, "network needs an input and an output width");
        let mut layers = Vec::with_capacity(widths.len() - 1);
        let mut params = Vec::new();
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            layers.push(Layer { fan_in, fan_out, offset: params.len() });
            params.extend((0..fan_in * fan_out).map(|_| bound * (2.0 * rng.uniform() - 1.0)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self { layers, params }
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn output_len(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, z: &[f64]) -> (Vec<f64>, ForwardCache) {
        assert_eq!(z.len(), self.input_len());
        let last = self.layers.len() - 1;
        let mut cache = ForwardCache { inputs: Vec::new(), pre: Vec::new() };
        let mut x = z.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let w = &self.params[layer.offset..layer.offset + layer.fan_in * layer.fan_out];
            let b = &self.params[layer.offset + layer.fan_in * layer.fan_out..][..layer.fan_out];
            let pre: Vec<f64> = w
                .chunks_exact(layer.fan_in)
                .zip(b)
                .map(|(row, bias)| bias + row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>())
                .collect();
            let out = if l == last {
                pre.clone()
            } else {
                pre.iter().map(|&v| gelu(v)).collect()
            };
            cache.inputs.push(std::mem::replace(&mut x, out));
            cache.pre.push(pre);
        }
        (x, cache)
    }

    /// Gradient of a scalar with respect to every parameter, given its
    /// gradient with respect to the outputs.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64]) -> Vec<f64> {
        assert_eq!(grad_out.len(), self.output_len());
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = grad_out.to_vec();
        let last = self.layers.len() - 1;
        for l in (0..self.layers.len()).rev() {
            let layer = self.layers[l];
            if l != last {
                for (d, &p) in delta.iter_mut().zip(&cache.pre[l]) {
                    *d *= gelu_grad(p);
                }
            }
            let input = &cache.inputs[l];
            let nw = layer.fan_in * layer.fan_out;
            let (gw, gb) = grads[layer.offset..layer.offset + nw + layer.fan_out].split_at_mut(nw);
            for (o, &d) in delta.iter().enumerate() {
                gb[o] = d;
                for (g, &v) in gw[o * layer.fan_in..][..layer.fan_in].iter_mut().zip(input) {
                    *g = d * v;
                }
            }
            if l > 0 {
                let w = &self.params[layer.offset..layer.offset + nw];
                let mut next = vec![0.0; layer.fan_in];
                for (o, &d) in delta.iter().enumerate() {
                    for (n, &a) in next.iter_mut().zip(&w[o * layer.fan_in..][..layer.fan_in]) {
                        *n += a * d;
                    }
                }
                delta = next;
            }
        }
        grads
    }
}

/// Adam with bias-corrected moments.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}
