use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static GENERATION: AtomicU64 = AtomicU64::new(1);

fn next_generation() -> u64 {
    GENERATION.fetch_add(1, Ordering::Relaxed)
}

/// Hidden-layer nonlinearity. Both are smooth to all orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    Tanh,
    Sin,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sin => z.sin(),
        }
    }

    /// Value and first three derivatives at `z`. The third is needed when
    /// differentiating second input derivatives with respect to weights.
    pub(crate) fn derivatives(self, z: f64) -> [f64; 4] {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                let d1 = 1.0 - t * t;
                [t, d1, -2.0 * t * d1, d1 * (4.0 * t * t - 2.0 * d1)]
            }
            Activation::Sin => {
                let (s, c) = z.sin_cos();
                [s, c, -s, -c]
            }
        }
    }
}

/// Fully connected network with activated hidden layers and a linear output.
///
/// Parameters are stored flat, layer by layer: the row-major `fan_out x fan_in`
/// weight matrix followed by the `fan_out` biases.
#[derive(Debug, Clone)]
pub struct Mlp {
    widths: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
    generation: u64,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], activation: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        let mut offset = 0;
        for pair in widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut net.params[offset..offset + fan_in * fan_out] {
                *w = rng.random_range(-limit..limit);
            }
            offset += (fan_in + 1) * fan_out;
        }
        Ok(net)
    }

    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::invalid(format!("network widths must have at least two nonzero entries, got {widths:?}")));
        }
        let count = Self::param_count_for(widths);
        Ok(Self { widths: widths.to_vec(), activation, params: vec![0.0; count], generation: next_generation() })
    }

    pub fn from_params(widths: &[usize], activation: Activation, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch { expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn param_count_for(widths: &[usize]) -> usize {
        widths.windows(2).map(|p| (p[0] + 1) * p[1]).sum()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Changes on every parameter update; tapes remember it to detect staleness.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), got: params.len() });
        }
        self.params.copy_from_slice(params);
        self.generation = next_generation();
        Ok(())
    }

    /// Applies `f` to the parameter vector in place.
    pub fn update_params(&mut self, f: impl FnOnce(&mut [f64])) {
        f(&mut self.params);
        self.generation = next_generation();
    }

    pub(crate) fn layer_offset(&self, layer: usize) -> usize {
        Self::param_count_for(&self.widths[..=layer])
    }

    /// Weight matrix (`fan_out x fan_in`) and bias of `layer`.
    pub(crate) fn layer(&self, layer: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let (fan_in, fan_out) = (self.widths[layer], self.widths[layer + 1]);
        let start = self.layer_offset(layer);
        let w = ArrayView2::from_shape((fan_out, fan_in), &self.params[start..start + fan_in * fan_out])
            .expect("layer shape matches parameter layout");
        let b = ArrayView1::from(&self.params[start + fan_in * fan_out..start + (fan_in + 1) * fan_out]);
        (w, b)
    }

    /// Single-point forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = ArrayView2::from_shape((1, x.len()), x).expect("row view");
        Ok(self.forward_batch(batch)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass over the rows of `x`.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.ncols() });
        }
        let mut h = x.to_owned();
        for layer in 0..self.num_layers() {
            let (w, b) = self.layer(layer);
            let mut z = h.dot(&w.t());
            z += &b.insert_axis(Axis(0));
            if layer + 1 < self.num_layers() {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            h = z;
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_count_matches_layout() {
        let net = Mlp::zeros(&[2, 16, 16, 1], Activation::Tanh).unwrap();
        assert_eq!(net.param_count(), 3 * 16 + 17 * 16 + 17);
        assert_eq!(net.layer_offset(2), 3 * 16 + 17 * 16);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[3, 5, 2], Activation::Sin).unwrap();
        assert_eq!(net.forward(&[0.3, -1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn single_linear_layer_is_a_dot_product() {
        let net = Mlp::from_params(&[3, 1], Activation::Tanh, vec![1.0, -2.0, 0.5, 0.0]).unwrap();
        let out = net.forward(&[2.0, 1.0, 4.0]).unwrap();
        assert_eq!(out, vec![2.0]);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let net = Mlp::zeros(&[2, 4, 1], Activation::Tanh).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn seeded_tiny_net_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = Mlp::new(&[1, 4, 1], Activation::Tanh, &mut rng).unwrap();
        let p = net.params();
        // layout: w1[4], b1[4], w2[4], b2[1]
        let x = 0.3;
        let mut expected = p[12];
        for i in 0..4 {
            expected += p[8 + i] * (p[i] * x + p[4 + i]).tanh();
        }
        let got = net.forward(&[x]).unwrap()[0];
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn glorot_bounds_and_zero_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[2, 10, 1], Activation::Tanh, &mut rng).unwrap();
        let (w, b) = net.layer(0);
        let limit = (6.0f64 / 12.0).sqrt();
        assert!(w.iter().all(|v| v.abs() <= limit));
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn generation_changes_on_update() {
        let mut net = Mlp::zeros(&[1, 2, 1], Activation::Tanh).unwrap();
        let g0 = net.generation();
        net.update_params(|p| p[0] = 1.0);
        assert_ne!(net.generation(), g0);
        let clone = net.clone();
        assert_eq!(clone.generation(), net.generation());
    }

    #[test]
    fn tanh_derivative_table_matches_finite_differences() {
        for act in [Activation::Tanh, Activation::Sin] {
            let z = 0.37;
            let h = 1e-5;
            let d = act.derivatives(z);
            let up = act.derivatives(z + h);
            let down = act.derivatives(z - h);
            for k in 0..3 {
                let fd = (up[k] - down[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-8, "{act:?} order {}", k + 1);
            }
        }
    }
}
