use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bregman::WeightVector;
use crate::error::{Error, Result};
use crate::saddle::LossEvaluation;
use crate::seeding::{rng_for, Stream};

/// Source of minibatch estimates of `grad_theta L(theta, pi)`.
pub trait BatchOracle {
    /// Average of `batch` independent unbiased per-sample gradients at
    /// `(theta, pi)`. `exact` holds the full-batch evaluation at `theta`
    /// for oracles that perturb it.
    fn batch_gradient(&mut self, theta: &[f64], pi: &WeightVector, exact: &LossEvaluation, batch: usize) -> Result<Vec<f64>>;
}

/// Exact gradient plus i.i.d. `N(0, sigma^2 I)` noise per sample.
pub struct GaussianNoise {
    sigma: f64,
    rng: ChaCha8Rng,
}

impl GaussianNoise {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise level must be nonnegative, got {sigma}")));
        }
        Ok(Self { sigma, rng: rng_for(seed, Stream::Noise) })
    }
}

impl BatchOracle for GaussianNoise {
    fn batch_gradient(&mut self, _theta: &[f64], pi: &WeightVector, exact: &LossEvaluation, batch: usize) -> Result<Vec<f64>> {
        let mut g = exact.weighted_gradient(pi);
        let mut noise = vec![0.0; g.len()];
        for _ in 0..batch {
            for n in &mut noise {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                *n += z;
            }
        }
        let scale = self.sigma / batch as f64;
        g.iter_mut().zip(&noise).for_each(|(gi, n)| *gi += scale * n);
        Ok(g)
    }
}
