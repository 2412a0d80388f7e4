use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bregman::WeightVector;
use crate::error::{Error, Result};
use crate::optim::BatchOracle;
use crate::saddle::LossEvaluation;
use crate::seeding::{rng_for, Stream};

/// How sample indices are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Cycle through the samples in order.
    Sequential,
    /// Independent uniform draws with replacement.
    Uniform,
}

/// A finite-sum view of a loss set: sample `n` of loss `i` has gradient
/// `grad L_i + e_{i,n}`, where the perturbations come in `(e, -e)` pairs so
/// that they cancel exactly over the full dataset.
pub struct FiniteSumNoise {
    /// `[sample][loss][coordinate]`
    perturbations: Vec<Vec<Vec<f64>>>,
    sampler: Sampler,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl FiniteSumNoise {
    pub fn new(m: usize, dim: usize, samples: usize, scale: f64, sampler: Sampler, seed: u64) -> Result<Self> {
        if samples == 0 || !samples.is_multiple_of(2) {
            return Err(Error::invalid(format!("sample count must be even and positive, got {samples}")));
        }
        let mut rng = rng_for(seed, Stream::Noise);
        let mut perturbations = Vec::with_capacity(samples);
        for _ in 0..samples / 2 {
            let e: Vec<Vec<f64>> =
                (0..m).map(|_| (0..dim).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); scale * z }).collect()).collect();
            let neg = e.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
            perturbations.push(e);
            perturbations.push(neg);
        }
        Ok(Self { perturbations, sampler, cursor: 0, rng: rng_for(seed, Stream::Sampling) })
    }

    pub fn samples(&self) -> usize {
        self.perturbations.len()
    }

    fn next_index(&mut self) -> usize {
        match self.sampler {
            Sampler::Sequential => {
                let i = self.cursor;
                self.cursor = (self.cursor + 1) % self.perturbations.len();
                i
            }
            Sampler::Uniform => self.rng.random_range(0..self.perturbations.len()),
        }
    }
}

impl BatchOracle for FiniteSumNoise {
    fn batch_gradient(&mut self, _theta: &[f64], pi: &WeightVector, exact: &LossEvaluation, batch: usize) -> Result<Vec<f64>> {
        let mut g = exact.weighted_gradient(pi);
        let mut shift = vec![0.0; g.len()];
        let mut sample = vec![0.0; g.len()];
        for _ in 0..batch {
            let n = self.next_index();
            // per-sample sum first, so paired samples cancel exactly
            sample.iter_mut().for_each(|s| *s = 0.0);
            for (w, e) in pi.iter().zip(&self.perturbations[n]) {
                sample.iter_mut().zip(e).for_each(|(s, ei)| *s += w * ei);
            }
            shift.iter_mut().zip(&sample).for_each(|(s, x)| *s += x);
        }
        g.iter_mut().zip(&shift).for_each(|(gi, s)| *gi += s / batch as f64);
        Ok(g)
    }
}
