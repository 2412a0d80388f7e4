use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::analysis::restricted_smoothness;
use crate::bregman::{DistanceGenerator, Restriction, WeightDomain};
use crate::error::{Error, Result};
use crate::saddle::{LossEvaluation, LossSet, SaddleProblem, SmoothnessInfo};
use crate::seeding::{rng_for, Stream};

/// `L_i(theta) = 0.5 theta' A_i theta + b_i' theta + c_i` with symmetric `A_i`
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticLosses {
    pub dim: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl QuadraticLosses {
    fn matvec(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.a[i].chunks_exact(self.dim).map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
    }

    pub fn value_and_gradient(&self, i: usize, theta: &[f64]) -> (f64, Vec<f64>) {
        let ax = self.matvec(i, theta);
        let quad: f64 = ax.iter().zip(theta).map(|(a, t)| a * t).sum();
        let lin: f64 = self.b[i].iter().zip(theta).map(|(b, t)| b * t).sum();
        let grad = ax.iter().zip(&self.b[i]).map(|(a, b)| a + b).collect();
        (0.5 * quad + lin + self.c[i], grad)
    }
}

impl LossSet for QuadraticLosses {
    fn len(&self) -> usize {
        self.c.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, theta: &[f64]) -> Result<LossEvaluation> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: theta.len() });
        }
        let (values, gradients) = (0..self.len()).map(|i| self.value_and_gradient(i, theta)).unzip();
        Ok(LossEvaluation { values, gradients })
    }
}

/// Generation parameters for a [`QuadraticInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticSpec {
    pub dim: usize,
    pub m: usize,
    pub lambda: f64,
    /// Eigenvalues of every `A_i` are drawn uniformly from this range; a
    /// negative lower end makes the losses nonconvex.
    pub spectrum: (f64, f64),
    pub generator: DistanceGenerator,
    pub restriction: Restriction,
    /// Standard deviation of the entries of `b_i`.
    pub offset_scale: f64,
    /// `c_i` uniform in `[-shift, shift]`.
    pub shift: f64,
    /// Standard deviation of the entries of the start point.
    pub start_scale: f64,
    /// Radius of the ball around the start point over which constants hold.
    pub region_radius: f64,
    /// Use the same `(A, b, c)` for every component.
    pub identical: bool,
}

impl Default for QuadraticSpec {
    fn default() -> Self {
        Self {
            dim: 10,
            m: 2,
            lambda: 1.0,
            spectrum: (0.5, 1.0),
            generator: DistanceGenerator::NegativeEntropy,
            restriction: Restriction::FullSimplex,
            offset_scale: 0.1,
            shift: 0.0,
            start_scale: 0.1,
            region_radius: 0.5,
            identical: false,
        }
    }
}

/// A generated problem together with its start point and the constants that
/// hold on the ball `||theta - theta0|| <= region_radius`.
pub struct QuadraticInstance {
    pub problem: SaddleProblem,
    pub info: SmoothnessInfo,
    pub losses: QuadraticLosses,
    pub theta0: Vec<f64>,
    pub region_radius: f64,
    /// Lower bound on every coordinate of the best response over the region.
    pub min_weight: f64,
}

impl QuadraticInstance {
    pub fn in_region(&self, theta: &[f64]) -> bool {
        distance(theta, &self.theta0) <= self.region_radius
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Random orthogonal matrix (columns) by Gram-Schmidt on Gaussian vectors.
fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= dot * qi);
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            v.iter_mut().for_each(|x| *x /= len);
            basis.push(v);
        }
    }
    basis
}

impl QuadraticSpec {
    pub fn build(&self, seed: u64) -> Result<QuadraticInstance> {
        let (lo, hi) = self.spectrum;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid(format!("empty spectrum range [{lo}, {hi}]")));
        }
        if self.dim == 0 || self.m < 2 {
            return Err(Error::invalid(format!("need dim >= 1 and M >= 2, got dim={} M={}", self.dim, self.m)));
        }
        if !(self.lambda > 0.0 && self.region_radius > 0.0) {
            return Err(Error::invalid("lambda and region radius must be positive"));
        }
        let n = self.dim;
        let mut rng = rng_for(seed, Stream::Instance);
        let gen_component = |rng: &mut rand_chacha::ChaCha8Rng| {
            let q = random_orthogonal(rng, n);
            let eig: Vec<f64> = (0..n).map(|_| if lo == hi { lo } else { rng.random_range(lo..hi) }).collect();
            let mut a = vec![0.0; n * n];
            for r in 0..n {
                for c in 0..n {
                    a[r * n + c] = (0..n).map(|k| q[k][r] * eig[k] * q[k][c]).sum();
                }
            }
            // exact symmetry
            for r in 0..n {
                for c in 0..r {
                    let s = 0.5 * (a[r * n + c] + a[c * n + r]);
                    a[r * n + c] = s;
                    a[c * n + r] = s;
                }
            }
            let spectral = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            let b: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut *rng);
                    self.offset_scale * z
                })
                .collect();
            let c = if self.shift > 0.0 { rng.random_range(-self.shift..=self.shift) } else { 0.0 };
            (a, b, c, spectral)
        };
        let mut parts: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = Vec::with_capacity(self.m);
        for i in 0..self.m {
            if self.identical && i > 0 {
                let first = parts[0].clone();
                parts.push(first);
            } else {
                parts.push(gen_component(&mut rng));
            }
        }
        let theta0: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                self.start_scale * z
            })
            .collect();
        let spectral: Vec<f64> = parts.iter().map(|p| p.3).collect();
        let losses = QuadraticLosses {
            dim: n,
            a: parts.iter().map(|p| p.0.clone()).collect(),
            b: parts.iter().map(|p| p.1.clone()).collect(),
            c: parts.iter().map(|p| p.2).collect(),
        };

        // Bounds over the ball of radius r around theta0.
        let r = self.region_radius;
        let mut grad_bound = Vec::with_capacity(self.m);
        let mut value_range = Vec::with_capacity(self.m);
        for (i, &s) in spectral.iter().enumerate() {
            let (v0, g0) = losses.value_and_gradient(i, &theta0);
            let g = norm(&g0);
            grad_bound.push(g + s * r);
            let spread = g * r + 0.5 * s * r * r;
            value_range.push((v0 - spread, v0 + spread));
        }
        let top = value_range.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let bottom = value_range.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let domain = match self.restriction {
            Restriction::FullSimplex => WeightDomain::full(self.m),
            Restriction::BallRestricted { radius } => WeightDomain::ball(self.m, radius)?,
        };
        let reference_min = 1.0 / self.m as f64;
        let (pi_block, min_weight, l_pi) = match (self.generator, self.restriction) {
            (DistanceGenerator::SquaredEuclidean, _) => (self.lambda, 0.0, self.lambda),
            (DistanceGenerator::NegativeEntropy, Restriction::FullSimplex) => {
                let p_min = reference_min * (-(top - bottom) / self.lambda).exp();
                (self.lambda / p_min, p_min, self.lambda / p_min)
            }
            (DistanceGenerator::NegativeEntropy, Restriction::BallRestricted { radius }) => {
                let rs = restricted_smoothness(self.lambda, self.m, radius)?;
                (rs.l_pi, rs.a_min, rs.l_pi)
            }
        };
        let cross = grad_bound.iter().map(|g| g * g).sum::<f64>().sqrt();
        let theta_block = spectral.iter().fold(0.0f64, |m, s| m.max(*s));
        let l = theta_block.max(pi_block) + cross;
        let info = SmoothnessInfo::new(l, self.lambda)?.with_l_pi(l_pi)?;
        let problem = SaddleProblem::new(Box::new(losses.clone()), self.lambda)?
            .with_generator(self.generator)
            .with_domain(domain)?;
        Ok(QuadraticInstance { problem, info, losses, theta0, region_radius: r, min_weight })
    }
}

/// Instance with default shape parameters and the given size, regularization
/// and eigenvalue range.
pub fn make_quadratic(seed: u64, dim: usize, m: usize, lambda: f64, spectrum: (f64, f64)) -> Result<QuadraticInstance> {
    QuadraticSpec { dim, m, lambda, spectrum, ..QuadraticSpec::default() }.build(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::WeightVector;
    use crate::optim::{bgda_run, theoretical_stepsizes, OptimizerConfig, OptimizerState, StepsizeMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_deterministic_and_symmetric() {
        let a = make_quadratic(3, 6, 3, 0.5, (-0.5, 1.0)).unwrap();
        let b = make_quadratic(3, 6, 3, 0.5, (-0.5, 1.0)).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.theta0, b.theta0);
        for m in &a.losses.a {
            for r in 0..6 {
                for c in 0..6 {
                    assert_eq!(m[r * 6 + c], m[c * 6 + r]);
                }
            }
        }
    }

    #[test]
    fn empty_spectrum_is_rejected() {
        assert!(make_quadratic(0, 4, 2, 1.0, (1.0, 0.5)).is_err());
        assert!(make_quadratic(0, 4, 1, 1.0, (0.5, 1.0)).is_err());
    }

    #[test]
    fn identical_components_keep_reference_weights() {
        let inst = QuadraticSpec { identical: true, ..QuadraticSpec::default() }.build(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
            let best = inst.problem.best_response(&theta).unwrap();
            assert!(best.iter().all(|p| (p - 0.5).abs() < 1e-15));
        }
    }

    #[test]
    fn reported_constant_bounds_sampled_gradient_differences() {
        for (seed, gen) in [(5, DistanceGenerator::NegativeEntropy), (6, DistanceGenerator::SquaredEuclidean)] {
            let inst = QuadraticSpec { generator: gen, m: 3, shift: 0.2, ..QuadraticSpec::default() }.build(seed).unwrap();
            let p = &inst.problem;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sample_point = |rng: &mut ChaCha8Rng| {
                let mut dir: Vec<f64> = (0..10).map(|_| StandardNormal.sample(rng)).collect();
                let len = norm(&dir);
                let rad = inst.region_radius * rng.random::<f64>().powf(0.1);
                dir.iter_mut().zip(&inst.theta0).for_each(|(d, t)| *d = t + rad * *d / len);
                // weights on the simplex with every coordinate above the bound
                let floor = inst.min_weight;
                let raw = WeightVector::random(rng, 3);
                let pi: Vec<f64> = raw.iter().map(|w| floor + (1.0 - 3.0 * floor) * w).collect();
                (dir, WeightVector::new(pi).unwrap())
            };
            let joint = |theta: &[f64], pi: &WeightVector| {
                let mut g = p.grad_theta(theta, pi).unwrap();
                g.extend(p.grad_pi(theta, pi).unwrap());
                g
            };
            let mut worst = 0.0f64;
            for _ in 0..10_000 {
                let (t1, p1) = sample_point(&mut rng);
                let (t2, p2) = sample_point(&mut rng);
                let dz = (distance(&t1, &t2).powi(2) + distance(&p1, &p2).powi(2)).sqrt();
                let dg = distance(&joint(&t1, &p1), &joint(&t2, &p2));
                worst = worst.max(dg / dz);
            }
            assert!(worst <= inst.info.l, "{gen:?}: observed {worst} > L {}", inst.info.l);
        }
    }

    #[test]
    fn positive_definite_instance_converges() {
        let spec = QuadraticSpec {
            generator: DistanceGenerator::SquaredEuclidean,
            spectrum: (0.9, 1.0),
            offset_scale: 0.005,
            start_scale: 0.01,
            region_radius: 0.05,
            ..QuadraticSpec::default()
        };
        let inst = spec.build(8).unwrap();
        let (gp, gt) = theoretical_stepsizes(&inst.info, StepsizeMode::General);
        let cfg = OptimizerConfig::constant(gt, gp, 20_000);
        let trace = bgda_run(&inst.problem, OptimizerState::new(inst.theta0.clone(), WeightVector::uniform(2)), &cfg).unwrap();
        let last = trace.records.last().unwrap().grad_phi_norm.unwrap();
        assert!(last < 1e-6, "final stationarity {last}");
        assert!(inst.in_region(&trace.final_state.unwrap().theta));
    }
}
