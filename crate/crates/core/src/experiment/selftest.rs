use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bregman::{self, DistanceGenerator, WeightDomain, WeightVector};
use crate::error::Result;
use crate::seeding::{rng_for, Stream};

/// Outcome of one property check over a batch of random cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfTestCheck {
    pub name: String,
    pub cases: usize,
    /// Largest violation seen; the check passes when it is at most `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SelfTestCheck {
    fn new(name: &str, cases: usize, worst: f64, tolerance: f64) -> Self {
        Self { name: name.into(), cases, worst, tolerance, passed: worst <= tolerance }
    }
}

const CASES: usize = 200;
const RADIUS: f64 = 0.2;

fn random_gradient(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn random_in_domain(rng: &mut ChaCha8Rng, domain: &WeightDomain) -> Result<WeightVector> {
    let p = WeightVector::random(rng, domain.m);
    match domain.restriction {
        bregman::Restriction::FullSimplex => Ok(p),
        bregman::Restriction::BallRestricted { radius } => {
            // Shrink toward the center until the point sits in the ball.
            let u = 1.0 / domain.m as f64;
            let dist = p.iter().map(|x| (x - u) * (x - u)).sum::<f64>().sqrt();
            let s = if dist > radius { 0.99 * radius / dist } else { 1.0 };
            WeightVector::from_positive(p.iter().map(|x| u + s * (x - u)).collect())
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Worst violation of the prox variational inequality
/// `<-g + grad psi(q) - grad psi(pi), z - q> >= 0` over sampled feasible `z`.
fn prox_inequality(rng: &mut ChaCha8Rng, gen: DistanceGenerator, domain: &WeightDomain) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let pi = random_in_domain(rng, domain)?;
        let g = random_gradient(rng, domain.m);
        let q = bregman::prox(gen, domain, &pi, &g)?;
        let (gq, gp) = (gen.gradient(&q), gen.gradient(&pi));
        let normal: Vec<f64> = (0..domain.m).map(|i| -g[i] + gq[i] - gp[i]).collect();
        for _ in 0..8 {
            let z = random_in_domain(rng, domain)?;
            let diff: Vec<f64> = z.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
            worst = worst.max(-dot(&normal, &diff));
        }
    }
    Ok(worst)
}

/// Runs the prox and divergence property suite with cases drawn from `seed`.
pub fn prox_selftest(seed: u64) -> Result<Vec<SelfTestCheck>> {
    let mut rng = rng_for(seed, Stream::Instance);
    let mut checks = Vec::new();

    // Closed-form KL step: g_i + ln p_i - ln pi_i is the same for every i.
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let m = rng.random_range(2..6);
        let pi = WeightVector::random(&mut rng, m);
        let g = random_gradient(&mut rng, m);
        let p = bregman::prox_simplex_kl(&pi, &g)?;
        let c: Vec<f64> = (0..m).map(|i| g[i] - p[i].ln() + pi[i].ln()).collect();
        let spread = c.iter().copied().fold(f64::NEG_INFINITY, f64::max) - c.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(spread);
    }
    checks.push(SelfTestCheck::new("kl-prox-optimality", CASES, worst, 1e-9));

    for m in [2, 3, 4] {
        let full = WeightDomain::full(m);
        let ball = WeightDomain::ball(m, RADIUS)?;
        for (gen, domain, label) in [
            (DistanceGenerator::SquaredEuclidean, full, "euclidean-projection-inequality"),
            (DistanceGenerator::SquaredEuclidean, ball, "euclidean-restricted-inequality"),
            (DistanceGenerator::NegativeEntropy, full, "kl-prox-inequality"),
            (DistanceGenerator::NegativeEntropy, ball, "kl-restricted-inequality"),
        ] {
            let worst = prox_inequality(&mut rng, gen, &domain)?;
            checks.push(SelfTestCheck::new(&format!("{label}/m={m}"), CASES, worst, 1e-7));
        }
    }

    for gen in [DistanceGenerator::NegativeEntropy, DistanceGenerator::SquaredEuclidean] {
        let (mut identity, mut convexity): (f64, f64) = (0.0, 0.0);
        for _ in 0..CASES {
            let m = rng.random_range(2..6);
            let [x, y, z] = [0, 1, 2].map(|_| WeightVector::random(&mut rng, m));
            identity = identity.max(bregman::three_point_residual(gen, &x, &y, &z)?.abs());
            let half_sq = 0.5 * x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            convexity = convexity.max(half_sq - gen.divergence(&x, &y)?);
        }
        let tag = match gen {
            DistanceGenerator::NegativeEntropy => "negative-entropy",
            DistanceGenerator::SquaredEuclidean => "squared-euclidean",
        };
        checks.push(SelfTestCheck::new(&format!("three-point-identity/{tag}"), CASES, identity, 1e-10));
        checks.push(SelfTestCheck::new(&format!("strong-convexity/{tag}"), CASES, convexity, 1e-12));
    }
    Ok(checks)
}
