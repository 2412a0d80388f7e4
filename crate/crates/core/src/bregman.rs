//! Distance-generating functions, Bregman divergences and proximal maps over
//! the loss-weight domain (the probability simplex, optionally intersected
//! with a Euclidean ball around its center).

use std::ops::Deref;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest coordinate a weight vector may carry after a prox step.
pub const COORD_FLOOR: f64 = 1e-12;

/// Tolerance on `sum(pi) == 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Tolerance on the ball constraint of the restricted domain.
pub const BALL_TOL: f64 = 1e-10;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates that `coords` is a nonnegative vector summing to one.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("weight vector must have at least one coordinate"));
        }
        if let Some((i, v)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("weight coordinate {i} is {v}, expected >= 0")));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL * coords.len() as f64 {
            return Err(Error::invalid(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(coords))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// Normalizes a positive vector onto the simplex.
    pub fn from_positive(mut coords: Vec<f64>) -> Result<Self> {
        let sum: f64 = coords.iter().sum();
        if !(sum.is_finite() && sum > 0.0) || coords.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numeric(format!("cannot normalize {coords:?} onto the simplex")));
        }
        coords.iter_mut().for_each(|v| *v /= sum);
        Ok(Self(coords))
    }

    /// Uniform (flat Dirichlet) sample from the simplex.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Self {
        loop {
            let draws: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
            if let Ok(w) = Self::from_positive(draws) {
                return w;
            }
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Smallest coordinate.
    pub fn min_coord(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Normalizes, raises coordinates to at least [`COORD_FLOOR`] and takes
    /// the added mass from the largest coordinate.
    pub(crate) fn floored(coords: Vec<f64>) -> Result<Self> {
        let mut w = Self::from_positive(coords)?.0;
        let mut added = 0.0;
        for v in w.iter_mut().filter(|v| **v < COORD_FLOOR) {
            added += COORD_FLOOR - *v;
            *v = COORD_FLOOR;
        }
        if added > 0.0 {
            let top = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
            w[top] -= added;
        }
        Ok(Self(w))
    }

    fn require_floor(&self) -> Result<()> {
        match self.0.iter().enumerate().find(|(_, v)| **v < COORD_FLOOR) {
            Some((index, &value)) => Err(Error::DegenerateReference { index, value }),
            None => Ok(()),
        }
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The 1-strongly convex function inducing the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceGenerator {
    /// `psi(p) = sum p_i ln p_i`; its divergence on the simplex is KL.
    #[default]
    NegativeEntropy,
    /// `psi(p) = 0.5 |p|^2`.
    SquaredEuclidean,
}

impl DistanceGenerator {
    pub fn value(self, p: &[f64]) -> f64 {
        match self {
            DistanceGenerator::NegativeEntropy => {
                p.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum()
            }
            DistanceGenerator::SquaredEuclidean => 0.5 * p.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    pub fn gradient(self, p: &[f64]) -> Vec<f64> {
        match self {
            DistanceGenerator::NegativeEntropy => p.iter().map(|v| v.ln() + 1.0).collect(),
            DistanceGenerator::SquaredEuclidean => p.to_vec(),
        }
    }

    /// `D(p, q) = psi(p) - psi(q) - <grad psi(q), p - q>`.
    pub fn divergence(self, p: &WeightVector, q: &WeightVector) -> Result<f64> {
        check_same_len(p, q)?;
        if self == DistanceGenerator::NegativeEntropy {
            q.require_floor()?;
        }
        Ok(self.divergence_unchecked(p, q))
    }

    /// Divergence without domain validation; `q` must be positive for KL.
    pub(crate) fn divergence_unchecked(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            DistanceGenerator::NegativeEntropy => p
                .iter()
                .zip(q)
                .filter(|(pi, _)| **pi > 0.0)
                .map(|(pi, qi)| pi * (pi / qi).ln())
                .sum::<f64>()
                .max(0.0),
            DistanceGenerator::SquaredEuclidean => {
                0.5 * p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
        }
    }
}

/// Free function form of [`DistanceGenerator::divergence`].
pub fn divergence(gen: DistanceGenerator, p: &WeightVector, q: &WeightVector) -> Result<f64> {
    gen.divergence(p, q)
}

/// Which subset of the simplex the weights live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Restriction {
    FullSimplex,
    /// Simplex intersected with the ball of this radius around the uniform vector.
    BallRestricted { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightDomain {
    pub m: usize,
    pub restriction: Restriction,
}

impl WeightDomain {
    pub fn full(m: usize) -> Self {
        Self { m, restriction: Restriction::FullSimplex }
    }

    pub fn ball(m: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { m, restriction: Restriction::BallRestricted { radius } })
    }

    pub fn center(&self) -> WeightVector {
        WeightVector::uniform(self.m)
    }

    pub fn contains(&self, p: &WeightVector) -> bool {
        if p.len() != self.m {
            return false;
        }
        match self.restriction {
            Restriction::FullSimplex => true,
            Restriction::BallRestricted { radius } => distance_to_center(p) <= radius + BALL_TOL,
        }
    }

    pub fn check(&self, p: &WeightVector) -> Result<()> {
        if p.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: p.len() });
        }
        if !self.contains(p) {
            return Err(Error::invalid("weight vector lies outside the restricted ball"));
        }
        Ok(())
    }
}

fn distance_to_center(p: &[f64]) -> f64 {
    let c = 1.0 / p.len() as f64;
    p.iter().map(|v| (v - c) * (v - c)).sum::<f64>().sqrt()
}

fn check_same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    Ok(())
}

fn check_gradient(pi_t: &[f64], g: &[f64]) -> Result<()> {
    check_same_len(pi_t, g)?;
    if let Some((i, v)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Numeric(format!("gradient coordinate {i} is {v}")));
    }
    Ok(())
}

/// Closed-form KL prox on the full simplex:
/// `argmin_p -<g, p> + KL(p, pi_t)`, i.e. `p_i ∝ pi_t_i * exp(g_i)`.
pub fn prox_simplex_kl(pi_t: &WeightVector, scaled_grad: &[f64]) -> Result<WeightVector> {
    check_gradient(pi_t, scaled_grad)?;
    pi_t.require_floor()?;
    let logits: Vec<f64> = pi_t.iter().zip(scaled_grad).map(|(p, g)| p.ln() + g).collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    WeightVector::floored(logits.iter().map(|l| (l - top).exp()).collect())
}

/// KL prox over the simplex intersected with the ball `|p - U| <= radius`.
///
/// When the unrestricted prox lands inside the ball it is returned as is.
/// Otherwise the ball multiplier `nu` is found by bisection; for fixed `nu`
/// the stationarity condition `ln p_i + nu p_i = c_i - mu` is solved per
/// coordinate by Newton and the normalizer `mu` by a safeguarded Newton.
pub fn prox_restricted(pi_t: &WeightVector, scaled_grad: &[f64], radius: f64) -> Result<WeightVector> {
    check_gradient(pi_t, scaled_grad)?;
    pi_t.require_floor()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
    }
    let free = prox_simplex_kl(pi_t, scaled_grad)?;
    if distance_to_center(&free) <= radius {
        return Ok(free);
    }

    let m = pi_t.len() as f64;
    let base: Vec<f64> = pi_t.iter().zip(scaled_grad).map(|(p, g)| p.ln() + g).collect();
    let at = |nu: f64| -> Result<(Vec<f64>, f64)> {
        let c: Vec<f64> = base.iter().map(|b| b + nu / m).collect();
        let p = ball_penalized_point(&c, nu)?;
        let d = distance_to_center(&p);
        Ok((p, d))
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_point = at(hi)?;
    let mut grow = 0;
    while hi_point.1 > radius {
        lo = hi;
        hi *= 4.0;
        hi_point = at(hi)?;
        grow += 1;
        if grow > BISECTION_MAX_ITER {
            return Err(Error::SolverFailure {
                what: "restricted prox bracket",
                residual: hi_point.1 - radius,
            });
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if radius - hi_point.1 <= 1e-12 || hi - lo <= 1e-15 * hi {
            return WeightVector::floored(hi_point.0);
        }
        let mid = 0.5 * (lo + hi);
        let mid_point = at(mid)?;
        if mid_point.1 > radius {
            lo = mid;
        } else {
            hi = mid;
            hi_point = mid_point;
        }
    }
    Err(Error::SolverFailure { what: "restricted prox bisection", residual: radius - hi_point.1 })
}

/// Solves `y + nu e^y = b` for `y` (the log of one coordinate).
fn solve_log_coordinate(b: f64, nu: f64) -> Result<f64> {
    if nu == 0.0 {
        return Ok(b);
    }
    // h(y) = y + nu e^y - b is increasing and convex, so Newton started at an
    // upper bound of the root decreases monotonically onto it.
    let lo = (b - nu - 1.0).min(0.0);
    let mut y = b.min(((b - lo) / nu).ln());
    for _ in 0..NEWTON_MAX_ITER {
        let e = nu * y.exp();
        let step = (y + e - b) / (1.0 + e);
        y -= step;
        if step.abs() <= NEWTON_TOL * y.abs().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::SolverFailure { what: "coordinate Newton solve", residual: y + nu * y.exp() - b })
}

/// Minimizer over the simplex of `sum p_i (ln p_i - c_i) + (nu/2) |p|^2`.
fn ball_penalized_point(c: &[f64], nu: f64) -> Result<Vec<f64>> {
    let coords = |mu: f64| -> Result<Vec<f64>> {
        c.iter().map(|ci| solve_log_coordinate(ci - mu, nu).map(f64::exp)).collect()
    };
    let top = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + c.iter().map(|ci| (ci - top).exp()).sum::<f64>().ln();
    // Excess mass is nonpositive at `hi` and nonnegative at `lo`.
    let (mut lo, mut hi) = (top - nu, lse);
    let mut mu = hi;
    for _ in 0..BISECTION_MAX_ITER {
        let p = coords(mu)?;
        let excess: f64 = p.iter().sum::<f64>() - 1.0;
        if excess.abs() <= 1e-15 * c.len() as f64 || hi - lo <= 1e-15 * mu.abs().max(1.0) {
            let sum: f64 = p.iter().sum();
            return Ok(p.into_iter().map(|v| v / sum).collect());
        }
        if excess > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let slope: f64 = -p.iter().map(|x| x / (1.0 + nu * x)).sum::<f64>();
        let newton = mu - excess / slope;
        mu = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::SolverFailure { what: "simplex normalizer", residual: f64::NAN })
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Euclidean projection onto the simplex intersected with `|p - U| <= radius`.
pub fn project_simplex_ball(v: &[f64], radius: f64) -> Result<Vec<f64>> {
    let free = project_simplex(v);
    if distance_to_center(&free) <= radius {
        return Ok(free);
    }
    let c = 1.0 / v.len() as f64;
    // argmin |p - v|^2/2 + nu |p - U|^2/2 over the simplex.
    let at = |nu: f64| {
        let shifted: Vec<f64> = v.iter().map(|x| (x + nu * c) / (1.0 + nu)).collect();
        let p = project_simplex(&shifted);
        let d = distance_to_center(&p);
        (p, d)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut hi_point = at(hi);
    let mut grow = 0;
    while hi_point.1 > radius {
        lo = hi;
        hi *= 4.0;
        hi_point = at(hi);
        grow += 1;
        if grow > BISECTION_MAX_ITER {
            return Err(Error::SolverFailure { what: "ball projection bracket", residual: hi_point.1 - radius });
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if radius - hi_point.1 <= 1e-12 || hi - lo <= 1e-15 * hi {
            return Ok(hi_point.0);
        }
        let mid = 0.5 * (lo + hi);
        let mid_point = at(mid);
        if mid_point.1 > radius {
            lo = mid;
        } else {
            hi = mid;
            hi_point = mid_point;
        }
    }
    Err(Error::SolverFailure { what: "ball projection bisection", residual: radius - hi_point.1 })
}

/// One Bregman prox step `argmin_{p in domain} -<g, p> + D(p, pi_t)` for any
/// supported generator/domain pair.
pub fn prox(
    gen: DistanceGenerator,
    domain: &WeightDomain,
    pi_t: &WeightVector,
    scaled_grad: &[f64],
) -> Result<WeightVector> {
    domain.check(pi_t)?;
    match (gen, domain.restriction) {
        (DistanceGenerator::NegativeEntropy, Restriction::FullSimplex) => prox_simplex_kl(pi_t, scaled_grad),
        (DistanceGenerator::NegativeEntropy, Restriction::BallRestricted { radius }) => {
            prox_restricted(pi_t, scaled_grad, radius)
        }
        (DistanceGenerator::SquaredEuclidean, restriction) => {
            check_gradient(pi_t, scaled_grad)?;
            let shifted: Vec<f64> = pi_t.iter().zip(scaled_grad).map(|(p, g)| p + g).collect();
            let p = match restriction {
                Restriction::FullSimplex => project_simplex(&shifted),
                Restriction::BallRestricted { radius } => project_simplex_ball(&shifted, radius)?,
            };
            WeightVector::from_positive(p)
        }
    }
}

/// `D(x,y) - D(x,z) - D(z,y) - <grad psi(z) - grad psi(y), x - z>`, which
/// vanishes identically.
pub fn three_point_residual(
    gen: DistanceGenerator,
    x: &WeightVector,
    y: &WeightVector,
    z: &WeightVector,
) -> Result<f64> {
    let dxy = gen.divergence(x, y)?;
    let dxz = gen.divergence(x, z)?;
    let dzy = gen.divergence(z, y)?;
    let gz = gen.gradient(z);
    let gy = gen.gradient(y);
    let inner: f64 = gz.iter().zip(&gy).zip(x.iter().zip(z.iter())).map(|((a, b), (xi, zi))| (a - b) * (xi - zi)).sum();
    Ok(dxy - dxz - dzy - inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, Strategy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let ne = DistanceGenerator::NegativeEntropy;
        assert_eq!(ne.divergence(&w(&[0.5, 0.5]), &w(&[0.5, 0.5])).unwrap(), 0.0);
        let d = ne.divergence(&w(&[1.0, 0.0]), &w(&[0.5, 0.5])).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
        let se = DistanceGenerator::SquaredEuclidean;
        let d = se.divergence(&w(&[0.75, 0.25]), &w(&[0.25, 0.75])).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn divergence_matches_generator_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for gen in [DistanceGenerator::NegativeEntropy, DistanceGenerator::SquaredEuclidean] {
            for _ in 0..100 {
                let p = WeightVector::random(&mut rng, 4);
                let q = WeightVector::random(&mut rng, 4);
                let gq = gen.gradient(&q);
                let direct = gen.value(&p) - gen.value(&q)
                    - gq.iter().zip(p.iter().zip(q.iter())).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
                assert!((direct - gen.divergence(&p, &q).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_errors() {
        let ne = DistanceGenerator::NegativeEntropy;
        let err = ne.divergence(&w(&[0.5, 0.5]), &w(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateReference { index: 1, .. }));
        assert!(WeightVector::new(vec![0.7, 0.7]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        assert!(ne.divergence(&w(&[1.0]), &w(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn kl_prox_examples() {
        let p = prox_simplex_kl(&w(&[0.5, 0.5]), &[0.0, 0.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        let p = prox_simplex_kl(&w(&[0.5, 0.5]), &[3f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        let p = prox_simplex_kl(&w(&[2.0 / 3.0, 1.0 / 3.0]), &[0.0, 2f64.ln()]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kl_prox_survives_huge_gradients() {
        let p = prox_simplex_kl(&w(&[0.5, 0.5]), &[1e4, -1e4]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < SIMPLEX_TOL);
        assert!(p[1] >= COORD_FLOOR);
        assert!(prox_simplex_kl(&w(&[0.5, 0.5]), &[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn restricted_prox_inactive_and_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pi = WeightVector::random(&mut rng, 3);
            let g: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let free = prox_simplex_kl(&pi, &g).unwrap();
            let r = prox_restricted(&pi, &g, 2.0).unwrap();
            assert_eq!(free, r);
        }
        let u = WeightVector::uniform(3);
        let r = prox_restricted(&u, &[0.0; 3], 0.1).unwrap();
        for v in r.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn restricted_prox_active_constraint() {
        let u = WeightVector::uniform(3);
        let p = prox_restricted(&u, &[2.0, 0.0, 0.0], 0.1).unwrap();
        assert!((distance_to_center(&p) - 0.1).abs() < 1e-10);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // symmetric in the two untouched coordinates, mass moved to the first
        assert!((p[1] - p[2]).abs() < 1e-12);
        assert!(p[0] > 1.0 / 3.0);
    }

    #[test]
    fn coordinate_solver_handles_extremes() {
        for &(b, nu) in &[(0.0, 1.0), (50.0, 1e-3), (-40.0, 5.0), (3.0, 1e8), (700.0, 1e6)] {
            let y = solve_log_coordinate(b, nu).unwrap();
            let h = y + nu * y.exp() - b;
            assert!(h.abs() <= 1e-9 * b.abs().max(1.0), "b={b} nu={nu} h={h}");
        }
    }

    #[test]
    fn euclidean_projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[1.0, 1.0, 1.0]);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        let p = project_simplex_ball(&[3.0, 0.0, 0.0], 0.2).unwrap();
        assert!((distance_to_center(&p) - 0.2).abs() < 1e-10);
    }

    #[test]
    fn three_point_examples() {
        let h = w(&[0.5, 0.5]);
        for gen in [DistanceGenerator::NegativeEntropy, DistanceGenerator::SquaredEuclidean] {
            assert_eq!(three_point_residual(gen, &h, &h, &h).unwrap(), 0.0);
        }
    }

    fn simplex_point(m: usize) -> impl Strategy<Value = WeightVector> {
        proptest::collection::vec(1e-3f64..1.0, m).prop_map(|v| WeightVector::from_positive(v).unwrap())
    }

    proptest! {
        #[test]
        fn kl_is_strongly_convex(p in simplex_point(4), q in simplex_point(4)) {
            let d = DistanceGenerator::NegativeEntropy.divergence(&p, &q).unwrap();
            let half_sq = 0.5 * p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            prop_assert!(d >= half_sq - 1e-15);
            if p != q {
                prop_assert!(d > 0.0);
            }
        }

        #[test]
        fn three_point_identity(x in simplex_point(3), y in simplex_point(3), z in simplex_point(3)) {
            let ne = three_point_residual(DistanceGenerator::NegativeEntropy, &x, &y, &z).unwrap();
            prop_assert!(ne.abs() < 1e-10);
            let se = three_point_residual(DistanceGenerator::SquaredEuclidean, &x, &y, &z).unwrap();
            prop_assert!(se.abs() < 1e-12);
        }

        #[test]
        fn prox_outputs_stay_in_domain(
            pi in simplex_point(4),
            g in proptest::collection::vec(-20.0f64..20.0, 4),
            radius in 0.01f64..0.3,
        ) {
            let full = prox_simplex_kl(&pi, &g).unwrap();
            prop_assert!((full.iter().sum::<f64>() - 1.0).abs() < SIMPLEX_TOL);
            prop_assert!(full.min_coord() >= COORD_FLOOR * 0.5);

            let start = prox_restricted(&WeightVector::uniform(4), &[0.0; 4], radius).unwrap();
            let r = prox_restricted(&start, &g, radius).unwrap();
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < SIMPLEX_TOL);
            prop_assert!(distance_to_center(&r) <= radius + BALL_TOL);

            let se = prox(DistanceGenerator::SquaredEuclidean, &WeightDomain::ball(4, radius).unwrap(), &start, &g).unwrap();
            prop_assert!(distance_to_center(&se) <= radius + BALL_TOL);
        }
    }
}
