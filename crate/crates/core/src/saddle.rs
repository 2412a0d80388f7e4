//! The regularized min-max objective
//! `L(theta, pi) = sum_i pi_i L_i(theta) - lambda D(pi, pi_hat)`,
//! its partial gradients, the best response `pi*(theta)` and the envelope
//! `Phi(theta) = L(theta, pi*(theta))`.

use crate::bregman::{self, DistanceGenerator, Restriction, WeightDomain, WeightVector};
use crate::error::{Error, Result};

/// Values and parameter gradients of all loss terms at one `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEvaluation {
    pub values: Vec<f64>,
    pub gradients: Vec<Vec<f64>>,
}

impl LossEvaluation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum_i w_i grad L_i`.
    pub fn weighted_gradient(&self, weights: &[f64]) -> Vec<f64> {
        let dim = self.gradients.first().map_or(0, Vec::len);
        let mut out = vec![0.0; dim];
        for (w, g) in weights.iter().zip(&self.gradients) {
            out.iter_mut().zip(g).for_each(|(o, gi)| *o += w * gi);
        }
        out
    }

    pub fn weighted_value(&self, weights: &[f64]) -> f64 {
        weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }
}

/// A family of `M` loss oracles over a shared parameter vector.
///
/// Implementations must be callable from several threads at once.
pub trait LossSet: Send + Sync {
    /// Number of loss terms `M`.
    fn len(&self) -> usize;

    /// Length of the parameter vector.
    fn dim(&self) -> usize;

    fn evaluate(&self, theta: &[f64]) -> Result<LossEvaluation>;

    /// Marks which terms are interior residuals, as opposed to boundary or
    /// initial-condition terms. Sets without that split return `None`.
    fn residual_mask(&self) -> Option<Vec<bool>> {
        None
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub type LossFn = Box<dyn Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Send + Sync>;

/// Loss set built from independent value-and-gradient closures.
pub struct FnLosses {
    dim: usize,
    terms: Vec<LossFn>,
}

impl FnLosses {
    pub fn new(dim: usize, terms: Vec<LossFn>) -> Self {
        Self { dim, terms }
    }
}

impl LossSet for FnLosses {
    fn len(&self) -> usize {
        self.terms.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, theta: &[f64]) -> Result<LossEvaluation> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: theta.len() });
        }
        let mut values = Vec::with_capacity(self.terms.len());
        let mut gradients = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let (v, g) = term(theta)?;
            values.push(v);
            gradients.push(g);
        }
        Ok(LossEvaluation { values, gradients })
    }
}

/// Smoothness constants of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessInfo {
    /// Lipschitz constant of the joint gradient.
    pub l: f64,
    /// Smoothness in `pi` alone, on the restricted domain.
    pub l_pi: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub kappa_pi: f64,
}

impl SmoothnessInfo {
    /// `l` is raised to `lambda` when smaller so that `kappa >= 1`.
    pub fn new(l: f64, lambda: f64) -> Result<Self> {
        if !(l > 0.0 && lambda > 0.0 && l.is_finite() && lambda.is_finite()) {
            return Err(Error::invalid(format!("smoothness constants must be positive (L={l}, lambda={lambda})")));
        }
        let l = l.max(lambda);
        Ok(Self { l, l_pi: l, lambda, kappa: l / lambda, kappa_pi: 1.0 })
    }

    pub fn with_l_pi(mut self, l_pi: f64) -> Result<Self> {
        if !(l_pi > 0.0 && l_pi.is_finite()) {
            return Err(Error::invalid(format!("L_pi must be positive, got {l_pi}")));
        }
        let l_pi = l_pi.max(self.lambda);
        self.l_pi = l_pi;
        self.kappa_pi = l_pi / self.lambda;
        Ok(self)
    }
}

const BEST_RESPONSE_TOL: f64 = 1e-10;
const BEST_RESPONSE_MAX_STEPS: usize = 100_000;

/// The saddle problem: loss oracles plus the Bregman regularizer.
pub struct SaddleProblem {
    losses: Box<dyn LossSet>,
    lambda: f64,
    pi_hat: WeightVector,
    generator: DistanceGenerator,
    domain: WeightDomain,
}

impl std::fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("m", &self.losses.len())
            .field("dim", &self.losses.dim())
            .field("lambda", &self.lambda)
            .field("pi_hat", &self.pi_hat)
            .field("generator", &self.generator)
            .field("domain", &self.domain)
            .finish()
    }
}

impl SaddleProblem {
    /// Negative-entropy regularizer on the full simplex, uniform reference.
    pub fn new(losses: Box<dyn LossSet>, lambda: f64) -> Result<Self> {
        let m = losses.len();
        if m == 0 {
            return Err(Error::invalid("a saddle problem needs at least one loss"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self {
            losses,
            lambda,
            pi_hat: WeightVector::uniform(m),
            generator: DistanceGenerator::NegativeEntropy,
            domain: WeightDomain::full(m),
        })
    }

    pub fn with_generator(mut self, generator: DistanceGenerator) -> Self {
        self.generator = generator;
        self
    }

    pub fn with_domain(mut self, domain: WeightDomain) -> Result<Self> {
        domain.check(&self.pi_hat)?;
        self.domain = domain;
        Ok(self)
    }

    pub fn with_reference(mut self, pi_hat: WeightVector) -> Result<Self> {
        self.domain.check(&pi_hat)?;
        if self.generator == DistanceGenerator::NegativeEntropy && pi_hat.min_coord() < bregman::COORD_FLOOR {
            return Err(Error::invalid("reference weights must be interior for the entropy regularizer"));
        }
        self.pi_hat = pi_hat;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.losses.len()
    }

    pub fn dim(&self) -> usize {
        self.losses.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pi_hat(&self) -> &WeightVector {
        &self.pi_hat
    }

    pub fn generator(&self) -> DistanceGenerator {
        self.generator
    }

    pub fn domain(&self) -> &WeightDomain {
        &self.domain
    }

    pub fn losses(&self) -> &dyn LossSet {
        self.losses.as_ref()
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<LossEvaluation> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        let eval = self.losses.evaluate(theta)?;
        if eval.len() != self.m() || eval.gradients.iter().any(|g| g.len() != self.dim()) {
            return Err(Error::Numeric("loss oracle returned malformed output".into()));
        }
        Ok(eval)
    }

    fn check_pi(&self, pi: &WeightVector) -> Result<()> {
        self.domain.check(pi)
    }

    /// `sum_i pi_i L_i(theta) - lambda D(pi, pi_hat)`.
    pub fn objective(&self, theta: &[f64], pi: &WeightVector) -> Result<f64> {
        self.check_pi(pi)?;
        let eval = self.evaluate(theta)?;
        Ok(self.objective_at(&eval.values, pi))
    }

    pub fn objective_at(&self, values: &[f64], pi: &[f64]) -> f64 {
        let linear: f64 = pi.iter().zip(values).map(|(p, v)| p * v).sum();
        linear - self.lambda * self.generator.divergence_unchecked(pi, &self.pi_hat)
    }

    /// `sum_i pi_i grad L_i(theta)`.
    pub fn grad_theta(&self, theta: &[f64], pi: &WeightVector) -> Result<Vec<f64>> {
        self.check_pi(pi)?;
        Ok(self.evaluate(theta)?.weighted_gradient(pi))
    }

    /// `(L_i(theta))_i - lambda (grad psi(pi) - grad psi(pi_hat))`.
    pub fn grad_pi(&self, theta: &[f64], pi: &WeightVector) -> Result<Vec<f64>> {
        self.check_pi(pi)?;
        let eval = self.evaluate(theta)?;
        self.grad_pi_at(&eval.values, pi)
    }

    pub fn grad_pi_at(&self, values: &[f64], pi: &[f64]) -> Result<Vec<f64>> {
        pi_gradient(self.generator, self.lambda, values, pi, &self.pi_hat)
    }

    /// Maximizer of the strongly concave inner problem at `theta`.
    pub fn best_response(&self, theta: &[f64]) -> Result<WeightVector> {
        let eval = self.evaluate(theta)?;
        self.best_response_at(&eval.values)
    }

    /// Best response from precomputed loss values. Closed form where one
    /// exists, prox ascent otherwise.
    pub fn best_response_at(&self, values: &[f64]) -> Result<WeightVector> {
        match self.best_response_closed_form(values)? {
            Some(p) => Ok(p),
            None => self.best_response_iterative(values),
        }
    }

    /// Whether [`Self::best_response_at`] avoids the iterative solver.
    pub fn has_closed_form_best_response(&self) -> bool {
        !matches!(
            (self.generator, self.domain.restriction),
            (DistanceGenerator::NegativeEntropy, Restriction::BallRestricted { .. })
        )
    }

    fn best_response_closed_form(&self, values: &[f64]) -> Result<Option<WeightVector>> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Numeric(format!("loss {i} is {v}")));
        }
        match (self.generator, self.domain.restriction) {
            (DistanceGenerator::NegativeEntropy, Restriction::FullSimplex) => {
                let logits: Vec<f64> =
                    self.pi_hat.iter().zip(values).map(|(p, v)| p.ln() + v / self.lambda).collect();
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                WeightVector::floored(logits.iter().map(|l| (l - top).exp()).collect()).map(Some)
            }
            (DistanceGenerator::SquaredEuclidean, restriction) => {
                let target: Vec<f64> = self.pi_hat.iter().zip(values).map(|(p, v)| p + v / self.lambda).collect();
                let p = match restriction {
                    Restriction::FullSimplex => bregman::project_simplex(&target),
                    Restriction::BallRestricted { radius } => bregman::project_simplex_ball(&target, radius)?,
                };
                WeightVector::from_positive(p).map(Some)
            }
            _ => Ok(None),
        }
    }

    /// Prox ascent on the inner problem with step `1/(2 lambda)` until the
    /// iterate stops moving.
    pub fn best_response_iterative(&self, values: &[f64]) -> Result<WeightVector> {
        let step = 0.5 / self.lambda;
        let mut pi = self.pi_hat.clone();
        let mut moved = f64::INFINITY;
        for _ in 0..BEST_RESPONSE_MAX_STEPS {
            let g: Vec<f64> = self.grad_pi_at(values, &pi)?.into_iter().map(|v| step * v).collect();
            let next = bregman::prox(self.generator, &self.domain, &pi, &g)?;
            moved = next.iter().zip(pi.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            pi = next;
            if moved <= BEST_RESPONSE_TOL * 1e-2 {
                return Ok(pi);
            }
        }
        if moved <= BEST_RESPONSE_TOL {
            return Ok(pi);
        }
        Err(Error::SolverFailure { what: "best response prox ascent", residual: moved })
    }

    /// `(Phi(theta), grad Phi(theta))` with the gradient taken at the best
    /// response (Danskin).
    pub fn phi_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let eval = self.evaluate(theta)?;
        let best = self.best_response_at(&eval.values)?;
        Ok((self.objective_at(&eval.values, &best), eval.weighted_gradient(&best)))
    }
}

/// Gradient in `pi` of the objective, taking the divergence derivative in its
/// first argument.
pub fn pi_gradient(
    generator: DistanceGenerator,
    lambda: f64,
    values: &[f64],
    pi: &[f64],
    pi_hat: &[f64],
) -> Result<Vec<f64>> {
    if values.len() != pi.len() || pi.len() != pi_hat.len() {
        return Err(Error::DimensionMismatch { expected: pi_hat.len(), got: values.len().min(pi.len()) });
    }
    if lambda == 0.0 {
        return Ok(values.to_vec());
    }
    match generator {
        DistanceGenerator::NegativeEntropy => {
            if let Some((index, &value)) = pi.iter().enumerate().find(|(_, v)| **v < bregman::COORD_FLOOR) {
                return Err(Error::DegenerateReference { index, value });
            }
            Ok(values.iter().zip(pi.iter().zip(pi_hat)).map(|(v, (p, h))| v - lambda * (p.ln() - h.ln())).collect())
        }
        DistanceGenerator::SquaredEuclidean => {
            Ok(values.iter().zip(pi.iter().zip(pi_hat)).map(|(v, (p, h))| v - lambda * (p - h)).collect())
        }
    }
}
