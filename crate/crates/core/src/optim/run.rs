use std::fmt;
use std::time::Instant;

use super::config::{BestResponseTracking, OptimizerConfig};
use super::oracle::BatchOracle;
use super::state::OptimizerState;
use super::trace::{RunTrace, TraceRecord};
use crate::bregman;
use crate::error::{Error, Result};
use crate::pinn::conflict_ratio;
use crate::saddle::{LossEvaluation, SaddleProblem};

/// A run that stopped early. Carries everything recorded up to the failure.
#[derive(Debug)]
pub struct RunAborted {
    pub trace: Box<RunTrace>,
    pub error: Error,
}

impl fmt::Display for RunAborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run aborted after {} recorded iterates: {}", self.trace.len(), self.error)
    }
}

impl std::error::Error for RunAborted {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

type Metric<'a> = &'a dyn Fn(&[f64]) -> Result<f64>;

enum Update<'o> {
    Plain,
    Adaptive { freeze_pi: bool },
    Stochastic(&'o mut dyn BatchOracle),
}

impl Update<'_> {
    fn name(&self, cfg: &OptimizerConfig) -> String {
        match self {
            Update::Plain => "bgda".into(),
            Update::Adaptive { freeze_pi: false } => format!("adaptive-bgda/{}", cfg.adaptivity.name()),
            Update::Adaptive { freeze_pi: true } => format!("fixed-weights/{}", cfg.adaptivity.name()),
            Update::Stochastic(_) => format!("sbgda/B={}", cfg.batch_size),
        }
    }
}

/// Drives one optimizer over a problem and records a trace. An optional
/// metric (for example the relative error against a known solution) is
/// evaluated on `theta^t` every `every` iterations and at the last one.
pub struct Runner<'a> {
    problem: &'a SaddleProblem,
    cfg: &'a OptimizerConfig,
    metric: Option<(Metric<'a>, usize)>,
    meta: Vec<(String, String)>,
}

impl<'a> Runner<'a> {
    pub fn new(problem: &'a SaddleProblem, cfg: &'a OptimizerConfig) -> Self {
        Self { problem, cfg, metric: None, meta: Vec::new() }
    }

    pub fn with_metric(mut self, metric: Metric<'a>, every: usize) -> Self {
        self.metric = Some((metric, every.max(1)));
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    /// Plain descent-ascent: a gradient step in `theta` and a Bregman prox step
    /// in `pi`, both from the gradients at `(theta^t, pi^t)`.
    pub fn bgda(&self, init: OptimizerState) -> Result<RunTrace, RunAborted> {
        self.drive(init, Update::Plain)
    }

    /// Adam (or RMSProp) on `theta` and a prox step in `pi` along the weight
    /// gradient scaled by the root of its smoothed squared norm.
    pub fn adaptive(&self, init: OptimizerState) -> Result<RunTrace, RunAborted> {
        self.drive(init, Update::Adaptive { freeze_pi: false })
    }

    /// The parameter branch of [`Self::adaptive`] with the weights held at
    /// their initial value.
    pub fn fixed_weights(&self, init: OptimizerState) -> Result<RunTrace, RunAborted> {
        self.drive(init, Update::Adaptive { freeze_pi: true })
    }

    /// Descent-ascent with a minibatch estimate of the parameter gradient and
    /// the exact weight gradient.
    pub fn stochastic(&self, oracle: &mut dyn BatchOracle, init: OptimizerState) -> Result<RunTrace, RunAborted> {
        self.drive(init, Update::Stochastic(oracle))
    }

    fn drive(&self, init: OptimizerState, mut update: Update<'_>) -> Result<RunTrace, RunAborted> {
        let p = self.problem;
        let cfg = self.cfg;
        let mut trace = RunTrace::new(p.m());
        trace.meta.push(("algorithm".into(), update.name(cfg)));
        trace.meta.extend(self.meta.iter().cloned());
        if let Err(error) = self.check_start(&init) {
            return Err(RunAborted { trace: Box::new(trace), error });
        }
        let track = match cfg.track_best_response {
            BestResponseTracking::Auto => p.has_closed_form_best_response(),
            BestResponseTracking::Always => true,
            BestResponseTracking::Never => false,
        };
        let mask = p.losses().residual_mask();
        let start = Instant::now();
        let mut state = init;
        for t in 0..=cfg.iterations {
            let outcome = (|| -> Result<bool> {
                let eval = p.evaluate(&state.theta)?;
                let g_theta = eval.weighted_gradient(&state.pi);
                if let Some(bad) = eval.values.iter().chain(&g_theta).find(|v| !v.is_finite()) {
                    return Err(Error::Numeric(format!("non-finite loss or gradient ({bad}) at iteration {t}")));
                }
                let mut record = self.measure(t, &state, &eval, &g_theta, track, mask.as_deref())?;
                record.wall_time = Some(start.elapsed().as_secs_f64());
                trace.records.push(record);
                if t == cfg.iterations {
                    return Ok(true);
                }
                self.step(&mut state, &eval, g_theta, &mut update)?;
                Ok(false)
            })();
            match outcome {
                Ok(true) => break,
                Ok(false) => {}
                Err(error) => {
                    trace.final_state = Some(state);
                    return Err(RunAborted { trace: Box::new(trace), error });
                }
            }
        }
        trace.final_state = Some(state);
        Ok(trace)
    }

    fn check_start(&self, init: &OptimizerState) -> Result<()> {
        self.cfg.validate()?;
        if init.theta.len() != self.problem.dim() {
            return Err(Error::DimensionMismatch { expected: self.problem.dim(), got: init.theta.len() });
        }
        if init.pi.len() != self.problem.m() {
            return Err(Error::DimensionMismatch { expected: self.problem.m(), got: init.pi.len() });
        }
        self.problem.domain().check(&init.pi)
    }

    fn measure(
        &self,
        t: usize,
        state: &OptimizerState,
        eval: &LossEvaluation,
        g_theta: &[f64],
        track: bool,
        mask: Option<&[bool]>,
    ) -> Result<TraceRecord> {
        let p = self.problem;
        let (grad_phi_norm, phi, gap) = if track {
            let best = p.best_response_at(&eval.values)?;
            let grad_phi = eval.weighted_gradient(&best);
            let gap = p.generator().divergence(&best, &state.pi)?;
            (Some(norm(&grad_phi)), Some(p.objective_at(&eval.values, &best)), Some(gap))
        } else {
            (None, None, None)
        };
        let chi = mask.and_then(|mask| {
            let group = |interior: bool| {
                let mut sum = vec![0.0; p.dim()];
                for (g, _) in eval.gradients.iter().zip(mask).filter(|(_, &m)| m == interior) {
                    sum.iter_mut().zip(g).for_each(|(s, gi)| *s += gi);
                }
                sum
            };
            conflict_ratio(&group(true), &group(false)).ok()
        });
        let l2re = match self.metric {
            Some((f, every)) if t.is_multiple_of(every) || t == self.cfg.iterations => Some(f(&state.theta)?),
            _ => None,
        };
        Ok(TraceRecord {
            t,
            losses: eval.values.clone(),
            pi: state.pi.to_vec(),
            grad_theta_norm: norm(g_theta),
            grad_phi_norm,
            chi,
            phi,
            bregman_to_best_response: gap,
            l2re,
            stepsize_theta: self.cfg.gamma_theta_at(t),
            wall_time: None,
        })
    }

    fn step(&self, state: &mut OptimizerState, eval: &LossEvaluation, g_theta: Vec<f64>, update: &mut Update<'_>) -> Result<()> {
        let p = self.problem;
        let cfg = self.cfg;
        let gamma = cfg.gamma_theta_at(state.t);
        let steps = (state.t + 1) as i32;
        let g_pi = p.grad_pi_at(&eval.values, &state.pi)?;
        match update {
            Update::Plain | Update::Stochastic(_) => {
                let g = match update {
                    Update::Stochastic(oracle) => {
                        let g = oracle.batch_gradient(&state.theta, &state.pi, eval, cfg.batch_size)?;
                        if g.len() != state.theta.len() || g.iter().any(|v| !v.is_finite()) {
                            return Err(Error::Numeric("batch gradient is malformed or non-finite".into()));
                        }
                        g
                    }
                    _ => g_theta,
                };
                state.theta.iter_mut().zip(&g).for_each(|(th, gi)| *th -= gamma * gi);
                let scaled: Vec<f64> = g_pi.iter().map(|g| cfg.gamma_pi * g).collect();
                state.pi = bregman::prox(p.generator(), p.domain(), &state.pi, &scaled)?;
            }
            Update::Adaptive { freeze_pi } => {
                let (a1, a2) = (cfg.alpha1, cfg.alpha2);
                let (c1, c2) = (1.0 - a1.powi(steps), 1.0 - a2.powi(steps));
                let momentum = cfg.adaptivity.theta_momentum();
                for i in 0..state.theta.len() {
                    let g = g_theta[i];
                    state.m_theta[i] = a1 * state.m_theta[i] + (1.0 - a1) * g;
                    state.v_theta[i] = a2 * state.v_theta[i] + (1.0 - a2) * g * g;
                    let num = if momentum { state.m_theta[i] / c1 } else { g };
                    state.theta[i] -= gamma * num / ((state.v_theta[i] / c2).sqrt() + cfg.eps_adapt);
                }
                if !*freeze_pi {
                    let b = cfg.beta;
                    state.v_pi = b * state.v_pi + (1.0 - b) * g_pi.iter().map(|g| g * g).sum::<f64>();
                    let denom = (state.v_pi / (1.0 - b.powi(steps))).sqrt() + cfg.eps_adapt;
                    let direction: Vec<f64> = if cfg.adaptivity.pi_momentum() {
                        for (m, g) in state.m_pi.iter_mut().zip(&g_pi) {
                            *m = a1 * *m + (1.0 - a1) * g;
                        }
                        state.m_pi.iter().map(|m| m / c1).collect()
                    } else {
                        g_pi
                    };
                    let scaled: Vec<f64> = direction.iter().map(|d| cfg.gamma_pi * d / denom).collect();
                    state.pi = bregman::prox(p.generator(), p.domain(), &state.pi, &scaled)?;
                }
            }
        }
        if state.theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("parameters became non-finite at step {}", state.t)));
        }
        state.t += 1;
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn bgda_run(p: &SaddleProblem, init: OptimizerState, cfg: &OptimizerConfig) -> Result<RunTrace, RunAborted> {
    Runner::new(p, cfg).bgda(init)
}

pub fn adaptive_bgda_run(p: &SaddleProblem, init: OptimizerState, cfg: &OptimizerConfig) -> Result<RunTrace, RunAborted> {
    Runner::new(p, cfg).adaptive(init)
}

pub fn fixed_weight_run(p: &SaddleProblem, init: OptimizerState, cfg: &OptimizerConfig) -> Result<RunTrace, RunAborted> {
    Runner::new(p, cfg).fixed_weights(init)
}

pub fn sbgda_run(
    p: &SaddleProblem,
    oracle: &mut dyn BatchOracle,
    init: OptimizerState,
    cfg: &OptimizerConfig,
) -> Result<RunTrace, RunAborted> {
    Runner::new(p, cfg).stochastic(oracle, init)
}
