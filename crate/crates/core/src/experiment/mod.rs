//! Config-driven experiments: build a problem, run an optimizer, and write a
//! trace plus a summary that is recomputable from that trace.

mod config;
mod selftest;
mod summary;

use std::path::Path;

pub use config::{
    Algorithm, ExperimentConfig, ExperimentKind, NoiseConfig, OutputConfig, PinnConfig, StepsizeChoice,
    SyntheticConfig, WeightsConfig,
};
pub use selftest::{prox_selftest, SelfTestCheck};
pub use summary::{smoothness_from_meta, summarize_trace, ContractionSummary, RunStatus, Summary, CHI_WINDOWS, SUMMARY_SCHEMA};

use crate::autodiff::Mlp;
use crate::bregman::{Restriction, WeightDomain, WeightVector};
use crate::error::{Error, Result};
use crate::io;
use crate::optim::{
    theoretical_stepsizes, BatchOracle, GaussianNoise, OptimizerConfig, OptimizerState, RunAborted, RunTrace, Runner,
    Schedule, StepsizeMode,
};
use crate::pinn::{builtin_problem, evaluation_grid, l2re, sample_collocation, PinnLosses};
use crate::saddle::SaddleProblem;
use crate::seeding::{rng_for, Stream};
use crate::synthetic::FiniteSumNoise;

/// Result of one experiment. A run that stopped on a numeric failure still
/// carries its partial trace and summary, with the failure in `failure`.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub trace: Option<RunTrace>,
    pub summary: Summary,
    pub failure: Option<Error>,
}

/// Errors caused by the configuration rather than by the run itself.
fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidInput(msg) | Error::Unsupported(msg) => Error::Config(msg),
        Error::DimensionMismatch { expected, got } => {
            Error::Config(format!("dimension mismatch: expected {expected}, got {got}"))
        }
        Error::DegenerateReference { index, value } => {
            Error::Config(format!("reference coordinate {index} is {value:e}, below the floor"))
        }
        other => other,
    }
}

fn weight_domain(cfg: &ExperimentConfig, m: usize) -> Result<WeightDomain> {
    match cfg.weights.restriction {
        Restriction::FullSimplex => Ok(WeightDomain::full(m)),
        Restriction::BallRestricted { radius } => WeightDomain::ball(m, radius),
    }
}

fn mode_name(mode: StepsizeMode) -> &'static str {
    match mode {
        StepsizeMode::General => "general",
        StepsizeMode::Restricted => "restricted",
    }
}

/// The deterministic algorithms; the stochastic one needs an oracle and is
/// driven directly by the synthetic runner.
fn dispatch(runner: &Runner<'_>, algorithm: Algorithm, init: OptimizerState) -> Result<RunTrace, RunAborted> {
    match algorithm {
        Algorithm::Bgda => runner.bgda(init),
        Algorithm::Adaptive => runner.adaptive(init),
        Algorithm::FixedWeightBaseline => runner.fixed_weights(init),
        Algorithm::Sbgda => unreachable!("config validation keeps sbgda to synthetic runs"),
    }
}

fn finish(run: Result<RunTrace, RunAborted>) -> Result<ExperimentOutcome> {
    let (mut trace, failure) = match run {
        Ok(trace) => (trace, None),
        Err(RunAborted { trace, error }) => (*trace, Some(error)),
    };
    match &failure {
        None => trace.set_meta("status", "completed"),
        Some(e) => {
            trace.set_meta("status", "aborted");
            trace.set_meta("error", e.to_string().replace(['\n', '\r'], " "));
        }
    }
    if trace.is_empty() {
        // Nothing was evaluated; there is no trace to summarize.
        return Err(failure.map(as_config).unwrap_or_else(|| Error::invalid("run produced no trace rows")));
    }
    let summary = summarize_trace(&trace)?;
    Ok(ExperimentOutcome { trace: Some(trace), summary, failure })
}

fn run_pinn(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let pc = &cfg.pinn;
    let spec = builtin_problem(&pc.problem).map_err(as_config)?;
    let d = spec.dim();
    let widths: Vec<usize> = std::iter::once(d).chain(pc.hidden.iter().copied()).chain(std::iter::once(1)).collect();
    let colloc = sample_collocation(&spec, pc.n_interior, pc.n_boundary, cfg.seed).map_err(as_config)?;
    let losses = PinnLosses::new(&spec, &colloc, &widths, pc.activation).map_err(as_config)?;
    let m = losses.names().len();
    let names = losses.names().join(",");
    let net = Mlp::new(&widths, pc.activation, &mut rng_for(cfg.seed, Stream::NetInit))?;

    let mut problem = SaddleProblem::new(Box::new(losses), cfg.weights.lambda)
        .and_then(|p| p.with_generator(cfg.weights.generator).with_domain(weight_domain(cfg, m)?))
        .map_err(as_config)?;
    if let Some(reference) = &cfg.weights.reference {
        let pi_hat = WeightVector::new(reference.clone()).map_err(as_config)?;
        if pi_hat.len() != m {
            return Err(Error::Config(format!("weights.reference has {} entries, problem has {m} losses", pi_hat.len())));
        }
        problem = problem.with_reference(pi_hat).map_err(as_config)?;
    }

    let grid = evaluation_grid(&spec, pc.eval_points_for(d));
    let truth: Option<Vec<f64>> = grid.rows().into_iter().map(|x| spec.exact_value(x.as_slice()?)).collect();
    let metric = |theta: &[f64]| -> Result<f64> {
        let net = Mlp::from_params(&widths, pc.activation, theta.to_vec())?;
        let pred = net.forward_batch(grid.view())?;
        l2re(&pred.column(0).to_vec(), truth.as_deref().unwrap_or_default())
    };

    let init = OptimizerState::new(net.params().to_vec(), problem.pi_hat().clone());
    let mut runner = Runner::new(&problem, &cfg.optimizer)
        .with_meta("kind", "pinn")
        .with_meta("problem", &spec.id)
        .with_meta("losses", names)
        .with_meta("seed", cfg.seed)
        .with_meta("lambda", cfg.weights.lambda)
        .with_meta("widths", widths.iter().map(usize::to_string).collect::<Vec<_>>().join("-"))
        .with_meta("n_interior", pc.n_interior)
        .with_meta("n_boundary", pc.n_boundary);
    if truth.is_some() {
        runner = runner.with_metric(&metric, pc.metric_every);
    }
    finish(dispatch(&runner, cfg.algorithm, init))
}

fn run_synthetic(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let sc = &cfg.synthetic;
    let instance = sc.quadratic_spec(&cfg.weights).build(cfg.seed).map_err(as_config)?;
    let info = instance.info;
    let mut opt: OptimizerConfig = cfg.optimizer.clone();
    if sc.stepsizes == StepsizeChoice::Theoretical {
        let (gamma_pi, gamma_theta) = theoretical_stepsizes(&info, sc.stepsize_mode);
        opt = OptimizerConfig { gamma_theta, gamma_pi, schedule: Schedule::Constant, ..opt };
    }
    let p = &instance.problem;
    let mut oracle: Option<Box<dyn BatchOracle>> = match (cfg.algorithm, sc.noise) {
        (Algorithm::Sbgda, NoiseConfig::Gaussian { sigma }) => Some(Box::new(GaussianNoise::new(sigma, cfg.seed)?)),
        (Algorithm::Sbgda, NoiseConfig::FiniteSum { sigma, samples, sampler }) => {
            Some(Box::new(FiniteSumNoise::new(p.m(), p.dim(), samples, sigma, sampler, cfg.seed)?))
        }
        _ => None,
    };
    let init = OptimizerState::new(instance.theta0.clone(), p.pi_hat().clone());
    let runner = Runner::new(p, &opt)
        .with_meta("kind", "synthetic")
        .with_meta("problem", format!("quadratic/dim={}/m={}", sc.dim, sc.m))
        .with_meta("seed", cfg.seed)
        .with_meta("l", info.l)
        .with_meta("l_pi", info.l_pi)
        .with_meta("lambda", info.lambda)
        .with_meta("kappa", info.kappa)
        .with_meta("kappa_pi", info.kappa_pi)
        .with_meta("stepsize_mode", mode_name(sc.stepsize_mode))
        .with_meta("gamma_theta", opt.gamma_theta)
        .with_meta("gamma_pi", opt.gamma_pi);
    let run = match oracle.as_mut() {
        Some(oracle) => runner.stochastic(oracle.as_mut(), init),
        None => dispatch(&runner, cfg.algorithm, init),
    };
    finish(run)
}

/// Builds and runs the configured experiment without touching the disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    log::info!("running {:?} experiment with {} (seed {})", cfg.kind, cfg.algorithm.name(), cfg.seed);
    match cfg.kind {
        ExperimentKind::Pinn => run_pinn(cfg),
        ExperimentKind::Synthetic => run_synthetic(cfg),
        ExperimentKind::ProxSelftest => {
            let summary = Summary::for_selftest(prox_selftest(cfg.seed)?);
            let failure = summary.error.clone().map(Error::Numeric);
            Ok(ExperimentOutcome { trace: None, summary, failure })
        }
    }
}

/// Runs the experiment and writes its trace and summary into `out_dir`.
/// Aborted runs still write both files before the failure is reported
/// through [`ExperimentOutcome::failure`].
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    let outcome = execute(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    if let Some(trace) = &outcome.trace {
        io::atomic_write(&out_dir.join(&cfg.output.trace), io::trace_to_string(trace)?.as_bytes())?;
    }
    io::atomic_write(&out_dir.join(&cfg.output.summary), io::summary_to_json(&outcome.summary)?.as_bytes())?;
    Ok(outcome)
}
