use serde::{Deserialize, Serialize};

use crate::autodiff::Activation;
use crate::bregman::{DistanceGenerator, Restriction};
use crate::error::{Error, Result};
use crate::optim::{OptimizerConfig, StepsizeMode};
use crate::synthetic::{QuadraticSpec, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Synthetic,
    #[default]
    Pinn,
    /// Runs the prox and divergence property checks and writes only a summary.
    ProxSelftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Bgda,
    #[default]
    Adaptive,
    Sbgda,
    FixedWeightBaseline,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bgda => "bgda",
            Algorithm::Adaptive => "adaptive",
            Algorithm::Sbgda => "sbgda",
            Algorithm::FixedWeightBaseline => "fixed-weight-baseline",
        }
    }
}

/// The weight block of the objective: regularization strength, geometry and
/// feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub lambda: f64,
    pub generator: DistanceGenerator,
    pub restriction: Restriction,
    /// Reference weights; uniform when absent. Also the starting weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            generator: DistanceGenerator::NegativeEntropy,
            restriction: Restriction::FullSimplex,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PinnConfig {
    /// Built-in problem id.
    pub problem: String,
    /// Hidden layer widths; input and output widths follow from the problem.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub n_interior: usize,
    pub n_boundary: usize,
    /// Evaluation grid points per axis for the relative error; 0 picks a
    /// size from the problem dimension.
    pub eval_per_axis: usize,
    /// Record the relative error every this many iterations (and at the end).
    pub metric_every: usize,
}

impl Default for PinnConfig {
    fn default() -> Self {
        Self {
            problem: "poisson1d".into(),
            hidden: vec![32, 32],
            activation: Activation::Tanh,
            n_interior: 1024,
            n_boundary: 256,
            eval_per_axis: 0,
            metric_every: 100,
        }
    }
}

impl PinnConfig {
    pub fn eval_points_for(&self, dim: usize) -> usize {
        match (self.eval_per_axis, dim) {
            (0, 1) => 1001,
            (0, 2) => 101,
            (0, _) => 21,
            (n, _) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepsizeChoice {
    /// Use the constants from the convergence analysis with a constant
    /// schedule, ignoring the configured step sizes.
    #[default]
    Theoretical,
    Configured,
}

/// Gradient noise for the stochastic algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseConfig {
    Gaussian { sigma: f64 },
    /// Paired per-sample perturbations of standard deviation `sigma` over a
    /// dataset of `samples` points.
    FiniteSum { sigma: f64, samples: usize, sampler: Sampler },
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::Gaussian { sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub dim: usize,
    pub m: usize,
    pub spectrum: (f64, f64),
    pub offset_scale: f64,
    pub shift: f64,
    pub start_scale: f64,
    pub region_radius: f64,
    pub identical: bool,
    pub stepsizes: StepsizeChoice,
    pub stepsize_mode: StepsizeMode,
    pub noise: NoiseConfig,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let q = QuadraticSpec::default();
        Self {
            dim: q.dim,
            m: q.m,
            spectrum: q.spectrum,
            offset_scale: q.offset_scale,
            shift: q.shift,
            start_scale: q.start_scale,
            region_radius: q.region_radius,
            identical: q.identical,
            stepsizes: StepsizeChoice::Theoretical,
            stepsize_mode: StepsizeMode::General,
            noise: NoiseConfig::default(),
        }
    }
}

impl SyntheticConfig {
    pub fn quadratic_spec(&self, weights: &WeightsConfig) -> QuadraticSpec {
        QuadraticSpec {
            dim: self.dim,
            m: self.m,
            lambda: weights.lambda,
            spectrum: self.spectrum,
            generator: weights.generator,
            restriction: weights.restriction,
            offset_scale: self.offset_scale,
            shift: self.shift,
            start_scale: self.start_scale,
            region_radius: self.region_radius,
            identical: self.identical,
        }
    }
}

/// File names inside the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub trace: String,
    pub summary: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { trace: "trace.csv".into(), summary: "summary.json".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub algorithm: Algorithm,
    /// Master seed; every random component draws from its own stream of it.
    #[serde(with = "seed_format")]
    pub seed: u64,
    pub weights: WeightsConfig,
    pub pinn: PinnConfig,
    pub synthetic: SyntheticConfig,
    pub optimizer: OptimizerConfig,
    pub output: OutputConfig,
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written as
/// decimal strings. Both forms are accepted when reading.
mod seed_format {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    struct SeedVisitor;

    impl Visitor<'_> for SeedVisitor {
        type Value = u64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a nonnegative 64-bit integer or its decimal string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
            u64::try_from(v).map_err(|_| E::custom(format!("seed must be nonnegative, got {v}")))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
            Ok(v)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
            v.parse().map_err(|_| E::custom(format!("seed `{v}` is not a 64-bit unsigned integer")))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        d.deserialize_any(SeedVisitor)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.optimizer.validate()?;
        if !(self.weights.lambda > 0.0 && self.weights.lambda.is_finite()) {
            return bad(format!("weights.lambda must be positive, got {}", self.weights.lambda));
        }
        if let Restriction::BallRestricted { radius } = self.weights.restriction {
            if !(radius > 0.0 && radius.is_finite()) {
                return bad(format!("weights.restriction.radius must be positive, got {radius}"));
            }
        }
        for (name, file) in [("output.trace", &self.output.trace), ("output.summary", &self.output.summary)] {
            if file.is_empty() || file.contains(['/', '\\']) || file == "." || file == ".." {
                return bad(format!("{name} must be a plain file name, got {file:?}"));
            }
        }
        if self.output.trace == self.output.summary {
            return bad("output.trace and output.summary must differ".into());
        }
        match self.kind {
            ExperimentKind::Pinn => {
                if self.algorithm == Algorithm::Sbgda {
                    return bad("the sbgda algorithm is only available for synthetic experiments".into());
                }
                let p = &self.pinn;
                if p.n_interior == 0 || p.n_boundary == 0 {
                    return bad("pinn.n_interior and pinn.n_boundary must be positive".into());
                }
                if p.hidden.is_empty() || p.hidden.contains(&0) {
                    return bad("pinn.hidden needs at least one nonzero width".into());
                }
                if p.metric_every == 0 {
                    return bad("pinn.metric_every must be positive".into());
                }
            }
            ExperimentKind::Synthetic => {
                let s = &self.synthetic;
                if self.weights.reference.is_some() {
                    return bad("weights.reference is not supported for synthetic instances".into());
                }
                if s.dim == 0 || s.m < 2 {
                    return bad(format!("synthetic needs dim >= 1 and m >= 2, got dim={} m={}", s.dim, s.m));
                }
                match s.noise {
                    NoiseConfig::Gaussian { sigma } | NoiseConfig::FiniteSum { sigma, .. } if !(sigma >= 0.0 && sigma.is_finite()) => {
                        return bad(format!("synthetic.noise.sigma must be nonnegative, got {sigma}"));
                    }
                    NoiseConfig::FiniteSum { samples, .. } if samples == 0 || samples % 2 != 0 => {
                        return bad(format!("synthetic.noise.samples must be even and positive, got {samples}"));
                    }
                    _ => {}
                }
            }
            ExperimentKind::ProxSelftest => {}
        }
        Ok(())
    }
}
