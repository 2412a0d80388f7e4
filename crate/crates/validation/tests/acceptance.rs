//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line to
//! stderr (bypassing the test harness capture) and then asserts its verdict.

use std::io::Write;
use std::time::{Duration, Instant};

use bgda::autodiff::{input_derivatives, Activation, Mlp};
use bgda::bregman::{self, DistanceGenerator, Restriction, WeightVector};
use bgda::experiment::{execute, run_experiment, Algorithm, ExperimentConfig, ExperimentKind, NoiseConfig, StepsizeChoice};
use bgda::optim::{
    theoretical_stepsizes, Adaptivity, GaussianNoise, OptimizerConfig, OptimizerState, Runner, StepsizeMode,
};
use bgda::pinn::{builtin_problem, sample_collocation, PinnLosses};
use bgda::saddle::{LossSet, SmoothnessInfo};
use bgda::synthetic::{
    concavity_identity_residual, restricted_smoothness, stationarity_prefix, symmetric_concavity_slack, verify_contraction, QuadraticInstance,
    QuadraticSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, pass: bool, detail: String, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance {id:>2} {verdict} {title}: {detail} [{:.1}s]\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn random_point(rng: &mut ChaCha8Rng, inst: &QuadraticInstance) -> Vec<f64> {
    // Uniform direction, radius scaled into the region.
    let dir: Vec<f64> = (0..inst.theta0.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = inst.region_radius * rng.random::<f64>();
    inst.theta0.iter().zip(&dir).map(|(t, d)| t + r * d / n).collect()
}

/// Well-conditioned Euclidean-geometry instance: `kappa` close to one, so the
/// theoretical parameter step is not vanishingly small.
fn euclidean_instance(seed: u64) -> QuadraticInstance {
    QuadraticSpec {
        generator: DistanceGenerator::SquaredEuclidean,
        spectrum: (0.9, 1.0),
        offset_scale: 0.005,
        start_scale: 0.01,
        region_radius: 0.05,
        ..QuadraticSpec::default()
    }
    .build(seed)
    .unwrap()
}

// ------------------------------------------------------------------ 1

fn kl_objective(g: &[f64], pi: &[f64], p: &[f64]) -> f64 {
    p.iter().zip(pi).zip(g).map(|((p, q), g)| -g * p + p * (p / q).ln()).sum()
}

/// Minimizes over the simplex by repeatedly scanning a grid around the best
/// point and shrinking it.
fn grid_argmin(g: &[f64], pi: &[f64]) -> Vec<f64> {
    let m = pi.len();
    let free = m - 1;
    let n = 40;
    let mut center = vec![1.0 / m as f64; free];
    let mut half = 0.5;
    for _ in 0..40 {
        let mut best = (f64::INFINITY, center.clone());
        let mut idx = vec![0usize; free];
        loop {
            let x: Vec<f64> = (0..free).map(|j| center[j] - half + 2.0 * half * idx[j] as f64 / n as f64).collect();
            let last = 1.0 - x.iter().sum::<f64>();
            if x.iter().all(|&v| v > 0.0) && last > 0.0 {
                let mut p = x.clone();
                p.push(last);
                let f = kl_objective(g, pi, &p);
                if f < best.0 {
                    best = (f, x);
                }
            }
            let mut j = 0;
            while j < free {
                idx[j] += 1;
                if idx[j] <= n {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == free {
                break;
            }
        }
        center = best.1;
        half *= 0.5;
    }
    let mut p = center.clone();
    p.push(1.0 - center.iter().sum::<f64>());
    p
}

#[test]
fn criterion_01_prox_matches_grid_argmin() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let m = if case < 50 { 2 } else { 3 };
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let pi = WeightVector::new(raw.iter().map(|v| v / total).collect()).unwrap();
        let g: Vec<f64> = (0..m).map(|_| rng.random_range(-1.5..1.5)).collect();
        let closed = bregman::prox_simplex_kl(&pi, &g).unwrap();
        let numeric = grid_argmin(&g, &pi);
        worst = worst.max(closed.iter().zip(&numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let elapsed = start.elapsed();
    report(
        1,
        "prox vs grid argmin",
        worst <= 1e-5 && elapsed < Duration::from_secs(10),
        format!("100 cases, max |diff| = {worst:.2e} (limit 1e-5)"),
        elapsed,
    );
}

// ------------------------------------------------------------------ 2

#[test]
fn criterion_02_best_response_is_the_maximizer() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_gain, mut worst_fixed): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    for seed in 0..20 {
        let spec = QuadraticSpec { m: 2 + (seed as usize % 3), lambda: 0.5, ..QuadraticSpec::default() };
        let inst = spec.build(seed).unwrap();
        let p = &inst.problem;
        let theta = random_point(&mut rng, &inst);
        let best = p.best_response(&theta).unwrap();
        let top = p.objective(&theta, &best).unwrap();
        for _ in 0..1000 {
            let other = WeightVector::random(&mut rng, p.m());
            worst_gain = worst_gain.max(p.objective(&theta, &other).unwrap() - top);
        }
        // Prox ascent on the weights with the entropy geometry, written out:
        // pi <- pi^(1-s) * pi_hat^s * exp(s L / lambda), normalized, s = gamma lambda.
        let losses = p.evaluate(&theta).unwrap().values;
        let lam = p.lambda();
        let s = 0.5;
        let mut pi = vec![1.0 / p.m() as f64; p.m()];
        for _ in 0..200 {
            let logits: Vec<f64> = (0..p.m())
                .map(|i| (1.0 - s) * pi[i].ln() + s * p.pi_hat()[i].ln() + s * losses[i] / lam)
                .collect();
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
            let z: f64 = w.iter().sum();
            pi = w.iter().map(|v| v / z).collect();
        }
        worst_fixed = worst_fixed.max(best.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let elapsed = start.elapsed();
    report(
        2,
        "closed-form best response",
        worst_gain <= 1e-12 && worst_fixed <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("20 instances x 1000 challengers, max gain {worst_gain:.2e}; fixed-point gap {worst_fixed:.2e} (limit 1e-8)"),
        elapsed,
    );
}

// ------------------------------------------------------------------ 3

#[test]
fn criterion_03_symmetrized_concavity_inequality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut min_slack = f64::INFINITY;
    let mut negative = 0;
    let mut worst_identity: f64 = 0.0;
    for seed in 0..5 {
        let inst = QuadraticSpec { m: 2 + seed as usize % 3, ..QuadraticSpec::default() }.build(seed).unwrap();
        for _ in 0..2000 {
            let theta = random_point(&mut rng, &inst);
            let pi1 = WeightVector::random(&mut rng, inst.problem.m());
            let pi2 = WeightVector::random(&mut rng, inst.problem.m());
            let slack = symmetric_concavity_slack(&inst.problem, &theta, &pi1, &pi2).unwrap();
            let exact = concavity_identity_residual(&inst.problem, &theta, &pi1, &pi2).unwrap();
            worst_identity = worst_identity.max(exact.abs());
            if slack < -1e-9 {
                negative += 1;
            }
            min_slack = min_slack.min(slack);
        }
    }
    let elapsed = start.elapsed();
    report(
        3,
        "symmetrized strong concavity, entropy geometry",
        min_slack >= -1e-9,
        format!(
            "10^4 triples, min slack {min_slack:.3e}, {negative} below -1e-9; exact one-sided identity residual {worst_identity:.1e}"
        ),
        elapsed,
    );
}

// ------------------------------------------------------------------ 4

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).ln() - a + b).sum()
}

fn half_sq(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

#[test]
fn criterion_04_three_point_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for gen in [DistanceGenerator::NegativeEntropy, DistanceGenerator::SquaredEuclidean] {
        for _ in 0..10_000 {
            let m = rng.random_range(2..6);
            let [x, y, z] = [0, 1, 2].map(|_| WeightVector::random(&mut rng, m));
            let lib = bregman::three_point_residual(gen, &x, &y, &z).unwrap();
            // Independent recomputation from the textbook formulas.
            let (d, grad): (fn(&[f64], &[f64]) -> f64, fn(f64) -> f64) = match gen {
                DistanceGenerator::NegativeEntropy => (kl, |v: f64| v.ln() + 1.0),
                DistanceGenerator::SquaredEuclidean => (half_sq, |v: f64| v),
            };
            let inner: f64 = (0..m).map(|i| (grad(z[i]) - grad(y[i])) * (x[i] - z[i])).sum();
            let ours = d(&x, &y) - d(&x, &z) - d(&z, &y) - inner;
            worst = worst.max(lib.abs()).max(ours.abs());
        }
    }
    let elapsed = start.elapsed();
    report(4, "three-point identity", worst < 1e-10, format!("2 x 10^4 triples, max |residual| {worst:.2e}"), elapsed);
}

// ------------------------------------------------------------------ 5

#[test]
fn criterion_05_weight_error_contraction() {
    let start = Instant::now();
    let mut total_violations = 0;
    let mut min_slack = f64::INFINITY;
    for seed in 0..10u64 {
        let m = 2 + (seed as usize % 3);
        let inst = QuadraticSpec { dim: 10, m, ..QuadraticSpec::default() }.build(1000 + seed).unwrap();
        let (gamma_pi, gamma_theta) = theoretical_stepsizes(&inst.info, StepsizeMode::General);
        let cfg = OptimizerConfig::constant(gamma_theta, gamma_pi, 5000);
        let init = OptimizerState::new(inst.theta0.clone(), inst.problem.pi_hat().clone());
        // Start the weights away from the best response so the recursion is exercised.
        let init = OptimizerState { pi: WeightVector::from_positive((1..=m).map(|i| i as f64).collect()).unwrap(), ..init };
        let trace = Runner::new(&inst.problem, &cfg).bgda(init).unwrap();
        let report = verify_contraction(&trace, &inst.info, StepsizeMode::General).unwrap();
        total_violations += report.violations;
        min_slack = min_slack.min(report.min_slack);
    }
    let elapsed = start.elapsed();
    report(
        5,
        "weight-error contraction",
        total_violations == 0 && elapsed < Duration::from_secs(120),
        format!("10 instances x 5000 steps, {total_violations} violations, min slack {min_slack:.3e}"),
        elapsed,
    );
}

// ------------------------------------------------------------------ 6

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn criterion_06_stationarity_rate() {
    let start = Instant::now();
    let inst = euclidean_instance(6);
    let (gamma_pi, gamma_theta) = theoretical_stepsizes(&inst.info, StepsizeMode::General);
    let cfg = OptimizerConfig::constant(gamma_theta, gamma_pi, 10_000);
    let init = OptimizerState::new(inst.theta0.clone(), inst.problem.pi_hat().clone());
    let trace = Runner::new(&inst.problem, &cfg).bgda(init).unwrap();
    let horizons = [100.0, 1000.0, 10_000.0];
    let eps: Vec<f64> = horizons.iter().map(|&t| stationarity_prefix(&trace, t as usize).unwrap()).collect();
    let slope = log_slope(&horizons, &eps);
    let decreasing = eps.windows(2).all(|w| w[1] < w[0]);
    // Best-fit constant of c / T in log space, and the worst factor between
    // the fit and the measurements.
    let scaled: Vec<f64> = eps.iter().zip(&horizons).map(|(e, t)| e * t).collect();
    let c = (scaled.iter().map(|v| v.ln()).sum::<f64>() / scaled.len() as f64).exp();
    let spread = scaled.iter().map(|v| (v / c).max(c / v)).fold(1.0, f64::max);
    let elapsed = start.elapsed();
    report(
        6,
        "stationarity rate shape",
        decreasing && (-1.3..=-0.7).contains(&slope) && spread <= 3.0 && elapsed < Duration::from_secs(120),
        format!(
            "kappa {:.3}, eps^2 = {:.3e}, {:.3e}, {:.3e}; slope {slope:.3}; worst factor from c/T fit x{spread:.2}",
            inst.info.kappa, eps[0], eps[1], eps[2]
        ),
        elapsed,
    );
}

// ------------------------------------------------------------------ 7

#[test]
fn criterion_07_theoretical_stepsize_constants() {
    let start = Instant::now();
    let info = SmoothnessInfo::new(1.0, 1.0).unwrap();
    let (gamma_pi, gamma_theta) = theoretical_stepsizes(&info, StepsizeMode::General);
    let expected = (43.0f64 / (92.0 * 33792.0)).sqrt();
    let err = (gamma_theta - expected).abs();
    report(
        7,
        "stepsize constants",
        gamma_pi == 0.25 && err <= 1e-12,
        format!("gamma_pi = {gamma_pi}, gamma_theta = {gamma_theta:.17} (|err| {err:.1e})"),
        start.elapsed(),
    );
}

// ------------------------------------------------------------------ 8

#[test]
fn criterion_08_autodiff_against_finite_differences() {
    let start = Instant::now();
    let spec = builtin_problem("poisson2d").unwrap();
    let colloc = sample_collocation(&spec, 16, 8, 8).unwrap();
    let widths = [2, 8, 8, 1];
    let losses = PinnLosses::new(&spec, &colloc, &widths, Activation::Tanh).unwrap();
    let (mut worst_grad, mut worst_second): (f64, f64) = (0.0, 0.0);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let net = Mlp::new(&widths, Activation::Tanh, &mut rng).unwrap();
        let weights = [0.3, 0.7];
        let objective = |theta: &[f64]| {
            let v = losses.evaluate(theta).unwrap().values;
            v.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>()
        };
        let analytic = losses.evaluate(net.params()).unwrap().weighted_gradient(&weights);
        let h = 1e-5;
        let mut theta = net.params().to_vec();
        let mut num = vec![0.0; theta.len()];
        for i in 0..theta.len() {
            let orig = theta[i];
            theta[i] = orig + h;
            let up = objective(&theta);
            theta[i] = orig - h;
            let down = objective(&theta);
            theta[i] = orig;
            num[i] = (up - down) / (2.0 * h);
        }
        let diff = analytic.iter().zip(&num).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = analytic.iter().map(|a| a.abs()).fold(0.0, f64::max);
        worst_grad = worst_grad.max(diff / scale);

        let u = |x: &[f64]| net.forward(x).unwrap()[0];
        let hx = 1e-4;
        for _ in 0..3 {
            let x = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
            for (j, k) in [(0, 0), (0, 1), (1, 1)] {
                let ad = input_derivatives(&net, &x, 2, (j, k)).unwrap();
                let shifted = |dj: f64, dk: f64| {
                    let mut y = x;
                    y[j] += dj;
                    y[k] += dk;
                    u(&y)
                };
                let fd = (shifted(hx, hx) - shifted(hx, -hx) - shifted(-hx, hx) + shifted(-hx, -hx)) / (4.0 * hx * hx);
                worst_second = worst_second.max((ad - fd).abs() / ad.abs().max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        8,
        "autodiff vs finite differences",
        worst_grad < 1e-6 && worst_second < 1e-5 && elapsed < Duration::from_secs(30),
        format!("20 nets, parameter gradient rel err {worst_grad:.2e} (limit 1e-6), second derivative rel err {worst_second:.2e} (limit 1e-5)"),
        elapsed,
    );
}

// ------------------------------------------------------------------ 9, 10, 14

fn poisson_config(algorithm: Algorithm, iterations: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { kind: ExperimentKind::Pinn, algorithm, seed: 0, ..ExperimentConfig::default() };
    cfg.pinn.problem = "poisson1d".into();
    cfg.pinn.hidden = vec![32, 32];
    cfg.pinn.activation = Activation::Tanh;
    cfg.pinn.n_interior = 1024;
    cfg.pinn.n_boundary = 2;
    cfg.optimizer = OptimizerConfig { iterations, ..OptimizerConfig::default() };
    cfg
}

#[test]
fn criterion_09_poisson_desk_run() {
    let start = Instant::now();
    let cfg = poisson_config(Algorithm::Adaptive, 20_000);
    let o = &cfg.optimizer;
    assert_eq!((o.gamma_pi, o.gamma_theta, o.alpha1, o.alpha2, o.beta), (0.1, 0.008, 0.9, 0.999, 0.999));
    let outcome = execute(&cfg).unwrap();
    let l2re = outcome.summary.final_l2re.unwrap_or(f64::INFINITY);
    let elapsed = start.elapsed();
    report(
        9,
        "1D Poisson desk run",
        outcome.failure.is_none() && l2re < 5e-2 && elapsed < Duration::from_secs(900),
        format!("final L2RE {l2re:.3e} (limit 5e-2), final weights {:?}", outcome.summary.final_pi),
        elapsed,
    );
}

#[test]
fn criterion_10_conflict_ratio_stabilization() {
    let start = Instant::now();
    let adaptive = execute(&poisson_config(Algorithm::Adaptive, 30_000)).unwrap();
    let baseline = execute(&poisson_config(Algorithm::FixedWeightBaseline, 30_000)).unwrap();
    let (a, b) = (&adaptive.summary.chi_windows, &baseline.summary.chi_windows);
    assert_eq!((a.len(), b.len()), (3, 3));
    let ratio = b[2].mean / a[2].mean;
    let (cv_a, cv_b) = (a[2].std / a[2].mean, b[2].std / b[2].mean);
    let elapsed = start.elapsed();
    report(
        10,
        "conflict ratio stabilization",
        ratio >= 10.0 && cv_a <= cv_b,
        format!(
            "third-window mean: adaptive {:.3}, baseline {:.3} (ratio {ratio:.2}, need >= 10); std/mean: adaptive {cv_a:.3}, baseline {cv_b:.3}; windows adaptive {:?} baseline {:?}",
            a[2].mean,
            b[2].mean,
            a.iter().map(|w| (w.mean, w.std)).collect::<Vec<_>>(),
            b.iter().map(|w| (w.mean, w.std)).collect::<Vec<_>>()
        ),
        elapsed,
    );
}

#[test]
fn criterion_14_adaptivity_ablation_runs() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for combo in [Adaptivity::AdamRmsprop, Adaptivity::AdamAdam, Adaptivity::RmspropRmsprop] {
        let mut cfg = poisson_config(Algorithm::Adaptive, 2000);
        cfg.optimizer.adaptivity = combo;
        let outcome = execute(&cfg).unwrap();
        let trace = outcome.trace.as_ref().unwrap();
        let complete = outcome.failure.is_none() && trace.len() == 2001;
        ok &= complete;
        details.push(format!("{} {} L2RE {:.2e}", combo.name(), if complete { "completed" } else { "aborted" }, outcome.summary.final_l2re.unwrap_or(f64::NAN)));
    }
    report(14, "adaptivity combinations", ok, details.join("; "), start.elapsed());
}

// ------------------------------------------------------------------ 11

#[test]
fn criterion_11_minibatch_variance_plateau() {
    let start = Instant::now();
    let inst = euclidean_instance(11);
    let (gamma_pi, gamma_theta) = theoretical_stepsizes(&inst.info, StepsizeMode::General);
    let steps = 20_000;
    let mut plateaus = Vec::new();
    for batch in [1, 4, 16, 64] {
        let cfg = OptimizerConfig { batch_size: batch, ..OptimizerConfig::constant(gamma_theta, gamma_pi, steps) };
        let mut noise = GaussianNoise::new(1.0, 11).unwrap();
        let init = OptimizerState::new(inst.theta0.clone(), inst.problem.pi_hat().clone());
        let trace = Runner::new(&inst.problem, &cfg).stochastic(&mut noise, init).unwrap();
        let g = trace.grad_phi_norms().unwrap();
        let tail = &g[steps / 2..];
        plateaus.push(tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64);
    }
    let decreasing = plateaus.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed();
    report(
        11,
        "minibatch variance plateau",
        decreasing && elapsed < Duration::from_secs(120),
        format!("plateau for B = 1, 4, 16, 64: {:.3e}, {:.3e}, {:.3e}, {:.3e}", plateaus[0], plateaus[1], plateaus[2], plateaus[3]),
        elapsed,
    );
}

// ------------------------------------------------------------------ 12

#[test]
fn criterion_12_restricted_smoothness_growth() {
    let start = Instant::now();
    let lambda = 1.0;
    let mut ok = true;
    let mut details = Vec::new();
    for m in [2usize, 3, 4] {
        let mf = m as f64;
        let per_r: Vec<f64> = (0..=20)
            .map(|k| 1e-4 * 100f64.powf(k as f64 / 20.0))
            .map(|r| (restricted_smoothness(lambda, m, r).unwrap().l_pi - lambda * mf) / (lambda * mf * mf * r))
            .collect();
        let (lo, hi) = per_r.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        ok &= hi / lo <= 2.0 && lo >= 0.5 && hi <= 2.0;
        details.push(format!("M={m}: (L_pi - lambda M)/(lambda M^2 R) in [{lo:.4}, {hi:.4}]"));
    }
    report(12, "restricted smoothness growth", ok, details.join("; "), start.elapsed());
}

// ------------------------------------------------------------------ 13

#[test]
fn criterion_13_reruns_are_byte_identical() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut synthetic = ExperimentConfig { kind: ExperimentKind::Synthetic, algorithm: Algorithm::Sbgda, seed: 13, ..Default::default() };
    synthetic.weights.restriction = Restriction::BallRestricted { radius: 0.2 };
    synthetic.synthetic.stepsizes = StepsizeChoice::Theoretical;
    synthetic.synthetic.stepsize_mode = StepsizeMode::Restricted;
    synthetic.synthetic.noise = NoiseConfig::Gaussian { sigma: 1.0 };
    synthetic.optimizer.iterations = 500;
    synthetic.optimizer.batch_size = 4;
    let mut pinn = poisson_config(Algorithm::Adaptive, 200);
    pinn.seed = 13;
    pinn.pinn.n_interior = 128;
    pinn.pinn.metric_every = 10;
    let mut identical = true;
    for (name, cfg) in [("synthetic", &synthetic), ("pinn", &pinn)] {
        let runs: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let out = dir.path().join(format!("{name}-{i}"));
                run_experiment(cfg, &out).unwrap();
                std::fs::read(out.join(&cfg.output.trace)).unwrap()
            })
            .collect();
        identical &= runs[0] == runs[1] && !runs[0].is_empty();
    }
    report(13, "deterministic reruns", identical, "synthetic S-BGDA and PINN traces compared byte for byte".into(), start.elapsed());
}
