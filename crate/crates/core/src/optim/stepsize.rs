use serde::{Deserialize, Serialize};

use crate::saddle::SmoothnessInfo;

/// `sqrt(43 / (92 * 33792))`, the parameter step constant of the rate theorem.
pub const THEOREM_CONSTANT: f64 = 0.003_719_061_549_321_499_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepsizeMode {
    /// Any weight domain; constants in terms of `kappa = L / lambda`.
    #[default]
    General,
    /// Simplex cut by a ball around the uniform vector; uses `L_pi`.
    Restricted,
}

/// `(gamma_pi, gamma_theta)` prescribed by the convergence analysis.
///
/// General: `(lambda / 4L^2, c / (kappa^4 L))`; restricted:
/// `(lambda / 4 L_pi^2, c / (kappa_pi^3 kappa L))`, with `c = THEOREM_CONSTANT`.
pub fn theoretical_stepsizes(info: &SmoothnessInfo, mode: StepsizeMode) -> (f64, f64) {
    match mode {
        StepsizeMode::General => (info.lambda / (4.0 * info.l * info.l), THEOREM_CONSTANT / (info.kappa.powi(4) * info.l)),
        StepsizeMode::Restricted => (
            info.lambda / (4.0 * info.l_pi * info.l_pi),
            THEOREM_CONSTANT / (info.kappa_pi.powi(3) * info.kappa * info.l),
        ),
    }
}

/// The looser parameter step bound under which the per-step contraction of
/// the weight error is proved: `1 / (184 kappa^4 L)` or `1 / (184 kappa_pi^3 kappa L)`.
pub fn lemma_theta_bound(info: &SmoothnessInfo, mode: StepsizeMode) -> f64 {
    match mode {
        StepsizeMode::General => 1.0 / (184.0 * info.kappa.powi(4) * info.l),
        StepsizeMode::Restricted => 1.0 / (184.0 * info.kappa_pi.powi(3) * info.kappa * info.l),
    }
}

/// `g0 + (g_end - g0) t / total`, with `total = 0` meaning `g0`.
pub fn linear_decay(g0: f64, g_end: f64, t: usize, total: usize) -> f64 {
    if total == 0 {
        return g0;
    }
    let frac = t.min(total) as f64 / total as f64;
    g0 * (1.0 - frac) + g_end * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matches_its_definition() {
        assert!((THEOREM_CONSTANT - (43.0f64 / (92.0 * 33792.0)).sqrt()).abs() < 1e-18);
    }

    #[test]
    fn unit_problem_steps() {
        let info = SmoothnessInfo::new(1.0, 1.0).unwrap();
        let (gp, gt) = theoretical_stepsizes(&info, StepsizeMode::General);
        assert_eq!(gp, 0.25);
        assert!((gt - (43.0f64 / 3_108_864.0).sqrt()).abs() < 1e-12);
        assert!((gt - 3.719e-3).abs() < 1e-5);
        assert_eq!(lemma_theta_bound(&info, StepsizeMode::General), 1.0 / 184.0);
    }

    #[test]
    fn kappa_two_scales_by_one_over_thirty_two() {
        let base = theoretical_stepsizes(&SmoothnessInfo::new(1.0, 1.0).unwrap(), StepsizeMode::General).1;
        let scaled = theoretical_stepsizes(&SmoothnessInfo::new(2.0, 1.0).unwrap(), StepsizeMode::General).1;
        assert!((scaled * 32.0 - base).abs() < 1e-18);
    }

    #[test]
    fn restricted_mode_uses_l_pi() {
        let info = SmoothnessInfo::new(4.0, 1.0).unwrap().with_l_pi(2.0).unwrap();
        let (gp, gt) = theoretical_stepsizes(&info, StepsizeMode::Restricted);
        assert_eq!(gp, 1.0 / 16.0);
        assert!((gt - THEOREM_CONSTANT / (8.0 * 4.0 * 4.0)).abs() < 1e-18);
    }

    #[test]
    fn linear_decay_endpoints() {
        assert_eq!(linear_decay(0.008, 0.0004, 0, 100), 0.008);
        assert_eq!(linear_decay(0.008, 0.0004, 100, 100), 0.0004);
        assert!((linear_decay(0.008, 0.0004, 50, 100) - 0.0042).abs() < 1e-15);
        assert_eq!(linear_decay(0.5, 0.1, 3, 0), 0.5);
    }
}
