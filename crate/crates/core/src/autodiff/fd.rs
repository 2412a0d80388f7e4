/// Central-difference gradient of a scalar function.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Compares the analytic gradient returned by `f` against central
/// differences of its value. Returns
/// `max_i |analytic_i - fd_i| / (|analytic_i| + 1e-12)`.
pub fn fd_check(f: impl Fn(&[f64]) -> (f64, Vec<f64>), x: &[f64], h: f64) -> f64 {
    let (_, analytic) = f(x);
    let numeric = central_gradient(|p| f(p).0, x, h);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / (a.abs() + 1e-12))
        .fold(0.0, f64::max)
}
