use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative l2 error `||pred - truth|| / ||truth||`.
pub fn l2re(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: pred.len() });
    }
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(Error::invalid("reference solution has zero norm"));
    }
    let num: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((num / den).sqrt())
}

/// `||grad_r|| / ||grad_b||`: interior-residual gradient magnitude relative
/// to the boundary one.
pub fn conflict_ratio(grad_r: &[f64], grad_b: &[f64]) -> Result<f64> {
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = norm(grad_b);
    if b == 0.0 || !b.is_finite() {
        return Err(Error::UndefinedRatio);
    }
    Ok(norm(grad_r) / b)
}

/// Mean and standard deviation over one group of iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub start: usize,
    pub end: usize,
    pub mean: f64,
    pub std: f64,
}

/// Splits `values` into `windows` contiguous groups of near-equal length and
/// summarizes each. The standard deviation uses the population normalization.
pub fn window_stats(values: &[f64], windows: usize) -> Vec<WindowStats> {
    let n = values.len();
    if windows == 0 || n < windows {
        return Vec::new();
    }
    (0..windows)
        .map(|w| {
            let (start, end) = (w * n / windows, (w + 1) * n / windows);
            let chunk = &values[start..end];
            let len = chunk.len() as f64;
            let mean = chunk.iter().sum::<f64>() / len;
            let var = chunk.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
            WindowStats { start, end, mean, std: var.sqrt() }
        })
        .collect()
}
