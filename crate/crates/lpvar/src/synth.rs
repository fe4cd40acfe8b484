//! Synthetic ground-truth generators, noise injection, and error metrics.

use crate::error::{Error, Result};
use crate::operators::{MeasurementOperator, Shape, Signal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Additive Gaussian measurement noise: i.i.d. N(0, sigma^2) per component,
/// reproducible from the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Pointwise and aggregate reconstruction errors.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Sum of pointwise absolute errors.
    pub l1: f64,
    /// Euclidean norm of the pointwise errors.
    pub l2: f64,
    /// l1 divided by the l1 norm of the reference signal.
    pub l1_rel: f64,
    /// l2 divided by the l2 norm of the reference signal.
    pub l2_rel: f64,
    /// Per-component absolute error `|u_hat_i - u_i|`.
    pub pointwise: Vec<f64>,
}

/// Value of the 1D test signal at a point of [-1, 1]: a unit plateau on
/// [-0.7, -0.3], a Gaussian-modulated sine on (0, 1], zero elsewhere.
pub fn signal_1d_value(x: f64) -> f64 {
    if (-0.7..=-0.3).contains(&x) {
        1.0
    } else if x > 0.0 && x <= 1.0 {
        0.5 * (1.0 + (100.0 * (x + 1.0)).sin()) * (-25.0 * (x - 0.5) * (x - 0.5)).exp()
    } else {
        0.0
    }
}

/// Value of the 2D ring test image at a point of [-1, 1]^2: an oscillatory
/// core, a linear ramp, a flat annulus at -1, and a slow outer oscillation.
pub fn ring_value(x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    if r <= 4.0 / 9.0 {
        (18.0 * std::f64::consts::PI * r).cos()
    } else if r <= 5.0 / 9.0 {
        -18.0 * (r - 4.0 / 9.0) + 1.0
    } else if r <= 13.0 / 18.0 {
        -1.0
    } else {
        (36.0 / 13.0 * std::f64::consts::PI * r).cos()
    }
}

fn grid_point(i: usize, n: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (n - 1) as f64
}

/// Samples the 1D test signal on `n` uniform points of [-1, 1], endpoints
/// included.
pub fn make_signal_1d(n: usize) -> Result<Signal> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("grid size {n} < 2")));
    }
    let values = (0..n).map(|i| signal_1d_value(grid_point(i, n))).collect();
    Signal::new(values, Shape::OneD(n))
}

/// Samples the 2D ring image on an `n x n` uniform grid of [-1, 1]^2.
pub fn make_signal_2d(n: usize) -> Result<Signal> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("grid size {n} < 2")));
    }
    let mut values = Vec::with_capacity(n * n);
    for r in 0..n {
        let y = grid_point(r, n);
        for c in 0..n {
            values.push(ring_value(grid_point(c, n), y));
        }
    }
    Signal::new(values, Shape::TwoD { rows: n, cols: n })
}

/// Returns `y + eps` with `eps` i.i.d. Gaussian(0, sigma^2), seeded per call.
pub fn add_noise(y: &[f64], spec: &NoiseSpec) -> Result<Vec<f64>> {
    if !(spec.sigma >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be >= 0, got {}",
            spec.sigma
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "measurement contains non-finite entries".into(),
        ));
    }
    if spec.sigma == 0.0 {
        return Ok(y.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.sigma)
        .map_err(|e| Error::InvalidInput(format!("bad noise parameters: {e}")))?;
    Ok(y.iter().map(|&v| v + normal.sample(&mut rng)).collect())
}

/// Pointwise and L1/L2 errors of `u_hat` against `u_true`.
pub fn error_metrics(u_hat: &Signal, u_true: &Signal) -> Result<ErrorReport> {
    if u_hat.shape() != u_true.shape() {
        return Err(Error::DimensionMismatch {
            context: "error_metrics shapes",
            expected: u_true.len(),
            got: u_hat.len(),
        });
    }
    let pointwise: Vec<f64> = u_hat
        .values()
        .iter()
        .zip(u_true.values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let l1: f64 = pointwise.iter().sum();
    let l2 = pointwise.iter().map(|e| e * e).sum::<f64>().sqrt();
    let ref_l1: f64 = u_true.values().iter().map(|v| v.abs()).sum();
    let ref_l2 = u_true.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(ErrorReport {
        l1,
        l2,
        l1_rel: if ref_l1 > 0.0 { l1 / ref_l1 } else { l1 },
        l2_rel: if ref_l2 > 0.0 { l2 / ref_l2 } else { l2 },
        pointwise,
    })
}

/// Improvement of `e_new` over `e_base` in percent: `100 (e_base - e_new) / e_base`.
pub fn improvement_pct(e_base: f64, e_new: f64) -> f64 {
    100.0 * (e_base - e_new) / e_base
}

/// Reported signal-to-noise ratio `10 log10(mean(|Au|^2) / sigma^2)` in dB.
///
/// This is a report-only diagnostic; experiments take sigma directly.
pub fn snr_db(op: &MeasurementOperator, u_true: &Signal, sigma: f64) -> Result<f64> {
    let y = op.forward_apply(u_true)?;
    let mean_sq = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
    Ok(10.0 * (mean_sq / (sigma * sigma)).log10())
}
