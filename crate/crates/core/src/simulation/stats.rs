//! Estimators and goodness-of-fit tests for Monte-Carlo output.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Sample mean and variance with standard errors.
///
/// `variance_stderr` is the jackknife standard error; it is infinite for two
/// samples, where the leave-one-out variances are undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub samples: usize,
}

pub fn moments(x: &[f64]) -> Result<MomentEstimate> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two samples, got {n}")));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let variance = ss / (nf - 1.0);
    let variance_stderr = if n < 3 {
        f64::INFINITY
    } else {
        // Leave-one-out variance: (ss - n/(n-1) d_i^2) / (n - 2).
        let loo: Vec<f64> = x.iter().map(|v| (ss - nf / (nf - 1.0) * (v - mean).powi(2)) / (nf - 2.0)).collect();
        let loo_mean = loo.iter().sum::<f64>() / nf;
        ((nf - 1.0) / nf * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(MomentEstimate { mean, mean_stderr: (variance / nf).sqrt(), variance, variance_stderr, samples: n })
}

/// Lower empirical quantile `x_(ceil(alpha S))` with an order-statistic band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub value: f64,
    /// Half-width of the one-sigma order-statistic band.
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Index `ceil(alpha n)` (1-based), guarded against `alpha * n` landing a
/// rounding error above an integer.
fn order_index(alpha: f64, n: usize) -> usize {
    let t = alpha * n as f64;
    let r = t.round();
    let k = if (t - r).abs() <= 1e-9 * t.max(1.0) { r } else { t.ceil() };
    (k as usize).clamp(1, n)
}

pub fn lower_quantile(sorted: &[f64], alpha: f64) -> Result<QuantileEstimate> {
    if sorted.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let n = sorted.len();
    let value = sorted[order_index(alpha, n) - 1];
    let band = (alpha * (1.0 - alpha) / n as f64).sqrt();
    let lower = sorted[order_index((alpha - band).max(1e-12), n) - 1];
    let upper = sorted[order_index((alpha + band).min(1.0 - 1e-12), n) - 1];
    Ok(QuantileEstimate { value, stderr: 0.5 * (upper - lower), lower, upper })
}

/// `Theta = -u log F(u, u)` estimated from paired samples, with the delta-method
/// standard error `u sqrt((1 - F) / (F S))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub value: f64,
    pub stderr: f64,
}

pub fn pairwise_theta_estimate(a: &[f64], b: &[f64], u: f64) -> Result<ThetaEstimate> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidParameter("paired samples must be non-empty and of equal length".into()));
    }
    let s = a.len() as f64;
    let both = a.iter().zip(b).filter(|(x, y)| **x <= u && **y <= u).count() as f64;
    let f = both / s;
    if f == 0.0 {
        return Err(Error::Degenerate("no replicate falls below the threshold at both sites".into()));
    }
    Ok(ThetaEstimate { value: -u * f.ln(), stderr: u * ((1.0 - f) / (f * s)).sqrt() })
}

/// One-sample Kolmogorov-Smirnov test. Returns `(D, p-value)`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    (d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d))
}

/// `P(K > t)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 0.3 {
        // The alternating series converges slowly here; the value is 1 to double precision.
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * t * t).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Pearson chi-square test of observed counts against expected counts.
pub fn chi_square_test(observed: &[u64], expected: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(Error::InvalidParameter("need at least two matching bins".into()));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("expected counts must be positive".into()));
    }
    let stat: f64 = observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((stat, 1.0 - dist.cdf(stat)))
}
