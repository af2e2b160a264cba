//! Z tests and trend fits used when summarizing benchmark runs.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    One,
    Two,
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

fn p_value(z: f64, tails: Tails) -> f64 {
    let upper = 1.0 - normal_cdf(z.abs());
    match tails {
        Tails::One => upper,
        Tails::Two => (2.0 * upper).min(1.0),
    }
}

/// Two-proportion Z test with a pooled proportion. Returns `(z, p)`.
pub fn z_test_proportions(p1: f64, n1: usize, p2: f64, n2: usize, tails: Tails) -> (f64, f64) {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    if n1 == 0 || n2 == 0 {
        return (0.0, 1.0);
    }
    let pooled = (p1 * n1f + p2 * n2f) / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 || !se.is_finite() {
        return (0.0, 1.0);
    }
    let z = (p1 - p2) / se;
    (z, p_value(z, tails))
}

/// Sample mean and (unbiased) standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Two-sample Z test on means with pooled variance. Returns `(z, p)`.
pub fn z_test_means(a: &[f64], b: &[f64], tails: Tails) -> (f64, f64) {
    if a.len() < 2 || b.len() < 2 {
        return (0.0, 1.0);
    }
    let (m1, s1) = mean_sd(a);
    let (m2, s2) = mean_sd(b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let pooled = ((n1 - 1.0) * s1 * s1 + (n2 - 1.0) * s2 * s2) / (n1 + n2 - 2.0);
    let se = (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
    if se == 0.0 {
        return (0.0, 1.0);
    }
    let z = (m1 - m2) / se;
    (z, p_value(z, tails))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendModel {
    /// `a = c ln(rho) + d`
    Log,
    /// `t = c omega + d`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendFit {
    pub c: f64,
    pub d: f64,
    pub model: TrendModel,
    /// First grid point whose accuracy falls below 0.95 (log model only).
    pub rho_star: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trend {
    Fitted(TrendFit),
    /// Accuracy never dropped below the knee threshold.
    NoDecay,
    /// Fewer than three usable points.
    Insufficient,
}

pub const KNEE_ACCURACY: f64 = 0.95;

/// Ordinary least squares `y = c x + d`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c = sxy / sxx;
    Some((c, my - c * mx))
}

/// Fits the trend of `(x, y)` samples.
///
/// For the log model the samples are sorted by increasing `x` (noise) and
/// only the region from the knee on is fitted, widened backwards to three
/// points when needed. The linear model uses every sample.
pub fn fit_trend(samples: &[(f64, f64)], model: TrendModel) -> Trend {
    let mut pts: Vec<(f64, f64)> = samples.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    match model {
        TrendModel::Linear => {
            if pts.len() < 3 {
                return Trend::Insufficient;
            }
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            match least_squares(&xs, &ys) {
                Some((c, d)) => Trend::Fitted(TrendFit { c, d, model, rho_star: None, points: pts.len() }),
                None => Trend::Insufficient,
            }
        }
        TrendModel::Log => {
            pts.retain(|(x, _)| *x > 0.0);
            if pts.len() < 3 {
                return Trend::Insufficient;
            }
            let Some(knee) = pts.iter().position(|(_, y)| *y < KNEE_ACCURACY) else {
                return Trend::NoDecay;
            };
            let start = knee.min(pts.len() - 3);
            let xs: Vec<f64> = pts[start..].iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = pts[start..].iter().map(|p| p.1).collect();
            match least_squares(&xs, &ys) {
                Some((c, d)) => {
                    Trend::Fitted(TrendFit { c, d, model, rho_star: Some(pts[knee].0), points: xs.len() })
                }
                None => Trend::Insufficient,
            }
        }
    }
}
