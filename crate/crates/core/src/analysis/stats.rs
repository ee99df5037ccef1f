//! Confidence intervals, least squares and goodness-of-fit helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Result, SimError};

/// Two-sided normal quantile for confidence level `conf`.
pub fn z_value(conf: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + conf / 2.0)
}

/// Two-sided Student-t quantile with `df` degrees of freedom.
pub fn t_value(conf: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(0.5 + conf / 2.0)
}

/// A proportion with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub n: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn wilson(successes: u64, n: u64, conf: f64) -> Self {
        if n == 0 {
            return Proportion {
                successes,
                n,
                estimate: f64::NAN,
                ci_low: 0.0,
                ci_high: 1.0,
            };
        }
        let z = z_value(conf);
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let hw = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        Proportion {
            successes,
            n,
            estimate: p,
            ci_low: (center - hw).max(0.0).min(p),
            ci_high: (center + hw).min(1.0).max(p),
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0
    }
}

/// Ordinary least squares fit of `y = intercept + slope·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    pub n: usize,
}

impl LinearFit {
    /// Confidence interval for the slope from the Student-t quantile.
    pub fn slope_ci(&self, conf: f64) -> (f64, f64) {
        if self.n < 3 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let hw = t_value(conf, (self.n - 2) as f64) * self.slope_stderr;
        (self.slope - hw, self.slope + hw)
    }
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(SimError::InsufficientData(format!("least squares needs >= 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::InsufficientData("least squares needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        n,
    })
}

/// Ratio-of-sums estimate `Σy / Σx` with its delta-method standard error.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> Result<(f64, f64)> {
    let n = num.len();
    if n != den.len() || n < 1 {
        return Err(SimError::InsufficientData("ratio estimate needs at least one pair".into()));
    }
    let sy: f64 = num.iter().sum();
    let sx: f64 = den.iter().sum();
    if sx <= 0.0 {
        return Err(SimError::InsufficientData("ratio estimate has zero denominator".into()));
    }
    let r = sy / sx;
    if n < 2 {
        return Ok((r, f64::NAN));
    }
    let nf = n as f64;
    let mean_x = sx / nf;
    let ss: f64 = num.iter().zip(den).map(|(y, x)| (y - r * x).powi(2)).sum();
    let se = (ss / (nf * (nf - 1.0))).sqrt() / mean_x;
    Ok((r, se))
}

/// One-sample Kolmogorov–Smirnov test. Returns `(D, p-value)` using the
/// asymptotic Kolmogorov distribution with Stephens' small-sample correction.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> (f64, f64) {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    (d, kolmogorov_sf(lambda))
}

fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        // 8 of 10 at 95%: (0.4902, 0.9433) to four places.
        let p = Proportion::wilson(8, 10, 0.95);
        assert!((p.ci_low - 0.4902).abs() < 1e-4, "{p:?}");
        assert!((p.ci_high - 0.9433).abs() < 1e-4, "{p:?}");
        let zero = Proportion::wilson(0, 100, 0.95);
        assert_eq!(zero.ci_low, 0.0);
        assert!(zero.ci_high > 0.0 && zero.ci_high < 0.05);
    }

    #[test]
    fn quantiles() {
        assert!((z_value(0.95) - 1.959964).abs() < 1e-5);
        assert!((z_value(0.99) - 2.575829).abs() < 1e-5);
        assert!((t_value(0.95, 4.0) - 2.776445).abs() < 1e-5);
    }

    #[test]
    fn exact_line_fits_perfectly() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(ols(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn ratio_of_constants_has_zero_error() {
        let (r, se) = ratio_estimate(&[1.0; 5], &[2.0; 5]).unwrap();
        assert_eq!(r, 0.5);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn ks_rejects_wrong_distribution() {
        let xs: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.5) / 2000.0).collect();
        let (_, p_ok) = ks_test(&xs, |x| x.clamp(0.0, 1.0));
        assert!(p_ok > 0.5);
        let (_, p_bad) = ks_test(&xs, |x| (x * x).clamp(0.0, 1.0));
        assert!(p_bad < 1e-6);
    }
}
