//! Welch's unequal-variance t-test and small descriptive helpers.

use statrs::function::beta::beta_reg;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("t-test needs at least two observations per sample (got {a} and {b})")]
pub struct SampleTooSmall {
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (÷ n−1).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Population standard deviation (÷ n).
pub fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Welch's t-test with Welch–Satterthwaite degrees of freedom.
///
/// When both samples have zero variance the statistic is undefined; the
/// p-value is then 1 for equal means and 0 otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult, SampleTooSmall> {
    if a.len() < 2 || b.len() < 2 {
        return Err(SampleTooSmall { a: a.len(), b: b.len() });
    }
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a) / a.len() as f64, sample_variance(b) / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        let df = (a.len() + b.len() - 2) as f64;
        return Ok(if ma == mb {
            WelchResult { t: 0.0, df, p: 1.0 }
        } else {
            WelchResult {
                t: if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY },
                df,
                p: 0.0,
            }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    // Two-sided tail of Student's t: I_{df/(df+t²)}(df/2, 1/2).
    let p = if t == 0.0 {
        1.0
    } else {
        beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
    };
    Ok(WelchResult { t, df, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
    }

    #[test]
    fn zero_variance_rule() {
        assert_eq!(welch_t_test(&[0.0; 4], &[1.0; 4]).unwrap().p, 0.0);
        assert_eq!(welch_t_test(&[0.5; 3], &[0.5; 2]).unwrap().p, 1.0);
    }

    #[test]
    fn clearly_separated() {
        let r = welch_t_test(&[2.1, 2.0, 1.9, 2.0], &[1.0, 1.1, 0.9, 1.0]).unwrap();
        assert!(r.p < 0.001);
    }

    #[test]
    fn too_small() {
        assert_eq!(welch_t_test(&[1.0], &[1.0, 2.0]), Err(SampleTooSmall { a: 1, b: 2 }));
    }

    #[test]
    fn population_std_example() {
        assert!((population_std(&[0.6, 0.8]) - 0.1).abs() < 1e-12);
    }
}
