//! Small sample-statistics helpers used by the calibration reports.

use serde::Serialize;

/// Sample mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            variance: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        variance,
        stderr: (variance / n as f64).sqrt(),
    }
}

/// Standard error of the unbiased sample variance, from the sample fourth
/// central moment.
pub fn variance_stderr(xs: &[f64]) -> f64 {
    let s = summarize(xs);
    let n = s.n as f64;
    let m4 = xs.iter().map(|x| (x - s.mean).powi(4)).sum::<f64>() / n;
    ((m4 - s.variance * s.variance * (n - 3.0) / (n - 1.0)) / n)
        .max(0.0)
        .sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov tail probability with Stephens' small-sample
/// correction.
pub fn kolmogorov_sf(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsTest {
    let d = ks_statistic(samples, cdf);
    KsTest {
        statistic: d,
        p_value: kolmogorov_sf(d, samples.len()),
    }
}

/// KS test of uniformity on `[0, 1]`.
pub fn ks_uniform(samples: &[f64]) -> KsTest {
    ks_test(samples, |x| x.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_known_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_uniform_grid_has_small_statistic() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let t = ks_uniform(&xs);
        assert!((t.statistic - 0.0005).abs() < 1e-12);
        assert!(t.p_value > 0.999);
    }

    #[test]
    fn shifted_sample_is_rejected() {
        let xs: Vec<f64> = (0..500).map(|i| (i as f64 / 500.0).powi(2)).collect();
        assert!(ks_uniform(&xs).p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Asymptotic Kolmogorov distribution: P(K > 1.36) ~ 0.0494.
        let n = 1_000_000;
        let d = 1.36 / (n as f64).sqrt();
        assert!((kolmogorov_sf(d, n) - 0.0494).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0, 10), 1.0);
    }
}
