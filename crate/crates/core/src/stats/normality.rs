use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sample moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub skew: f64,
    pub excess_kurtosis: f64,
}

impl Summary {
    pub fn of(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::TooFewSamples { got: x.len(), need: 2 });
        }
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in x {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let var = m2 / (n - 1.0);
        let (b2, b3, b4) = (m2 / n, m3 / n, m4 / n);
        let (skew, kurt) = if b2 > 0.0 { (b3 / b2.powf(1.5), b4 / (b2 * b2) - 3.0) } else { (0.0, 0.0) };
        Ok(Summary { n: x.len(), mean, var, se: (var / n).sqrt(), skew, excess_kurtosis: kurt })
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Kolmogorov tail `Q(l) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 l^2)`.
pub fn kolmogorov_q(l: f64) -> f64 {
    if l < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let t = (-2.0 * (j * j) as f64 * l * l).exp();
        s += if j % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// KS statistic against `N(mean, sd^2)` and its asymptotic p-value with
/// the `sqrt(n) + 0.12 + 0.11/sqrt(n)` small-sample factor.
pub fn ks_normal(x: &[f64], mean: f64, sd: f64) -> (f64, f64) {
    let mut v: Vec<f64> = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in v.iter().enumerate() {
        let f = normal_cdf((xi - mean) / sd);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let rn = n.sqrt();
    (d, kolmogorov_q((rn + 0.12 + 0.11 / rn) * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub summary: Summary,
    pub ks_stat: f64,
    pub ks_p: f64,
    /// All samples equal; the KS fields are then meaningless.
    pub degenerate: bool,
}

pub const MIN_NORMALITY_SAMPLES: usize = 100;

pub fn normality_report(x: &[f64]) -> Result<NormalityReport> {
    if x.len() < MIN_NORMALITY_SAMPLES {
        return Err(Error::TooFewSamples { got: x.len(), need: MIN_NORMALITY_SAMPLES });
    }
    let summary = Summary::of(x)?;
    if summary.var <= 0.0 || x.iter().all(|&v| v == x[0]) {
        return Ok(NormalityReport { summary, ks_stat: 0.0, ks_p: 1.0, degenerate: true });
    }
    let (ks_stat, ks_p) = ks_normal(x, summary.mean, summary.var.sqrt());
    Ok(NormalityReport { summary, ks_stat, ks_p, degenerate: false })
}

/// Unbiased sample covariance.
pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n as f64 - 1.0)
}

/// Bootstrap standard error of a paired statistic, resampling index pairs.
pub fn bootstrap_se_paired(x: &[f64], y: &[f64], resamples: usize, seed: u64, stat: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 || resamples < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    let mut vals = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for k in 0..n {
            let i = rng.gen_range(0..n);
            bx[k] = x[i];
            by[k] = y[i];
        }
        vals.push(stat(&bx, &by));
    }
    Summary::of(&vals).map(|s| s.var.sqrt()).unwrap_or(0.0)
}

/// Bootstrap standard error of the sample variance.
pub fn bootstrap_se_variance(x: &[f64], resamples: usize, seed: u64) -> f64 {
    bootstrap_se_paired(x, x, resamples, seed, |a, _| Summary::of(a).map(|s| s.var).unwrap_or(0.0))
}

/// Bootstrap standard error of the sample covariance.
pub fn bootstrap_se_covariance(x: &[f64], y: &[f64], resamples: usize, seed: u64) -> f64 {
    bootstrap_se_paired(x, y, resamples, seed, covariance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_muller(rng: &mut impl Rng) -> f64 {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Standard table: Q(1.3581) = 0.05, Q(1.6276) = 0.01.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn summary_of_small_sample() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.var - 5.0 / 3.0).abs() < 1e-15);
        assert!(s.skew.abs() < 1e-15);
    }

    #[test]
    fn constant_samples_are_degenerate() {
        let r = normality_report(&[0.3; 200]).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(normality_report(&[1.0; 50]).is_err());
    }

    #[test]
    fn calibration_against_a_normal_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 100;
        let mut pass = 0;
        for _ in 0..trials {
            let x: Vec<f64> = (0..10_000).map(|_| 2.0 + 0.5 * box_muller(&mut rng)).collect();
            if normality_report(&x).unwrap().ks_p > 0.01 {
                pass += 1;
            }
        }
        assert!(pass >= 95, "{pass}");
    }

    #[test]
    fn uniform_samples_fail_normality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        assert!(normality_report(&x).unwrap().ks_p < 0.01);
    }

    #[test]
    fn bootstrap_se_of_variance_is_close_to_theory() {
        // For normal data, sd(var) ~ sigma^2 sqrt(2/(n-1)).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..2000).map(|_| box_muller(&mut rng)).collect();
        let se = bootstrap_se_variance(&x, 400, 1);
        let theory = (2.0f64 / 1999.0).sqrt();
        assert!((se / theory - 1.0).abs() < 0.2, "{se} {theory}");
    }

    #[test]
    fn covariance_of_identical_is_variance() {
        let x = [1.0, 4.0, 2.0, 8.0];
        assert!((covariance(&x, &x) - Summary::of(&x).unwrap().var).abs() < 1e-14);
    }
}
