use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Harmonic function on the disk of radius `R` given by
/// `sum_{|n| <= M} a_n (r/R)^{|n|} e^{i n theta}`, with `a_{-n} = conj(a_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierHarmonic {
    radius: f64,
    coeffs: Vec<Complex64>,
}

/// `n` equally spaced samples `u(R cos t_k, R sin t_k)`, `t_k = 2 pi k / n`.
pub fn sample_circle(radius: f64, n: usize, u: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            u([radius * t.cos(), radius * t.sin()])
        })
        .collect()
}

/// Harmonic extension into the disk of boundary data sampled on its circle.
/// Requires at least four samples per retained mode.
pub fn solve_disk_dirichlet(radius: f64, samples: &[f64], n_modes: usize) -> Result<FourierHarmonic> {
    let need = 4 * n_modes.max(1);
    if samples.len() < need {
        return Err(Error::TooFewSamples { got: samples.len(), need });
    }
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let coeffs = buf[..=n_modes].iter().map(|c| c / n as f64).collect();
    Ok(FourierHarmonic { radius, coeffs })
}

impl FourierHarmonic {
    pub fn from_coeffs(radius: f64, coeffs: Vec<Complex64>) -> Self {
        FourierHarmonic { radius, coeffs }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_n` for any integer `n`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        match self.coeffs.get(k) {
            None => Complex64::new(0.0, 0.0),
            Some(c) if n >= 0 => *c,
            Some(c) => c.conj(),
        }
    }

    /// Non-negative modes `a_0 ..= a_M`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval_polar(&self, r: f64, theta: f64) -> f64 {
        let z = Complex64::from_polar(r / self.radius, theta);
        let mut zn = z;
        let mut acc = 0.0;
        for c in &self.coeffs[1..] {
            acc += (c * zn).re;
            zn *= z;
        }
        self.coeffs[0].re + 2.0 * acc
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.eval_polar(p[0].hypot(p[1]), p[1].atan2(p[0]))
    }
}
