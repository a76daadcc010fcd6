use crate::error::{Error, Result};

/// Poisson kernel of the disk `B(0, |p|)` with pole at the boundary point `p`:
/// `F_p(r e^{i t}) = sum_n (r/r_p)^{|n|} e^{i n (t - t_p)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernelDisk {
    pub pole: [f64; 2],
}

impl PoissonKernelDisk {
    pub fn new(pole: [f64; 2]) -> Self {
        PoissonKernelDisk { pole }
    }

    pub fn radius(&self) -> f64 {
        self.pole[0].hypot(self.pole[1])
    }

    fn ratio_and_angle(&self, z: [f64; 2]) -> Result<(f64, f64)> {
        let rp = self.radius();
        let rho = z[0].hypot(z[1]) / rp;
        if rho >= 1.0 {
            return Err(Error::OutsideDisk { radius: rp });
        }
        let dt = z[1].atan2(z[0]) - self.pole[1].atan2(self.pole[0]);
        Ok((rho, dt))
    }

    /// Series truncated after `n_trunc` positive modes.
    pub fn eval_series(&self, z: [f64; 2], n_trunc: usize) -> Result<f64> {
        let (rho, dt) = self.ratio_and_angle(z)?;
        let mut acc = 1.0;
        let mut pw = 1.0;
        for n in 1..=n_trunc {
            pw *= rho;
            acc += 2.0 * pw * (n as f64 * dt).cos();
        }
        Ok(acc)
    }

    /// `(r_p^2 - r^2) / (r_p^2 - 2 r r_p cos(t - t_p) + r^2)`.
    pub fn eval(&self, z: [f64; 2]) -> Result<f64> {
        let (rho, dt) = self.ratio_and_angle(z)?;
        Ok((1.0 - rho * rho) / (1.0 - 2.0 * rho * dt.cos() + rho * rho))
    }

    /// Bound `2 rho^{N+1} / (1 - rho)` on the truncation error.
    pub fn truncation_bound(&self, z: [f64; 2], n_trunc: usize) -> Result<f64> {
        let (rho, _) = self.ratio_and_angle(z)?;
        Ok(2.0 * rho.powi(n_trunc as i32 + 1) / (1.0 - rho))
    }

    /// Smallest truncation whose bound is at most `tol`.
    pub fn terms_for(&self, z: [f64; 2], tol: f64) -> Result<usize> {
        let (rho, _) = self.ratio_and_angle(z)?;
        if rho == 0.0 {
            return Ok(0);
        }
        let n = ((tol * (1.0 - rho) / 2.0).ln() / rho.ln() - 1.0).ceil().max(0.0);
        Ok(n as usize)
    }
}

/// Truncated-series Poisson kernel of `B(0, |p|)` at `z`.
pub fn poisson_kernel_disk(p: [f64; 2], z: [f64; 2], n_trunc: usize) -> Result<f64> {
    PoissonKernelDisk::new(p).eval_series(z, n_trunc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn series_matches_closed_form_within_bound() {
        let k = PoissonKernelDisk::new([1.2 * 0.3f64.cos(), 1.2 * 0.3f64.sin()]);
        for z in [[0.0, 0.0], [0.5, 0.2], [-0.9, 0.6], [1.0, 0.3]] {
            for n in [5usize, 20, 80] {
                let err = (k.eval_series(z, n).unwrap() - k.eval(z).unwrap()).abs();
                assert!(err <= k.truncation_bound(z, n).unwrap() + 1e-14);
            }
            let n = k.terms_for(z, 1e-12).unwrap();
            assert!((k.eval_series(z, n).unwrap() - k.eval(z).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn kernel_averages_to_one() {
        let k = PoissonKernelDisk::new([1.5, 0.0]);
        let n = 512;
        let r = 1.1;
        let mean: f64 = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                k.eval([r * t.cos(), r * t.sin()]).unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outside_points_are_rejected() {
        assert!(poisson_kernel_disk([1.0, 0.0], [1.0, 0.0], 10).is_err());
        assert!(poisson_kernel_disk([1.0, 0.0], [0.0, 1.5], 10).is_err());
    }
}
