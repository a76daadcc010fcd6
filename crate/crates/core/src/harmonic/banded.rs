//! Banded Cholesky factorisation for symmetric positive definite systems.

use crate::error::{Error, Result};

/// Lower factor `L` of `A = L L^T`, stored by rows over the band.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // Row i holds L[i, i-bw ..= i] at offsets 0..=bw.
    data: Vec<f64>,
}

impl BandedCholesky {
    /// Factor the matrix whose lower band is given by `entry(i, j)` for
    /// `i - bw <= j <= i`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut sum = entry(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    sum -= data[ri + k] * data[rj + k];
                }
                if j == i {
                    if sum <= 0.0 {
                        return Err(Error::NonConvergence { what: "banded Cholesky (matrix not positive definite)", residual: sum });
                    }
                    data[ri + i] = sum.sqrt();
                } else {
                    data[ri + j] = sum / data[rj + j];
                }
            }
        }
        Ok(BandedCholesky { n, bw, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let ri = i * w + bw - i;
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.data[ri + k] * b[k];
            }
            b[i] = s / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + bw - i;
            b[i] /= self.data[ri + i];
            let bi = b[i];
            for k in i.saturating_sub(bw)..i {
                b[k] -= self.data[ri + k] * bi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_exactly() {
        let n = 50;
        let f = BandedCholesky::factor(n, 1, |i, j| if i == j { 2.0 } else { -1.0 }).unwrap();
        // A x = e_0 has x_i = (n - i) / (n + 1).
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        f.solve_in_place(&mut b);
        for (i, v) in b.iter().enumerate() {
            assert!((v - (n - i) as f64 / (n + 1) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn matches_dense_multiply() {
        let n = 30;
        let bw = 4;
        let a = |i: usize, j: usize| -> f64 {
            let d = i.abs_diff(j);
            if d == 0 {
                10.0 + i as f64 * 0.1
            } else if d <= bw {
                1.0 / (1.0 + d as f64 + (i + j) as f64 * 0.01)
            } else {
                0.0
            }
        };
        let f = BandedCholesky::factor(n, bw, a).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a(i, j) * x[j]).sum()).collect();
        f.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        assert!(BandedCholesky::factor(2, 1, |i, j| if i == j { 1.0 } else { 2.0 }).is_err());
    }
}
