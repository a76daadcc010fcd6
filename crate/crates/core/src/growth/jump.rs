//! Exit law of simple random walk from the centre of a square box.
//!
//! For the box `[-k, k]^2` the walk leaves through one of the four sides with
//! probability 1/4 each; on the side `x = k + 1` the exit ordinate `j` has
//! probability
//!
//! `H_k(j) = 1/(2k+2) * sum_{a odd} sin(a pi / 2) sin(a pi (j+k+1)/(2k+2)) / cosh(beta_a (k+1))`
//!
//! with `cosh beta_a = 2 - cos(a pi / (2k+2))`. The tables below store the
//! cumulative law of `j` conditioned on the side.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Largest tabulated half-width.
pub const MAX_HALF_WIDTH: usize = 127;

/// Unnormalised side law `H_k(j)`, `j = -k..=k`, as computed by the sine series.
pub fn side_exit_law(k: usize) -> Vec<f64> {
    let n1 = (2 * k + 2) as f64;
    let mut out = vec![0.0; 2 * k + 1];
    let mut a = 1usize;
    while a < 2 * k + 2 {
        let theta = a as f64 * PI / n1;
        let beta = (2.0 - theta.cos()).acosh();
        let damp = 1.0 / (beta * (k as f64 + 1.0)).cosh();
        if damp < 1e-300 {
            break;
        }
        let sign = if (a / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for (idx, slot) in out.iter_mut().enumerate() {
            // idx = j + k, so j + k + 1 = idx + 1.
            *slot += sign * (theta * (idx as f64 + 1.0)).sin() * damp;
        }
        a += 2;
    }
    for v in &mut out {
        *v = (*v / n1).max(0.0);
    }
    out
}

pub(crate) struct ExitTables {
    cdfs: Vec<Vec<f64>>,
}

impl ExitTables {
    fn build() -> Self {
        let mut cdfs = vec![Vec::new()];
        for k in 1..=MAX_HALF_WIDTH {
            let law = side_exit_law(k);
            let total: f64 = law.iter().sum();
            let mut acc = 0.0;
            let mut cdf: Vec<f64> = law
                .iter()
                .map(|p| {
                    acc += p / total;
                    acc
                })
                .collect();
            *cdf.last_mut().unwrap() = 1.0;
            cdfs.push(cdf);
        }
        ExitTables { cdfs }
    }

    pub(crate) fn get() -> &'static ExitTables {
        static T: OnceLock<ExitTables> = OnceLock::new();
        T.get_or_init(ExitTables::build)
    }

    /// Offset along the side, for a uniform `u` in `[0, 1)`.
    #[inline]
    pub(crate) fn sample_offset(&self, k: usize, u: f64) -> i32 {
        let cdf = &self.cdfs[k];
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        idx as i32 - k as i32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Exit law by Gauss-Seidel on the box with a unit at one boundary point.
    fn exit_law_by_relaxation(k: i32, j: i32) -> f64 {
        let n = (2 * k + 3) as usize;
        let idx = |x: i32, y: i32| ((y + k + 1) as usize) * n + (x + k + 1) as usize;
        let mut h = vec![0.0; n * n];
        h[idx(k + 1, j)] = 1.0;
        for _ in 0..20_000 {
            for y in -k..=k {
                for x in -k..=k {
                    h[idx(x, y)] = 0.25 * (h[idx(x + 1, y)] + h[idx(x - 1, y)] + h[idx(x, y + 1)] + h[idx(x, y - 1)]);
                }
            }
        }
        h[idx(0, 0)]
    }

    #[test]
    fn series_matches_relaxation() {
        for k in 1..=4usize {
            let law = side_exit_law(k);
            for j in -(k as i32)..=(k as i32) {
                let want = exit_law_by_relaxation(k as i32, j);
                assert!((law[(j + k as i32) as usize] - want).abs() < 1e-12, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn four_sides_carry_all_mass() {
        for k in [1usize, 2, 7, 30, 127] {
            let s: f64 = side_exit_law(k).iter().sum();
            assert!((4.0 * s - 1.0).abs() < 1e-12, "k={k}: {s}");
        }
    }

    #[test]
    fn smallest_box_law_is_exact() {
        let law = side_exit_law(1);
        assert!((law[0] - 1.0 / 16.0).abs() < 1e-15);
        assert!((law[1] - 1.0 / 8.0).abs() < 1e-15);
        assert!((law[2] - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_symmetric() {
        let t = ExitTables::get();
        assert_eq!(t.sample_offset(5, 0.0), -5);
        assert_eq!(t.sample_offset(5, 0.999_999_999), 5);
        assert_eq!(t.sample_offset(5, 0.5), 0);
    }
}
