//! Closed-form spatial integrals for the disk preset.
//!
//! `psi_t` is the Fourier harmonic extension of `u` from the circle of radius
//! `R_t = sqrt(1 + t/pi)`. Products are integrated against `1 - sigma_t` by
//! Parseval in the angle and exact radial monomial integrals.

use crate::error::Result;
use crate::harmonic::{sample_circle, solve_disk_dirichlet};
use crate::lattice::disk_flow_radius;
use crate::stats::TestFunction;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

pub const DISK_MODES: usize = 512;
pub const DISK_SAMPLES: usize = 2048;

/// Fourier coefficients `a_0..=a_M` of `psi_t` and its radius.
#[derive(Debug, Clone)]
pub struct DiskHarmonic {
    pub radius: f64,
    pub coeffs: Vec<Complex64>,
}

impl DiskHarmonic {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

/// `psi_t` for one test function, memoised by time.
pub struct DiskSolver<'a> {
    u: &'a TestFunction,
    cache: HashMap<u64, DiskHarmonic>,
}

impl<'a> DiskSolver<'a> {
    pub fn new(u: &'a TestFunction) -> Self {
        DiskSolver { u, cache: HashMap::new() }
    }

    pub fn function(&self) -> &'a TestFunction {
        self.u
    }

    pub fn psi(&mut self, t: f64) -> Result<&DiskHarmonic> {
        if !self.cache.contains_key(&t.to_bits()) {
            let r = disk_flow_radius(t);
            let samples = sample_circle(r, DISK_SAMPLES, |p| self.u.eval(p));
            let h = solve_disk_dirichlet(r, &samples, DISK_MODES)?;
            self.cache.insert(t.to_bits(), DiskHarmonic { radius: r, coeffs: h.coeffs().to_vec() });
        }
        Ok(&self.cache[&t.to_bits()])
    }
}

/// `int_0^{R_t} (1 - sigma_t)(r) r^{2k+1} dr` with `1 - sigma_t` equal to
/// -1 on `[0, rho]`, 0 on `[rho, 1]`, 1 on `[1, R_t]` and `rho^2 = t/pi`.
fn radial_weight(t: f64, k: usize) -> f64 {
    let rho2 = (t / PI).min(1.0);
    let big = 1.0 + t / PI;
    let e = (k + 1) as i32;
    (big.powi(e) - 1.0 - rho2.powi(e)) / (2 * k + 2) as f64
}

/// `int_{D_t} psi phi (1 - sigma_t)` where `psi`, `phi` are harmonic on
/// disks containing `D_t`.
pub fn pair_integral(a: &DiskHarmonic, b: &DiskHarmonic, t: f64) -> f64 {
    let scale = a.radius * b.radius;
    let mut acc = 0.0;
    let mut inv = 1.0;
    for k in 0..a.coeffs.len().min(b.coeffs.len()) {
        let c = (a.coeffs[k] * b.coeffs[k].conj()).re;
        let mult = if k == 0 { 1.0 } else { 2.0 };
        acc += mult * c * radial_weight(t, k) * inv;
        inv /= scale;
    }
    2.0 * PI * acc
}

/// Times `[t0, t1]` within `[0, horizon]` during which `partial D_t` meets the
/// support of `u`; `None` when it never does.
pub fn activation_window(u: &TestFunction, horizon: f64) -> Option<[f64; 2]> {
    let [r0, r1] = u.support().radial_range();
    let t0 = (PI * (r0 * r0 - 1.0)).max(0.0);
    let t1 = (PI * (r1 * r1 - 1.0)).min(horizon);
    (t1 > t0).then_some([t0, t1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_squared_weight_matches_polar_integral() {
        // int x^2 (1 - sigma_pi) = -pi/4 + (pi/4)(4 - 1) = pi/2.
        let u = TestFunction::x();
        let mut sv = DiskSolver::new(&u);
        let h = sv.psi(PI).unwrap().clone();
        assert!((pair_integral(&h, &h, PI) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_weight() {
        let u = TestFunction::one();
        let mut sv = DiskSolver::new(&u);
        for t in [0.3, 1.0, PI] {
            let h = sv.psi(t).unwrap().clone();
            assert!(pair_integral(&h, &h, t).abs() < 1e-13);
        }
    }

    #[test]
    fn mixed_radii_against_direct_quadrature() {
        // psi = x on D_1 and phi = x^2 - y^2 on any disk: int over D_{0.5}.
        let u = TestFunction::x2_minus_y2();
        let v = TestFunction::x2_minus_y2();
        let mut su = DiskSolver::new(&u);
        let mut sv = DiskSolver::new(&v);
        let a = su.psi(1.0).unwrap().clone();
        let b = sv.psi(0.5).unwrap().clone();
        // int r^4 cos^2(2 theta) over annulus weights: (pi) * int w r^5 dr.
        let t: f64 = 0.5;
        let (rho2, big) = (t / PI, 1.0 + t / PI);
        let want = PI * (big.powi(3) - 1.0 - rho2.powi(3)) / 6.0;
        assert!((pair_integral(&a, &b, t) - want).abs() < 1e-12);
    }

    #[test]
    fn window_of_bump() {
        let u = TestFunction::bump([1.2, 0.0], 0.05);
        let w = activation_window(&u, PI).unwrap();
        assert!((w[0] - PI * (1.15f64.powi(2) - 1.0)).abs() < 1e-12);
        assert!((w[1] - PI * (1.25f64.powi(2) - 1.0)).abs() < 1e-12);
        assert!(activation_window(&TestFunction::bump([0.2, 0.0], 0.1), PI).is_none());
    }
}
