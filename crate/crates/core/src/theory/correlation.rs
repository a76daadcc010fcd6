//! Point-correlation function of the lateness field for the disk preset.
//!
//! `F_p(z) = (|p|^2 - |z|^2) / |z - p|^2` is the Poisson kernel of the disk
//! through `p` normalised by `(1 / 2 pi) int F_p dtheta = 1`, and the flow
//! speed at radius `r` is `1 / (2 pi r)`.

use crate::error::{Error, Result};
use crate::harmonic::{GaussLegendre, QuadResult};
use crate::lattice::MassDistribution;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Queries closer than this to `p = q` are rejected.
pub const SINGULAR_RADIUS: f64 = 1e-6;

/// Ordered pair with `1 < |q| <= |p| < sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationQuery {
    pub p: [f64; 2],
    pub q: [f64; 2],
    /// The inputs arrived as `(q, p)`.
    pub swapped: bool,
}

impl CorrelationQuery {
    pub fn new(p: [f64; 2], q: [f64; 2]) -> Result<Self> {
        let (rp, rq) = (p[0].hypot(p[1]), q[0].hypot(q[1]));
        for r in [rp, rq] {
            if !(r > 1.0 && r < SQRT_2) {
                return Err(Error::OutsideAnnulus { radius: r });
            }
        }
        let d = (p[0] - q[0]).hypot(p[1] - q[1]);
        if d < SINGULAR_RADIUS {
            return Err(Error::SingularQuery { distance: d });
        }
        Ok(if rq <= rp { CorrelationQuery { p, q, swapped: false } } else { CorrelationQuery { p: q, q: p, swapped: true } })
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.p[0].hypot(self.p[1]), self.q[0].hypot(self.q[1]))
    }

    /// `theta_p - theta_q`.
    pub fn angle(&self) -> f64 {
        self.p[1].atan2(self.p[0]) - self.q[1].atan2(self.q[0])
    }

    /// Arrival times `(s_p, s_q)`.
    pub fn times(&self) -> (f64, f64) {
        let (rp, rq) = self.radii();
        (PI * (rp * rp - 1.0), PI * (rq * rq - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub value: f64,
    pub swapped: bool,
}

/// Closed form with principal logarithms.
pub fn g_disk_closed(p: [f64; 2], q: [f64; 2]) -> Result<CorrelationValue> {
    let cq = CorrelationQuery::new(p, q)?;
    let zp = Complex64::new(cq.p[0], cq.p[1]);
    let zq = Complex64::new(cq.q[0], cq.q[1]);
    let pbar = zp.conj();
    let one = Complex64::new(1.0, 0.0);
    let pq = pbar * zq;
    let logs = (one - zq.conj() / pbar).ln() - (one - one / pq).ln() - (one - (zq.norm_sqr() - 1.0) / pq).ln();
    let value = -(2.0 * PI).powi(3) * zp.norm() * zq.norm() * (pq * logs).re;
    Ok(CorrelationValue { value, swapped: cq.swapped })
}

/// Limit covariance of `(L, eta_p^eps)` and `(L, eta_q^eps)` as `eps -> 0` for
/// the disk preset, with Poisson kernels normalised against arclength. Equals
/// `g_disk_closed / ((2 pi)^2 |p| |q|)`.
pub fn g_disk_arclength(p: [f64; 2], q: [f64; 2]) -> Result<f64> {
    let g = g_disk_closed(p, q)?.value;
    Ok(g / ((2.0 * PI).powi(2) * p[0].hypot(p[1]) * q[0].hypot(q[1])))
}

/// Partial sum of the positive-frequency series with `terms` terms.
pub fn g_series(p: [f64; 2], q: [f64; 2], terms: usize) -> Result<f64> {
    let cq = CorrelationQuery::new(p, q)?;
    let (rp, rq) = cq.radii();
    let dt = cq.angle();
    let (a, b, c) = (rq / rp, 1.0 / (rp * rq), (rq * rq - 1.0) / (rp * rq));
    let (mut pa, mut pb, mut pc) = (1.0, 1.0, 1.0);
    let mut acc = 0.0;
    for j in 0..terms {
        pa *= a;
        pb *= b;
        pc *= c;
        // Re(e^{-i dt} e^{i (j+1) dt}) = cos(j dt).
        acc += (j as f64 * dt).cos() * (pa - pb - pc) / (j + 1) as f64;
    }
    Ok((2.0 * PI).powi(3) * (rp * rq).powi(2) * acc)
}

fn kernel(pole: [f64; 2], z: [f64; 2]) -> f64 {
    let r2p = pole[0] * pole[0] + pole[1] * pole[1];
    let r2z = z[0] * z[0] + z[1] * z[1];
    (r2p - r2z) / ((z[0] - pole[0]).powi(2) + (z[1] - pole[1]).powi(2))
}

/// `int_0^{2 pi} F_p F_q dtheta` on the circle of radius `r < |q|`, with
/// the peak of `F_q` subtracted using `(1 / 2 pi) int F_q = 1`.
fn ring(p: [f64; 2], q: [f64; 2], rp: f64, rq: f64, r: f64) -> f64 {
    let n_need = 30.0 * (rq / (rq - r)).max(rp / (rp - r));
    let n = (n_need.ceil() as usize).clamp(256, 1 << 20);
    let tq = q[1].atan2(q[0]);
    let near = [r * tq.cos(), r * tq.sin()];
    let fp_near = kernel(p, near);
    let mut acc = 0.0;
    for k in 0..n {
        let t = tq + 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let z = [r * t.cos(), r * t.sin()];
        acc += kernel(q, z) * (kernel(p, z) - fp_near);
    }
    2.0 * PI * (fp_near + acc / n as f64)
}

/// `g(p, q) = (1 / (v_p v_q)) int_{D_{s_*}} F_p F_q (1 - sigma_{s_*})` by
/// direct quadrature: Gauss-Legendre in the radius with panels graded toward
/// the outer circle, trapezoid in the angle.
pub fn g_general(p: [f64; 2], q: [f64; 2], md: &MassDistribution) -> Result<QuadResult> {
    if !md.is_disk_preset() {
        return Err(Error::Unsupported("g_general needs caller-supplied Poisson kernels outside the disk preset".into()));
    }
    let cq = CorrelationQuery::new(p, q)?;
    let (rp, rq) = cq.radii();
    let rho = (rq * rq - 1.0).sqrt();
    let gl = GaussLegendre::new(24);
    let eval = |grading: usize| -> f64 {
        let mut outer = vec![1.0];
        let d = rq - 1.0;
        for k in 1..=grading {
            outer.push(rq - d * 0.5f64.powi(k as i32));
        }
        outer.push(rq);
        let mut total = 0.0;
        for (r, w) in gl.composite_nodes(&[0.0, rho], 2) {
            total -= w * r * ring(cq.p, cq.q, rp, rq, r);
        }
        for (r, w) in gl.composite_nodes(&outer, 1) {
            total += w * r * ring(cq.p, cq.q, rp, rq, r);
        }
        (2.0 * PI).powi(2) * rp * rq * total
    };
    let coarse = eval(10);
    let fine = eval(16);
    Ok(QuadResult { value: fine, error_estimate: (fine - coarse).abs() })
}

/// `int int eta_p^eps(x) g(x, y) eta_q^eps(y) dx dy` with polar
/// Gauss-Legendre rules around each centre. Pairs within the singular radius
/// are skipped.
pub fn g_smoothed(p: [f64; 2], q: [f64; 2], eps: f64, radial: usize, angular: usize) -> Result<f64> {
    CorrelationQuery::new(p, q)?;
    let gl = GaussLegendre::new(radial);
    let bump = |rho: f64| 6.0 / (PI * eps * eps) * (1.0 - rho * rho / (eps * eps)).powi(5);
    let cloud = |c: [f64; 2]| -> Vec<([f64; 2], f64)> {
        let mut out = Vec::with_capacity(radial * angular);
        for (rho, w) in gl.composite_nodes(&[0.0, eps], 1) {
            for k in 0..angular {
                let t = 2.0 * PI * (k as f64 + 0.5) / angular as f64;
                out.push(([c[0] + rho * t.cos(), c[1] + rho * t.sin()], w * rho * bump(rho) * 2.0 * PI / angular as f64));
            }
        }
        out
    };
    let (xs, ys) = (cloud(p), cloud(q));
    let mut acc = 0.0;
    for &(x, wx) in &xs {
        for &(y, wy) in &ys {
            match g_disk_closed(x, y) {
                Ok(g) => acc += wx * wy * g.value,
                Err(Error::SingularQuery { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(acc)
}
