//! Monte Carlo re-integration of the ordered lateness covariance for the disk
//! preset. Harmonic extensions come from trapezoidal Poisson integrals rather
//! than Fourier series, so the two routes share only the test function.

use super::disk::activation_window;
use crate::error::{Error, Result};
use crate::lattice::{disk_flow_radius, MassDistribution};
use crate::stats::{Support, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
}

/// `(1 / 2 pi) int (R^2 - r^2) / |x - R e^{i t}|^2 u(R e^{i t}) dt` by the
/// trapezoid rule, refined as `x` nears the circle. Nodes outside the arc where
/// the circle meets a ball support are skipped.
pub fn poisson_extend(u: &TestFunction, radius: f64, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let gap = radius - r2.sqrt();
    if gap <= 0.0 {
        return u.eval(x);
    }
    let n = ((40.0 * radius / gap).ceil() as usize).clamp(2048, 1 << 16);
    let dt = 2.0 * PI / n as f64;
    let (k0, k1) = match arc(u, radius) {
        Some(None) => return 0.0,
        Some(Some((mid, half))) => {
            let lo = ((mid - half) / dt).floor() as i64;
            let hi = ((mid + half) / dt).ceil() as i64;
            (lo, hi.min(lo + n as i64 - 1))
        }
        None => (0, n as i64 - 1),
    };
    let mut acc = 0.0;
    for k in k0..=k1 {
        let t = k as f64 * dt;
        let b = [radius * t.cos(), radius * t.sin()];
        let d2 = (x[0] - b[0]).powi(2) + (x[1] - b[1]).powi(2);
        acc += (radius * radius - r2) / d2 * u.eval(b);
    }
    acc / n as f64
}

/// Angular arc `(centre, half-width)` of the circle inside a ball support:
/// `Some(None)` when they miss, `None` when the support is not a ball.
fn arc(u: &TestFunction, radius: f64) -> Option<Option<(f64, f64)>> {
    match u.support() {
        Support::Ball { center, radius: e } => {
            let c = center[0].hypot(center[1]);
            if c <= e {
                return None;
            }
            let cos = (radius * radius + c * c - e * e) / (2.0 * radius * c);
            if cos >= 1.0 {
                return Some(None);
            }
            Some(Some((center[1].atan2(center[0]), cos.max(-1.0).acos())))
        }
        _ => None,
    }
}

fn weight(t: f64, r: f64) -> f64 {
    if r <= (t / PI).sqrt() {
        -1.0
    } else if r <= 1.0 {
        0.0
    } else {
        1.0
    }
}

/// Estimate of `int_0^s ds' int_0^{s'} ds'' int_{D_{s''}} (psi_{s'} phi_{s''} + psi_{s''} phi_{s'})(1 - sigma_{s''})`
/// from uniform samples of `(s', s'', x)`.
///
/// When both functions are bumps, `x` is stratified into a disk around the
/// bumps (three quarters of the samples) and the rest of `D_{s''}`; each
/// stratum is sampled uniformly.
pub fn lateness_covariance_mc(
    u: &TestFunction,
    v: &TestFunction,
    s: f64,
    md: &MassDistribution,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !md.is_disk_preset() {
        return Err(Error::Unsupported("Monte Carlo oracle needs the disk preset".into()));
    }
    md.check_time(s)?;
    if samples < 8 {
        return Err(Error::TooFewSamples { got: samples, need: 8 });
    }
    let windows: Vec<[f64; 2]> = [u, v].iter().filter_map(|f| activation_window(f, s)).collect();
    if windows.is_empty() {
        return Ok(McEstimate { mean: 0.0, se: 0.0, samples });
    }
    let lo = windows.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min);
    let hi = windows.iter().map(|w| w[1]).fold(0.0, f64::max);
    let len = hi - lo;
    let tri = 0.5 * len * len;
    let hot = hot_disk(u, v);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let integrand = |t1: f64, t2: f64, x: [f64; 2]| -> f64 {
        let w = weight(t2, x[0].hypot(x[1]));
        if w == 0.0 {
            return 0.0;
        }
        let (r1, r2) = (disk_flow_radius(t1), disk_flow_radius(t2));
        w * (poisson_extend(u, r1, x) * poisson_extend(v, r2, x) + poisson_extend(u, r2, x) * poisson_extend(v, r1, x))
    };
    let times = |rng: &mut ChaCha8Rng| {
        let (a, b) = (lo + len * rng.gen::<f64>(), lo + len * rng.gen::<f64>());
        (a.max(b), a.min(b))
    };
    let in_disk = |rng: &mut ChaCha8Rng, c: [f64; 2], r: f64| {
        let rr = r * rng.gen::<f64>().sqrt();
        let th = 2.0 * PI * rng.gen::<f64>();
        [c[0] + rr * th.cos(), c[1] + rr * th.sin()]
    };
    let inside_hot = |x: [f64; 2]| hot.map_or(false, |(c, r)| (x[0] - c[0]).hypot(x[1] - c[1]) <= r);
    let n_hot = if hot.is_some() { samples * 3 / 4 } else { 0 };
    let mut strata = Vec::new();
    if let Some((c, r)) = hot {
        let mut acc = Moments::default();
        for _ in 0..n_hot {
            let (t1, t2) = times(&mut rng);
            let x = in_disk(&mut rng, c, r);
            let inside = x[0].hypot(x[1]) <= disk_flow_radius(t2);
            acc.push(if inside { integrand(t1, t2, x) * tri * PI * r * r } else { 0.0 });
        }
        strata.push(acc);
    }
    let mut acc = Moments::default();
    for _ in n_hot..samples {
        let (t1, t2) = times(&mut rng);
        let big = disk_flow_radius(t2);
        let x = in_disk(&mut rng, [0.0, 0.0], big);
        acc.push(if inside_hot(x) { 0.0 } else { integrand(t1, t2, x) * tri * PI * big * big });
    }
    strata.push(acc);
    let mean = strata.iter().map(|m| m.mean()).sum();
    let se = strata.iter().map(|m| m.se().powi(2)).sum::<f64>().sqrt();
    Ok(McEstimate { mean, se, samples })
}

/// Disk around the supports of two bump functions, twice their radius.
fn hot_disk(u: &TestFunction, v: &TestFunction) -> Option<([f64; 2], f64)> {
    match (u.support(), v.support()) {
        (Support::Ball { center: a, radius: ra }, Support::Ball { center: b, radius: rb }) => {
            let c = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let half = 0.5 * (a[0] - b[0]).hypot(a[1] - b[1]);
            Some((c, half + 2.0 * ra.max(rb)))
        }
        _ => None,
    }
}

#[derive(Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum2: f64,
}

impl Moments {
    fn push(&mut self, f: f64) {
        self.n += 1;
        self.sum += f;
        self.sum2 += f * f;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn se(&self) -> f64 {
        let n = self.n as f64;
        let var = (self.sum2 / n - self.mean().powi(2)).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    }
}
