use crate::growth::{FULL_TOL, SUPPORT_TOL};
use crate::lattice::{Flow, LatticeGrid, Site};
use std::collections::HashSet;

/// How far an occupied set strays from `D_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationReport {
    /// Largest depth inside `D_s` of an unoccupied lattice point.
    pub inner_deficit: f64,
    /// Largest distance outside `D_s` of an occupied point.
    pub outer_excess: f64,
    /// Smallest tentacle ratio over occupied points outside `D_s`.
    pub tentacle: Option<f64>,
}

impl FluctuationReport {
    pub fn max_fluctuation(&self) -> f64 {
        self.inner_deficit.max(self.outer_excess)
    }
}

/// `m^{-2} |A cap B(x, r)| / r^2`: about `pi` inside a full ball,
/// `1 / (m r)^2` for an isolated point.
pub fn tentacle_ratio(occupied: &HashSet<Site>, m: u32, x: Site, r: f64) -> f64 {
    let mf = m as f64;
    let k = (r * mf).ceil() as i32;
    let mut count = 0usize;
    for dx in -k..=k {
        for dy in -k..=k {
            let q = Site::new(x.x + dx, x.y + dy);
            if ((dx * dx + dy * dy) as f64) <= (r * mf).powi(2) && occupied.contains(&q) {
                count += 1;
            }
        }
    }
    count as f64 / (mf * mf * r * r)
}

pub fn fluctuation_report(occupied: &[Site], m: u32, flow: &dyn Flow, s: f64) -> FluctuationReport {
    let set: HashSet<Site> = occupied.iter().copied().collect();
    let mf = m as f64;
    let b = flow.bbox(s);
    let mut inner: f64 = 0.0;
    for i in (b[0] * mf).floor() as i32..=(b[2] * mf).ceil() as i32 {
        for j in (b[1] * mf).floor() as i32..=(b[3] * mf).ceil() as i32 {
            let q = Site::new(i, j);
            if set.contains(&q) {
                continue;
            }
            let d = flow.signed_distance(s, q.coords(m));
            if d <= 0.0 {
                inner = inner.max(-d);
            }
        }
    }
    let mut outer: f64 = 0.0;
    let mut tentacle: Option<f64> = None;
    for &q in occupied {
        let d = flow.signed_distance(s, q.coords(m));
        if d > 0.0 {
            outer = outer.max(d);
            let t = tentacle_ratio(&set, m, q, d);
            tentacle = Some(tentacle.map_or(t, |v| v.min(t)));
        }
    }
    FluctuationReport { inner_deficit: inner, outer_excess: outer, tentacle }
}

/// Sandpile version: the outer excess is measured on the support of `nu`
/// and the inner deficit on its fully occupied set.
pub fn sandpile_fluctuation(nu: &LatticeGrid<f64>, m: u32, flow: &dyn Flow, s: f64) -> FluctuationReport {
    let support: Vec<Site> = nu.iter().filter(|&(_, v)| v > SUPPORT_TOL).map(|(q, _)| q).collect();
    let full: Vec<Site> = nu.iter().filter(|&(_, v)| v >= 1.0 - FULL_TOL).map(|(q, _)| q).collect();
    let outer = fluctuation_report(&support, m, flow, s);
    let inner = fluctuation_report(&full, m, flow, s);
    FluctuationReport { inner_deficit: inner.inner_deficit, ..outer }
}
