use crate::error::{Error, Result};
use crate::lattice::{DensityProfile, LatticeGrid, Site};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// Order in which over-full sites are toppled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToppleOrder {
    Fifo,
    /// Uniformly random over the current work set, seeded.
    Random(u64),
}

/// Largest excess `nu - 1` a stable configuration may keep.
pub const EXCESS_TOL: f64 = 1e-12;

/// Topple every site with excess above `tol`: the excess is split equally
/// among the four neighbours and the site is left at 1. When `acc` is given,
/// each change of mass `d` at a site adds `step * d` to it.
pub fn topple(
    mass: &mut LatticeGrid<f64>,
    mut acc: Option<(&mut LatticeGrid<f64>, f64)>,
    order: ToppleOrder,
    tol: f64,
    max_topplings: u64,
) -> Result<u64> {
    let mut queued = LatticeGrid::new(
        mass.origin().x,
        mass.origin().y,
        mass.origin().x + mass.width() as i32 - 1,
        mass.origin().y + mass.height() as i32 - 1,
        false,
    );
    let mut work: VecDeque<Site> = VecDeque::new();
    for (s, v) in mass.iter() {
        if v - 1.0 > tol {
            work.push_back(s);
            queued.set(s, true);
        }
    }
    let mut rng = match order {
        ToppleOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        ToppleOrder::Fifo => None,
    };
    let mut count = 0u64;
    loop {
        let x = match rng.as_mut() {
            None => work.pop_front(),
            Some(r) => {
                if work.is_empty() {
                    None
                } else {
                    let i = r.gen_range(0..work.len());
                    work.swap_remove_back(i)
                }
            }
        };
        let Some(x) = x else { break };
        queued.set(x, false);
        let e = mass.get(x) - 1.0;
        if e <= tol {
            continue;
        }
        count += 1;
        if count > max_topplings {
            let residual = mass.data().iter().fold(0.0f64, |a, v| a.max(v - 1.0));
            return Err(Error::NonConvergence { what: "toppling", residual });
        }
        mass.set(x, 1.0);
        if let Some((a, n)) = acc.as_mut() {
            *a.get_mut(x).ok_or(Error::Containment)? -= *n * e;
        }
        for nb in x.neighbors() {
            let v = mass.get_mut(nb).ok_or(Error::Containment)?;
            *v += 0.25 * e;
            let over = *v - 1.0 > tol;
            if let Some((a, n)) = acc.as_mut() {
                *a.get_mut(nb).ok_or(Error::Containment)? += *n * 0.25 * e;
            }
            if over && !queued.get(nb) {
                queued.set(nb, true);
                work.push_back(nb);
            }
        }
    }
    Ok(count)
}

/// Grid large enough to hold the stabilisation of `sites` carrying `total` mass.
pub(crate) fn grid_for(sites: &[Site], total: f64, grow: i32) -> LatticeGrid<f64> {
    let (mut w, mut h) = (1, 1);
    if let (Some(x0), Some(x1)) = (sites.iter().map(|s| s.x).min(), sites.iter().map(|s| s.x).max()) {
        w = x1 - x0 + 1;
    }
    if let (Some(y0), Some(y1)) = (sites.iter().map(|s| s.y).min(), sites.iter().map(|s| s.y).max()) {
        h = y1 - y0 + 1;
    }
    let r = (total / std::f64::consts::PI).sqrt();
    let margin = ((1.2 * r - 0.5 * w.min(h) as f64).ceil() as i32).max(0) + 4 + grow;
    LatticeGrid::around(sites, margin, 0.0)
}

/// Single-shot divisible-sandpile stabilisation by projected SOR on the
/// odometer `u >= 0`: `nu = sigma + Delta u <= 1`, with `u (1 - nu) = 0`.
pub fn stabilize(sigma: &DensityProfile, tol: f64) -> Result<LatticeGrid<f64>> {
    let sites: Vec<Site> = sigma.mass.keys().copied().collect();
    let total = sigma.total();
    let mut grow = 0;
    loop {
        let mut s = grid_for(&sites, total, grow);
        for (&site, &v) in &sigma.mass {
            s.set(site, v);
        }
        let nu = psor(&s, tol)?;
        let (w, h) = (nu.width(), nu.height());
        let touches = nu.iter().any(|(site, v)| {
            let i = nu.index(site).unwrap();
            let (x, y) = (i % w, i / w);
            v > 0.0 && (x <= 1 || y <= 1 || x + 2 >= w || y + 2 >= h)
        });
        if !touches {
            return Ok(nu);
        }
        grow = grow * 2 + 8;
    }
}

fn psor(sigma: &LatticeGrid<f64>, tol: f64) -> Result<LatticeGrid<f64>> {
    let (w, h) = (sigma.width(), sigma.height());
    let sg = sigma.data();
    let mut u = vec![0.0f64; w * h];
    let l = w.max(h) as f64;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / l).sin());
    let max_sweeps = 200 * w.max(h) + 2000;
    let mut sweeps = 0;
    loop {
        let mut worst = 0.0f64;
        let mut umax = 0.0f64;
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let i = y * w + x;
                let r = sg[i] + 0.25 * (u[i - 1] + u[i + 1] + u[i - w] + u[i + w]) - u[i] - 1.0;
                let nu = (u[i] + omega * r).max(0.0);
                // Natural residual of the complementarity problem.
                let nat = u[i].min(-r).abs();
                worst = worst.max(nat);
                u[i] = nu;
                umax = umax.max(nu);
            }
        }
        sweeps += 1;
        // Rounding in the residual scales with the odometer.
        if worst < tol.max(64.0 * f64::EPSILON * umax) {
            break;
        }
        if sweeps > max_sweeps {
            return Err(Error::NonConvergence { what: "projected SOR stabilisation", residual: worst });
        }
    }
    let mut nu = sigma.clone();
    let d = nu.data_mut();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            d[i] = sg[i] + 0.25 * (u[i - 1] + u[i + 1] + u[i - w] + u[i + w]) - u[i];
        }
    }
    Ok(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn point_mass(n: f64) -> DensityProfile {
        let mut mass = BTreeMap::new();
        mass.insert(Site::new(0, 0), n);
        DensityProfile { m: 1, mass }
    }

    #[test]
    fn toppling_conserves_mass_and_stabilises() {
        let mut g = LatticeGrid::new(-10, -10, 10, 10, 0.0);
        g.set(Site::new(0, 0), 10.0);
        topple(&mut g, None, ToppleOrder::Fifo, EXCESS_TOL, 10_000_000).unwrap();
        let total: f64 = g.data().iter().sum();
        assert!((total - 10.0).abs() < 1e-10);
        assert!(g.data().iter().all(|&v| v <= 1.0 + EXCESS_TOL));
    }

    #[test]
    fn toppling_orders_agree() {
        let mut a = LatticeGrid::new(-10, -10, 10, 10, 0.0);
        a.set(Site::new(0, 0), 10.0);
        let mut b = a.clone();
        topple(&mut a, None, ToppleOrder::Fifo, EXCESS_TOL, 10_000_000).unwrap();
        topple(&mut b, None, ToppleOrder::Random(5), EXCESS_TOL, 10_000_000).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn psor_matches_toppling() {
        let nu = stabilize(&point_mass(30.0), 1e-13).unwrap();
        let mut g = LatticeGrid::new(-12, -12, 12, 12, 0.0);
        g.set(Site::new(0, 0), 30.0);
        topple(&mut g, None, ToppleOrder::Fifo, 1e-13, 100_000_000).unwrap();
        for (s, v) in g.iter() {
            assert!((nu.get(s) - v).abs() < 1e-9, "{s:?}");
        }
        let total: f64 = nu.data().iter().sum();
        assert!((total - 30.0).abs() < 1e-10);
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let mut g = LatticeGrid::new(-10, -10, 10, 10, 0.0);
        g.set(Site::new(0, 0), 10.0);
        let err = topple(&mut g, None, ToppleOrder::Fifo, EXCESS_TOL, 5).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { residual, .. } if residual > 0.0));
    }
}
