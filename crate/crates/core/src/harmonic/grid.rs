use super::banded::BandedCholesky;
use crate::error::{Error, Result};
use crate::lattice::{lattice_points, LatticeGrid, Region, Site};
use std::collections::HashMap;

const OUT: u8 = 0;
const INTERIOR: u8 = 1;
const BOUNDARY: u8 = 2;

/// Lattice function on a domain; interior nodes are discrete harmonic.
#[derive(Debug, Clone)]
pub struct GridFunction {
    m: u32,
    values: LatticeGrid<f64>,
    kind: LatticeGrid<u8>,
}

impl GridFunction {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn value(&self, s: Site) -> Option<f64> {
        (self.kind.get(s) != OUT).then(|| self.values.get(s))
    }

    /// Value at a physical point that must be a lattice node.
    pub fn value_at(&self, p: [f64; 2]) -> Option<f64> {
        let mf = self.m as f64;
        self.value(Site::new((p[0] * mf).round() as i32, (p[1] * mf).round() as i32))
    }

    pub fn is_interior(&self, s: Site) -> bool {
        self.kind.get(s) == INTERIOR
    }

    /// `Delta_h f = (m^2/4) sum_nbrs f - m^2 f`, where all four neighbours are nodes.
    pub fn laplacian(&self, s: Site) -> Option<f64> {
        let c = self.value(s)?;
        let mut sum = 0.0;
        for nb in s.neighbors() {
            sum += self.value(nb)?;
        }
        let m2 = (self.m as f64).powi(2);
        Some(m2 * 0.25 * sum - m2 * c)
    }

    /// All domain nodes with their values.
    pub fn nodes(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.kind.iter().filter(|&(_, k)| k != OUT).map(|(s, _)| (s, self.values.get(s)))
    }

    /// `max |f(node) - g(node coords)|` over the nodes.
    pub fn max_abs_diff(&self, g: impl Fn([f64; 2]) -> f64) -> f64 {
        self.nodes().map(|(s, v)| (v - g(s.coords(self.m))).abs()).fold(0.0, f64::max)
    }
}

// One row of the linear system `diag x_i - sum_j x_j = rhs`.
struct System {
    sites: Vec<Site>,
    diag: Vec<f64>,
    nbr: Vec<[u32; 4]>,
    rhs: Vec<f64>,
}

const NONE: u32 = u32::MAX;

fn sor(sys: &System, tol: f64) -> Result<Vec<f64>> {
    let n = sys.sites.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return Ok(x);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for s in &sys.sites {
        x0 = x0.min(s.x);
        x1 = x1.max(s.x);
        y0 = y0.min(s.y);
        y1 = y1.max(s.y);
    }
    let l = ((x1 - x0).max(y1 - y0) + 2) as f64;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / l).sin());
    let scale = sys.rhs.iter().zip(&sys.diag).map(|(b, d)| (b / d).abs()).fold(1.0, f64::max);
    let max_sweeps = 400 * l as usize + 5000;
    for _ in 0..max_sweeps {
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut s = sys.rhs[i];
            for &j in &sys.nbr[i] {
                if j != NONE {
                    s += x[j as usize];
                }
            }
            let r = s / sys.diag[i] - x[i];
            worst = worst.max(r.abs());
            x[i] += omega * r;
        }
        if worst <= tol * scale {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence { what: "grid Dirichlet SOR", residual: f64::NAN })
}

fn empty_function(nodes: &[Site]) -> (LatticeGrid<f64>, LatticeGrid<u8>) {
    (LatticeGrid::around(nodes, 1, 0.0), LatticeGrid::around(nodes, 1, OUT))
}

/// Node-boundary system: boundary nodes are the sites with a neighbour
/// outside the set; they carry `u`, and interior nodes are harmonic.
fn node_system(sites: &[Site], m: u32, u: &dyn Fn([f64; 2]) -> f64) -> (System, LatticeGrid<f64>, LatticeGrid<u8>) {
    let (mut values, mut kind) = empty_function(sites);
    for &s in sites {
        kind.set(s, BOUNDARY);
    }
    for &s in sites {
        if s.neighbors().iter().all(|q| kind.get(*q) != OUT) {
            kind.set(s, INTERIOR);
        }
    }
    let mut interior: Vec<Site> = sites.iter().copied().filter(|s| kind.get(*s) == INTERIOR).collect();
    interior.sort_by_key(|s| (s.y, s.x));
    let index: HashMap<Site, u32> = interior.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    for &s in sites {
        if kind.get(s) == BOUNDARY {
            values.set(s, u(s.coords(m)));
        }
    }
    let mut sys = System { sites: interior.clone(), diag: vec![4.0; interior.len()], nbr: Vec::new(), rhs: Vec::new() };
    for &s in &interior {
        let mut nb = [NONE; 4];
        let mut b = 0.0;
        for (k, q) in s.neighbors().iter().enumerate() {
            match index.get(q) {
                Some(&j) => nb[k] = j,
                None => b += values.get(*q),
            }
        }
        sys.nbr.push(nb);
        sys.rhs.push(b);
    }
    (sys, values, kind)
}

/// Grid-harmonic extension of `u` from the lattice boundary of `sites`,
/// by successive over-relaxation to a relative residual `tol`.
pub fn solve_grid_dirichlet(sites: &[Site], m: u32, u: impl Fn([f64; 2]) -> f64, tol: f64) -> Result<GridFunction> {
    if m == 0 {
        return Err(Error::InvalidResolution(m));
    }
    let (sys, mut values, kind) = node_system(sites, m, &u);
    let x = sor(&sys, tol)?;
    for (s, v) in sys.sites.iter().zip(x) {
        values.set(*s, v);
    }
    Ok(GridFunction { m, values, kind })
}

/// Same problem as [`solve_grid_dirichlet`], solved directly.
pub fn solve_grid_dirichlet_direct(sites: &[Site], m: u32, u: impl Fn([f64; 2]) -> f64) -> Result<GridFunction> {
    if m == 0 {
        return Err(Error::InvalidResolution(m));
    }
    let (sys, mut values, kind) = node_system(sites, m, &u);
    let n = sys.sites.len();
    let mut bw = 1;
    for (i, nb) in sys.nbr.iter().enumerate() {
        for &j in nb {
            if j != NONE {
                bw = bw.max((j as usize).abs_diff(i));
            }
        }
    }
    let f = BandedCholesky::factor(n, bw, |i, j| {
        if i == j {
            4.0
        } else if sys.nbr[i].contains(&(j as u32)) {
            -1.0
        } else {
            0.0
        }
    })?;
    let mut x = sys.rhs.clone();
    f.solve_in_place(&mut x);
    for (s, v) in sys.sites.iter().zip(x) {
        values.set(*s, v);
    }
    Ok(GridFunction { m, values, kind })
}

/// Grid-harmonic function on the lattice nodes of a closed region, linear on
/// every edge up to the point where the edge crosses the region boundary, and
/// equal to `u` there.
pub fn solve_region_dirichlet(region: &Region, m: u32, u: impl Fn([f64; 2]) -> f64, tol: f64) -> Result<GridFunction> {
    let nodes = lattice_points(region, m)?;
    let (mut values, mut kind) = empty_function(&nodes);
    let mut free = Vec::new();
    let mut cuts: HashMap<Site, Vec<(usize, f64, f64)>> = HashMap::new();
    for &s in &nodes {
        let p = s.coords(m);
        let mut on_boundary = false;
        let mut list = Vec::new();
        for (k, q) in s.neighbors().iter().enumerate() {
            let pq = q.coords(m);
            if !region.contains(pq) {
                let t = region.exit_fraction(p, pq);
                if t < 1e-9 {
                    on_boundary = true;
                }
                let b = [p[0] + t * (pq[0] - p[0]), p[1] + t * (pq[1] - p[1])];
                list.push((k, t, u(b)));
            }
        }
        if on_boundary {
            kind.set(s, BOUNDARY);
            values.set(s, u(p));
        } else {
            free.push(s);
            kind.set(s, INTERIOR);
            cuts.insert(s, list);
        }
    }
    free.sort_by_key(|s| (s.y, s.x));
    let index: HashMap<Site, u32> = free.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    let mut sys = System { sites: free.clone(), diag: Vec::new(), nbr: Vec::new(), rhs: Vec::new() };
    for &s in &free {
        let mut d = 4.0;
        let mut b = 0.0;
        let mut nb = [NONE; 4];
        let list = &cuts[&s];
        for (k, q) in s.neighbors().iter().enumerate() {
            if let Some(&(_, t, ub)) = list.iter().find(|c| c.0 == k) {
                // Ghost value phi + (u_b - phi) / t.
                d += 1.0 / t - 1.0;
                b += ub / t;
            } else if let Some(&j) = index.get(q) {
                nb[k] = j;
            } else {
                b += values.get(*q);
            }
        }
        sys.diag.push(d);
        sys.nbr.push(nb);
        sys.rhs.push(b);
    }
    let x = sor(&sys, tol)?;
    for (s, v) in free.iter().zip(x) {
        values.set(*s, v);
    }
    Ok(GridFunction { m, values, kind })
}
