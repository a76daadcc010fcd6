use super::topple::{grid_for, topple, ToppleOrder, EXCESS_TOL};
use crate::error::{Error, Result};
use crate::harmonic::BandedCholesky;
use crate::lattice::{LatticeGrid, Site};
use std::collections::{HashMap, HashSet};

/// Mass below which a site is outside the support.
pub const SUPPORT_TOL: f64 = 1e-9;
/// A site is full once its mass reaches `1 - FULL_TOL`.
pub const FULL_TOL: f64 = 1e-9;

/// Divisible sandpile driven by a source sequence.
#[derive(Debug, Clone)]
pub struct SandpileHistory {
    pub m: u32,
    /// Number of source units added.
    pub steps: usize,
    /// `nu_N` after the last step.
    pub mass: LatticeGrid<f64>,
    /// `sum_n n (nu_n - nu_{n-1})`, present for step-by-step runs.
    pub accumulator: Option<LatticeGrid<f64>>,
    /// `(n, nu_n)` for each requested checkpoint.
    pub checkpoints: Vec<(usize, LatticeGrid<f64>)>,
}

impl SandpileHistory {
    pub fn total_mass(&self) -> f64 {
        self.mass.data().iter().sum()
    }

    /// Sites with `nu >= 1 - FULL_TOL`.
    pub fn full_set(&self) -> Vec<Site> {
        self.mass.iter().filter(|&(_, v)| v >= 1.0 - FULL_TOL).map(|(s, _)| s).collect()
    }

    /// Sites with `nu > SUPPORT_TOL`.
    pub fn support(&self) -> Vec<Site> {
        self.mass.iter().filter(|&(_, v)| v > SUPPORT_TOL).map(|(s, _)| s).collect()
    }
}

const OUTSIDE: u8 = 0;
const FRONTIER: u8 = 1;
const FULL: u8 = 2;
const NO_SLOT: u32 = u32::MAX;

/// Exact per-step engine. The frontier is the set of non-full neighbours of
/// the full set `N`. For each tracked full site `x` it keeps the exit law
/// `H_N(x, .)` of a walk started at `x` on the frontier; tracked sites are the
/// inner boundary of `N` and the outer boundary `Gamma` of the initial set `K`.
/// A unit injected at `z` in `K` reaches `Gamma` with the fixed law `P(z, .)`
/// of the walk killed on leaving `K`, then continues with `H_N`.
struct Engine {
    state: LatticeGrid<u8>,
    nu: LatticeGrid<f64>,
    acc: LatticeGrid<f64>,
    slot_of: LatticeGrid<u32>,
    slot_site: Vec<Site>,
    free_slots: Vec<usize>,
    cap: usize,
    rows: Vec<Vec<f64>>,
    row_site: Vec<Option<Site>>,
    row_of: HashMap<Site, usize>,
    free_rows: Vec<usize>,
    gamma: Vec<Site>,
    gamma_set: HashSet<Site>,
    k_index: HashMap<Site, usize>,
    // |K| x |Gamma|, row-major.
    exit_k: Vec<f64>,
    scratch: Vec<f64>,
}

impl Engine {
    fn new(initial: &[Site], total: f64) -> Result<Self> {
        let mut k: Vec<Site> = initial.to_vec();
        k.sort_by_key(|s| (s.y, s.x));
        k.dedup();
        let k_index: HashMap<Site, usize> = k.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut bw = 1;
        for (i, s) in k.iter().enumerate() {
            if let Some(&j) = k_index.get(&Site::new(s.x, s.y + 1)) {
                bw = bw.max(j - i);
            }
        }
        let chol = BandedCholesky::factor(k.len(), bw, |i, j| {
            if i == j {
                1.0
            } else {
                let (a, b) = (k[i], k[j]);
                if (a.x - b.x).abs() + (a.y - b.y).abs() == 1 {
                    -0.25
                } else {
                    0.0
                }
            }
        })?;
        let mut gamma = Vec::new();
        let mut gamma_set = HashSet::new();
        let mut inner = Vec::new();
        for &s in &k {
            let mut is_inner = false;
            for nb in s.neighbors() {
                if !k_index.contains_key(&nb) {
                    is_inner = true;
                    if gamma_set.insert(nb) {
                        gamma.push(nb);
                    }
                }
            }
            if is_inner {
                inner.push(s);
            }
        }
        let g_index: HashMap<Site, usize> = gamma.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let ng = gamma.len();
        let mut exit_k = vec![0.0; k.len() * ng];
        let mut col = vec![0.0; k.len()];
        for &b in &inner {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[k_index[&b]] = 1.0;
            chol.solve_in_place(&mut col);
            for nb in b.neighbors() {
                if let Some(&g) = g_index.get(&nb) {
                    for (zi, &v) in col.iter().enumerate() {
                        exit_k[zi * ng + g] += 0.25 * v;
                    }
                }
            }
        }

        let grid = grid_for(&k, total, 4);
        let o = grid.origin();
        let (x1, y1) = (o.x + grid.width() as i32 - 1, o.y + grid.height() as i32 - 1);
        let mut e = Engine {
            state: LatticeGrid::new(o.x, o.y, x1, y1, OUTSIDE),
            nu: grid.clone(),
            acc: grid,
            slot_of: LatticeGrid::new(o.x, o.y, x1, y1, NO_SLOT),
            slot_site: Vec::new(),
            free_slots: Vec::new(),
            cap: 0,
            rows: Vec::new(),
            row_site: Vec::new(),
            row_of: HashMap::new(),
            free_rows: Vec::new(),
            gamma,
            gamma_set,
            k_index,
            exit_k,
            scratch: Vec::new(),
        };
        for &s in &k {
            e.state.set(s, FULL);
            e.nu.set(s, 1.0);
        }
        for i in 0..e.gamma.len() {
            let g = e.gamma[i];
            if !e.state.contains(g) {
                return Err(Error::Containment);
            }
            e.add_frontier(g);
        }
        for &b in &inner {
            let zi = e.k_index[&b];
            let mut row = vec![0.0; e.cap];
            for (g, &site) in e.gamma.iter().enumerate() {
                row[e.slot_of.get(site) as usize] = e.exit_k[zi * ng + g];
            }
            e.insert_row(b, row);
        }
        Ok(e)
    }

    fn add_frontier(&mut self, s: Site) {
        let slot = match self.free_slots.pop() {
            Some(i) => i,
            None => {
                if self.slot_site.len() == self.cap {
                    self.cap = (self.cap + self.cap / 2).max(64);
                    for r in self.rows.iter_mut() {
                        r.resize(self.cap, 0.0);
                    }
                }
                self.slot_site.push(s);
                self.slot_site.len() - 1
            }
        };
        self.slot_site[slot] = s;
        self.slot_of.set(s, slot as u32);
        self.state.set(s, FRONTIER);
    }

    fn insert_row(&mut self, s: Site, mut row: Vec<f64>) {
        row.resize(self.cap, 0.0);
        let id = match self.free_rows.pop() {
            Some(i) => {
                self.rows[i] = row;
                self.row_site[i] = Some(s);
                i
            }
            None => {
                self.rows.push(row);
                self.row_site.push(Some(s));
                self.rows.len() - 1
            }
        };
        self.row_of.insert(s, id);
    }

    fn remove_row(&mut self, s: Site) {
        if let Some(id) = self.row_of.remove(&s) {
            self.rows[id] = Vec::new();
            self.row_site[id] = None;
            self.free_rows.push(id);
        }
    }

    fn deposit(&mut self, slot: usize, amount: f64, n: f64) {
        let s = self.slot_site[slot];
        *self.nu.get_mut(s).unwrap() += amount;
        *self.acc.get_mut(s).unwrap() += n * amount;
    }

    fn inject(&mut self, z: Site, n: f64) -> Result<()> {
        let zi = self.k_index[&z];
        let ng = self.gamma.len();
        let mut h = std::mem::take(&mut self.scratch);
        h.clear();
        h.resize(self.cap, 0.0);
        for g in 0..ng {
            let p = self.exit_k[zi * ng + g];
            if p == 0.0 {
                continue;
            }
            let site = self.gamma[g];
            if self.state.get(site) == FULL {
                let row = &self.rows[self.row_of[&site]];
                for (a, b) in h.iter_mut().zip(row) {
                    *a += p * b;
                }
            } else {
                h[self.slot_of.get(site) as usize] += p;
            }
        }
        for (slot, &v) in h.iter().enumerate() {
            if v != 0.0 {
                self.deposit(slot, v, n);
            }
        }
        self.scratch = h;
        let mut fills = 0usize;
        loop {
            let mut best = (0.0f64, usize::MAX);
            for slot in 0..self.slot_site.len() {
                let s = self.slot_site[slot];
                if self.slot_of.get(s) as usize != slot {
                    continue;
                }
                let v = self.nu.get(s);
                if v > best.0 {
                    best = (v, slot);
                }
            }
            if best.0 - 1.0 <= EXCESS_TOL {
                return Ok(());
            }
            fills += 1;
            if fills > 10_000_000 {
                return Err(Error::NonConvergence { what: "sandpile step", residual: best.0 - 1.0 });
            }
            self.fill(best.1, n)?;
        }
    }

    /// Move the frontier site in `slot0` into the full set and topple its excess.
    fn fill(&mut self, slot0: usize, n: f64) -> Result<()> {
        let y0 = self.slot_site[slot0];
        let nbrs = y0.neighbors();
        for nb in nbrs {
            match self.state.index(nb) {
                None => return Err(Error::Containment),
                Some(_) if self.state.get(nb) == OUTSIDE => self.add_frontier(nb),
                _ => {}
            }
        }
        let mut r = vec![0.0; self.cap];
        let mut denom = 1.0;
        for nb in nbrs {
            if self.state.get(nb) == FULL {
                let row = &self.rows[self.row_of[&nb]];
                denom -= 0.25 * row[slot0];
                for (a, b) in r.iter_mut().zip(row) {
                    *a += 0.25 * b;
                }
            } else {
                r[self.slot_of.get(nb) as usize] += 0.25;
            }
        }
        r[slot0] = 0.0;
        let inv = 1.0 / denom;
        r.iter_mut().for_each(|v| *v *= inv);
        for (id, row) in self.rows.iter_mut().enumerate() {
            if self.row_site[id].is_none() {
                continue;
            }
            let c = row[slot0];
            if c != 0.0 {
                for (a, b) in row.iter_mut().zip(&r) {
                    *a += c * b;
                }
                row[slot0] = 0.0;
            }
        }
        self.state.set(y0, FULL);
        self.slot_of.set(y0, NO_SLOT);
        self.free_slots.push(slot0);
        let e = self.nu.get(y0) - 1.0;
        self.nu.set(y0, 1.0);
        *self.acc.get_mut(y0).unwrap() -= n * e;
        for (slot, &v) in r.iter().enumerate() {
            if v != 0.0 {
                self.deposit(slot, e * v, n);
            }
        }
        let keep = self.gamma_set.contains(&y0) || nbrs.iter().any(|q| self.state.get(*q) != FULL);
        if keep {
            self.insert_row(y0, r);
        }
        for nb in nbrs {
            if self.state.get(nb) == FULL
                && !self.gamma_set.contains(&nb)
                && nb.neighbors().iter().all(|q| self.state.get(*q) == FULL)
            {
                self.remove_row(nb);
            }
        }
        Ok(())
    }
}

/// Run the divisible sandpile from the full set `initial` (mass 1 each),
/// adding one unit at each source in order and stabilising after each step.
///
/// The accumulator `sum_n n (nu_n - nu_{n-1})` is kept throughout.
pub fn run_sandpile(initial: &[Site], sources: &[Site], m: u32, checkpoints: &[usize]) -> Result<SandpileHistory> {
    if m == 0 {
        return Err(Error::InvalidResolution(m));
    }
    let total = (initial.len() + sources.len()) as f64;
    let kset: HashSet<Site> = initial.iter().copied().collect();
    let mut cps = Vec::new();
    if initial.is_empty() || !sources.iter().all(|s| kset.contains(s)) {
        return run_by_toppling(initial, sources, m, checkpoints);
    }
    let mut e = Engine::new(initial, total)?;
    if checkpoints.contains(&0) {
        cps.push((0, e.nu.clone()));
    }
    for (i, &z) in sources.iter().enumerate() {
        let n = (i + 1) as f64;
        e.inject(z, n)?;
        if checkpoints.contains(&(i + 1)) {
            cps.push((i + 1, e.nu.clone()));
        }
    }
    Ok(SandpileHistory { m, steps: sources.len(), mass: e.nu, accumulator: Some(e.acc), checkpoints: cps })
}

/// Same contract as [`run_sandpile`], by literal FIFO toppling after each unit.
pub fn run_by_toppling(initial: &[Site], sources: &[Site], m: u32, checkpoints: &[usize]) -> Result<SandpileHistory> {
    let all: Vec<Site> = initial.iter().chain(sources).copied().collect();
    let total = all.len() as f64;
    let mut nu = grid_for(&all, total, 4);
    let mut acc = nu.clone();
    for &s in initial {
        *nu.get_mut(s).ok_or(Error::Containment)? += 1.0;
    }
    topple(&mut nu, None, ToppleOrder::Fifo, EXCESS_TOL, u64::MAX)?;
    let mut cps = Vec::new();
    if checkpoints.contains(&0) {
        cps.push((0, nu.clone()));
    }
    for (i, &z) in sources.iter().enumerate() {
        let n = (i + 1) as f64;
        *nu.get_mut(z).ok_or(Error::Containment)? += 1.0;
        *acc.get_mut(z).ok_or(Error::Containment)? += n;
        topple(&mut nu, Some((&mut acc, n)), ToppleOrder::Fifo, EXCESS_TOL, u64::MAX)?;
        if checkpoints.contains(&(i + 1)) {
            cps.push((i + 1, nu.clone()));
        }
    }
    Ok(SandpileHistory { m, steps: sources.len(), mass: nu, accumulator: Some(acc), checkpoints: cps })
}
