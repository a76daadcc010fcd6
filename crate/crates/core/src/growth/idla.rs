use super::jump::{ExitTables, MAX_HALF_WIDTH};
use crate::error::{Error, Result};
use crate::lattice::{LatticeGrid, Site};
use crate::rng::{particle_stream, run_rng};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// How walkers move between lattice sites.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepping {
    /// Exact jumps across fully occupied boxes, single steps elsewhere.
    #[default]
    Jump,
    /// Nearest-neighbour steps only.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdlaOptions {
    pub stepping: Stepping,
    /// Walks are confined to a box this many times the final-domain radius.
    pub containment_factor: f64,
}

impl Default for IdlaOptions {
    fn default() -> Self {
        IdlaOptions { stepping: Stepping::Jump, containment_factor: 3.0 }
    }
}

/// Initial set plus the ordered list of settled sites.
#[derive(Debug, Clone)]
pub struct GrowthHistory {
    m: u32,
    initial: Vec<Site>,
    initial_set: HashSet<Site>,
    arrivals: Vec<Site>,
    arrival_step: HashMap<Site, u32>,
    containment_hit: bool,
}

impl GrowthHistory {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn initial(&self) -> &[Site] {
        &self.initial
    }

    /// `arrivals()[i]` settled at step `i + 1`.
    pub fn arrivals(&self) -> &[Site] {
        &self.arrivals
    }

    pub fn steps(&self) -> usize {
        self.arrivals.len()
    }

    /// Step at which `s` was added (`None` for initial or never-occupied sites).
    pub fn arrival_step(&self, s: Site) -> Option<u32> {
        self.arrival_step.get(&s).copied()
    }

    pub fn is_initial(&self, s: Site) -> bool {
        self.initial_set.contains(&s)
    }

    /// Membership in `A(n)`.
    pub fn occupied_at(&self, s: Site, n: usize) -> bool {
        self.initial_set.contains(&s) || self.arrival_step(s).is_some_and(|k| k as usize <= n)
    }

    /// `A(n)` in lexicographic order.
    pub fn occupied_set(&self, n: usize) -> Vec<Site> {
        let mut v: Vec<Site> = self.initial.iter().chain(self.arrivals[..n.min(self.arrivals.len())].iter()).copied().collect();
        v.sort_unstable();
        v
    }

    /// True if some walk touched the containment box.
    pub fn containment_hit(&self) -> bool {
        self.containment_hit
    }
}

struct Walker<'a> {
    occ: LatticeGrid<u8>,
    dist: Vec<u8>,
    bbox: [i32; 4],
    tables: &'a ExitTables,
    stepping: Stepping,
    containment_hit: bool,
}

impl Walker<'_> {
    fn mark(&mut self, s: Site) {
        self.occ.set(s, 1);
        self.bbox = [self.bbox[0].min(s.x), self.bbox[1].min(s.y), self.bbox[2].max(s.x), self.bbox[3].max(s.y)];
    }

    /// Chessboard distance to the nearest vacancy over the occupied box,
    /// treating everything outside the box as vacant.
    fn refresh_distances(&mut self) {
        let o = self.occ.origin();
        let (w, h) = (self.occ.width() as i32, self.occ.height() as i32);
        let x0 = (self.bbox[0] - 1 - o.x).max(0);
        let y0 = (self.bbox[1] - 1 - o.y).max(0);
        let x1 = (self.bbox[2] + 1 - o.x).min(w - 1);
        let y1 = (self.bbox[3] + 1 - o.y).min(h - 1);
        let occ = self.occ.data();
        let d = &mut self.dist;
        let wi = w as usize;
        let at = |x: i32, y: i32| y as usize * wi + x as usize;
        let get = |d: &Vec<u8>, x: i32, y: i32| -> u8 {
            if x < x0 || x > x1 || y < y0 || y > y1 {
                0
            } else {
                d[at(x, y)]
            }
        };
        for y in y0..=y1 {
            for x in x0..=x1 {
                let i = at(x, y);
                if occ[i] == 0 {
                    d[i] = 0;
                } else {
                    let m = get(d, x - 1, y).min(get(d, x - 1, y - 1)).min(get(d, x, y - 1)).min(get(d, x + 1, y - 1));
                    d[i] = m.saturating_add(1);
                }
            }
        }
        for y in (y0..=y1).rev() {
            for x in (x0..=x1).rev() {
                let i = at(x, y);
                if d[i] > 1 {
                    let m = get(d, x + 1, y).min(get(d, x + 1, y + 1)).min(get(d, x, y + 1)).min(get(d, x - 1, y + 1));
                    d[i] = d[i].min(m.saturating_add(1));
                }
            }
        }
    }

    fn walk(&mut self, start: Site, rng: &mut impl RngCore) -> Site {
        let o = self.occ.origin();
        let (w, h) = (self.occ.width() as i32, self.occ.height() as i32);
        let (mut x, mut y) = (start.x - o.x, start.y - o.y);
        let mut bits = 0u64;
        let mut nbits = 0u32;
        let occ = self.occ.data();
        let mut hit = false;
        let site = loop {
            let i = (y * w + x) as usize;
            if occ[i] == 0 {
                break Site::new(x + o.x, y + o.y);
            }
            if self.stepping == Stepping::Jump {
                let d = self.dist[i] as usize;
                if d >= 2 {
                    let k = (d - 1).min(MAX_HALF_WIDTH);
                    let side = rng.next_u64() & 3;
                    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    let j = self.tables.sample_offset(k, u);
                    let r = k as i32 + 1;
                    match side {
                        0 => (x, y) = (x + r, y + j),
                        1 => (x, y) = (x - r, y + j),
                        2 => (x, y) = (x + j, y + r),
                        _ => (x, y) = (x + j, y - r),
                    }
                    continue;
                }
            }
            if nbits == 0 {
                bits = rng.next_u64();
                nbits = 32;
            }
            let dir = bits & 3;
            bits >>= 2;
            nbits -= 1;
            let (nx, ny) = match dir {
                0 => (x + 1, y),
                1 => (x - 1, y),
                2 => (x, y + 1),
                _ => (x, y - 1),
            };
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                // Reflecting wall: the step is refused.
                hit = true;
                continue;
            }
            (x, y) = (nx, ny);
        };
        self.containment_hit |= hit;
        site
    }
}

/// Extended-source IDLA: particle `i` starts at `sources[i]`, walks until it
/// first leaves the current cluster, and settles there.
pub fn run_idla(initial: &[Site], sources: &[Site], m: u32, seed: u64, opts: IdlaOptions) -> Result<GrowthHistory> {
    if m == 0 {
        return Err(Error::InvalidResolution(m));
    }
    let all: Vec<Site> = initial.iter().chain(sources.iter()).copied().collect();
    let initial_set: HashSet<Site> = initial.iter().copied().collect();
    if all.is_empty() {
        return Ok(GrowthHistory {
            m,
            initial: Vec::new(),
            initial_set,
            arrivals: Vec::new(),
            arrival_step: HashMap::new(),
            containment_hit: false,
        });
    }
    let (mut cx, mut cy) = (0i64, 0i64);
    for s in &all {
        cx += s.x as i64;
        cy += s.y as i64;
    }
    let c = Site::new((cx / all.len() as i64) as i32, (cy / all.len() as i64) as i32);
    let r0 = all.iter().map(|s| (s.x - c.x).abs().max((s.y - c.y).abs())).max().unwrap_or(0) as f64;
    let r_area = ((initial_set.len() + sources.len()) as f64 / std::f64::consts::PI).sqrt();
    let half = (opts.containment_factor * r0.max(r_area)).ceil() as i32 + 2;
    let occ = LatticeGrid::new(c.x - half, c.y - half, c.x + half, c.y + half, 0u8);
    let n_cells = occ.data().len();
    let mut wk = Walker {
        occ,
        dist: vec![0u8; n_cells],
        bbox: [c.x, c.y, c.x, c.y],
        tables: ExitTables::get(),
        stepping: opts.stepping,
        containment_hit: false,
    };
    for &s in initial {
        wk.mark(s);
    }
    if wk.stepping == Stepping::Jump {
        wk.refresh_distances();
    }
    let base = run_rng(seed);
    let mut arrivals = Vec::with_capacity(sources.len());
    let mut arrival_step = HashMap::with_capacity(sources.len());
    let mut since_refresh = 0usize;
    for (i, &z) in sources.iter().enumerate() {
        if !wk.occ.contains(z) {
            return Err(Error::Containment);
        }
        let mut rng = particle_stream(&base, i as u64);
        let settled = wk.walk(z, &mut rng);
        wk.mark(settled);
        arrivals.push(settled);
        arrival_step.insert(settled, (i + 1) as u32);
        since_refresh += 1;
        if wk.stepping == Stepping::Jump {
            let every = ((initial.len() + i) as f64).sqrt() as usize;
            if since_refresh >= every.max(16) {
                wk.refresh_distances();
                since_refresh = 0;
            }
        }
    }
    Ok(GrowthHistory {
        m,
        initial: initial.to_vec(),
        initial_set,
        arrivals,
        arrival_step,
        containment_hit: wk.containment_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lattice_points, MassDistribution, Region};

    fn disk_run(m: u32, n: usize, seed: u64, stepping: Stepping) -> GrowthHistory {
        let md = MassDistribution::disk();
        let init = md.initial_sites(m).unwrap();
        let seq: Vec<Site> = md.source_sequence(m).unwrap().iter().take(n).map(|p| p.site).collect();
        run_idla(&init, &seq, m, seed, IdlaOptions { stepping, ..Default::default() }).unwrap()
    }

    #[test]
    fn one_new_site_per_particle() {
        let h = disk_run(12, 200, 3, Stepping::Jump);
        assert_eq!(h.steps(), 200);
        let set: HashSet<Site> = h.arrivals().iter().copied().collect();
        assert_eq!(set.len(), 200);
        assert!(h.arrivals().iter().all(|s| !h.is_initial(*s)));
        assert_eq!(h.occupied_set(200).len(), h.initial().len() + 200);
    }

    #[test]
    fn settled_sites_touch_the_cluster() {
        let h = disk_run(10, 150, 9, Stepping::Jump);
        for n in 1..=h.steps() {
            let s = h.arrivals()[n - 1];
            assert!(s.neighbors().iter().any(|q| h.occupied_at(*q, n - 1)), "step {n}");
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let a = disk_run(16, 300, 11, Stepping::Jump);
        let b = disk_run(16, 300, 11, Stepping::Jump);
        assert_eq!(a.arrivals(), b.arrivals());
        let c = disk_run(16, 300, 12, Stepping::Jump);
        assert_ne!(a.arrivals(), c.arrivals());
    }

    #[test]
    fn source_outside_cluster_settles_immediately() {
        let h = run_idla(&[], &[Site::new(3, 4), Site::new(3, 4)], 8, 1, IdlaOptions::default()).unwrap();
        assert_eq!(h.arrivals()[0], Site::new(3, 4));
        assert!((Site::new(3, 4).neighbors()).contains(&h.arrivals()[1]));
    }

    #[test]
    fn distance_refresh_is_exact_chessboard() {
        let pts = lattice_points(&Region::Disk { center: [0.0, 0.0], radius: 1.0 }, 9).unwrap();
        let occ = LatticeGrid::new(-30, -30, 30, 30, 0u8);
        let n = occ.data().len();
        let mut wk = Walker {
            occ,
            dist: vec![0; n],
            bbox: [0, 0, 0, 0],
            tables: ExitTables::get(),
            stepping: Stepping::Jump,
            containment_hit: false,
        };
        for &s in &pts {
            wk.mark(s);
        }
        wk.refresh_distances();
        let set: HashSet<Site> = pts.iter().copied().collect();
        for &s in &pts {
            let mut best = i32::MAX;
            for x in -12..=12 {
                for y in -12..=12 {
                    let q = Site::new(x, y);
                    if !set.contains(&q) {
                        best = best.min((q.x - s.x).abs().max((q.y - s.y).abs()));
                    }
                }
            }
            let i = wk.occ.index(s).unwrap();
            assert_eq!(wk.dist[i] as i32, best, "{s:?}");
        }
    }
}
