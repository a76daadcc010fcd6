use super::region::{lattice_points, Region};
use super::site::Site;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Growing source family `Q^t`, nested in `t` with `|Q^t| = t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SourceShape {
    /// Closed ball of area `t` around `center`.
    Disk { center: [f64; 2] },
    /// Homothetic copy of a polygon star-shaped about `center`, scaled to area `t`.
    Polygon { center: [f64; 2], vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    #[serde(flatten)]
    pub shape: SourceShape,
    /// Source-local horizon `T_i`.
    pub horizon: f64,
}

/// Initial full set `D_0` plus a schedule of growing sources.
///
/// With total horizon `T = sum T_i`, source `i` is at local time `s T_i / T`
/// at global time `s` (proportional allocation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDistribution {
    pub initial: Region,
    pub sources: Vec<SourceSpec>,
}

/// One entry of the source sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePoint {
    pub site: Site,
    /// Global first-appearance time.
    pub time: f64,
    /// Which source produced this copy.
    pub source: usize,
}

/// Sparse mass profile on the lattice.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityProfile {
    pub m: u32,
    pub mass: BTreeMap<Site, f64>,
}

impl DensityProfile {
    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }

    pub fn get(&self, s: Site) -> f64 {
        self.mass.get(&s).copied().unwrap_or(0.0)
    }
}

impl MassDistribution {
    /// Unit disk with one centred disk source of horizon `pi`.
    pub fn disk() -> Self {
        MassDistribution {
            initial: Region::unit_disk(),
            sources: vec![SourceSpec { shape: SourceShape::Disk { center: [0.0, 0.0] }, horizon: PI }],
        }
    }

    /// True for the rotation-symmetric preset with closed-form flow.
    pub fn is_disk_preset(&self) -> bool {
        matches!(self.initial, Region::Disk { center, radius } if center == [0.0, 0.0] && radius == 1.0)
            && self.sources.len() == 1
            && matches!(self.sources[0].shape, SourceShape::Disk { center } if center == [0.0, 0.0])
    }

    pub fn horizon(&self) -> f64 {
        self.sources.iter().map(|s| s.horizon).sum()
    }

    pub fn check_time(&self, s: f64) -> Result<()> {
        let t = self.horizon();
        if !(0.0..=t).contains(&s) {
            return Err(Error::TimeOutOfRange { s, horizon: t });
        }
        Ok(())
    }

    /// Region `Q_i` at global time `s`.
    pub fn source_region(&self, i: usize, s: f64) -> Region {
        let local = s * self.sources[i].horizon / self.horizon();
        match &self.sources[i].shape {
            SourceShape::Disk { center } => Region::Disk { center: *center, radius: (local / PI).sqrt() },
            SourceShape::Polygon { center, vertices } => {
                let a = super::region::polygon_area(vertices).abs();
                let lambda = (local / a).sqrt();
                Region::Polygon {
                    vertices: vertices
                        .iter()
                        .map(|v| [center[0] + lambda * (v[0] - center[0]), center[1] + lambda * (v[1] - center[1])])
                        .collect(),
                }
            }
        }
    }

    /// Continuum density `sigma_s(p)`.
    pub fn density(&self, s: f64, p: [f64; 2]) -> f64 {
        let mut v = if self.initial.contains(p) { 1.0 } else { 0.0 };
        for i in 0..self.sources.len() {
            if self.source_region(i, s).contains(p) {
                v += 1.0;
            }
        }
        v
    }

    /// Global time at which source `i` first covers `p` (`None` if never).
    fn appearance_time(&self, i: usize, p: [f64; 2]) -> Option<f64> {
        let spec = &self.sources[i];
        let scale = self.horizon() / spec.horizon;
        let local = match &spec.shape {
            SourceShape::Disk { center } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                PI * (dx * dx + dy * dy)
            }
            SourceShape::Polygon { center, vertices } => {
                let g = gauge(center, vertices, p)?;
                super::region::polygon_area(vertices).abs() * g * g
            }
        };
        (local <= spec.horizon * (1.0 + 1e-12)).then_some(local * scale)
    }

    /// Source sequence at resolution `m`: every covered lattice point, once per
    /// source covering it, sorted by appearance time, then lexicographically,
    /// then by source index.
    pub fn source_sequence(&self, m: u32) -> Result<Vec<SourcePoint>> {
        if m == 0 {
            return Err(Error::InvalidResolution(m));
        }
        let t = self.horizon();
        let mut out = Vec::new();
        for i in 0..self.sources.len() {
            for site in lattice_points(&self.source_region(i, t), m)? {
                if let Some(time) = self.appearance_time(i, site.coords(m)) {
                    out.push(SourcePoint { site, time, source: i });
                }
            }
        }
        out.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.site.cmp(&b.site)).then(a.source.cmp(&b.source)));
        Ok(out)
    }

    /// Lattice points of `D_0`.
    pub fn initial_sites(&self, m: u32) -> Result<Vec<Site>> {
        lattice_points(&self.initial, m)
    }

    /// Number of sequence points emitted by global time `s`, i.e. `floor(m^2 s)`
    /// clamped to the sequence length.
    pub fn steps_at(&self, m: u32, s: f64, sequence_len: usize) -> usize {
        (((m as f64) * (m as f64) * s).floor() as usize).min(sequence_len)
    }

    /// `sigma_{m,n}`: indicator of `D_0` plus the first `n` source points.
    pub fn sigma_discrete(&self, m: u32, n: usize) -> Result<DensityProfile> {
        let seq = self.source_sequence(m)?;
        if n > seq.len() {
            return Err(Error::StepOutOfRange { n, len: seq.len() });
        }
        let mut mass = BTreeMap::new();
        for s in self.initial_sites(m)? {
            mass.insert(s, 1.0);
        }
        for p in &seq[..n] {
            *mass.entry(p.site).or_insert(0.0) += 1.0;
        }
        Ok(DensityProfile { m, mass })
    }
}

/// Minkowski gauge of a polygon star-shaped about `c`: the least `lambda` with
/// `p` in `c + lambda (P - c)`.
fn gauge(c: &[f64; 2], vertices: &[[f64; 2]], p: [f64; 2]) -> Option<f64> {
    let d = [p[0] - c[0], p[1] - c[1]];
    if d[0] == 0.0 && d[1] == 0.0 {
        return Some(0.0);
    }
    let n = vertices.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        let a = [vertices[i][0] - c[0], vertices[i][1] - c[1]];
        let b = [vertices[(i + 1) % n][0] - c[0], vertices[(i + 1) % n][1] - c[1]];
        // Solve t d = a + u (b - a) for t > 0, u in [0, 1].
        let e = [b[0] - a[0], b[1] - a[1]];
        let det = d[0] * (-e[1]) + d[1] * e[0];
        if det.abs() < 1e-300 {
            continue;
        }
        let t = (a[0] * (-e[1]) + a[1] * e[0]) / det;
        let u = (d[0] * a[1] - d[1] * a[0]) / det;
        if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
            best = Some(best.map_or(t, |x: f64| x.min(t)));
        }
    }
    best.map(|t| 1.0 / t)
}
