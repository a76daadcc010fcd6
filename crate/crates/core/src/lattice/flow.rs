use super::mass::MassDistribution;
use super::site::{LatticeGrid, Site};
use crate::error::Result;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Radius of `D_s` for the disk preset.
pub fn disk_flow_radius(s: f64) -> f64 {
    (1.0 + s / PI).sqrt()
}

/// Normal boundary velocity of the disk flow at a boundary point `p`.
pub fn flow_velocity(p: [f64; 2]) -> f64 {
    1.0 / (2.0 * PI * p[0].hypot(p[1]))
}

/// The monotone family of domains `D_s`.
pub trait Flow: Send + Sync {
    /// Distance from `p` to the boundary of `D_s`, negative inside.
    fn signed_distance(&self, s: f64, p: [f64; 2]) -> f64;

    fn contains(&self, s: f64, p: [f64; 2]) -> bool {
        self.signed_distance(s, p) <= 0.0
    }

    /// `[xmin, ymin, xmax, ymax]` of `D_s`.
    fn bbox(&self, s: f64) -> [f64; 4];

    /// Closed-form disk flow, when this is one.
    fn as_disk(&self) -> Option<&DiskFlow> {
        None
    }
}

/// `D_s = B(0, sqrt(1 + s / pi))`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiskFlow;

impl DiskFlow {
    pub fn radius(&self, s: f64) -> f64 {
        disk_flow_radius(s)
    }

    /// Time at which the boundary passes through radius `r`.
    pub fn arrival_time(&self, r: f64) -> f64 {
        PI * (r * r - 1.0)
    }
}

impl Flow for DiskFlow {
    fn signed_distance(&self, s: f64, p: [f64; 2]) -> f64 {
        p[0].hypot(p[1]) - self.radius(s)
    }

    fn bbox(&self, s: f64) -> [f64; 4] {
        let r = self.radius(s);
        [-r, -r, r, r]
    }

    fn as_disk(&self) -> Option<&DiskFlow> {
        Some(self)
    }
}

struct FlowSlice {
    m: u32,
    mass: LatticeGrid<f64>,
    segments: Vec<[[f64; 2]; 2]>,
}

/// Flow of a general mass distribution, taken from a fine-resolution divisible
/// sandpile. Each requested time is stabilised once and cached as the
/// half-level polyline of the sandpile mass.
pub struct NumericFlow {
    md: MassDistribution,
    resolution: u32,
    cache: Mutex<Vec<(u64, Arc<FlowSlice>)>>,
}

impl NumericFlow {
    pub fn new(md: MassDistribution, resolution: u32) -> Self {
        NumericFlow { md, resolution, cache: Mutex::new(Vec::new()) }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    fn slice(&self, s: f64) -> Result<Arc<FlowSlice>> {
        let key = s.to_bits();
        if let Some((_, sl)) = self.cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(sl.clone());
        }
        self.md.check_time(s)?;
        let m = self.resolution;
        let seq = self.md.source_sequence(m)?;
        let n = self.md.steps_at(m, s, seq.len());
        let sigma = self.md.sigma_discrete(m, n)?;
        let mass = crate::growth::stabilize(&sigma, 1e-10)?;
        let segments = half_level_segments(&mass, m);
        let sl = Arc::new(FlowSlice { m, mass, segments });
        self.cache.lock().unwrap().push((key, sl.clone()));
        Ok(sl)
    }

    /// Boundary polyline of `D_s` as unordered segments.
    pub fn boundary_segments(&self, s: f64) -> Result<Vec<[[f64; 2]; 2]>> {
        Ok(self.slice(s)?.segments.clone())
    }

    fn interpolated_mass(sl: &FlowSlice, p: [f64; 2]) -> f64 {
        let mf = sl.m as f64;
        let (fx, fy) = (p[0] * mf, p[1] * mf);
        let (ix, iy) = (fx.floor() as i32, fy.floor() as i32);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let g = |dx, dy| sl.mass.get(Site::new(ix + dx, iy + dy)).min(1.0);
        (1.0 - tx) * (1.0 - ty) * g(0, 0) + tx * (1.0 - ty) * g(1, 0) + (1.0 - tx) * ty * g(0, 1) + tx * ty * g(1, 1)
    }
}

impl Flow for NumericFlow {
    fn signed_distance(&self, s: f64, p: [f64; 2]) -> f64 {
        let sl = self.slice(s).expect("numeric flow: time outside horizon");
        let d = sl
            .segments
            .iter()
            .map(|seg| point_segment_distance(p, seg))
            .fold(f64::INFINITY, f64::min);
        if Self::interpolated_mass(&sl, p) >= 0.5 {
            -d
        } else {
            d
        }
    }

    fn bbox(&self, s: f64) -> [f64; 4] {
        let sl = self.slice(s).expect("numeric flow: time outside horizon");
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for seg in &sl.segments {
            for q in seg {
                b[0] = b[0].min(q[0]);
                b[1] = b[1].min(q[1]);
                b[2] = b[2].max(q[0]);
                b[3] = b[3].max(q[1]);
            }
        }
        b
    }
}

fn point_segment_distance(p: [f64; 2], seg: &[[f64; 2]; 2]) -> f64 {
    let [a, b] = *seg;
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Marching squares on `min(nu, 1) - 1/2`.
fn half_level_segments(mass: &LatticeGrid<f64>, m: u32) -> Vec<[[f64; 2]; 2]> {
    let h = 1.0 / m as f64;
    let o = mass.origin();
    let f = |x: i32, y: i32| mass.get(Site::new(x, y)).min(1.0) - 0.5;
    let mut segs = Vec::new();
    for y in (o.y - 1)..(o.y + mass.height() as i32) {
        for x in (o.x - 1)..(o.x + mass.width() as i32) {
            let c = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)];
            let v: Vec<f64> = c.iter().map(|&(a, b)| f(a, b)).collect();
            let mut pts = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (v[k], v[(k + 1) % 4]);
                if (a >= 0.0) != (b >= 0.0) {
                    let t = a / (a - b);
                    let (p0, p1) = (c[k], c[(k + 1) % 4]);
                    pts.push([
                        (p0.0 as f64 + t * (p1.0 - p0.0) as f64) * h,
                        (p0.1 as f64 + t * (p1.1 - p0.1) as f64) * h,
                    ]);
                }
            }
            if pts.len() >= 2 {
                segs.push([pts[0], pts[1]]);
            }
            if pts.len() == 4 {
                segs.push([pts[2], pts[3]]);
            }
        }
    }
    segs
}
