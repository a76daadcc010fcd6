use super::site::Site;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed planar region in physical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Empty,
    Disk { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    /// Simple polygon, vertices in order (either orientation).
    Polygon { vertices: Vec<[f64; 2]> },
    /// `{ p : n . p <= offset }`; unbounded, so it cannot be discretised.
    HalfPlane { normal: [f64; 2], offset: f64 },
}

// Relative slack for closedness on the disk boundary.
const BOUNDARY_SLACK: f64 = 1e-12;

impl Region {
    pub fn unit_disk() -> Self {
        Region::Disk { center: [0.0, 0.0], radius: 1.0 }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Region::Empty => false,
            Region::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius * (1.0 + BOUNDARY_SLACK)
            }
            Region::Rect { min, max } => p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1],
            Region::Polygon { vertices } => polygon_contains(vertices, p),
            Region::HalfPlane { normal, offset } => normal[0] * p[0] + normal[1] * p[1] <= *offset,
        }
    }

    /// `[xmin, ymin, xmax, ymax]`, `None` when empty.
    pub fn bbox(&self) -> Result<Option<[f64; 4]>> {
        Ok(match self {
            Region::Empty => None,
            Region::Disk { center, radius } => {
                Some([center[0] - radius, center[1] - radius, center[0] + radius, center[1] + radius])
            }
            Region::Rect { min, max } => Some([min[0], min[1], max[0], max[1]]),
            Region::Polygon { vertices } => {
                if vertices.is_empty() {
                    None
                } else {
                    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                    for v in vertices {
                        b[0] = b[0].min(v[0]);
                        b[1] = b[1].min(v[1]);
                        b[2] = b[2].max(v[0]);
                        b[3] = b[3].max(v[1]);
                    }
                    Some(b)
                }
            }
            Region::HalfPlane { .. } => return Err(Error::UnboundedRegion),
        })
    }

    /// Area of the region.
    pub fn area(&self) -> Result<f64> {
        Ok(match self {
            Region::Empty => 0.0,
            Region::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Region::Rect { min, max } => (max[0] - min[0]).max(0.0) * (max[1] - min[1]).max(0.0),
            Region::Polygon { vertices } => polygon_area(vertices).abs(),
            Region::HalfPlane { .. } => return Err(Error::UnboundedRegion),
        })
    }

    /// Fraction `t` in `(0, 1]` along the segment `a -> b` where it first leaves
    /// the region, given `a` inside and `b` outside.
    pub fn exit_fraction(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        if let Region::Disk { center, radius } = self {
            let d = [b[0] - a[0], b[1] - a[1]];
            let f = [a[0] - center[0], a[1] - center[1]];
            let qa = d[0] * d[0] + d[1] * d[1];
            let qb = 2.0 * (f[0] * d[0] + f[1] * d[1]);
            let qc = f[0] * f[0] + f[1] * f[1] - radius * radius;
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            // Larger root: a is inside, so qc <= 0 and this root is in [0, 1].
            let t = (-qb + disc.sqrt()) / (2.0 * qa);
            return t.clamp(0.0, 1.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.contains([a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn polygon_contains(vertices: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    // Points on an edge count as inside.
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let scale = ((b[0] - a[0]).abs() + (b[1] - a[1]).abs()).max(1.0);
        if cross.abs() <= 1e-12 * scale
            && p[0] >= a[0].min(b[0]) - 1e-12
            && p[0] <= a[0].max(b[0]) + 1e-12
            && p[1] >= a[1].min(b[1]) - 1e-12
            && p[1] <= a[1].max(b[1]) + 1e-12
        {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (vertices[i][0], vertices[i][1]);
        let (xj, yj) = (vertices[j][0], vertices[j][1]);
        if (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

pub(crate) fn polygon_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

/// Lattice points of `(1/m) Z^2` inside the closed region, lexicographic order.
pub fn lattice_points(region: &Region, m: u32) -> Result<Vec<Site>> {
    if m == 0 {
        return Err(Error::InvalidResolution(m));
    }
    let Some(b) = region.bbox()? else {
        return Ok(Vec::new());
    };
    let mf = m as f64;
    let (i0, i1) = ((b[0] * mf).floor() as i32 - 1, (b[2] * mf).ceil() as i32 + 1);
    let (j0, j1) = ((b[1] * mf).floor() as i32 - 1, (b[3] * mf).ceil() as i32 + 1);
    let mut out = Vec::new();
    for i in i0..=i1 {
        for j in j0..=j1 {
            let s = Site::new(i, j);
            if region.contains(s.coords(m)) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_counts() {
        assert_eq!(lattice_points(&Region::unit_disk(), 1).unwrap().len(), 5);
        assert_eq!(lattice_points(&Region::unit_disk(), 2).unwrap().len(), 13);
    }

    #[test]
    fn empty_region_has_no_points() {
        assert!(lattice_points(&Region::Empty, 8).unwrap().is_empty());
    }

    #[test]
    fn unbounded_region_is_rejected() {
        let h = Region::HalfPlane { normal: [1.0, 0.0], offset: 0.0 };
        assert_eq!(lattice_points(&h, 4), Err(Error::UnboundedRegion));
    }

    #[test]
    fn points_are_lexicographic() {
        let pts = lattice_points(&Region::unit_disk(), 6).unwrap();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gauss_circle_counts_against_brute_force() {
        for m in [3u32, 7, 16] {
            let r2 = (m * m) as i64;
            let mut n = 0;
            for i in -(m as i64)..=(m as i64) {
                for j in -(m as i64)..=(m as i64) {
                    if i * i + j * j <= r2 {
                        n += 1;
                    }
                }
            }
            assert_eq!(lattice_points(&Region::unit_disk(), m).unwrap().len(), n);
        }
    }

    #[test]
    fn polygon_square_matches_rect() {
        let poly = Region::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] };
        let rect = Region::Rect { min: [0.0, 0.0], max: [1.0, 1.0] };
        assert_eq!(lattice_points(&poly, 5).unwrap(), lattice_points(&rect, 5).unwrap());
        assert_eq!(lattice_points(&rect, 5).unwrap().len(), 36);
    }

    #[test]
    fn disk_exit_fraction_hits_circle() {
        let d = Region::unit_disk();
        let t = d.exit_fraction([0.5, 0.0], [1.5, 0.0]);
        assert!((t - 0.5).abs() < 1e-14);
        let poly = Region::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] };
        let t = poly.exit_fraction([0.5, 0.0], [1.5, 0.0]);
        assert!((t - 0.5).abs() < 1e-12);
    }
}
