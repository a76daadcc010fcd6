use crate::error::{Error, Result};
use crate::lattice::MassDistribution;
use std::f64::consts::PI;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                    p1 = x;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }

    /// Mapped `(node, weight)` pairs of the composite rule with `panels` equal
    /// panels in each interval between consecutive `breaks`.
    pub fn composite_nodes(&self, breaks: &[f64], panels: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let len = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * len;
                let (c, h) = (lo + 0.5 * len, 0.5 * len);
                for (x, wt) in self.nodes.iter().zip(&self.weights) {
                    out.push((c + h * x, wt * h));
                }
            }
        }
        out
    }
}

/// Controls for the polar tensor-product rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub angular_nodes: usize,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes_per_panel: 32, panels: 2, angular_nodes: 256, tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

fn polar_rule(f: &dyn Fn([f64; 2]) -> f64, pieces: &[(f64, f64, f64)], gl: &GaussLegendre, panels: usize, nth: usize) -> f64 {
    let mut total = 0.0;
    for &(a, b, w) in pieces {
        for (r, wr) in gl.composite_nodes(&[a, b], panels) {
            let mut ring = 0.0;
            for k in 0..nth {
                let t = 2.0 * PI * (k as f64 + 0.5) / nth as f64;
                ring += f([r * t.cos(), r * t.sin()]);
            }
            total += w * wr * r * ring * (2.0 * PI / nth as f64);
        }
    }
    total
}

/// `int_{D_s} f (1 - sigma_s) dA` for the disk preset.
///
/// Radial panels break where `1 - sigma_s` jumps (at `sqrt(s/pi)` and 1) and
/// at the outer radius; the error estimate is the change when both the panel
/// count and the angular node count are doubled.
pub fn integrate_weighted(f: &dyn Fn([f64; 2]) -> f64, md: &MassDistribution, s: f64, spec: QuadratureSpec) -> Result<QuadResult> {
    if !md.is_disk_preset() {
        return Err(Error::Unsupported("polar quadrature needs the disk preset".into()));
    }
    md.check_time(s)?;
    let rho = (s / PI).sqrt();
    let big_r = (1.0 + s / PI).sqrt();
    // 1 - sigma is -1 on the source ball, 0 on the rest of D_0, 1 outside D_0.
    let pieces = [(0.0, rho, -1.0), (1.0, big_r, 1.0)];
    let gl = GaussLegendre::new(spec.nodes_per_panel);
    let coarse = polar_rule(f, &pieces, &gl, spec.panels, spec.angular_nodes);
    let fine = polar_rule(f, &pieces, &gl, 2 * spec.panels, 2 * spec.angular_nodes);
    let err = (fine - coarse).abs();
    if err > spec.tolerance * fine.abs().max(1.0) {
        return Err(Error::QuadratureTolerance { estimate: err, tolerance: spec.tolerance });
    }
    Ok(QuadResult { value: fine, error_estimate: err })
}
