use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Test functions paired with the fluctuation fields.
///
/// Bumps use the `C^4` profile `(1 - rho^2)^5`; the point bump is normalised
/// to unit mass, `eta_c^eps(x) = 6 / (pi eps^2) (1 - |x - c|^2 / eps^2)^5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant { value: f64 },
    /// `sum c x^a y^b` over `terms = [[c, a, b], ...]`.
    Polynomial { terms: Vec<[f64; 3]> },
    Bump { center: [f64; 2], eps: f64 },
    /// Point bump with centre given in polar coordinates.
    PolarBump { radius: f64, angle: f64, eps: f64 },
    /// Rotation-invariant bump `(1 - ((|x| - r)/eps)^2)^5` around the circle of radius `r`.
    AnnularBump { radius: f64, eps: f64 },
    /// `sum scale_i f_i`.
    Sum { terms: Vec<Scaled> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub scale: f64,
    #[serde(flatten)]
    pub function: TestFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Analytic,
    C4,
}

/// Where a test function can be nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Everywhere,
    Ball { center: [f64; 2], radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Support {
    /// Largest distance from the origin reached by the support.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            Support::Everywhere => f64::INFINITY,
            Support::Ball { center, radius } => center[0].hypot(center[1]) + radius,
            Support::Annulus { outer, .. } => outer,
        }
    }

    /// `[min |x|, max |x|]` over the support.
    pub fn radial_range(&self) -> [f64; 2] {
        match *self {
            Support::Everywhere => [0.0, f64::INFINITY],
            Support::Ball { center, radius } => {
                let c = center[0].hypot(center[1]);
                [(c - radius).max(0.0), c + radius]
            }
            Support::Annulus { inner, outer } => [inner.max(0.0), outer],
        }
    }
}

fn profile(rho2: f64) -> f64 {
    if rho2 >= 1.0 {
        0.0
    } else {
        (1.0 - rho2).powi(5)
    }
}

impl TestFunction {
    pub fn x() -> Self {
        TestFunction::Polynomial { terms: vec![[1.0, 1.0, 0.0]] }
    }

    pub fn y() -> Self {
        TestFunction::Polynomial { terms: vec![[1.0, 0.0, 1.0]] }
    }

    pub fn xy() -> Self {
        TestFunction::Polynomial { terms: vec![[1.0, 1.0, 1.0]] }
    }

    pub fn x2_minus_y2() -> Self {
        TestFunction::Polynomial { terms: vec![[1.0, 2.0, 0.0], [-1.0, 0.0, 2.0]] }
    }

    pub fn x_squared() -> Self {
        TestFunction::Polynomial { terms: vec![[1.0, 2.0, 0.0]] }
    }

    pub fn one() -> Self {
        TestFunction::Constant { value: 1.0 }
    }

    pub fn bump(center: [f64; 2], eps: f64) -> Self {
        TestFunction::Bump { center, eps }
    }

    pub fn sum(terms: &[(f64, &TestFunction)]) -> Self {
        TestFunction::Sum { terms: terms.iter().map(|&(scale, f)| Scaled { scale, function: f.clone() }).collect() }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Polynomial { terms } => {
                terms.iter().map(|t| t[0] * p[0].powi(t[1] as i32) * p[1].powi(t[2] as i32)).sum()
            }
            TestFunction::Bump { center, eps } => {
                let d2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
                6.0 / (PI * eps * eps) * profile(d2 / (eps * eps))
            }
            TestFunction::PolarBump { radius, angle, eps } => {
                TestFunction::Bump { center: [radius * angle.cos(), radius * angle.sin()], eps: *eps }.eval(p)
            }
            TestFunction::AnnularBump { radius, eps } => {
                let d = (p[0].hypot(p[1]) - radius) / eps;
                profile(d * d)
            }
            TestFunction::Sum { terms } => terms.iter().map(|t| t.scale * t.function.eval(p)).sum(),
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            TestFunction::Constant { .. } | TestFunction::Polynomial { .. } => Smoothness::Analytic,
            TestFunction::Sum { terms } => {
                if terms.iter().all(|t| t.function.smoothness() == Smoothness::Analytic) {
                    Smoothness::Analytic
                } else {
                    Smoothness::C4
                }
            }
            _ => Smoothness::C4,
        }
    }

    pub fn support(&self) -> Support {
        match *self {
            TestFunction::Constant { .. } | TestFunction::Polynomial { .. } => Support::Everywhere,
            TestFunction::Bump { center, eps } => Support::Ball { center, radius: eps },
            TestFunction::PolarBump { radius, angle, eps } => {
                Support::Ball { center: [radius * angle.cos(), radius * angle.sin()], radius: eps }
            }
            TestFunction::AnnularBump { radius, eps } => Support::Annulus { inner: radius - eps, outer: radius + eps },
            TestFunction::Sum { ref terms } => {
                let live: Vec<Support> = terms.iter().filter(|t| t.scale != 0.0).map(|t| t.function.support()).collect();
                if live.iter().any(|s| *s == Support::Everywhere) {
                    Support::Everywhere
                } else if live.is_empty() {
                    Support::Annulus { inner: 0.0, outer: 0.0 }
                } else {
                    let r: Vec<[f64; 2]> = live.iter().map(|s| s.radial_range()).collect();
                    Support::Annulus {
                        inner: r.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min),
                        outer: r.iter().map(|v| v[1]).fold(0.0, f64::max),
                    }
                }
            }
        }
    }

    /// Crude bound on fourth derivatives over the ball `B(0, reach)`.
    pub fn derivative_bound(&self, reach: f64) -> f64 {
        // sup |d^4/dr^4 (1 - r^2)^5| on [0, 1] is below 2000.
        match self {
            TestFunction::Constant { .. } => 0.0,
            TestFunction::Polynomial { terms } => terms
                .iter()
                .map(|t| {
                    let deg = (t[1] + t[2]) as i32;
                    if deg < 4 {
                        0.0
                    } else {
                        let falling: f64 = (0..4).map(|k| (deg - k) as f64).product();
                        t[0].abs() * falling * reach.powi(deg - 4)
                    }
                })
                .sum(),
            TestFunction::Bump { eps, .. } | TestFunction::PolarBump { eps, .. } => 6.0 / (PI * eps * eps) * 2000.0 / eps.powi(4),
            TestFunction::AnnularBump { eps, .. } => 2000.0 / eps.powi(4),
            TestFunction::Sum { terms } => terms.iter().map(|t| t.scale.abs() * t.function.derivative_bound(reach)).sum(),
        }
    }
}

/// A test function with the identifier used in output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTest {
    pub id: String,
    #[serde(flatten)]
    pub function: TestFunction,
}

impl NamedTest {
    pub fn new(id: &str, function: TestFunction) -> Self {
        NamedTest { id: id.to_string(), function }
    }
}
