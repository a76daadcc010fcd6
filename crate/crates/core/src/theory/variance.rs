use super::disk::{activation_window, pair_integral, DiskHarmonic, DiskSolver};
use super::surrogate::GridSurrogate;
use crate::error::{Error, Result};
use crate::harmonic::GaussLegendre;
use crate::lattice::{disk_flow_radius, MassDistribution};
use crate::stats::TestFunction;
use serde::{Deserialize, Serialize};

/// A limit value with an estimate of its numerical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// Which lateness variance formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatenessForm {
    /// Two nested time integrals; needs `supp u` inside `D_s`.
    Ordered,
    /// Three-term form valid for any `u`.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryOptions {
    /// Gauss-Legendre nodes per time panel.
    pub time_nodes: usize,
    /// Lattice resolution of the grid surrogate for general mass distributions.
    pub surrogate_resolution: u32,
    /// Time nodes of the grid surrogate.
    pub surrogate_time_nodes: usize,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions { time_nodes: 32, surrogate_resolution: 32, surrogate_time_nodes: 12 }
    }
}

/// Everything a variance or covariance evaluation depends on.
#[derive(Debug, Clone)]
pub struct VarianceSpec<'a> {
    pub u: &'a TestFunction,
    pub v: Option<&'a TestFunction>,
    pub s: f64,
    pub md: &'a MassDistribution,
    pub options: TheoryOptions,
}

impl<'a> VarianceSpec<'a> {
    pub fn new(u: &'a TestFunction, s: f64, md: &'a MassDistribution) -> Self {
        VarianceSpec { u, v: None, s, md, options: TheoryOptions::default() }
    }

    pub fn with(mut self, v: &'a TestFunction) -> Self {
        self.v = Some(v);
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return Err(Error::TimeOutOfRange { s: self.s, horizon: self.md.horizon() });
        }
        self.md.check_time(self.s)
    }

    pub fn fixed_time(&self) -> Result<TheoryValue> {
        self.check()?;
        let v = self.v.unwrap_or(self.u);
        if !self.md.is_disk_preset() {
            return GridSurrogate::new(self.md, self.options).fixed_time(self.u, v, self.s);
        }
        let a = DiskSolver::new(self.u).psi(self.s)?.clone();
        let b = DiskSolver::new(v).psi(self.s)?.clone();
        let value = pair_integral(&a, &b, self.s);
        let half = a.coeffs.len() / 2;
        let coarse = pair_integral(&truncate(&a, half), &truncate(&b, half), self.s);
        Ok(TheoryValue { value, error_estimate: (value - coarse).abs() })
    }

    pub fn lateness(&self, form: LatenessForm) -> Result<TheoryValue> {
        self.check()?;
        let v = self.v.unwrap_or(self.u);
        if form == LatenessForm::Ordered {
            let big_r = self.flow_radius_bound();
            for f in [self.u, v] {
                if f.support().outer_radius() > big_r {
                    return Err(Error::SupportNotContained);
                }
            }
        }
        if !self.md.is_disk_preset() {
            return GridSurrogate::new(self.md, self.options).lateness(self.u, v, self.s, form);
        }
        let gl = GaussLegendre::new(self.options.time_nodes);
        let mut su = DiskSolver::new(self.u);
        let mut sv = DiskSolver::new(v);
        let coarse = disk_lateness(&mut su, &mut sv, self.s, form, &gl, 1)?;
        let fine = disk_lateness(&mut su, &mut sv, self.s, form, &gl, 2)?;
        Ok(TheoryValue { value: fine, error_estimate: (fine - coarse).abs() })
    }

    fn flow_radius_bound(&self) -> f64 {
        if self.md.is_disk_preset() {
            disk_flow_radius(self.s) + 1e-12
        } else {
            f64::INFINITY
        }
    }
}

fn truncate(h: &DiskHarmonic, k: usize) -> DiskHarmonic {
    DiskHarmonic { radius: h.radius, coeffs: h.coeffs[..=k].to_vec() }
}

/// Nested time quadrature for the disk preset with `panels` panels between
/// consecutive activation breakpoints.
fn disk_lateness(
    su: &mut DiskSolver,
    sv: &mut DiskSolver,
    s: f64,
    form: LatenessForm,
    gl: &GaussLegendre,
    panels: usize,
) -> Result<f64> {
    let wu = activation_window(su.function(), s);
    let wv = activation_window(sv.function(), s);
    let mut breaks = vec![0.0, s];
    for w in [wu, wv].into_iter().flatten() {
        breaks.extend_from_slice(&w);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let inside = |w: Option<[f64; 2]>, t: f64| w.map_or(false, |w| t >= w[0] && t <= w[1]);
    let active = |t: f64| inside(wu, t) || inside(wv, t);

    let mut ordered = 0.0;
    for (t1, w1) in gl.composite_nodes(&breaks, panels) {
        if !active(t1) {
            continue;
        }
        let u1 = su.psi(t1)?.clone();
        let v1 = sv.psi(t1)?.clone();
        let mut inner_breaks: Vec<f64> = breaks.iter().copied().filter(|&b| b < t1).collect();
        inner_breaks.push(t1);
        let mut inner = 0.0;
        for (t2, w2) in gl.composite_nodes(&inner_breaks, panels) {
            if !active(t2) {
                continue;
            }
            let (u2, v2) = (su.psi(t2)?.clone(), sv.psi(t2)?.clone());
            inner += w2 * (pair_integral(&u1, &v2, t2) + pair_integral(&u2, &v1, t2));
        }
        ordered += w1 * inner;
    }
    if form == LatenessForm::Ordered {
        return Ok(ordered);
    }
    let us = su.psi(s)?.clone();
    let vs = sv.psi(s)?.clone();
    let mut cross = 0.0;
    for (t, w) in gl.composite_nodes(&breaks, panels) {
        let (ut, vt) = (su.psi(t)?.clone(), sv.psi(t)?.clone());
        cross += w * (pair_integral(&us, &vt, t) + pair_integral(&ut, &vs, t));
    }
    Ok(s * s * pair_integral(&us, &vs, s) + ordered - s * cross)
}

/// `int_{D_s} |psi|^2 (1 - sigma_s)`: limit variance of `(E, u)`.
pub fn variance_fixed_time(u: &TestFunction, s: f64, md: &MassDistribution) -> Result<TheoryValue> {
    VarianceSpec::new(u, s, md).fixed_time()
}

/// `int_{D_s} psi phi (1 - sigma_s)`.
pub fn covariance_fixed_time(u: &TestFunction, v: &TestFunction, s: f64, md: &MassDistribution) -> Result<TheoryValue> {
    VarianceSpec::new(u, s, md).with(v).fixed_time()
}

/// Limit variance of `(L, u)`.
pub fn variance_lateness(u: &TestFunction, s: f64, md: &MassDistribution, form: LatenessForm) -> Result<TheoryValue> {
    VarianceSpec::new(u, s, md).lateness(form)
}

/// Limit covariance of `(L, u)` and `(L, v)` with the symmetrised integrand.
pub fn covariance_lateness(u: &TestFunction, v: &TestFunction, s: f64, md: &MassDistribution) -> Result<TheoryValue> {
    VarianceSpec::new(u, s, md).with(v).lateness(LatenessForm::Ordered)
}

/// Three-term covariance, valid without the support condition.
pub fn covariance_lateness_general(
    u: &TestFunction,
    v: &TestFunction,
    s: f64,
    md: &MassDistribution,
) -> Result<TheoryValue> {
    VarianceSpec::new(u, s, md).with(v).lateness(LatenessForm::General)
}
