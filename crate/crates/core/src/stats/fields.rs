use super::test_functions::TestFunction;
use crate::error::{Error, Result};
use crate::growth::{GrowthHistory, SandpileHistory};
use crate::lattice::{LatticeGrid, Site};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// `E = m (1_A - nu)`.
    Error,
    /// `L = (arrival step)/m - (1/m) sum_n n (nu_n - nu_{n-1})`.
    Lateness,
}

/// Sparse lattice field, sorted by site.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub m: u32,
    pub kind: FieldKind,
    pub step: usize,
    pub values: Vec<(Site, f64)>,
}

/// Sandpile mass with its support listed once, for repeated field builds.
#[derive(Debug, Clone)]
pub struct MassField {
    pub grid: LatticeGrid<f64>,
    pub support: Vec<(Site, f64)>,
}

impl MassField {
    pub fn new(grid: LatticeGrid<f64>) -> Self {
        let support = grid.iter().filter(|&(_, v)| v != 0.0).collect();
        MassField { grid, support }
    }
}

fn finish(map: HashMap<Site, f64>, m: u32, kind: FieldKind, step: usize) -> ScalarField {
    let mut values: Vec<(Site, f64)> = map.into_iter().filter(|&(_, v)| v != 0.0).collect();
    values.sort_unstable_by_key(|e| e.0);
    ScalarField { m, kind, step, values }
}

/// `E_m = m (1_{A(n)} - nu_n)`, where `nu` is the sandpile after the same `n` steps.
pub fn error_field(run: &GrowthHistory, nu: &MassField, n: usize) -> ScalarField {
    let m = run.m();
    let mf = m as f64;
    let mut map: HashMap<Site, f64> = HashMap::with_capacity(nu.support.len() + n);
    for &(s, v) in &nu.support {
        let a = if run.occupied_at(s, n) { 1.0 } else { 0.0 };
        map.insert(s, mf * (a - v));
    }
    for &s in run.initial().iter().chain(run.arrivals()[..n.min(run.steps())].iter()) {
        map.entry(s).or_insert(mf);
    }
    finish(map, m, FieldKind::Error, n)
}

/// Lateness field after `n` steps; the sandpile must have run exactly `n` steps
/// with its accumulator.
pub fn lateness_field(run: &GrowthHistory, pile: &SandpileHistory, n: usize) -> Result<ScalarField> {
    if pile.steps != n {
        return Err(Error::StepOutOfRange { n, len: pile.steps });
    }
    let acc = pile.accumulator.as_ref().ok_or(Error::Unsupported("sandpile ran without accumulator".into()))?;
    let m = run.m();
    let mf = m as f64;
    let mut map: HashMap<Site, f64> = HashMap::with_capacity(2 * n);
    for (s, v) in acc.iter() {
        if v != 0.0 {
            map.insert(s, -v / mf);
        }
    }
    for (i, &s) in run.arrivals()[..n.min(run.steps())].iter().enumerate() {
        *map.entry(s).or_insert(0.0) += (i + 1) as f64 / mf;
    }
    Ok(finish(map, m, FieldKind::Lateness, n))
}

/// `(F, u) = m^{-2} sum_x F(x) u(x)`.
pub fn inner_product(field: &ScalarField, u: &TestFunction) -> f64 {
    inner_product_with(field, |p| u.eval(p))
}

pub fn inner_product_with(field: &ScalarField, u: impl Fn([f64; 2]) -> f64) -> f64 {
    let m = field.m;
    let s: f64 = field.values.iter().map(|&(site, v)| v * u(site.coords(m))).sum();
    s / (m as f64 * m as f64)
}
