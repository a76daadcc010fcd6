//! Lattice stand-in for the limit formulas when `D_s` has no closed form.
//!
//! `D_t` is the support of the divisible sandpile `nu_t` at a fixed
//! resolution, `psi_t` the grid-harmonic extension of `u` from its lattice
//! boundary, and `1 - sigma_t` the discrete balance `nu_t - sigma_t`.

use super::variance::{LatenessForm, TheoryOptions, TheoryValue};
use crate::error::Result;
use crate::growth::{stabilize, EXCESS_TOL, SUPPORT_TOL};
use crate::harmonic::{solve_grid_dirichlet, GaussLegendre, GridFunction};
use crate::lattice::{MassDistribution, Site};
use crate::stats::TestFunction;

struct Slice {
    /// `(site, nu - sigma)` over the support of `nu`.
    balance: Vec<(Site, f64)>,
    sites: Vec<Site>,
}

struct Node {
    t: f64,
    w: f64,
    slice: Slice,
    psi_u: GridFunction,
    psi_v: GridFunction,
}

pub struct GridSurrogate<'a> {
    md: &'a MassDistribution,
    opts: TheoryOptions,
}

impl<'a> GridSurrogate<'a> {
    pub fn new(md: &'a MassDistribution, opts: TheoryOptions) -> Self {
        GridSurrogate { md, opts }
    }

    fn slice(&self, t: f64) -> Result<Slice> {
        let m = self.opts.surrogate_resolution;
        let len = self.md.source_sequence(m)?.len();
        let n = self.md.steps_at(m, t, len);
        let sigma = self.md.sigma_discrete(m, n)?;
        let nu = stabilize(&sigma, EXCESS_TOL)?;
        let mut balance = Vec::new();
        let mut sites = Vec::new();
        for (x, v) in nu.iter() {
            if v > SUPPORT_TOL {
                sites.push(x);
                balance.push((x, v - sigma.get(x)));
            }
        }
        Ok(Slice { balance, sites })
    }

    fn psi(&self, f: &TestFunction, sl: &Slice) -> Result<GridFunction> {
        solve_grid_dirichlet(&sl.sites, self.opts.surrogate_resolution, |p| f.eval(p), 1e-11)
    }

    fn pair(&self, a: &GridFunction, b: &GridFunction, sl: &Slice, fa: &TestFunction, fb: &TestFunction) -> f64 {
        let m = self.opts.surrogate_resolution;
        let mut acc = 0.0;
        for &(x, w) in &sl.balance {
            let p = x.coords(m);
            let va = a.value(x).unwrap_or_else(|| fa.eval(p));
            let vb = b.value(x).unwrap_or_else(|| fb.eval(p));
            acc += va * vb * w;
        }
        acc / (m as f64).powi(2)
    }

    pub fn fixed_time(&self, u: &TestFunction, v: &TestFunction, s: f64) -> Result<TheoryValue> {
        let sl = self.slice(s)?;
        let (a, b) = (self.psi(u, &sl)?, self.psi(v, &sl)?);
        let value = self.pair(&a, &b, &sl, u, v);
        // One lattice spacing of boundary error.
        Ok(TheoryValue { value, error_estimate: value.abs() / self.opts.surrogate_resolution as f64 })
    }

    /// Tensor Gauss-Legendre on `[0, s]^2` of the symmetric kernel, halved;
    /// each pair is integrated over the earlier domain.
    fn ordered(&self, u: &TestFunction, v: &TestFunction, nodes: &[Node]) -> f64 {
        let mut acc = 0.0;
        for a in nodes {
            for b in nodes {
                let (early, late) = if b.t <= a.t { (b, a) } else { (a, b) };
                let k = self.pair(&late.psi_u, &early.psi_v, &early.slice, u, v)
                    + self.pair(&early.psi_u, &late.psi_v, &early.slice, u, v);
                acc += a.w * b.w * k;
            }
        }
        0.5 * acc
    }

    pub fn lateness(&self, u: &TestFunction, v: &TestFunction, s: f64, form: LatenessForm) -> Result<TheoryValue> {
        let eval = |n: usize| -> Result<f64> {
            let gl = GaussLegendre::new(n);
            let mut nodes = Vec::with_capacity(n);
            for (t, w) in gl.composite_nodes(&[0.0, s], 1) {
                let slice = self.slice(t)?;
                let (psi_u, psi_v) = (self.psi(u, &slice)?, self.psi(v, &slice)?);
                nodes.push(Node { t, w, slice, psi_u, psi_v });
            }
            let ordered = self.ordered(u, v, &nodes);
            if form == LatenessForm::Ordered {
                return Ok(ordered);
            }
            let ss = self.slice(s)?;
            let (us, vs) = (self.psi(u, &ss)?, self.psi(v, &ss)?);
            let mut cross = 0.0;
            for nd in &nodes {
                cross += nd.w * (self.pair(&us, &nd.psi_v, &nd.slice, u, v) + self.pair(&nd.psi_u, &vs, &nd.slice, u, v));
            }
            Ok(s * s * self.pair(&us, &vs, &ss, u, v) + ordered - s * cross)
        };
        let n = self.opts.surrogate_time_nodes.max(2);
        let fine = eval(n)?;
        let coarse = eval((n / 2).max(1))?;
        Ok(TheoryValue { value: fine, error_estimate: (fine - coarse).abs() })
    }
}
