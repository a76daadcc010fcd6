use crate::error::{Error, Result};
use crate::growth::GrowthHistory;
use crate::harmonic::GridFunction;
use crate::lattice::{Flow, Site};

/// Stepwise martingale built from one IDLA run and the grid-harmonic `psi_(m)`.
///
/// Index `t - 1` holds the value at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleTrace {
    pub m: u32,
    pub eps_m: f64,
    /// First step whose arrival leaves the `eps_m` neighbourhood of `D_s`.
    pub tau_star: Option<usize>,
    pub m_series: Vec<f64>,
    pub increments: Vec<f64>,
    pub s_series: Vec<f64>,
    pub z_series: Vec<f64>,
    pub n_series: Vec<f64>,
}

impl MartingaleTrace {
    pub fn stopped(&self) -> bool {
        self.tau_star.is_some()
    }

    pub fn final_value(&self) -> f64 {
        self.m_series.last().copied().unwrap_or(0.0)
    }
}

/// Trace `M_m`, `X_{m,t}`, `S_m`, `Z_m` and `N_m = S_m - Z_m` over the first
/// `steps` arrivals; `sources` are the starting points `z_{m,t}`.
pub fn martingale_diagnostics(
    run: &GrowthHistory,
    psi: &GridFunction,
    sources: &[Site],
    flow: &dyn Flow,
    s: f64,
    eps_m: f64,
    steps: usize,
) -> Result<MartingaleTrace> {
    let m = run.m();
    if steps > run.steps() || steps > sources.len() {
        return Err(Error::StepOutOfRange { n: steps, len: run.steps().min(sources.len()) });
    }
    let mf = m as f64;
    let psi_at = |x: Site| psi.value(x).ok_or(Error::Unsupported(format!("psi undefined at ({}, {})", x.x, x.y)));
    let mut tr = MartingaleTrace {
        m,
        eps_m,
        tau_star: None,
        m_series: Vec::with_capacity(steps),
        increments: Vec::with_capacity(steps),
        s_series: Vec::with_capacity(steps),
        z_series: Vec::with_capacity(steps),
        n_series: Vec::with_capacity(steps),
    };
    let (mut mv, mut sv, mut zv) = (0.0, 0.0, 0.0);
    for t in 1..=steps {
        let mut x = 0.0;
        if tr.tau_star.is_none() {
            let a = run.arrivals()[t - 1];
            let z = sources[t - 1];
            let (pa, pz) = (psi_at(a)?, psi_at(z)?);
            x = (pa - pz) / mf;
            zv += (pa * pa - pz * pz) / (mf * mf);
            if flow.signed_distance(s, a.coords(m)) > eps_m {
                tr.tau_star = Some(t);
            }
        }
        mv += x;
        sv += x * x;
        tr.increments.push(x);
        tr.m_series.push(mv);
        tr.s_series.push(sv);
        tr.z_series.push(zv);
        tr.n_series.push(sv - zv);
    }
    Ok(tr)
}
