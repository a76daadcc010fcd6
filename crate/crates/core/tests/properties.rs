use growthlab::growth::{run_idla, stabilize, topple, IdlaOptions, ToppleOrder};
use growthlab::harmonic::solve_grid_dirichlet;
use growthlab::harness::{ExperimentConfig, Overrides};
use growthlab::lattice::{lattice_points, DensityProfile, LatticeGrid, MassDistribution, Region, Site};
use growthlab::stats::{error_field, inner_product, MassField, NamedTest, TestFunction};
use growthlab::theory::{
    covariance_fixed_time, covariance_lateness, covariance_lateness_general, g_disk_closed, variance_fixed_time, variance_lateness,
    LatenessForm,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-3)
}

fn masses() -> impl Strategy<Value = Vec<((i32, i32), f64)>> {
    prop::collection::vec(((-3i32..=3, -3i32..=3), 0.1f64..3.0), 1..6)
}

fn grid_of(m: &[((i32, i32), f64)]) -> LatticeGrid<f64> {
    let mut g = LatticeGrid::new(-14, -14, 14, 14, 0.0);
    for &((x, y), v) in m {
        let s = Site::new(x, y);
        g.set(s, g.get(s) + v);
    }
    g
}

/// A polynomial of degree at most two with the given coefficients.
fn quadratic(c: [f64; 6]) -> TestFunction {
    TestFunction::Polynomial {
        terms: vec![[c[0], 0.0, 0.0], [c[1], 1.0, 0.0], [c[2], 0.0, 1.0], [c[3], 2.0, 0.0], [c[4], 1.0, 1.0], [c[5], 0.0, 2.0]],
    }
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-1.0f64..1.0)
}

fn md() -> MassDistribution {
    MassDistribution::disk()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn toppling_order_does_not_matter(m in masses(), a in any::<u64>(), b in any::<u64>()) {
        let mut x = grid_of(&m);
        let mut y = x.clone();
        topple(&mut x, None, ToppleOrder::Random(a), 1e-13, 1_000_000_000).unwrap();
        topple(&mut y, None, ToppleOrder::Random(b), 1e-13, 1_000_000_000).unwrap();
        for (p, q) in x.data().iter().zip(y.data()) {
            prop_assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn stabilisation_conserves_discrete_harmonic_moments(m in masses()) {
        let mut sigma = DensityProfile { m: 1, ..Default::default() };
        for &((x, y), v) in &m {
            *sigma.mass.entry(Site::new(x, y)).or_insert(0.0) += v;
        }
        let nu = stabilize(&sigma, 1e-13).unwrap();
        let hs: [fn(Site) -> f64; 5] =
            [|_| 1.0, |s| s.x as f64, |s| s.y as f64, |s| (s.x * s.y) as f64, |s| (s.x * s.x - s.y * s.y) as f64];
        for h in hs {
            let a: f64 = nu.iter().map(|(s, v)| h(s) * v).sum();
            let b: f64 = sigma.mass.iter().map(|(&s, &v)| h(s) * v).sum();
            let scale: f64 = sigma.mass.iter().map(|(&s, &v)| h(s).abs() * v).sum::<f64>().max(1.0);
            prop_assert!((a - b).abs() <= 1e-8 * scale);
        }
        for (_, v) in nu.iter() {
            prop_assert!(v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn idla_prefix_is_stable(seed in any::<u64>(), k in 1usize..60) {
        let m = 8;
        let d = md();
        let initial = d.initial_sites(m).unwrap();
        let sources: Vec<Site> = d.source_sequence(m).unwrap().iter().take(60).map(|p| p.site).collect();
        let full = run_idla(&initial, &sources, m, seed, IdlaOptions::default()).unwrap();
        let part = run_idla(&initial, &sources[..k], m, seed, IdlaOptions::default()).unwrap();
        prop_assert_eq!(&full.arrivals()[..k], part.arrivals());
        prop_assert_eq!(full.occupied_set(k).len(), initial.len() + k);
    }

    #[test]
    fn error_field_has_zero_total(seed in any::<u64>()) {
        let m = 10;
        let d = md();
        let r = growthlab::stats::Reference::build(&d, m, 1.5, false).unwrap();
        let run = r.run(seed, IdlaOptions::default()).unwrap();
        let e = error_field(&run, &MassField::new(r.pile.mass.clone()), r.steps);
        prop_assert!(inner_product(&e, &TestFunction::one()).abs() < 1e-9);
    }

    #[test]
    fn grid_harmonic_obeys_maximum_principle(c in coeffs(), r in 0.5f64..1.5) {
        let m = 12;
        let dom = lattice_points(&Region::Disk { center: [0.0, 0.0], radius: r }, m).unwrap();
        let u = quadratic(c);
        let f = solve_grid_dirichlet(&dom, m, |p| u.eval(p), 1e-12).unwrap();
        let boundary: Vec<f64> = f.nodes().filter(|(s, _)| !f.is_interior(*s)).map(|(_, v)| v).collect();
        let lo = boundary.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = boundary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (s, v) in f.nodes() {
            if f.is_interior(s) {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }

    #[test]
    fn fixed_time_polarization_and_bilinearity(a in coeffs(), b in coeffs(), k in -2.0f64..2.0, s in 0.3f64..PI) {
        let d = md();
        let (u, v) = (quadratic(a), quadratic(b));
        let plus = TestFunction::sum(&[(1.0, &u), (1.0, &v)]);
        let minus = TestFunction::sum(&[(1.0, &u), (-1.0, &v)]);
        let cov = covariance_fixed_time(&u, &v, s, &d).unwrap().value;
        let pol = (variance_fixed_time(&plus, s, &d).unwrap().value - variance_fixed_time(&minus, s, &d).unwrap().value) / 4.0;
        let scale = variance_fixed_time(&u, s, &d).unwrap().value.max(variance_fixed_time(&v, s, &d).unwrap().value);
        prop_assert!((cov - pol).abs() <= 1e-8 * scale.max(1e-3));
        let ku = TestFunction::sum(&[(k, &u)]);
        let scaled = covariance_fixed_time(&ku, &v, s, &d).unwrap().value;
        prop_assert!((scaled - k * cov).abs() <= 1e-8 * scale.max(1e-3));
        let sym = covariance_fixed_time(&v, &u, s, &d).unwrap().value;
        prop_assert!((sym - cov).abs() <= 1e-10 * scale.max(1e-3));
        prop_assert!(variance_fixed_time(&u, s, &d).unwrap().value >= -1e-12);
    }

    #[test]
    fn point_correlation_is_symmetric_and_rotation_invariant(
        rp in 1.02f64..1.4, rq in 1.02f64..1.4, tp in -PI..PI, dt in 0.2f64..PI, rot in -PI..PI
    ) {
        let pt = |r: f64, t: f64| [r * t.cos(), r * t.sin()];
        let g = g_disk_closed(pt(rp, tp), pt(rq, tp + dt)).unwrap().value;
        let swapped = g_disk_closed(pt(rq, tp + dt), pt(rp, tp)).unwrap().value;
        let rotated = g_disk_closed(pt(rp, tp + rot), pt(rq, tp + dt + rot)).unwrap().value;
        let reflected = g_disk_closed(pt(rp, -tp), pt(rq, -tp - dt)).unwrap().value;
        let scale = g.abs().max(1.0);
        prop_assert!((g - swapped).abs() <= 1e-9 * scale);
        prop_assert!((g - rotated).abs() <= 1e-8 * scale);
        prop_assert!((g - reflected).abs() <= 1e-8 * scale);
    }

    #[test]
    fn config_round_trips(
        ms in prop::collection::vec(8u32..512, 1..4),
        s in 0.01f64..PI,
        seeds in 1usize..5000,
        base in 0..=i64::MAX as u64,
        eps in 0.01f64..0.2,
        cx in 1.05f64..1.3,
        svg in any::<bool>(),
    ) {
        let mut c = ExperimentConfig::from_toml("").unwrap();
        c.apply(&Overrides { base_seed: Some(base), seeds: Some(seeds), resolution: Some(ms), s: Some(s), ..Default::default() });
        c.tests = vec![NamedTest::new("b", TestFunction::bump([cx, 0.0], eps)), NamedTest::new("q", quadratic([0.5, -1.0, 0.25, 1.0, 0.0, -1.0]))];
        c.output.svg = svg;
        c.validate().unwrap();
        let text = c.to_toml().unwrap();
        prop_assert_eq!(&ExperimentConfig::from_toml(&text).unwrap(), &c);
        let json = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(&serde_json::from_str::<ExperimentConfig>(&json).unwrap(), &c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn lateness_polarization(a in coeffs(), b in coeffs()) {
        let d = md();
        let s = 2.0;
        let (u, v) = (quadratic(a), quadratic(b));
        let plus = TestFunction::sum(&[(1.0, &u), (1.0, &v)]);
        let minus = TestFunction::sum(&[(1.0, &u), (-1.0, &v)]);
        let var = |f: &TestFunction| variance_lateness(f, s, &d, LatenessForm::General).unwrap().value;
        let cov = covariance_lateness_general(&u, &v, s, &d).unwrap().value;
        let pol = (var(&plus) - var(&minus)) / 4.0;
        prop_assert!(rel_close(cov, pol, 1e-8), "{cov} vs {pol}");
        prop_assert!(var(&u) >= -1e-9);
    }

    #[test]
    fn ordered_lateness_polarization(t1 in -PI..PI, t2 in -PI..PI) {
        let d = md();
        let u = TestFunction::bump([1.25 * t1.cos(), 1.25 * t1.sin()], 0.1);
        let v = TestFunction::bump([1.2 * t2.cos(), 1.2 * t2.sin()], 0.1);
        let plus = TestFunction::sum(&[(1.0, &u), (1.0, &v)]);
        let minus = TestFunction::sum(&[(1.0, &u), (-1.0, &v)]);
        let var = |f: &TestFunction| variance_lateness(f, PI, &d, LatenessForm::Ordered).unwrap().value;
        let cov = covariance_lateness(&u, &v, PI, &d).unwrap().value;
        let pol = (var(&plus) - var(&minus)) / 4.0;
        prop_assert!(rel_close(cov, pol, 1e-8), "{cov} vs {pol}");
        let sym = covariance_lateness(&v, &u, PI, &d).unwrap().value;
        prop_assert!(rel_close(cov, sym, 1e-8));
    }
}
