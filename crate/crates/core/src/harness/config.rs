use crate::error::{Error, Result};
use crate::lattice::MassDistribution;
use crate::stats::{NamedTest, TestFunction};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One experiment, read from TOML.
///
/// Every section except `[run]` may be omitted. A missing `resolution` or an
/// out-of-range value is reported by [`ExperimentConfig::validate`] with the
/// dotted name of the offending field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub run: RunConfig,
    /// Test-function registry; empty means each command uses its built-ins.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<NamedTest>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub correlation: CorrelationConfig,
    #[serde(default)]
    pub smash: SmashConfig,
}

/// `preset = "disk"` or an explicit `[domain.mass]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassDistribution>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { preset: Some("disk".into()), mass: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Lattice resolutions `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Vec<u32>>,
    /// Rescaled time; defaults to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "one")]
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    /// Also sample the lateness field in `verify-variance`.
    #[serde(default)]
    pub lateness: bool,
}

fn one() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { resolution: None, s: None, seeds: 1, base_seed: 0, workers: 0, lateness: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `|z|` of a variance comparison.
    #[serde(default = "z_max")]
    pub z_max: f64,
    /// Smallest accepted KS p-value.
    #[serde(default = "ks_p_min")]
    pub ks_p_min: f64,
    /// Largest accepted log-log slope of the fluctuation.
    #[serde(default = "slope_max")]
    pub slope_max: f64,
    /// Largest accepted fraction of IDLA runs above the fitted bound.
    #[serde(default = "violation_max")]
    pub violation_max: f64,
    #[serde(default = "bootstrap")]
    pub bootstrap_resamples: usize,
}

fn z_max() -> f64 {
    3.0
}
fn ks_p_min() -> f64 {
    0.01
}
fn slope_max() -> f64 {
    -0.5
}
fn violation_max() -> f64 {
    0.02
}
fn bootstrap() -> usize {
    400
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            z_max: z_max(),
            ks_p_min: ks_p_min(),
            slope_max: slope_max(),
            violation_max: violation_max(),
            bootstrap_resamples: bootstrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
    /// Also write SVG renderings.
    #[serde(default)]
    pub svg: bool,
    /// Occupied-set snapshot files per `(m, process)` in `simulate`.
    #[serde(default = "one")]
    pub snapshots: usize,
}

fn out_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: out_dir(), svg: false, snapshots: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    /// Fixed point `q`.
    #[serde(default = "default_q")]
    pub q: [f64; 2],
    /// Radii of `p` run over `radial` points strictly inside `(1, sqrt 2)`.
    #[serde(default = "radial")]
    pub radial: usize,
    /// Angles of `p` run over `angular` points in `[-pi, pi)`.
    #[serde(default = "angular")]
    pub angular: usize,
    /// Extra grid points `p`, appended as given.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
}

/// `q = (1/2 + sqrt(5)/4, 0)`.
pub fn default_q() -> [f64; 2] {
    [0.5 + 5f64.sqrt() / 4.0, 0.0]
}
fn radial() -> usize {
    40
}
fn angular() -> usize {
    72
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        CorrelationConfig { q: default_q(), radial: radial(), angular: angular(), points: Vec::new() }
    }
}

/// Two axis-aligned squares of half-width `half_width`, centred at
/// `(-offset, 0)` and `(offset, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmashConfig {
    #[serde(default = "half_width")]
    pub half_width: f64,
    #[serde(default = "offset")]
    pub offset: f64,
}

fn half_width() -> f64 {
    0.5
}
fn offset() -> f64 {
    0.25
}

impl Default for SmashConfig {
    fn default() -> Self {
        SmashConfig { half_width: half_width(), offset: offset() }
    }
}

/// Command-line replacements applied before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub base_seed: Option<u64>,
    pub seeds: Option<usize>,
    pub resolution: Option<Vec<u32>>,
    pub s: Option<f64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("toml").to_string();
            config_error(&field, e.message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error("path", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.base_seed {
            self.run.base_seed = v;
        }
        if let Some(v) = o.seeds {
            self.run.seeds = v;
        }
        if let Some(v) = &o.resolution {
            self.run.resolution = Some(v.clone());
        }
        if let Some(v) = o.s {
            self.run.s = Some(v);
        }
        if let Some(v) = &o.output {
            self.output.dir = v.clone();
        }
        if let Some(v) = o.workers {
            self.run.workers = v;
        }
    }

    pub fn mass_distribution(&self) -> Result<MassDistribution> {
        match (&self.domain.preset, &self.domain.mass) {
            (Some(_), Some(_)) => Err(config_error("domain", "give either preset or mass, not both")),
            (None, Some(md)) => Ok(md.clone()),
            (Some(p), None) if p == "disk" => Ok(MassDistribution::disk()),
            (Some(p), None) => Err(config_error("domain.preset", format!("unknown preset {p:?}"))),
            (None, None) => Err(config_error("domain", "missing preset or mass")),
        }
    }

    pub fn resolutions(&self) -> Result<&[u32]> {
        match &self.run.resolution {
            None => Err(config_error("resolution", "missing; give at least one lattice resolution m")),
            Some(v) if v.is_empty() => Err(config_error("resolution", "empty list")),
            Some(v) => Ok(v),
        }
    }

    /// `s`, defaulting to the horizon.
    pub fn time(&self) -> Result<f64> {
        let md = self.mass_distribution()?;
        Ok(self.run.s.unwrap_or(md.horizon()))
    }

    pub fn validate(&self) -> Result<()> {
        let md = self.mass_distribution()?;
        for &m in self.resolutions()? {
            if m < 8 {
                return Err(config_error("resolution", format!("m = {m} is below the minimum 8")));
            }
        }
        if self.run.seeds < 1 {
            return Err(config_error("run.seeds", "at least one seed is required"));
        }
        // TOML integers are signed, so larger seeds could not be written back.
        if self.run.base_seed > i64::MAX as u64 {
            return Err(config_error("run.base_seed", format!("{} exceeds {}", self.run.base_seed, i64::MAX)));
        }
        let s = self.time()?;
        let t = md.horizon();
        if !(s > 0.0 && s <= t) {
            return Err(config_error("run.s", format!("s = {s} is outside (0, {t}]")));
        }
        let mut ids = std::collections::HashSet::new();
        for t in &self.tests {
            if !ids.insert(t.id.as_str()) {
                return Err(config_error("tests", format!("duplicate id {:?}", t.id)));
            }
            if t.id.contains(',') || t.id.contains('\n') {
                return Err(config_error("tests", format!("id {:?} may not contain commas or newlines", t.id)));
            }
        }
        let c = &self.correlation;
        if c.radial == 0 || c.angular == 0 {
            return Err(config_error("correlation", "grid sizes must be positive"));
        }
        if !(self.smash.half_width > 0.0 && self.smash.offset >= 0.0) {
            return Err(config_error("smash", "half_width must be positive and offset non-negative"));
        }
        if !(self.tolerances.violation_max >= 0.0 && self.tolerances.bootstrap_resamples >= 2) {
            return Err(config_error("tolerances", "violation_max >= 0 and bootstrap_resamples >= 2 required"));
        }
        Ok(())
    }

    /// Registered tests, or `defaults` when the registry is empty.
    pub fn tests_or(&self, defaults: Vec<NamedTest>) -> Vec<NamedTest> {
        if self.tests.is_empty() {
            defaults
        } else {
            self.tests.clone()
        }
    }
}

/// Built-in registry: constant, coordinate monomials, harmonic polynomials,
/// and one bump at radius 1.2.
pub fn builtin_tests() -> Vec<NamedTest> {
    vec![
        NamedTest::new("one", TestFunction::one()),
        NamedTest::new("x", TestFunction::x()),
        NamedTest::new("y", TestFunction::y()),
        NamedTest::new("xy", TestFunction::xy()),
        NamedTest::new("x2_minus_y2", TestFunction::x2_minus_y2()),
        NamedTest::new("bump_1.2", TestFunction::bump([1.2, 0.0], 0.05)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[domain]
preset = "disk"

[run]
resolution = [32, 64]
s = 3.141592653589793
seeds = 20
base_seed = 7

[[tests]]
id = "x"
kind = "polynomial"
terms = [[1.0, 1.0, 0.0]]

[[tests]]
id = "bump"
kind = "bump"
center = [1.2, 0.0]
eps = 0.05

[output]
dir = "out"
svg = true
"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_toml(FULL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.resolutions().unwrap(), &[32, 64]);
        assert_eq!(c.tests.len(), 2);
        assert_eq!(c.tests[1].function, TestFunction::bump([1.2, 0.0], 0.05));
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn round_trip_is_identity() {
        let c = ExperimentConfig::from_toml(FULL).unwrap();
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn empty_config_has_one_seed() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c.run.seeds, 1);
        assert_eq!(c.domain, DomainConfig::default());
    }

    #[test]
    fn missing_resolution_is_named() {
        let c = ExperimentConfig::from_toml("[run]\nseeds = 3\n").unwrap();
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "resolution"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        for (text, field) in [
            ("[run]\nresolution = [4]\n", "resolution"),
            ("[run]\nresolution = [16]\nseeds = 0\n", "run.seeds"),
            ("[run]\nresolution = [16]\ns = 0.0\n", "run.s"),
            ("[run]\nresolution = [16]\ns = 4.0\n", "run.s"),
            ("[domain]\npreset = \"square\"\n[run]\nresolution = [16]\n", "domain.preset"),
        ] {
            let c = ExperimentConfig::from_toml(text).unwrap();
            match c.validate() {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn seed_beyond_toml_range_is_rejected() {
        let mut c = ExperimentConfig::from_toml("[run]\nresolution = [16]\n").unwrap();
        c.apply(&Overrides { base_seed: Some(1 << 63), ..Default::default() });
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "run.base_seed"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let e = ExperimentConfig::from_toml("[run]\nresolutoin = [16]\n").unwrap_err();
        assert!(matches!(e, Error::Config { .. }), "{e:?}");
    }

    #[test]
    fn overrides_replace_fields() {
        let mut c = ExperimentConfig::from_toml(FULL).unwrap();
        c.apply(&Overrides { seeds: Some(3), resolution: Some(vec![16]), s: Some(1.0), ..Overrides::default() });
        assert_eq!(c.run.seeds, 3);
        assert_eq!(c.resolutions().unwrap(), &[16]);
        assert_eq!(c.time().unwrap(), 1.0);
    }

    #[test]
    fn explicit_mass_distribution_is_accepted() {
        let mut c = ExperimentConfig::from_toml("[run]\nresolution = [16]\n").unwrap();
        c.domain = DomainConfig { preset: None, mass: Some(MassDistribution::disk()) };
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again.mass_distribution().unwrap(), MassDistribution::disk());
    }

    #[test]
    fn guide_example_parses() {
        let guide = include_str!("../../../../book/src/harness.md");
        let block = guide.split("```toml\n").nth(1).unwrap().split("```").next().unwrap();
        let c = ExperimentConfig::from_toml(block).unwrap();
        c.validate().unwrap();
        assert_eq!(c.resolutions().unwrap().to_vec(), vec![32, 64]);
        assert_eq!(c.tests.len(), 1);
    }
}
