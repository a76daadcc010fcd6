use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::lattice::Site;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Hex SHA-256 of the verb and the canonical JSON form of the config,
/// ignoring the output root.
pub fn config_hash(verb: &str, config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output.dir = PathBuf::new();
    let json = serde_json::to_string(&c).expect("config serialises");
    let mut h = Sha256::new();
    h.update(verb.as_bytes());
    h.update([0u8]);
    h.update(json.as_bytes());
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedStatus {
    pub m: u32,
    pub index: usize,
    pub seed: u64,
    /// `"ok"` or the reason the run was excluded.
    pub status: String,
}

/// Everything needed to reproduce a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub verb: String,
    pub config_hash: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedStatus>,
    /// `C` in the band width `eps_m = C m^{-3/5}`, when fitted.
    pub eps_constant: Option<f64>,
    pub passed: bool,
    pub started: u64,
    pub finished: u64,
    /// Written files, relative to the run directory.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config { field: "manifest".into(), message: e.to_string() })
    }
}

/// A fresh output directory `<verb>-<unixsecs>-<hash8>` under the configured root.
#[derive(Debug)]
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
    files: Vec<String>,
}

impl RunDir {
    /// Never reuses an existing directory; a numeric suffix is added on collision.
    pub fn create(root: &Path, verb: &str, hash: &str) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        let base = format!("{verb}-{}-{}", unix_seconds(), &hash[..8]);
        let mut k = 0;
        loop {
            let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
            let path = root.join(name);
            match std::fs::create_dir(&path) {
                Ok(()) => return Ok(RunDir { path, hash: hash.to_string(), files: Vec::new() }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => k += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path.join(rel);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&p, contents)?;
        self.files.push(rel.to_string());
        Ok(p)
    }

    /// CSV with a `# manifest <hash>` comment line before the header.
    pub fn write_csv(&mut self, rel: &str, table: &Csv) -> Result<PathBuf> {
        let text = format!("# manifest {}\n{}", self.hash, table.render());
        self.write(rel, &text)
    }

    pub fn write_manifest(&mut self, manifest: &RunManifest) -> Result<PathBuf> {
        let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.to_string()))?;
        let p = self.path.join(MANIFEST_FILE);
        std::fs::write(&p, json + "\n")?;
        Ok(p)
    }
}

/// In-memory CSV table; cells are written verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses `render` output, skipping `#` comment lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().ok_or(Error::EmptySample)?;
        let mut t = Csv { header: header.split(',').map(String::from).collect(), rows: Vec::new() };
        for l in lines {
            t.rows.push(l.split(',').map(String::from).collect());
        }
        Ok(t)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Shortest round-trip decimal form; empty for `None`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Snapshot text: a `m=<m> step=<n>` header, then one `x y` pair per line.
pub fn snapshot_text(m: u32, step: usize, sites: &[Site]) -> String {
    let mut s = format!("m={m} step={step}\n");
    for q in sites {
        let _ = writeln!(s, "{} {}", q.x, q.y);
    }
    s
}

/// Field snapshot: same header, then `x y value` per line.
pub fn field_text(m: u32, step: usize, values: &[(Site, f64)]) -> String {
    let mut s = format!("m={m} step={step}\n");
    for (q, v) in values {
        let _ = writeln!(s, "{} {} {}", q.x, q.y, v);
    }
    s
}

/// Inverse of [`snapshot_text`].
pub fn parse_snapshot(text: &str) -> Result<(u32, usize, Vec<Site>)> {
    let bad = || Error::Config { field: "snapshot".into(), message: "malformed snapshot".into() };
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(bad)?;
    let mut m = None;
    let mut step = None;
    for kv in head.split_whitespace() {
        match kv.split_once('=') {
            Some(("m", v)) => m = v.parse().ok(),
            Some(("step", v)) => step = v.parse().ok(),
            _ => return Err(bad()),
        }
    }
    let mut sites = Vec::new();
    for l in lines {
        let mut it = l.split_whitespace().map(|t| t.parse::<i32>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(x)), Some(Ok(y)), None) => sites.push(Site::new(x, y)),
            _ => return Err(bad()),
        }
    }
    Ok((m.ok_or_else(bad)?, step.ok_or_else(bad)?, sites))
}

/// Square lattice cells on a white background, one colour per layer.
pub fn svg_sites(m: u32, layers: &[(&[Site], &str)]) -> String {
    let all = layers.iter().flat_map(|(s, _)| s.iter());
    let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for q in all {
        x0 = x0.min(q.x);
        y0 = y0.min(q.y);
        x1 = x1.max(q.x);
        y1 = y1.max(q.y);
    }
    if x0 > x1 {
        (x0, y0, x1, y1) = (0, 0, 0, 0);
    }
    let (w, h) = (x1 - x0 + 3, y1 - y0 + 3);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{}\" height=\"{}\">\n<desc>m={m}</desc>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        4 * w,
        4 * h
    );
    for (sites, colour) in layers {
        let _ = writeln!(s, "<g fill=\"{colour}\">");
        for q in *sites {
            // SVG y grows downwards.
            let _ = writeln!(s, "<rect x=\"{}\" y=\"{}\" width=\"1\" height=\"1\"/>", q.x - x0 + 1, y1 - q.y + 1);
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Polar heat map of `(r, theta, value)` cells; blue negative, red positive,
/// grey for missing values.
pub fn svg_polar_map(cells: &[(f64, f64, Option<f64>)], dr: f64, dtheta: f64) -> String {
    let scale = cells.iter().filter_map(|c| c.2).map(f64::abs).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rmax = cells.iter().map(|c| c.0 + dr / 2.0).fold(0.0, f64::max);
    let size = 2.0 * rmax * 1.05;
    let c = size / 2.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size} {size}\" width=\"600\" height=\"600\">\n<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>\n"
    );
    for &(r, th, v) in cells {
        let (ra, rb) = (r - dr / 2.0, r + dr / 2.0);
        let (ta, tb) = (th - dtheta / 2.0, th + dtheta / 2.0);
        let pt = |rr: f64, tt: f64| (c + rr * tt.cos(), c - rr * tt.sin());
        let (p1, p2, p3, p4) = (pt(ra, ta), pt(rb, ta), pt(rb, tb), pt(ra, tb));
        let fill = match v {
            None => "#888888".to_string(),
            Some(v) => {
                let t = (v / scale).clamp(-1.0, 1.0);
                let k = (255.0 * (1.0 - t.abs())) as u8;
                if t >= 0.0 {
                    format!("#ff{k:02x}{k:02x}")
                } else {
                    format!("#{k:02x}{k:02x}ff")
                }
            }
        };
        let _ = writeln!(
            s,
            "<polygon points=\"{:.5},{:.5} {:.5},{:.5} {:.5},{:.5} {:.5},{:.5}\" fill=\"{fill}\"/>",
            p1.0, p1.1, p2.0, p2.1, p3.0, p3.1, p4.0, p4.1
        );
    }
    let _ = writeln!(s, "<circle cx=\"{c}\" cy=\"{c}\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.005\"/>");
    s.push_str("</svg>\n");
    s
}
