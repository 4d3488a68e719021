//! Flat run configuration.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qca_core::evolution::{MagneticFormulation, StepConfig};
use qca_core::lattice::{Axis, Lattice, PlaquetteAddress};
use qca_core::observables::Observable;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    dim: usize,
    lattice: Vec<usize>,
    #[serde(default = "default_k")]
    k: u32,
    epsilon: Option<f64>,
    #[serde(default)]
    mass: f64,
    #[serde(default = "default_g")]
    g_electric: f64,
    g_magnetic: Option<f64>,
    #[serde(default = "default_coupling")]
    coupling_mode: String,
    #[serde(default = "default_formulation")]
    magnetic_formulation: String,
    steps: usize,
    #[serde(default = "default_initial")]
    initial_state: OneOrMany,
    #[serde(default)]
    observables: Vec<String>,
    #[serde(default)]
    snapshot_every: usize,
    #[serde(default = "default_workers")]
    workers: usize,
    #[serde(default = "default_max_configs")]
    max_configs: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

fn default_k() -> u32 {
    4
}
fn default_g() -> f64 {
    1.0
}
fn default_coupling() -> String {
    "locked".into()
}
fn default_formulation() -> String {
    "fourier".into()
}
fn default_initial() -> OneOrMany {
    OneOrMany::One("vacuum".into())
}
fn default_workers() -> usize {
    1
}
fn default_max_configs() -> usize {
    4_000_000
}

/// One item of `initial_state`.
#[derive(Debug, Clone, PartialEq)]
pub enum Prep {
    Vacuum,
    DiracSea,
    File(PathBuf),
    Pair(usize),
    Particle(usize, usize),
    Loop(PlaquetteAddress),
}

#[derive(Debug)]
pub struct RunConfig {
    pub lattice: Lattice,
    pub step: StepConfig,
    pub steps: usize,
    pub initial: Vec<Prep>,
    pub observables: Vec<Observable>,
    pub snapshot_every: usize,
    pub workers: usize,
    /// Abort once one sub-step would produce more branch entries than this.
    pub max_configs: usize,
}

fn key_err(key: &str, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("config key `{key}`: {msg}")
}

/// `5` or `(1,2)`.
fn parse_site(lat: &Lattice, s: &str) -> Result<usize> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let coords = inner.split(',').map(|c| c.trim().parse::<isize>()).collect::<Result<Vec<_>, _>>()?;
        if coords.len() != lat.spatial_dim() {
            bail!("site `{s}` needs {} coordinates", lat.spatial_dim());
        }
        for (c, &n) in coords.iter().zip(lat.dims()) {
            if *c < 0 || *c as usize >= n {
                bail!("site `{s}` outside the lattice");
            }
        }
        return Ok(lat.site_at(&coords));
    }
    let x: usize = s.parse().map_err(|_| anyhow!("bad site `{s}`"))?;
    if x >= lat.site_count() {
        bail!("site {x} outside the lattice");
    }
    Ok(x)
}

fn parse_prep(lat: &Lattice, s: &str, dir: &Path) -> Result<Prep> {
    let s = s.trim();
    match s {
        "vacuum" => return Ok(Prep::Vacuum),
        "dirac_sea" => return Ok(Prep::DiracSea),
        _ => {}
    }
    if let Some(p) = s.strip_prefix("file:") {
        return Ok(Prep::File(dir.join(p.trim())));
    }
    let (kind, arg) = s.split_once('@').ok_or_else(|| anyhow!("unknown initial state `{s}`"))?;
    match kind.trim() {
        "pair" => Ok(Prep::Pair(parse_site(lat, arg)?)),
        "particle" => {
            let (x, j) = arg.split_once(';').ok_or_else(|| anyhow!("expected particle@site;mode, got `{s}`"))?;
            let j: usize = j.trim().parse().map_err(|_| anyhow!("bad mode in `{s}`"))?;
            if j >= lat.d_modes() {
                bail!("mode {j} outside the site");
            }
            Ok(Prep::Particle(parse_site(lat, x)?, j))
        }
        "loop" => {
            let (x, plane) = arg.split_once(';').ok_or_else(|| anyhow!("expected loop@site;eta,zeta, got `{s}`"))?;
            let (a, b) = plane.split_once(',').ok_or_else(|| anyhow!("expected loop@site;eta,zeta, got `{s}`"))?;
            let axis = |n: &str| Axis::from_name(n.trim()).ok_or_else(|| anyhow!("unknown axis `{n}`"));
            let plane = lat.plane(axis(a)?, axis(b)?)?;
            Ok(Prep::Loop(PlaquetteAddress { base: parse_site(lat, x)?, plane }))
        }
        _ => bail!("unknown initial state `{s}`"),
    }
}

fn formulation(s: &str) -> Result<MagneticFormulation> {
    Ok(match s {
        "fourier" => MagneticFormulation::Fourier,
        "qwsplit" => MagneticFormulation::QwSplit,
        "exact" => MagneticFormulation::Exact,
        _ => return Err(key_err("magnetic_formulation", format!("expected fourier | qwsplit | exact, got `{s}`"))),
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, dir)
    }

    /// Parses config text; relative `file:` paths resolve against `dir`.
    pub fn parse(text: &str, dir: &Path) -> Result<RunConfig> {
        let raw: Raw = toml::from_str(text).map_err(|e| anyhow!("invalid config: {}", e.message()))?;
        if raw.lattice.len() != raw.dim {
            return Err(key_err("lattice", format!("expected {} extents for dim = {}, got {}", raw.dim, raw.dim, raw.lattice.len())));
        }
        let lattice = Lattice::new(raw.dim, &raw.lattice, raw.k).map_err(|e| key_err(if raw.k % 2 == 1 { "k" } else { "lattice" }, e))?;
        let form = formulation(&raw.magnetic_formulation)?;
        let step = match raw.coupling_mode.as_str() {
            "locked" => {
                let mut c = StepConfig::locked(raw.k, raw.g_electric, raw.mass).map_err(|e| key_err("g_electric", e))?;
                if let Some(eps) = raw.epsilon {
                    if (eps - c.eps).abs() > 1e-9 * c.eps {
                        return Err(key_err(
                            "epsilon",
                            format!("locked coupling with k = {} and g_electric = {} fixes epsilon = {}, got {eps}", raw.k, raw.g_electric, c.eps),
                        ));
                    }
                }
                if let Some(g) = raw.g_magnetic {
                    c = c.with_g_m(g);
                }
                c
            }
            "free" => {
                let eps = raw.epsilon.ok_or_else(|| key_err("epsilon", "required with coupling_mode = \"free\""))?;
                StepConfig::free(raw.k, eps, raw.mass, raw.g_electric, raw.g_magnetic.unwrap_or(1.0)).map_err(|e| key_err("epsilon", e))?
            }
            other => return Err(key_err("coupling_mode", format!("expected locked | free, got `{other}`"))),
        }
        .with_magnetic(form);
        let items = match raw.initial_state {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        };
        if items.is_empty() {
            return Err(key_err("initial_state", "empty list"));
        }
        let initial = items.iter().map(|s| parse_prep(&lattice, s, dir)).collect::<Result<Vec<_>>>().map_err(|e| key_err("initial_state", e))?;
        let observables = if raw.observables.is_empty() {
            (0..lattice.site_count()).flat_map(|x| (0..lattice.d_modes()).map(move |j| Observable::Occupation { site: x, mode: j })).collect()
        } else {
            let mut v = Vec::new();
            for o in &raw.observables {
                v.extend(Observable::parse(&lattice, o).map_err(|e| key_err("observables", e))?);
            }
            v
        };
        if raw.workers == 0 {
            return Err(key_err("workers", "must be at least 1"));
        }
        Ok(RunConfig { lattice, step, steps: raw.steps, initial, observables, snapshot_every: raw.snapshot_every, workers: raw.workers, max_configs: raw.max_configs })
    }
}
