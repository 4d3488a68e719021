//! Expectation values on sparse states and the CSV column names used by the
//! `qca run` output.

use std::fmt;

use num_complex::Complex64;

use crate::evolution::{PlaquetteBlock, StepConfig};
use crate::fock::{electric_value, sector_map, SectorReport, SparseState};
use crate::lattice::{Axis, Direction, HalfLinkId, Lattice, PlaquetteAddress};

pub fn occupation(lat: &Lattice, state: &SparseState, x: usize, j: usize) -> f64 {
    state.iter().filter(|(c, _)| c.occupied(lat, x, j)).map(|(_, a)| a.norm_sqr()).sum()
}

/// `<E_{x:eta}>` with the symmetric representative of the stored residue.
pub fn electric_expectation(lat: &Lattice, state: &SparseState, h: HalfLinkId) -> f64 {
    state.iter().map(|(c, a)| a.norm_sqr() * electric_value(lat, c, h) as f64).sum()
}

/// `<H_E> = g_E^2 eps / 2 sum_links <E^2>`, one term per link.
pub fn electric_energy(lat: &Lattice, state: &SparseState, cfg: &StepConfig) -> f64 {
    let w: f64 = state
        .iter()
        .map(|(c, a)| {
            let e2: i64 = lat.links().map(|l| electric_value(lat, c, HalfLinkId { site: l.site, dir: l.axis.pos() }).pow(2)).sum();
            a.norm_sqr() * e2 as f64
        })
        .sum();
    cfg.g_e * cfg.g_e * cfg.eps / 2.0 * w
}

/// `<psi| P |psi>`.
pub fn plaquette_expectation(lat: &Lattice, state: &SparseState, p: PlaquetteAddress) -> Complex64 {
    let b = PlaquetteBlock::new(lat, p);
    state
        .iter()
        .map(|(c, a)| {
            let (img, amp) = b.apply_p(lat, c, *a);
            state.get(&img).conj() * amp
        })
        .sum()
}

pub fn gauss_report(lat: &Lattice, state: &SparseState) -> SectorReport {
    sector_map(lat, state)
}

/// One CSV column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    Occupation { site: usize, mode: usize },
    Electric(HalfLinkId),
    ElectricEnergy,
    PlaquetteRe(PlaquetteAddress),
    PlaquetteIm(PlaquetteAddress),
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Occupation { site, mode } => write!(f, "occ[{site};{mode}]"),
            Observable::Electric(h) => {
                let d = if h.dir.positive { h.dir.axis.name().to_string() } else { h.dir.to_string() };
                write!(f, "E[{};{d}]", h.site)
            }
            Observable::ElectricEnergy => f.write_str("Eenergy"),
            Observable::PlaquetteRe(p) => write!(f, "ReP[{};{}]", p.base, p.plane),
            Observable::PlaquetteIm(p) => write!(f, "ImP[{};{}]", p.base, p.plane),
        }
    }
}

impl Observable {
    /// Parses a column header: `occ[x;j]`, `E[x;eta]`, `Eenergy`,
    /// `ReP[x;eta,zeta]`, `ImP[x;eta,zeta]`. `P[x;eta,zeta]` expands to both parts.
    pub fn parse(lat: &Lattice, s: &str) -> Result<Vec<Observable>, String> {
        let s = s.trim();
        if s == "Eenergy" {
            return Ok(vec![Observable::ElectricEnergy]);
        }
        let bad = || format!("unknown observable `{s}`");
        let open = s.find('[').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(']').ok_or_else(bad)?;
        let (site, rest) = inner.split_once(';').ok_or_else(bad)?;
        let site: usize = site.trim().parse().map_err(|_| bad())?;
        if site >= lat.site_count() {
            return Err(format!("observable `{s}`: site {site} outside the lattice"));
        }
        let plaquette = || -> Result<PlaquetteAddress, String> {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            let (a, b) = (Axis::from_name(a.trim()).ok_or_else(bad)?, Axis::from_name(b.trim()).ok_or_else(bad)?);
            let plane = lat.plane(a, b).map_err(|e| format!("observable `{s}`: {e}"))?;
            Ok(PlaquetteAddress { base: site, plane })
        };
        match &s[..open] {
            "occ" => {
                let mode: usize = rest.trim().parse().map_err(|_| bad())?;
                if mode >= lat.d_modes() {
                    return Err(format!("observable `{s}`: mode {mode} outside the site"));
                }
                Ok(vec![Observable::Occupation { site, mode }])
            }
            "E" => {
                let dir = Direction::parse(rest).ok_or_else(bad)?;
                if !lat.has_axis(dir.axis) {
                    return Err(format!("observable `{s}`: no axis {}", dir.axis));
                }
                Ok(vec![Observable::Electric(HalfLinkId { site, dir })])
            }
            "ReP" => Ok(vec![Observable::PlaquetteRe(plaquette()?)]),
            "ImP" => Ok(vec![Observable::PlaquetteIm(plaquette()?)]),
            "P" => {
                let p = plaquette()?;
                Ok(vec![Observable::PlaquetteRe(p), Observable::PlaquetteIm(p)])
            }
            _ => Err(bad()),
        }
    }

    pub fn evaluate(&self, lat: &Lattice, state: &SparseState, cfg: &StepConfig) -> f64 {
        let v = match *self {
            Observable::Occupation { site, mode } => occupation(lat, state, site, mode),
            Observable::Electric(h) => electric_expectation(lat, state, h),
            Observable::ElectricEnergy => electric_energy(lat, state, cfg),
            Observable::PlaquetteRe(p) => plaquette_expectation(lat, state, p).re,
            Observable::PlaquetteIm(p) => plaquette_expectation(lat, state, p).im,
        };
        v + 0.0
    }
}
