//! Basis-state encoding, Z-string parities, Gauss sectors and sparse states.
//!
//! A [`BasisConfig`] packs one occupation bit per `(site, mode)` followed by
//! one `w`-bit residue per canonical link, `w = ceil(log2 k)`. Bit `i` of the
//! packed integer is:
//!
//! * for `i < sites * d_modes`: occupation of mode `i % d_modes` at site
//!   `i / d_modes`;
//! * above that: link values in link-index order (`site * spatial_dim + axis`),
//!   each stored little-endian in `w` bits.
//!
//! Snapshots print this integer as fixed-width lowercase hex, most
//! significant digit first.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::lattice::{DofId, HalfLinkId, Lattice, LinkId};

pub const DEFAULT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("expected {expected} {what}, got {got}")]
    WrongArity { what: &'static str, expected: usize, got: usize },
    #[error("link value {value} out of range for k={k}")]
    ValueOutOfRange { value: u32, k: u32 },
    #[error("snapshot line {line}: {msg}")]
    Snapshot { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisConfig {
    words: SmallVec<[u64; 4]>,
}

pub fn link_width(lat: &Lattice) -> usize {
    (32 - (lat.k() - 1).leading_zeros()) as usize
}

pub fn total_bits(lat: &Lattice) -> usize {
    lat.mode_count() + lat.link_count() * link_width(lat)
}

pub fn mode_bit(lat: &Lattice, site: usize, mode: usize) -> usize {
    site * lat.d_modes() + mode
}

fn link_offset(lat: &Lattice, link: LinkId) -> usize {
    lat.mode_count() + lat.link_index(link) * link_width(lat)
}

impl BasisConfig {
    pub fn zero(lat: &Lattice) -> BasisConfig {
        BasisConfig { words: SmallVec::from_elem(0, total_bits(lat).div_ceil(64)) }
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    fn field(&self, off: usize, width: usize) -> u32 {
        let (w, b) = (off / 64, off % 64);
        let mut v = self.words[w] >> b;
        if b + width > 64 {
            v |= self.words[w + 1] << (64 - b);
        }
        (v & ((1u64 << width) - 1)) as u32
    }

    fn set_field(&mut self, off: usize, width: usize, v: u32) {
        let (w, b) = (off / 64, off % 64);
        let mask = (1u64 << width) - 1;
        let v = v as u64 & mask;
        self.words[w] = (self.words[w] & !(mask << b)) | (v << b);
        if b + width > 64 {
            let s = 64 - b;
            self.words[w + 1] = (self.words[w + 1] & !(mask >> s)) | (v >> s);
        }
    }

    pub fn occupied(&self, lat: &Lattice, site: usize, mode: usize) -> bool {
        self.bit(mode_bit(lat, site, mode))
    }

    pub fn set_occupied(&mut self, lat: &Lattice, site: usize, mode: usize, v: bool) {
        self.set_bit(mode_bit(lat, site, mode), v)
    }

    pub fn link_value(&self, lat: &Lattice, link: LinkId) -> u32 {
        self.field(link_offset(lat, link), link_width(lat))
    }

    pub fn set_link_value(&mut self, lat: &Lattice, link: LinkId, v: u32) {
        debug_assert!(v < lat.k());
        self.set_field(link_offset(lat, link), link_width(lat), v)
    }

    /// Adds `delta` to the stored link value, mod k.
    pub fn shift_link(&mut self, lat: &Lattice, link: LinkId, delta: i64) {
        let k = lat.k() as i64;
        let v = (self.link_value(lat, link) as i64 + delta).rem_euclid(k);
        self.set_link_value(lat, link, v as u32)
    }

    pub fn particle_count(&self, lat: &Lattice) -> usize {
        (0..lat.mode_count()).filter(|&i| self.bit(i)).count()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_hex(&self, lat: &Lattice) -> String {
        let digits = total_bits(lat).div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let nib = (self.words[d / 16] >> (4 * (d % 16))) & 0xf;
                char::from_digit(nib as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(lat: &Lattice, hex: &str) -> Result<BasisConfig, String> {
        let hex = hex.trim();
        let digits = total_bits(lat).div_ceil(4);
        if hex.len() != digits {
            return Err(format!("expected {digits} hex digits, got {}", hex.len()));
        }
        let mut cfg = BasisConfig::zero(lat);
        for (d, ch) in hex.chars().rev().enumerate() {
            let nib = ch.to_digit(16).ok_or_else(|| format!("bad hex digit {ch:?}"))? as u64;
            cfg.words[d / 16] |= nib << (4 * (d % 16));
        }
        if (total_bits(lat)..digits * 4).any(|i| cfg.bit(i)) {
            return Err("padding bits set".into());
        }
        let (_, values) = decode(lat, &cfg);
        if let Some(v) = values.iter().find(|&&v| v >= lat.k()) {
            return Err(format!("link value {v} out of range"));
        }
        Ok(cfg)
    }
}

pub fn encode(lat: &Lattice, occupations: &[bool], values: &[u32]) -> Result<BasisConfig, FockError> {
    if occupations.len() != lat.mode_count() {
        return Err(FockError::WrongArity { what: "occupations", expected: lat.mode_count(), got: occupations.len() });
    }
    if values.len() != lat.link_count() {
        return Err(FockError::WrongArity { what: "link values", expected: lat.link_count(), got: values.len() });
    }
    let mut cfg = BasisConfig::zero(lat);
    for (i, &o) in occupations.iter().enumerate() {
        cfg.set_bit(i, o);
    }
    for (i, &v) in values.iter().enumerate() {
        if v >= lat.k() {
            return Err(FockError::ValueOutOfRange { value: v, k: lat.k() });
        }
        cfg.set_link_value(lat, lat.link_at(i), v);
    }
    Ok(cfg)
}

pub fn decode(lat: &Lattice, cfg: &BasisConfig) -> (Vec<bool>, Vec<u32>) {
    let occ = (0..lat.mode_count()).map(|i| cfg.bit(i)).collect();
    let vals = lat.links().map(|l| cfg.link_value(lat, l)).collect();
    (occ, vals)
}

/// Symmetric representative of a residue, in `{-k/2, .., k/2-1}`.
pub fn symmetric_rep(v: u32, k: u32) -> i64 {
    if v >= k / 2 {
        v as i64 - k as i64
    } else {
        v as i64
    }
}

/// Electric value at a half-link: the symmetric representative of the stored
/// link value, negated on the negative end.
pub fn electric_value(lat: &Lattice, cfg: &BasisConfig, half: HalfLinkId) -> i64 {
    let (link, sign) = lat.canonical_link(half);
    sign as i64 * symmetric_rep(cfg.link_value(lat, link), lat.k())
}

pub fn dof_parity(lat: &Lattice, cfg: &BasisConfig, dof: DofId) -> bool {
    match dof {
        DofId::Mode { site, mode } => cfg.occupied(lat, site, mode),
        DofId::HalfLink(h) => cfg.link_value(lat, lat.canonical_link(h).0) & 1 == 1,
    }
}

/// Product of `(-1)^parity` over the JW interval `[min(lo,hi), max(lo,hi))`.
pub fn interval_parity(lat: &Lattice, cfg: &BasisConfig, lo: DofId, hi: DofId) -> i8 {
    let (a, b) = (lat.jw_position(lo), lat.jw_position(hi));
    let odd = (a.min(b)..a.max(b)).filter(|&p| dof_parity(lat, cfg, lat.dof_at(p))).count() % 2 == 1;
    if odd {
        -1
    } else {
        1
    }
}

/// Per-site Gauss value `f(x) mod k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorMap {
    pub f: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SectorReport {
    Pure(SectorMap),
    /// Distinct sectors with their total weight.
    Mixed(Vec<(SectorMap, f64)>),
}

impl SectorReport {
    pub fn pure(&self) -> Option<&SectorMap> {
        match self {
            SectorReport::Pure(s) => Some(s),
            SectorReport::Mixed(_) => None,
        }
    }
}

pub fn config_sector(lat: &Lattice, cfg: &BasisConfig) -> SectorMap {
    let k = lat.k() as i64;
    let dirs = lat.directions();
    let f = (0..lat.site_count())
        .map(|x| {
            let n: i64 = (0..lat.d_modes()).filter(|&j| cfg.occupied(lat, x, j)).count() as i64;
            let e: i64 = dirs.iter().map(|&dir| electric_value(lat, cfg, HalfLinkId { site: x, dir })).sum();
            (n + e).rem_euclid(k) as u32
        })
        .collect();
    SectorMap { f }
}

pub fn sector_map(lat: &Lattice, state: &SparseState) -> SectorReport {
    let mut weights: FxHashMap<SectorMap, f64> = FxHashMap::default();
    for (cfg, amp) in state.iter() {
        *weights.entry(config_sector(lat, cfg)).or_default() += amp.norm_sqr();
    }
    let mut list: Vec<_> = weights.into_iter().collect();
    list.sort_by(|a, b| a.0.cmp(&b.0));
    if list.len() == 1 {
        SectorReport::Pure(list.pop().unwrap().0)
    } else {
        SectorReport::Mixed(list)
    }
}

/// Map from basis configurations to amplitudes.
#[derive(Debug, Clone)]
pub struct SparseState {
    entries: FxHashMap<BasisConfig, Complex64>,
    tolerance: f64,
}

impl Default for SparseState {
    fn default() -> Self {
        SparseState::new()
    }
}

impl SparseState {
    pub fn new() -> SparseState {
        SparseState { entries: FxHashMap::default(), tolerance: DEFAULT_TOLERANCE }
    }

    pub fn with_tolerance(tolerance: f64) -> SparseState {
        SparseState { entries: FxHashMap::default(), tolerance }
    }

    pub fn basis(cfg: BasisConfig) -> SparseState {
        let mut s = SparseState::new();
        s.entries.insert(cfg, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (BasisConfig, Complex64)>) -> SparseState {
        let mut s = SparseState::new();
        for (c, a) in entries {
            s.add(c, a);
        }
        s.prune();
        s
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn empty_like(&self) -> SparseState {
        SparseState::with_tolerance(self.tolerance)
    }

    pub fn add(&mut self, cfg: BasisConfig, amp: Complex64) {
        *self.entries.entry(cfg).or_default() += amp;
    }

    pub fn get(&self, cfg: &BasisConfig) -> Complex64 {
        self.entries.get(cfg).copied().unwrap_or_default()
    }

    pub fn contains(&self, cfg: &BasisConfig) -> bool {
        self.entries.contains_key(cfg)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisConfig, &Complex64)> {
        self.entries.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&BasisConfig, &mut Complex64)> {
        self.entries.iter_mut()
    }

    pub fn configs(&self) -> impl Iterator<Item = &BasisConfig> {
        self.entries.keys()
    }

    /// Entries sorted by packed configuration.
    pub fn sorted(&self) -> Vec<(&BasisConfig, Complex64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(c, a)| (c, *a)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn prune(&mut self) {
        let tol = self.tolerance;
        self.entries.retain(|_, a| a.norm() >= tol);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for a in self.entries.values_mut() {
            *a *= alpha;
        }
        self.prune();
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        let (small, large, flip) =
            if self.len() <= other.len() { (self, other, false) } else { (other, self, true) };
        let s: Complex64 = small.iter().map(|(c, a)| a.conj() * large.get(c)).sum();
        if flip {
            s.conj()
        } else {
            s
        }
    }

    /// `||self - other||`, without pruning small differences.
    pub fn distance(&self, other: &SparseState) -> f64 {
        let mut d: f64 = self.iter().map(|(c, a)| (a - other.get(c)).norm_sqr()).sum();
        d += other.iter().filter(|(c, _)| !self.contains(c)).map(|(_, a)| a.norm_sqr()).sum::<f64>();
        d.sqrt() + 0.0
    }
}

/// `alpha * x + y`.
pub fn axpy(alpha: Complex64, x: &SparseState, y: &SparseState) -> SparseState {
    let mut out = y.clone();
    for (c, a) in x.iter() {
        out.add(c.clone(), alpha * a);
    }
    out.prune();
    out
}

pub fn inner(a: &SparseState, b: &SparseState) -> Complex64 {
    a.inner(b)
}

pub fn norm(a: &SparseState) -> f64 {
    a.norm()
}

/// Writes `config_hex, re, im` lines in packed-config order.
pub fn write_snapshot(lat: &Lattice, state: &SparseState, out: &mut impl Write) -> std::io::Result<()> {
    for (cfg, amp) in state.sorted() {
        writeln!(out, "{}, {:e}, {:e}", cfg.to_hex(lat), amp.re, amp.im)?;
    }
    Ok(())
}

pub fn read_snapshot(lat: &Lattice, input: impl BufRead) -> Result<SparseState, FockError> {
    let mut state = SparseState::new();
    for (i, line) in input.lines().enumerate() {
        let err = |msg: String| FockError::Snapshot { line: i + 1, msg };
        let line = line.map_err(|e| err(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<_> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(err(format!("expected 3 fields, got {}", parts.len())));
        }
        let cfg = BasisConfig::from_hex(lat, parts[0]).map_err(err)?;
        let re: f64 = parts[1].parse().map_err(|e| err(format!("{e}")))?;
        let im: f64 = parts[2].parse().map_err(|e| err(format!("{e}")))?;
        state.add(cfg, Complex64::new(re, im));
    }
    state.prune();
    Ok(state)
}
