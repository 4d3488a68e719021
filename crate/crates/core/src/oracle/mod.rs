//! Brute-force Jordan-Wigner oracle.
//!
//! Every half-link carries its own register here (the opposite-sign
//! restriction is a subspace, not a storage choice), and every operator is
//! the literal product of local pieces and global Z-strings over the JW
//! order. Operators are expression trees evaluated column by column; matrices
//! are materialised over an explicit basis as [`DenseOperator`].

mod build;
pub mod dirac;

pub use build::*;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::fock::{symmetric_rep, BasisConfig};
use crate::lattice::{DofId, HalfLinkId, Lattice};

pub type C64 = Complex64;

/// Largest dimension for dense matrices and exponentials.
pub const DENSE_CAP: usize = 4096;
/// Largest basis for generalized-permutation algebra.
pub const PERMUTATION_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {dim} exceeds the oracle cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("operator maps a basis state outside the chosen basis")]
    NotClosed,
    #[error("basis mismatch between operators")]
    BasisMismatch,
    #[error("{0}")]
    Invalid(String),
}

/// A configuration of every register: one bit per mode, one residue per
/// half-link.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OConfig(SmallVec<[u64; 2]>);

/// Elementary operators. Positions are JW positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    /// `|1><0|` on a mode.
    Raise01(usize),
    /// `|0><1|` on a mode.
    Lower10(usize),
    /// `|1><1|`.
    Number(usize),
    /// `|0><0|`.
    Hole(usize),
    Z(usize),
    /// Product of `Z_y` over all `y` before the position.
    ZBefore(usize),
    /// `r`: lowers a half-link by one, mod k.
    Lower(usize),
    /// `r^dagger`.
    Raise(usize),
    /// `E` at a half-link.
    Electric(usize),
    /// `exp(i alpha E^2)` at a half-link.
    ElectricPhase(usize, f64),
}

impl Op {
    fn adjoint(self) -> Op {
        match self {
            Op::Raise01(p) => Op::Lower10(p),
            Op::Lower10(p) => Op::Raise01(p),
            Op::Lower(p) => Op::Raise(p),
            Op::Raise(p) => Op::Lower(p),
            Op::ElectricPhase(p, a) => Op::ElectricPhase(p, -a),
            o => o,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Op(Op),
    /// Product written left to right; the rightmost factor acts first.
    Prod(Vec<Expr>),
    Sum(Vec<(C64, Expr)>),
    Identity,
}

impl Expr {
    pub fn prod(factors: Vec<Expr>) -> Expr {
        Expr::Prod(factors)
    }

    pub fn scaled(self, c: C64) -> Expr {
        Expr::Sum(vec![(c, self)])
    }

    pub fn neg(self) -> Expr {
        self.scaled(C64::new(-1.0, 0.0))
    }

    pub fn adjoint(&self) -> Expr {
        match self {
            Expr::Op(o) => Expr::Op(o.adjoint()),
            Expr::Prod(fs) => Expr::Prod(fs.iter().rev().map(Expr::adjoint).collect()),
            Expr::Sum(ts) => Expr::Sum(ts.iter().map(|(c, e)| (c.conj(), e.adjoint())).collect()),
            Expr::Identity => Expr::Identity,
        }
    }

    pub fn pow(&self, n: usize) -> Expr {
        Expr::Prod(vec![self.clone(); n])
    }
}

pub fn commutator(a: &Expr, b: &Expr) -> Expr {
    Expr::Sum(vec![
        (C64::new(1.0, 0.0), Expr::prod(vec![a.clone(), b.clone()])),
        (C64::new(-1.0, 0.0), Expr::prod(vec![b.clone(), a.clone()])),
    ])
}

pub fn anticommutator(a: &Expr, b: &Expr) -> Expr {
    Expr::Sum(vec![
        (C64::new(1.0, 0.0), Expr::prod(vec![a.clone(), b.clone()])),
        (C64::new(1.0, 0.0), Expr::prod(vec![b.clone(), a.clone()])),
    ])
}

pub type SVec = Vec<(OConfig, C64)>;

fn merge(v: SVec) -> SVec {
    if v.len() <= 1 {
        return v;
    }
    let mut out: SVec = Vec::with_capacity(v.len());
    if v.len() <= 16 {
        for (c, a) in v {
            match out.iter_mut().find(|(d, _)| *d == c) {
                Some(e) => e.1 += a,
                None => out.push((c, a)),
            }
        }
    } else {
        let mut idx: FxHashMap<OConfig, usize> = FxHashMap::default();
        for (c, a) in v {
            match idx.get(&c) {
                Some(&i) => out[i].1 += a,
                None => {
                    idx.insert(c.clone(), out.len());
                    out.push((c, a));
                }
            }
        }
    }
    out.retain(|(_, a)| a.norm() > 1e-15);
    out
}

#[derive(Debug, Clone, Copy)]
struct Register {
    offset: usize,
    width: usize,
}

/// Register layout over a lattice, in JW order.
#[derive(Debug, Clone)]
pub struct OracleSpace {
    lat: Lattice,
    regs: Vec<Register>,
    words: usize,
    /// `prefix[p]`: mask of the parity bits of all registers before `p`.
    prefix: Vec<SmallVec<[u64; 2]>>,
}

impl OracleSpace {
    pub fn new(lat: &Lattice) -> OracleSpace {
        let w = (32 - (lat.k() - 1).leading_zeros()) as usize;
        let mut regs = Vec::with_capacity(lat.dof_count());
        let mut off = 0;
        for p in 0..lat.dof_count() {
            let width = match lat.dof_at(p) {
                DofId::Mode { .. } => 1,
                DofId::HalfLink(_) => w,
            };
            regs.push(Register { offset: off, width });
            off += width;
        }
        let words = off.div_ceil(64);
        let mut prefix = Vec::with_capacity(regs.len() + 1);
        let mut m: SmallVec<[u64; 2]> = SmallVec::from_elem(0, words);
        for r in &regs {
            prefix.push(m.clone());
            m[r.offset / 64] |= 1 << (r.offset % 64);
        }
        prefix.push(m);
        OracleSpace { lat: lat.clone(), regs, words, prefix }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn k(&self) -> u32 {
        self.lat.k()
    }

    pub fn pos(&self, dof: DofId) -> usize {
        self.lat.jw_position(dof)
    }

    pub fn half_pos(&self, h: HalfLinkId) -> usize {
        self.pos(DofId::HalfLink(h))
    }

    pub fn mode_pos(&self, site: usize, mode: usize) -> usize {
        self.pos(DofId::mode(site, mode))
    }

    pub fn zero(&self) -> OConfig {
        OConfig(SmallVec::from_elem(0, self.words))
    }

    pub fn get(&self, c: &OConfig, p: usize) -> u32 {
        let r = self.regs[p];
        let (w, b) = (r.offset / 64, r.offset % 64);
        let mut v = c.0[w] >> b;
        if b + r.width > 64 {
            v |= c.0[w + 1] << (64 - b);
        }
        (v & ((1u64 << r.width) - 1)) as u32
    }

    pub fn set(&self, c: &mut OConfig, p: usize, v: u32) {
        let r = self.regs[p];
        for i in 0..r.width {
            let bit = r.offset + i;
            let m = 1u64 << (bit % 64);
            if (v >> i) & 1 == 1 {
                c.0[bit / 64] |= m;
            } else {
                c.0[bit / 64] &= !m;
            }
        }
    }

    fn parity_before(&self, c: &OConfig, p: usize) -> bool {
        c.0.iter().zip(&self.prefix[p]).map(|(a, m)| (a & m).count_ones()).sum::<u32>() % 2 == 1
    }

    /// Electric value of the half-link register at `p`: the symmetric
    /// representative of the register residue on a positive end, minus the
    /// representative of the partner residue on a negative end.
    pub fn electric(&self, c: &OConfig, p: usize) -> i64 {
        let k = self.k();
        let v = self.get(c, p);
        match self.lat.dof_at(p) {
            DofId::HalfLink(h) if !h.dir.positive => -symmetric_rep((k - v) % k, k),
            _ => symmetric_rep(v, k),
        }
    }

    pub fn apply_op(&self, op: Op, c: &OConfig, a: C64) -> Option<(OConfig, C64)> {
        let k = self.k();
        match op {
            Op::Raise01(p) => (self.get(c, p) == 0).then(|| {
                let mut n = c.clone();
                self.set(&mut n, p, 1);
                (n, a)
            }),
            Op::Lower10(p) => (self.get(c, p) == 1).then(|| {
                let mut n = c.clone();
                self.set(&mut n, p, 0);
                (n, a)
            }),
            Op::Number(p) => (self.get(c, p) == 1).then(|| (c.clone(), a)),
            Op::Hole(p) => (self.get(c, p) == 0).then(|| (c.clone(), a)),
            Op::Z(p) => Some((c.clone(), if self.get(c, p) & 1 == 1 { -a } else { a })),
            Op::ZBefore(p) => Some((c.clone(), if self.parity_before(c, p) { -a } else { a })),
            Op::Lower(p) | Op::Raise(p) => {
                let d = if matches!(op, Op::Lower(_)) { k - 1 } else { 1 };
                let mut n = c.clone();
                self.set(&mut n, p, (self.get(c, p) + d) % k);
                Some((n, a))
            }
            Op::Electric(p) => {
                let e = self.electric(c, p);
                (e != 0).then(|| (c.clone(), a * e as f64))
            }
            Op::ElectricPhase(p, alpha) => {
                let e = self.electric(c, p) as f64;
                Some((c.clone(), a * C64::from_polar(1.0, alpha * e * e)))
            }
        }
    }

    pub fn apply_term(&self, e: &Expr, c: &OConfig, a: C64) -> SVec {
        match e {
            Expr::Op(o) => self.apply_op(*o, c, a).into_iter().collect(),
            Expr::Identity => vec![(c.clone(), a)],
            Expr::Prod(fs) => {
                let mut cur: SVec = vec![(c.clone(), a)];
                for f in fs.iter().rev() {
                    let mut next = Vec::with_capacity(cur.len());
                    for (c2, a2) in &cur {
                        next.extend(self.apply_term(f, c2, *a2));
                    }
                    cur = if next.len() > 1 { merge(next) } else { next };
                    if cur.is_empty() {
                        break;
                    }
                }
                cur
            }
            Expr::Sum(ts) => {
                let mut out = Vec::new();
                for (coef, t) in ts {
                    out.extend(self.apply_term(t, c, a * coef));
                }
                merge(out)
            }
        }
    }

    pub fn apply(&self, e: &Expr, v: &[(OConfig, C64)]) -> SVec {
        let mut out = Vec::new();
        for (c, a) in v {
            out.extend(self.apply_term(e, c, *a));
        }
        merge(out)
    }

    /// Embeds a packed configuration, writing `v` at `x:eta` and `-v` at
    /// `x+eta:-eta`.
    pub fn embed(&self, cfg: &BasisConfig) -> OConfig {
        let lat = &self.lat;
        let k = lat.k();
        let mut c = self.zero();
        for x in 0..lat.site_count() {
            for j in 0..lat.d_modes() {
                if cfg.occupied(lat, x, j) {
                    self.set(&mut c, self.mode_pos(x, j), 1);
                }
            }
        }
        for link in lat.links() {
            let v = cfg.link_value(lat, link);
            let (p, n) = lat.link_halves(link);
            self.set(&mut c, self.half_pos(p), v);
            self.set(&mut c, self.half_pos(n), (k - v) % k);
        }
        c
    }

    /// Inverse of [`embed`](Self::embed) on the opposite-sign subspace.
    pub fn project(&self, c: &OConfig) -> Option<BasisConfig> {
        let lat = &self.lat;
        let k = lat.k();
        let mut cfg = BasisConfig::zero(lat);
        for x in 0..lat.site_count() {
            for j in 0..lat.d_modes() {
                cfg.set_occupied(lat, x, j, self.get(c, self.mode_pos(x, j)) == 1);
            }
        }
        for link in lat.links() {
            let (p, n) = lat.link_halves(link);
            let v = self.get(c, self.half_pos(p));
            if self.get(c, self.half_pos(n)) != (k - v) % k {
                return None;
            }
            cfg.set_link_value(lat, link, v);
        }
        Some(cfg)
    }

    pub fn is_physical(&self, c: &OConfig) -> bool {
        self.project(c).is_some()
    }

    /// Uniformly random register configuration; `physical` restricts to the
    /// opposite-sign subspace.
    pub fn random_config(&self, rng: &mut impl Rng, physical: bool) -> OConfig {
        let lat = &self.lat;
        if physical {
            let mut cfg = BasisConfig::zero(lat);
            for x in 0..lat.site_count() {
                for j in 0..lat.d_modes() {
                    cfg.set_occupied(lat, x, j, rng.gen());
                }
            }
            for link in lat.links() {
                cfg.set_link_value(lat, link, rng.gen_range(0..lat.k()));
            }
            return self.embed(&cfg);
        }
        let mut c = self.zero();
        for p in 0..lat.dof_count() {
            let v = match lat.dof_at(p) {
                DofId::Mode { .. } => rng.gen_range(0..2),
                DofId::HalfLink(_) => rng.gen_range(0..lat.k()),
            };
            self.set(&mut c, p, v);
        }
        c
    }

    /// All configurations of the opposite-sign subspace.
    pub fn physical_basis(&self) -> Result<Basis, OracleError> {
        let lat = &self.lat;
        let nf = lat.mode_count();
        let dim = (lat.k() as f64).powi(lat.link_count() as i32) * 2f64.powi(nf as i32);
        if dim > PERMUTATION_CAP as f64 {
            return Err(OracleError::TooLarge { dim: dim.min(usize::MAX as f64) as usize, cap: PERMUTATION_CAP });
        }
        let mut configs = Vec::with_capacity(dim as usize);
        let nl = lat.link_count();
        let kv = lat.k() as usize;
        for bits in 0..1usize << nf {
            for mut idx in 0..kv.pow(nl as u32) {
                let mut cfg = BasisConfig::zero(lat);
                for i in 0..nf {
                    cfg.set_bit(i, (bits >> i) & 1 == 1);
                }
                for l in 0..nl {
                    cfg.set_link_value(lat, lat.link_at(l), (idx % kv) as u32);
                    idx /= kv;
                }
                configs.push(self.embed(&cfg));
            }
        }
        Ok(Basis::new(configs))
    }

    /// Smallest set containing `seeds` and closed under every generator.
    pub fn closure(&self, seeds: &[OConfig], generators: &[Expr], cap: usize) -> Result<Basis, OracleError> {
        let mut index: FxHashMap<OConfig, usize> = FxHashMap::default();
        let mut configs = Vec::new();
        for s in seeds {
            if !index.contains_key(s) {
                index.insert(s.clone(), configs.len());
                configs.push(s.clone());
            }
        }
        let mut i = 0;
        while i < configs.len() {
            let c = configs[i].clone();
            for g in generators {
                for (n, _) in self.apply_term(g, &c, C64::new(1.0, 0.0)) {
                    if !index.contains_key(&n) {
                        if configs.len() >= cap {
                            return Err(OracleError::TooLarge { dim: configs.len() + 1, cap });
                        }
                        index.insert(n.clone(), configs.len());
                        configs.push(n);
                    }
                }
            }
            i += 1;
        }
        Ok(Basis { configs, index })
    }

    /// `max_c |(lhs - rhs)|c>|_inf` over the given columns.
    pub fn max_deviation(&self, columns: &[OConfig], lhs: &Expr, rhs: &Expr) -> f64 {
        let diff = Expr::Sum(vec![(C64::new(1.0, 0.0), lhs.clone()), (C64::new(-1.0, 0.0), rhs.clone())]);
        columns
            .iter()
            .map(|c| self.apply_term(&diff, c, C64::new(1.0, 0.0)).iter().map(|(_, a)| a.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct Basis {
    configs: Vec<OConfig>,
    index: FxHashMap<OConfig, usize>,
}

impl Basis {
    pub fn new(configs: Vec<OConfig>) -> Basis {
        let index = configs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Basis { configs, index }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[OConfig] {
        &self.configs
    }

    pub fn index_of(&self, c: &OConfig) -> Option<usize> {
        self.index.get(c).copied()
    }
}

pub type Column = Vec<(usize, C64)>;

#[derive(Debug, Clone)]
pub enum Repr {
    /// Sparse columns; a generalized permutation when every column has at
    /// most one entry.
    Columns(Vec<Column>),
    Dense(DMatrix<C64>),
}

/// An operator materialised over an explicit basis.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    basis: Arc<Basis>,
    repr: Repr,
}

impl DenseOperator {
    pub fn from_expr(space: &OracleSpace, basis: &Arc<Basis>, e: &Expr) -> Result<DenseOperator, OracleError> {
        let mut cols = Vec::with_capacity(basis.len());
        for c in basis.configs() {
            let mut col = Vec::new();
            for (n, a) in space.apply_term(e, c, C64::new(1.0, 0.0)) {
                col.push((basis.index_of(&n).ok_or(OracleError::NotClosed)?, a));
            }
            col.sort_by_key(|x| x.0);
            cols.push(col);
        }
        Ok(DenseOperator { basis: basis.clone(), repr: Repr::Columns(cols) })
    }

    pub fn from_columns(basis: &Arc<Basis>, cols: Vec<Column>) -> DenseOperator {
        DenseOperator { basis: basis.clone(), repr: Repr::Columns(cols) }
    }

    pub fn from_dense(basis: &Arc<Basis>, m: DMatrix<C64>) -> DenseOperator {
        DenseOperator { basis: basis.clone(), repr: Repr::Dense(m) }
    }

    pub fn identity(basis: &Arc<Basis>) -> DenseOperator {
        DenseOperator::from_columns(basis, (0..basis.len()).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_generalized_permutation(&self) -> bool {
        match &self.repr {
            Repr::Columns(cols) => {
                let mut seen = vec![false; cols.len()];
                cols.iter().all(|c| {
                    c.len() <= 1
                        && c.iter().all(|&(r, a)| {
                            let fresh = !seen[r];
                            seen[r] = true;
                            fresh && (a.norm() - 1.0).abs() < 1e-12
                        })
                })
            }
            Repr::Dense(_) => false,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|c| self.column(c).iter().all(|&(r, a)| r == c || a.norm() < 1e-15))
    }

    pub fn column(&self, c: usize) -> Column {
        match &self.repr {
            Repr::Columns(cols) => cols[c].clone(),
            Repr::Dense(m) => (0..m.nrows()).filter(|&r| m[(r, c)] != C64::default()).map(|r| (r, m[(r, c)])).collect(),
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        match &self.repr {
            Repr::Columns(cols) => cols[c].iter().find(|x| x.0 == r).map(|x| x.1).unwrap_or_default(),
            Repr::Dense(m) => m[(r, c)],
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<C64>, OracleError> {
        if self.dim() > DENSE_CAP {
            return Err(OracleError::TooLarge { dim: self.dim(), cap: DENSE_CAP });
        }
        Ok(match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Columns(cols) => {
                let mut m = DMatrix::zeros(self.dim(), self.dim());
                for (c, col) in cols.iter().enumerate() {
                    for &(r, a) in col {
                        m[(r, c)] += a;
                    }
                }
                m
            }
        })
    }

    fn check(&self, other: &DenseOperator) -> Result<(), OracleError> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis.configs == other.basis.configs {
            Ok(())
        } else {
            Err(OracleError::BasisMismatch)
        }
    }

    /// `self * other` (other acts first).
    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator, OracleError> {
        self.check(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Columns(a), Repr::Columns(b)) => {
                let cols = b
                    .iter()
                    .map(|col| {
                        let mut acc: Vec<(usize, C64)> = Vec::new();
                        for &(m, x) in col {
                            for &(r, y) in &a[m] {
                                match acc.iter_mut().find(|e| e.0 == r) {
                                    Some(e) => e.1 += x * y,
                                    None => acc.push((r, x * y)),
                                }
                            }
                        }
                        acc.retain(|e| e.1.norm() > 1e-15);
                        acc.sort_by_key(|e| e.0);
                        acc
                    })
                    .collect();
                Ok(DenseOperator::from_columns(&self.basis, cols))
            }
            _ => Ok(DenseOperator::from_dense(&self.basis, self.to_dense()? * other.to_dense()?)),
        }
    }

    pub fn adjoint(&self) -> DenseOperator {
        match &self.repr {
            Repr::Dense(m) => DenseOperator::from_dense(&self.basis, m.adjoint()),
            Repr::Columns(cols) => {
                let mut out: Vec<Column> = vec![Vec::new(); cols.len()];
                for (c, col) in cols.iter().enumerate() {
                    for &(r, a) in col {
                        out[r].push((c, a.conj()));
                    }
                }
                DenseOperator::from_columns(&self.basis, out)
            }
        }
    }

    /// Largest entry of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64, OracleError> {
        self.check(other)?;
        let mut worst: f64 = 0.0;
        for c in 0..self.dim() {
            let (a, b) = (self.column(c), other.column(c));
            for &(r, x) in &a {
                worst = worst.max((x - other.entry_in(&b, r)).norm());
            }
            for &(r, y) in &b {
                worst = worst.max((self.entry_in(&a, r) - y).norm());
            }
        }
        Ok(worst)
    }

    fn entry_in(&self, col: &Column, r: usize) -> C64 {
        col.iter().find(|x| x.0 == r).map(|x| x.1).unwrap_or_default()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_diff(&self, other: &DenseOperator) -> Result<f64, OracleError> {
        self.check(other)?;
        let mut s = 0.0;
        for c in 0..self.dim() {
            let (a, b) = (self.column(c), other.column(c));
            let mut rows: Vec<usize> = a.iter().chain(&b).map(|x| x.0).collect();
            rows.sort_unstable();
            rows.dedup();
            for r in rows {
                s += (self.entry_in(&a, r) - self.entry_in(&b, r)).norm_sqr();
            }
        }
        Ok(s.sqrt())
    }

    pub fn add(&self, other: &DenseOperator, alpha: C64) -> Result<DenseOperator, OracleError> {
        self.check(other)?;
        let cols = (0..self.dim())
            .map(|c| {
                let mut col = self.column(c);
                for (r, y) in other.column(c) {
                    match col.iter_mut().find(|e| e.0 == r) {
                        Some(e) => e.1 += alpha * y,
                        None => col.push((r, alpha * y)),
                    }
                }
                col.retain(|e| e.1.norm() > 1e-15);
                col.sort_by_key(|e| e.0);
                col
            })
            .collect();
        Ok(DenseOperator::from_columns(&self.basis, cols))
    }

    pub fn unitarity_defect(&self) -> Result<f64, OracleError> {
        let p = self.adjoint().mul(self)?;
        p.max_abs_diff(&DenseOperator::identity(&self.basis))
    }

    /// `exp(i t H)` for Hermitian `self`, by Pade scaling and squaring.
    ///
    /// Eigendecomposition is avoided: plaquette sums are massively degenerate
    /// and the symmetric eigensolver loses accuracy on them.
    pub fn expm_i(&self, t: f64) -> Result<DenseOperator, OracleError> {
        let h = self.to_dense()?;
        let herm = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(OracleError::Invalid(format!("operator is not Hermitian ({herm:e})")));
        }
        Ok(DenseOperator::from_dense(&self.basis, (h * C64::new(0.0, t)).exp()))
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); self.dim()];
        for (c, &x) in v.iter().enumerate() {
            if x != C64::default() {
                for (r, a) in self.column(c) {
                    out[r] += a * x;
                }
            }
        }
        out
    }
}

/// Real phase per site.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhaseField {
    pub phi: Vec<f64>,
}

impl GaugePhaseField {
    /// Phases drawn uniformly from `2 pi Z / k`.
    pub fn random_zk(rng: &mut impl Rng, sites: usize, k: u32) -> GaugePhaseField {
        let step = 2.0 * std::f64::consts::PI / k as f64;
        GaugePhaseField { phi: (0..sites).map(|_| step * rng.gen_range(0..k) as f64).collect() }
    }

    pub fn random_real(rng: &mut impl Rng, sites: usize) -> GaugePhaseField {
        GaugePhaseField { phi: (0..sites).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect() }
    }
}

impl OracleSpace {
    /// `f_x`: occupation of every mode and electric value of every half-link
    /// at the site.
    pub fn site_charge(&self, c: &OConfig, x: usize) -> i64 {
        let lat = &self.lat;
        let n: i64 = (0..lat.d_modes()).map(|j| self.get(c, self.mode_pos(x, j)) as i64).sum();
        let e: i64 = lat.directions().into_iter().map(|d| self.electric(c, self.half_pos(HalfLinkId { site: x, dir: d }))).sum();
        n + e
    }

    /// Diagonal entry `exp(i sum_x phi(x) f_x)` of the gauge transformation.
    pub fn gauge_phase(&self, c: &OConfig, field: &GaugePhaseField) -> C64 {
        let arg: f64 = (0..self.lat.site_count()).map(|x| field.phi[x] * self.site_charge(c, x) as f64).sum();
        C64::from_polar(1.0, arg)
    }
}

pub fn dense_gauge_transform(space: &OracleSpace, basis: &Arc<Basis>, field: &GaugePhaseField) -> DenseOperator {
    let cols = basis.configs().iter().enumerate().map(|(i, c)| vec![(i, space.gauge_phase(c, field))]).collect();
    DenseOperator::from_columns(basis, cols)
}
