//! Local unitaries of the automaton.
//!
//! Two-mode gates act on adjacent modes `(j, j+1)` of one site in the basis
//! `|00>, |01>, |10>, |11>` with index `2 n_{j+1} + n_j`. A one-particle block
//! `M` on `(m_j, m_{j+1})` extends to the many-particle gate
//! `1 + M + det(M)`. Four-mode gates in 3+1 dimensions are products of such
//! two-mode gates.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use smallvec::SmallVec;
use thiserror::Error;

use crate::fock::{interval_parity, BasisConfig};
use crate::lattice::{Axis, DofId, Lattice, LinkId};

pub type C64 = Complex64;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("matrix is not unitary (|M^dagger M - 1| = {0:e})")]
    NotUnitary(f64),
    #[error("gate {kind} is not defined in {dim}+1 dimensions")]
    DimensionMismatch { kind: &'static str, dim: usize },
    #[error("axis {0} is not a direction of this lattice")]
    BadDirection(Axis),
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

pub fn hadamard() -> Matrix2<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.))
}

/// `F = (1, -i; i, -1) / sqrt 2`.
pub fn f_matrix() -> Matrix2<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(c(h, 0.), c(0., -h), c(0., h), c(-h, 0.))
}

/// `(cos t, -sin t; sin t, cos t) = exp(-i t Y)`.
pub fn mass_rotation(t: f64) -> Matrix2<C64> {
    let (s, co) = t.sin_cos();
    Matrix2::new(c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.))
}

pub fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let d = m.adjoint() * m - DMatrix::identity(m.nrows(), m.ncols());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `1 + M + (M00 M11 - M01 M10)` on `|00>, |01>, |10>, |11>`.
pub fn extend_one_particle_gate(m: &Matrix2<C64>) -> Result<Matrix4<C64>, GateError> {
    let d = (m.adjoint() * m - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if d > UNITARY_TOL {
        return Err(GateError::NotUnitary(d));
    }
    let mut g = Matrix4::zeros();
    g[(0, 0)] = c(1., 0.);
    g[(1, 1)] = m[(0, 0)];
    g[(1, 2)] = m[(0, 1)];
    g[(2, 1)] = m[(1, 0)];
    g[(2, 2)] = m[(1, 1)];
    g[(3, 3)] = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Ok(g)
}

/// Embeds a two-mode gate acting on modes `(j, j+1)` into `n` modes.
pub fn embed_pair(n: usize, j: usize, g: &Matrix4<C64>) -> DMatrix<C64> {
    let dim = 1 << n;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let sub = (col >> j) & 3;
        for row_sub in 0..4 {
            let v = g[(row_sub, sub)];
            if v != C64::default() {
                out[((col & !(3 << j)) | (row_sub << j), col)] = v;
            }
        }
    }
    out
}

/// Restriction of a `2^n` many-mode matrix to the one-particle sector,
/// indexed by mode.
pub fn one_particle_block(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows().trailing_zeros() as usize;
    DMatrix::from_fn(n, n, |r, c| m[(1 << r, 1 << c)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OnsiteKind {
    Mass2d,
    Swap,
    HadamardMu,
    FGate,
    Mass3d,
    Swap3d,
    HKappa,
    HMu,
    HNu,
}

impl OnsiteKind {
    pub fn name(self) -> &'static str {
        match self {
            OnsiteKind::Mass2d => "mass2d",
            OnsiteKind::Swap => "swap",
            OnsiteKind::HadamardMu => "hadamard_mu",
            OnsiteKind::FGate => "fgate",
            OnsiteKind::Mass3d => "mass3d",
            OnsiteKind::Swap3d => "swap3d",
            OnsiteKind::HKappa => "h_kappa",
            OnsiteKind::HMu => "h_mu",
            OnsiteKind::HNu => "h_nu",
        }
    }

    fn spatial_dim(self) -> usize {
        match self {
            OnsiteKind::Mass2d | OnsiteKind::Swap | OnsiteKind::HadamardMu | OnsiteKind::FGate => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateParams {
    pub eps: f64,
    pub mass: f64,
}

fn ext(m: Matrix2<C64>) -> Matrix4<C64> {
    extend_one_particle_gate(&m).expect("built-in gates are unitary")
}

/// The many-mode matrix of an on-site gate (4x4 in 2+1, 16x16 in 3+1).
pub fn onsite_matrix(kind: OnsiteKind, params: GateParams) -> DMatrix<C64> {
    let pair = |m: Matrix2<C64>| embed_pair(2, 0, &ext(m));
    let s4 = |j: usize| embed_pair(4, j, &ext(pauli_x()));
    let both = |m: Matrix2<C64>| embed_pair(4, 0, &ext(m)) * embed_pair(4, 2, &ext(m));
    let h_kappa = || s4(1) * s4(2) * s4(1);
    match kind {
        OnsiteKind::Mass2d => pair(mass_rotation(params.eps * params.mass)),
        OnsiteKind::Swap => pair(pauli_x()),
        OnsiteKind::HadamardMu => pair(hadamard()),
        OnsiteKind::FGate => pair(f_matrix()),
        OnsiteKind::Mass3d => s4(1) * both(mass_rotation(params.eps * params.mass)) * s4(1),
        OnsiteKind::Swap3d => s4(1) * s4(0) * s4(2) * s4(1),
        OnsiteKind::HKappa => h_kappa(),
        OnsiteKind::HMu => h_kappa() * both(hadamard()),
        OnsiteKind::HNu => h_kappa() * both(f_matrix()),
    }
}

/// Fermionic transport of one particle along a link.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    /// Mode `(x, j)` at the negative end of the link.
    pub from: (usize, usize),
    /// Mode `(x+eta, j')` at the positive end.
    pub to: (usize, usize),
    pub link: LinkId,
    /// Intervals `[(x,j), x:eta)` and `[(x+eta,j'), x+eta:-eta)`, evaluated
    /// with both modes empty.
    pub sign_rule: [(DofId, DofId); 2],
}

impl Hop {
    pub fn new(lat: &Lattice, x: usize, j: usize, axis: Axis, jp: usize) -> Hop {
        let y = lat.shift(x, axis, 1);
        Hop {
            from: (x, j),
            to: (y, jp),
            link: LinkId { site: x, axis },
            sign_rule: [
                (DofId::mode(x, j), DofId::half(x, axis.pos())),
                (DofId::mode(y, jp), DofId::half(y, axis.neg())),
            ],
        }
    }

    pub fn sign(&self, lat: &Lattice, hole: &BasisConfig) -> i8 {
        self.sign_rule.iter().map(|&(a, b)| interval_parity(lat, hole, a, b)).product()
    }

    fn apply(&self, lat: &Lattice, cfg: &BasisConfig, amp: C64, out: &mut Vec<(BasisConfig, C64)>) {
        let (x, j) = self.from;
        let (y, jp) = self.to;
        let a = cfg.occupied(lat, x, j);
        let b = cfg.occupied(lat, y, jp);
        match (a, b) {
            (false, false) => out.push((cfg.clone(), amp)),
            (true, true) => out.push((cfg.clone(), -amp)),
            _ => {
                let mut next = cfg.clone();
                next.set_occupied(lat, x, j, false);
                next.set_occupied(lat, y, jp, false);
                let s = self.sign(lat, &next) as f64;
                next.set_occupied(lat, x, j, b);
                next.set_occupied(lat, y, jp, a);
                next.shift_link(lat, self.link, if a { 1 } else { -1 });
                out.push((next, amp * s));
            }
        }
    }
}

type Column = SmallVec<[(usize, C64); 4]>;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Unitary on modes `first..first+n` of one site, basis index
    /// `sum_i n_{first+i} 2^i`.
    OnSite { site: usize, first: usize, matrix: DMatrix<C64>, columns: Vec<Column> },
    Hop(Hop),
    /// Gates applied in order.
    Circuit(Vec<LocalGate>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalGate {
    pub support: Vec<DofId>,
    pub kind: GateKind,
}

impl LocalGate {
    pub fn on_site(site: usize, first: usize, matrix: DMatrix<C64>) -> LocalGate {
        let n = matrix.nrows().trailing_zeros() as usize;
        let columns = (0..matrix.ncols())
            .map(|c| {
                (0..matrix.nrows()).filter(|&r| matrix[(r, c)].norm() > 1e-15).map(|r| (r, matrix[(r, c)])).collect()
            })
            .collect();
        LocalGate {
            support: (first..first + n).map(|m| DofId::mode(site, m)).collect(),
            kind: GateKind::OnSite { site, first, matrix, columns },
        }
    }

    pub fn hop(lat: &Lattice, hop: Hop) -> LocalGate {
        let (lo, hi) = lat.link_halves(hop.link);
        LocalGate {
            support: vec![DofId::mode(hop.from.0, hop.from.1), DofId::HalfLink(lo), DofId::HalfLink(hi), DofId::mode(hop.to.0, hop.to.1)],
            kind: GateKind::Hop(hop),
        }
    }

    pub fn circuit(gates: Vec<LocalGate>) -> LocalGate {
        let mut support: Vec<DofId> = Vec::new();
        for g in &gates {
            for d in &g.support {
                if !support.contains(d) {
                    support.push(*d);
                }
            }
        }
        LocalGate { support, kind: GateKind::Circuit(gates) }
    }

    /// The on-site unitary, if this is an on-site gate.
    pub fn matrix(&self) -> Option<&DMatrix<C64>> {
        match &self.kind {
            GateKind::OnSite { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    /// Link raised when a particle moves towards the positive end.
    pub fn gauge_action(&self) -> Vec<LinkId> {
        match &self.kind {
            GateKind::OnSite { .. } => vec![],
            GateKind::Hop(h) => vec![h.link],
            GateKind::Circuit(gs) => {
                let mut v: Vec<LinkId> = gs.iter().flat_map(|g| g.gauge_action()).collect();
                v.dedup();
                v
            }
        }
    }

    pub fn sign_rule(&self) -> Vec<(DofId, DofId)> {
        match &self.kind {
            GateKind::OnSite { .. } => vec![],
            GateKind::Hop(h) => h.sign_rule.to_vec(),
            GateKind::Circuit(gs) => gs.iter().flat_map(|g| g.sign_rule()).collect(),
        }
    }

    pub fn adjoint(&self) -> LocalGate {
        match &self.kind {
            GateKind::OnSite { site, first, matrix, .. } => LocalGate::on_site(*site, *first, matrix.adjoint()),
            GateKind::Hop(_) => self.clone(),
            GateKind::Circuit(gs) => LocalGate::circuit(gs.iter().rev().map(LocalGate::adjoint).collect()),
        }
    }

    /// Appends the image of `amp |cfg>` to `out`.
    pub fn apply(&self, lat: &Lattice, cfg: &BasisConfig, amp: C64, out: &mut Vec<(BasisConfig, C64)>) {
        match &self.kind {
            GateKind::OnSite { site, first, columns, .. } => {
                let n = columns.len().trailing_zeros() as usize;
                let col = (0..n).fold(0, |acc, i| acc | ((cfg.occupied(lat, *site, first + i) as usize) << i));
                for &(row, v) in &columns[col] {
                    let mut next = cfg.clone();
                    for i in 0..n {
                        next.set_occupied(lat, *site, first + i, (row >> i) & 1 == 1);
                    }
                    out.push((next, amp * v));
                }
            }
            GateKind::Hop(h) => h.apply(lat, cfg, amp, out),
            GateKind::Circuit(gs) => {
                let mut cur = vec![(cfg.clone(), amp)];
                let mut next = Vec::new();
                for g in gs {
                    next.clear();
                    for (c, a) in &cur {
                        g.apply(lat, c, *a, &mut next);
                    }
                    std::mem::swap(&mut cur, &mut next);
                }
                out.extend(cur);
            }
        }
    }
}

/// On-site gate on a lattice site, checking the dimension.
pub fn onsite_gate(lat: &Lattice, site: usize, kind: OnsiteKind, params: GateParams) -> Result<LocalGate, GateError> {
    if kind.spatial_dim() != lat.spatial_dim() {
        return Err(GateError::DimensionMismatch { kind: kind.name(), dim: lat.spatial_dim() });
    }
    Ok(LocalGate::on_site(site, 0, onsite_matrix(kind, params)))
}

/// Extended two-mode gate on modes `(j, j+1)` of a site.
pub fn pair_gate(site: usize, j: usize, m: &Matrix2<C64>) -> Result<LocalGate, GateError> {
    let g = extend_one_particle_gate(m)?;
    Ok(LocalGate::on_site(site, j, embed_pair(2, 0, &g)))
}

/// Transport across the link `(x, eta)`: modes `((x,1),(x+eta,0))` in 2+1,
/// the composite `T (S x S) T` on `(x,2),(x,3),(x+eta,0),(x+eta,1)` in 3+1.
pub fn transport_gate(lat: &Lattice, x: usize, axis: Axis) -> Result<LocalGate, GateError> {
    if !lat.has_axis(axis) {
        return Err(GateError::BadDirection(axis));
    }
    if lat.spatial_dim() == 2 {
        return Ok(LocalGate::hop(lat, Hop::new(lat, x, 1, axis, 0)));
    }
    let y = lat.shift(x, axis, 1);
    let t = LocalGate::hop(lat, Hop::new(lat, x, 3, axis, 0));
    let sx = pair_gate(x, 2, &pauli_x())?;
    let sy = pair_gate(y, 0, &pauli_x())?;
    Ok(LocalGate::circuit(vec![t.clone(), sx, sy, t]))
}
