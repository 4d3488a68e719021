//! Periodic hypercubic lattices, link addressing and the Jordan-Wigner order.
//!
//! Sites are numbered row-major by coordinates (first axis slowest). Every
//! site carries `d_modes` fermionic modes followed by `2 * spatial_dim`
//! half-links, in the per-site order
//! `(x,0) < .. < (x,d-1) < x:-mu < x:mu < x:-nu < x:nu < x:-kappa < x:kappa`.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("spatial dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("expected {expected} extents, got {got}")]
    ExtentCount { expected: usize, got: usize },
    #[error("every axis extent must be at least 2 (axis {axis} has {extent})")]
    ExtentTooSmall { axis: usize, extent: usize },
    #[error("gauge truncation k={0} must be even and >= 2: plaquette signs use half-link parity, which is only defined mod k for even k")]
    BadTruncation(u32),
    #[error("plane ({0}, {1}) is not a plane of this lattice")]
    BadPlane(Axis, Axis),
}

/// A positive lattice axis: mu, nu or kappa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axis(pub u8);

impl Axis {
    pub const MU: Axis = Axis(0);
    pub const NU: Axis = Axis(1);
    pub const KAPPA: Axis = Axis(2);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "mu",
            1 => "nu",
            _ => "kappa",
        }
    }

    pub fn from_name(s: &str) -> Option<Axis> {
        match s {
            "mu" => Some(Axis::MU),
            "nu" => Some(Axis::NU),
            "kappa" => Some(Axis::KAPPA),
            _ => None,
        }
    }

    pub fn pos(self) -> Direction {
        Direction { axis: self, positive: true }
    }

    pub fn neg(self) -> Direction {
        Direction { axis: self, positive: false }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A signed unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    pub axis: Axis,
    pub positive: bool,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        Direction { axis: self.axis, positive: !self.positive }
    }

    pub fn sign(self) -> isize {
        if self.positive {
            1
        } else {
            -1
        }
    }

    /// Parses `mu`, `+mu` or `-mu` (likewise `nu`, `kappa`).
    pub fn parse(s: &str) -> Option<Direction> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('-') {
            Axis::from_name(rest).map(Axis::neg)
        } else {
            Axis::from_name(s.strip_prefix('+').unwrap_or(s)).map(Axis::pos)
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.positive { "+" } else { "-" }, self.axis)
    }
}

/// The end `x:eta` of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfLinkId {
    pub site: usize,
    pub dir: Direction,
}

/// A link in canonical form: its positive end `x:eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId {
    pub site: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DofId {
    Mode { site: usize, mode: usize },
    HalfLink(HalfLinkId),
}

impl DofId {
    pub fn mode(site: usize, mode: usize) -> DofId {
        DofId::Mode { site, mode }
    }

    pub fn half(site: usize, dir: Direction) -> DofId {
        DofId::HalfLink(HalfLinkId { site, dir })
    }

    pub fn site(&self) -> usize {
        match *self {
            DofId::Mode { site, .. } => site,
            DofId::HalfLink(h) => h.site,
        }
    }
}

/// An ordered pair of axes `(eta, zeta)` with `eta` before `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Plane {
    pub first: Axis,
    pub second: Axis,
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.first, self.second)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaquetteAddress {
    pub base: usize,
    pub plane: Plane,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    spatial_dim: usize,
    dims: Vec<usize>,
    strides: Vec<usize>,
    k: u32,
    d_modes: usize,
}

pub fn build_lattice(spatial_dim: usize, dims: &[usize], k: u32) -> Result<Lattice, LatticeError> {
    Lattice::new(spatial_dim, dims, k)
}

impl Lattice {
    pub fn new(spatial_dim: usize, dims: &[usize], k: u32) -> Result<Lattice, LatticeError> {
        if !(2..=3).contains(&spatial_dim) {
            return Err(LatticeError::BadDimension(spatial_dim));
        }
        if dims.len() != spatial_dim {
            return Err(LatticeError::ExtentCount { expected: spatial_dim, got: dims.len() });
        }
        if let Some((axis, &extent)) = dims.iter().enumerate().find(|(_, &e)| e < 2) {
            return Err(LatticeError::ExtentTooSmall { axis, extent });
        }
        if k < 2 || !k.is_multiple_of(2) {
            return Err(LatticeError::BadTruncation(k));
        }
        let mut strides = vec![1; spatial_dim];
        for a in (0..spatial_dim - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Ok(Lattice {
            spatial_dim,
            dims: dims.to_vec(),
            strides,
            k,
            d_modes: if spatial_dim == 2 { 2 } else { 4 },
        })
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d_modes(&self) -> usize {
        self.d_modes
    }

    pub fn site_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn link_count(&self) -> usize {
        self.site_count() * self.spatial_dim
    }

    pub fn mode_count(&self) -> usize {
        self.site_count() * self.d_modes
    }

    pub fn half_links_per_site(&self) -> usize {
        2 * self.spatial_dim
    }

    pub fn dofs_per_site(&self) -> usize {
        self.d_modes + self.half_links_per_site()
    }

    pub fn dof_count(&self) -> usize {
        self.site_count() * self.dofs_per_site()
    }

    pub fn axes(&self) -> impl Iterator<Item = Axis> {
        (0..self.spatial_dim as u8).map(Axis)
    }

    /// Signed directions in per-site JW order.
    pub fn directions(&self) -> Vec<Direction> {
        self.axes().flat_map(|a| [a.neg(), a.pos()]).collect()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        (0..self.spatial_dim).map(|a| (site / self.strides[a]) % self.dims[a]).collect()
    }

    /// Site index of the given coordinates, wrapped periodically.
    pub fn site_at(&self, coords: &[isize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .zip(&self.strides)
            .map(|((&c, &d), &s)| c.rem_euclid(d as isize) as usize * s)
            .sum()
    }

    pub fn shift(&self, site: usize, axis: Axis, delta: isize) -> usize {
        let a = axis.index();
        let d = self.dims[a] as isize;
        let c = ((site / self.strides[a]) % self.dims[a]) as isize;
        let nc = (c + delta).rem_euclid(d);
        (site as isize + (nc - c) * self.strides[a] as isize) as usize
    }

    pub fn step(&self, site: usize, dir: Direction) -> usize {
        self.shift(site, dir.axis, dir.sign())
    }

    pub fn site_parity(&self, site: usize) -> Parity {
        if self.coords(site).iter().sum::<usize>() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Chebyshev distance on the torus.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        (0..self.spatial_dim)
            .map(|i| {
                let d = ca[i].abs_diff(cb[i]);
                d.min(self.dims[i] - d)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn has_axis(&self, axis: Axis) -> bool {
        axis.index() < self.spatial_dim
    }

    pub fn canonical_link(&self, half: HalfLinkId) -> (LinkId, i8) {
        if half.dir.positive {
            (LinkId { site: half.site, axis: half.dir.axis }, 1)
        } else {
            (LinkId { site: self.shift(half.site, half.dir.axis, -1), axis: half.dir.axis }, -1)
        }
    }

    /// The two ends `x:eta` and `x+eta:-eta` of a link.
    pub fn link_halves(&self, link: LinkId) -> (HalfLinkId, HalfLinkId) {
        (
            HalfLinkId { site: link.site, dir: link.axis.pos() },
            HalfLinkId { site: self.shift(link.site, link.axis, 1), dir: link.axis.neg() },
        )
    }

    pub fn link_index(&self, link: LinkId) -> usize {
        link.site * self.spatial_dim + link.axis.index()
    }

    pub fn link_at(&self, index: usize) -> LinkId {
        LinkId { site: index / self.spatial_dim, axis: Axis((index % self.spatial_dim) as u8) }
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.link_count()).map(|i| self.link_at(i))
    }

    /// Position of a dof within its site, in the per-site JW order.
    pub fn local_position(&self, dof: DofId) -> usize {
        match dof {
            DofId::Mode { mode, .. } => mode,
            DofId::HalfLink(h) => self.d_modes + 2 * h.dir.axis.index() + h.dir.positive as usize,
        }
    }

    pub fn jw_position(&self, dof: DofId) -> usize {
        dof.site() * self.dofs_per_site() + self.local_position(dof)
    }

    pub fn dof_at(&self, position: usize) -> DofId {
        let site = position / self.dofs_per_site();
        let local = position % self.dofs_per_site();
        if local < self.d_modes {
            DofId::Mode { site, mode: local }
        } else {
            let r = local - self.d_modes;
            DofId::half(site, Direction { axis: Axis((r / 2) as u8), positive: r % 2 == 1 })
        }
    }

    pub fn jw_compare(&self, a: DofId, b: DofId) -> Ordering {
        self.jw_position(a).cmp(&self.jw_position(b))
    }

    pub fn planes(&self) -> Vec<Plane> {
        let mut out = Vec::new();
        for a in 0..self.spatial_dim as u8 {
            for b in a + 1..self.spatial_dim as u8 {
                out.push(Plane { first: Axis(a), second: Axis(b) });
            }
        }
        out
    }

    pub fn plane(&self, first: Axis, second: Axis) -> Result<Plane, LatticeError> {
        if first < second && self.has_axis(second) {
            Ok(Plane { first, second })
        } else {
            Err(LatticeError::BadPlane(first, second))
        }
    }

    pub fn enumerate_plaquettes(&self, plane: Plane, parity: Parity) -> Result<Vec<PlaquetteAddress>, LatticeError> {
        self.plane(plane.first, plane.second)?;
        Ok((0..self.site_count())
            .filter(|&s| self.site_parity(s) == parity)
            .map(|base| PlaquetteAddress { base, plane })
            .collect())
    }

    pub fn plaquettes(&self) -> Vec<PlaquetteAddress> {
        self.planes()
            .into_iter()
            .flat_map(|plane| (0..self.site_count()).map(move |base| PlaquetteAddress { base, plane }))
            .collect()
    }
}

impl PlaquetteAddress {
    /// Corner sites `x, x+eta, x+eta+zeta, x+zeta`.
    pub fn sites(&self, lat: &Lattice) -> [usize; 4] {
        let x = self.base;
        let xe = lat.shift(x, self.plane.first, 1);
        let xz = lat.shift(x, self.plane.second, 1);
        [x, xe, lat.shift(xe, self.plane.second, 1), xz]
    }

    /// Links `(x:eta, x+eta:zeta, x+zeta:eta, x:zeta)`; the plaquette operator
    /// lowers the first two and raises the last two.
    pub fn links(&self, lat: &Lattice) -> [LinkId; 4] {
        let [x, xe, _, xz] = self.sites(lat);
        let (eta, zeta) = (self.plane.first, self.plane.second);
        [
            LinkId { site: x, axis: eta },
            LinkId { site: xe, axis: zeta },
            LinkId { site: xz, axis: eta },
            LinkId { site: x, axis: zeta },
        ]
    }

    pub fn parity(&self, lat: &Lattice) -> Parity {
        lat.site_parity(self.base)
    }
}
