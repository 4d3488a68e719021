//! One time step of the automaton: `QCA = D_M D_E D_F`.
//!
//! Products are read rightmost-first. The fermionic step applies, per
//! direction, the basis change, the swap layer, the transport layer and the
//! inverse basis change, then the mass layer; in 3+1 the kappa block goes
//! first, then nu, then mu. The magnetic step runs the even plaquettes, then
//! the odd ones, plane by plane (`(nu,kappa)`, `(mu,kappa)`, `(mu,nu)` in 3+1).

mod config;
mod plaquette;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

pub use config::*;
pub use plaquette::PlaquetteBlock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{BasisConfig, SparseState};
use crate::gates::{onsite_gate, transport_gate, GateError, GateParams, LocalGate, OnsiteKind};
use crate::lattice::{Axis, Lattice, Parity, Plane};
use crate::oracle::{self, OracleError, OracleSpace, DENSE_CAP};

pub type C64 = Complex64;

/// Branch amplitudes below this are dropped inside one gate.
const BRANCH_CUTOFF: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("invalid step configuration: {0}")]
    Config(String),
    #[error("step configuration has k={cfg}, lattice has k={lattice}")]
    TruncationMismatch { cfg: u32, lattice: u32 },
    #[error("plane {0} does not exist on this lattice")]
    BadPlane(Plane),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("exact magnetic step: {0}")]
    Oracle(#[from] OracleError),
    #[error("{sub:?} would hold more than {limit} branch entries")]
    TooLarge { sub: SubStep, limit: usize },
}

/// Running count of branch entries produced by one sub-step.
struct Budget {
    limit: usize,
    used: AtomicUsize,
}

impl Budget {
    fn new(limit: usize) -> Budget {
        Budget { limit, used: AtomicUsize::new(0) }
    }

    fn fits(&self, pending: usize) -> bool {
        self.used.load(Ordering::Relaxed).saturating_add(pending) <= self.limit
    }

    fn charge(&self, n: usize) -> bool {
        self.used.fetch_add(n, Ordering::Relaxed).saturating_add(n) <= self.limit
    }
}

/// Named pieces of the step, shared with the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubStep {
    Mass,
    Swap,
    /// Basis change `H_eta` (2+1: only `mu` has one).
    BasisChange(Axis),
    BasisChangeAdjoint(Axis),
    Transport(Axis),
    Fermionic,
    Electric,
    Magnetic(Plane),
    MagneticAll,
    Full,
}

/// Planes in application order.
pub fn magnetic_planes(lat: &Lattice) -> Vec<Plane> {
    let mut p = lat.planes();
    p.reverse();
    p
}

pub struct Qca {
    lat: Lattice,
    cfg: StepConfig,
    pool: Option<rayon::ThreadPool>,
    blocks: Vec<(Plane, Vec<PlaquetteBlock>)>,
    /// `g(t)`: amplitude from orbit position `n` to `n + t` in the dressed basis.
    fourier: Vec<C64>,
    max_entries: Option<usize>,
}

impl Qca {
    pub fn new(lat: &Lattice, cfg: StepConfig) -> Result<Qca, EvolutionError> {
        let cfg = cfg.validated()?;
        if cfg.k != lat.k() {
            return Err(EvolutionError::TruncationMismatch { cfg: cfg.k, lattice: lat.k() });
        }
        let blocks = magnetic_planes(lat)
            .into_iter()
            .map(|plane| {
                let mut addrs = lat.enumerate_plaquettes(plane, Parity::Even).expect("lattice plane");
                addrs.extend(lat.enumerate_plaquettes(plane, Parity::Odd).expect("lattice plane"));
                if cfg.plaquette_order == PlaquetteOrder::Reversed {
                    addrs.reverse();
                }
                (plane, addrs.into_iter().map(|a| PlaquetteBlock::new(lat, a)).collect())
            })
            .collect();
        Ok(Qca { lat: lat.clone(), cfg, pool: None, blocks, fourier: fourier_kernel(cfg.k, cfg.magnetic_theta()), max_entries: None })
    }

    /// Runs layers on `workers` threads. Results are bit-identical for a
    /// fixed worker count.
    pub fn with_workers(mut self, workers: usize) -> Qca {
        self.pool = (workers > 1).then(|| rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool"));
        self
    }

    /// Caps the number of unmerged branch entries one sub-step may produce.
    /// Only the fallible entry points (`full_step`, `magnetic_step`,
    /// `magnetic_all`, `apply`) check it; they fail with `TooLarge` instead of
    /// allocating past the cap.
    pub fn with_max_entries(mut self, limit: usize) -> Qca {
        self.max_entries = Some(limit);
        self
    }

    fn budget(&self) -> Option<Budget> {
        self.max_entries.map(Budget::new)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn plaquette_blocks(&self, plane: Plane) -> Option<&[PlaquetteBlock]> {
        self.blocks.iter().find(|(p, _)| *p == plane).map(|(_, b)| b.as_slice())
    }

    fn params(&self) -> GateParams {
        GateParams { eps: self.cfg.eps, mass: self.cfg.mass }
    }

    fn onsite_layer(&self, kind: OnsiteKind) -> Vec<LocalGate> {
        (0..self.lat.site_count()).map(|x| onsite_gate(&self.lat, x, kind, self.params()).expect("kind matches lattice")).collect()
    }

    /// The gates of one fermionic layer.
    pub fn layer(&self, sub: SubStep) -> Result<Vec<LocalGate>, EvolutionError> {
        let three = self.lat.spatial_dim() == 3;
        Ok(match sub {
            SubStep::Mass => self.onsite_layer(if three { OnsiteKind::Mass3d } else { OnsiteKind::Mass2d }),
            SubStep::Swap => self.onsite_layer(if three { OnsiteKind::Swap3d } else { OnsiteKind::Swap }),
            SubStep::BasisChange(a) => match (three, a) {
                (false, Axis::MU) => self.onsite_layer(OnsiteKind::HadamardMu),
                (false, _) => Vec::new(),
                (true, Axis::MU) => self.onsite_layer(OnsiteKind::HMu),
                (true, Axis::NU) => self.onsite_layer(OnsiteKind::HNu),
                (true, _) => self.onsite_layer(OnsiteKind::HKappa),
            },
            SubStep::BasisChangeAdjoint(a) => self.layer(SubStep::BasisChange(a))?.iter().map(LocalGate::adjoint).collect(),
            SubStep::Transport(a) => {
                (0..self.lat.site_count()).map(|x| transport_gate(&self.lat, x, a)).collect::<Result<_, _>>()?
            }
            other => return Err(EvolutionError::Config(format!("{other:?} is not a single gate layer"))),
        })
    }

    /// Fermionic layers in application order.
    pub fn fermionic_schedule(&self) -> Vec<SubStep> {
        let mut out = Vec::new();
        // Rightmost block first: mu then nu in 2+1, kappa, nu, mu in 3+1.
        let mut axes: Vec<Axis> = self.lat.axes().collect();
        if self.lat.spatial_dim() == 3 {
            axes.reverse();
        }
        for &a in &axes {
            if self.lat.spatial_dim() == 2 {
                out.extend([SubStep::BasisChangeAdjoint(a), SubStep::Swap, SubStep::Transport(a), SubStep::BasisChange(a)]);
            } else {
                out.extend([SubStep::BasisChange(a), SubStep::Swap, SubStep::Transport(a), SubStep::BasisChangeAdjoint(a)]);
            }
        }
        out.push(SubStep::Mass);
        out
    }

    pub fn apply_gates(&self, gates: &[LocalGate], state: &SparseState) -> SparseState {
        self.gates_within(gates, state, None).expect("no budget")
    }

    /// Applies gates one after another to every configuration, giving up
    /// once `budget` is spent.
    fn gates_within(&self, gates: &[LocalGate], state: &SparseState, budget: Option<&Budget>) -> Option<SparseState> {
        let lat = &self.lat;
        self.map_entries(state, |chunk| {
            let mut out = Vec::with_capacity(chunk.len() * 2);
            let mut cur = Vec::new();
            let mut next = Vec::new();
            for (c, a) in chunk {
                cur.clear();
                cur.push(((*c).clone(), **a));
                for g in gates {
                    next.clear();
                    for (c2, a2) in &cur {
                        g.apply(lat, c2, *a2, &mut next);
                    }
                    std::mem::swap(&mut cur, &mut next);
                    if budget.is_some_and(|b| !b.fits(cur.len())) {
                        return None;
                    }
                }
                if budget.is_some_and(|b| !b.charge(cur.len())) {
                    return None;
                }
                out.append(&mut cur);
            }
            Some(out)
        })
    }

    /// `None` as soon as any chunk gives up.
    fn map_entries<F>(&self, state: &SparseState, f: F) -> Option<SparseState>
    where
        F: Fn(&[(&BasisConfig, &C64)]) -> Option<Vec<(BasisConfig, C64)>> + Sync,
    {
        let entries: Vec<(&BasisConfig, &C64)> = state.iter().collect();
        let mut out = state.empty_like();
        match &self.pool {
            Some(pool) if entries.len() > 64 => {
                let n = pool.current_num_threads();
                let size = entries.len().div_ceil(n);
                let parts: Option<Vec<Vec<(BasisConfig, C64)>>> = pool.install(|| entries.par_chunks(size).map(&f).collect());
                for part in parts? {
                    for (c, a) in part {
                        out.add(c, a);
                    }
                }
            }
            _ => {
                for (c, a) in f(&entries)? {
                    out.add(c, a);
                }
            }
        }
        out.prune();
        Some(out)
    }

    fn map_all<F>(&self, state: &SparseState, f: F) -> SparseState
    where
        F: Fn(&[(&BasisConfig, &C64)]) -> Vec<(BasisConfig, C64)> + Sync,
    {
        self.map_entries(state, |chunk| Some(f(chunk))).expect("infallible map")
    }

    pub fn fermionic_step(&self, state: &SparseState) -> SparseState {
        self.fermionic_within(state, None).expect("no budget")
    }

    /// Each layer gets its own budget of `limit` entries.
    fn fermionic_within(&self, state: &SparseState, limit: Option<usize>) -> Option<SparseState> {
        let mut s = state.clone();
        for sub in self.fermionic_schedule() {
            let budget = limit.map(Budget::new);
            s = self.gates_within(&self.layer(sub).expect("schedule layers exist"), &s, budget.as_ref())?;
        }
        Some(s)
    }

    pub fn electric_step(&self, state: &SparseState) -> SparseState {
        let lat = &self.lat;
        let phases: Vec<C64> = (0..self.cfg.k).map(|r| C64::from_polar(1.0, self.cfg.electric_phase(r))).collect();
        self.map_all(state, |chunk| {
            chunk
                .iter()
                .map(|(c, a)| {
                    let ph: C64 = lat.links().map(|l| phases[c.link_value(lat, l) as usize]).product();
                    ((*c).clone(), **a * ph)
                })
                .collect()
        })
    }

    /// `exp(i theta (P + P^dagger))` for one plaquette on one configuration.
    fn block_apply(&self, b: &PlaquetteBlock, c: &BasisConfig, a: C64, out: &mut Vec<(BasisConfig, C64)>) {
        let lat = &self.lat;
        let sigma = b.sign(lat, c);
        let mut local: Vec<(BasisConfig, C64)> = Vec::with_capacity(4);
        let mut push = |cfg: BasisConfig, amp: C64| {
            if amp.norm() > BRANCH_CUTOFF {
                match local.iter_mut().find(|(d, _)| *d == cfg) {
                    Some(e) => e.1 += amp,
                    None => local.push((cfg, amp)),
                }
            }
        };
        match self.cfg.magnetic {
            MagneticFormulation::QwSplit => {
                // exp(i theta P~) pairs (n, n+1) for even n, then
                // exp(i theta Q~) pairs (n, n+1) for odd n, cyclically.
                let theta = self.cfg.magnetic_theta();
                let (cs, sn) = (C64::new(theta.cos(), 0.0), C64::new(0.0, theta.sin()));
                let up = if b.n(lat, c).is_multiple_of(2) { 1 } else { -1 };
                for (c3, a3) in [(c.clone(), a * cs), (b.shifted(lat, c, up), a * sn * sigma)] {
                    let up = if b.n(lat, &c3) % 2 == 1 { 1 } else { -1 };
                    let s3 = b.sign(lat, &c3);
                    push(b.shifted(lat, &c3, up), a3 * sn * s3);
                    push(c3, a3 * cs);
                }
            }
            _ => {
                for (t, g) in self.fourier.iter().enumerate() {
                    if *g != C64::default() {
                        let s = if t % 2 == 1 { sigma } else { 1.0 };
                        push(b.shifted(lat, c, t as i64), a * g * s);
                    }
                }
            }
        }
        out.append(&mut local);
    }

    /// One plaquette gate on a state.
    pub fn plaquette_gate(&self, state: &SparseState, b: &PlaquetteBlock) -> SparseState {
        self.map_all(state, |chunk| {
            let mut out = Vec::new();
            for (c, a) in chunk {
                self.block_apply(b, c, **a, &mut out);
            }
            out
        })
    }

    pub fn magnetic_step(&self, state: &SparseState, plane: Plane) -> Result<SparseState, EvolutionError> {
        let blocks = self.plaquette_blocks(plane).ok_or(EvolutionError::BadPlane(plane))?;
        if self.cfg.magnetic == MagneticFormulation::Exact {
            return self.exact_magnetic(state, plane);
        }
        let budget = self.budget();
        let budget = budget.as_ref();
        self.map_entries(state, |chunk| {
            let mut out = Vec::new();
            let mut cur = Vec::new();
            let mut next = Vec::new();
            for (c, a) in chunk {
                cur.clear();
                cur.push(((*c).clone(), **a));
                for b in blocks {
                    next.clear();
                    for (c2, a2) in &cur {
                        self.block_apply(b, c2, *a2, &mut next);
                    }
                    std::mem::swap(&mut cur, &mut next);
                    if budget.is_some_and(|b| !b.fits(cur.len())) {
                        return None;
                    }
                }
                if budget.is_some_and(|b| !b.charge(cur.len())) {
                    return None;
                }
                out.append(&mut cur);
            }
            Some(out)
        })
        .ok_or(EvolutionError::TooLarge { sub: SubStep::Magnetic(plane), limit: self.max_entries.unwrap_or(0) })
    }

    fn exact_magnetic(&self, state: &SparseState, plane: Plane) -> Result<SparseState, EvolutionError> {
        let space = OracleSpace::new(&self.lat);
        let seeds: Vec<_> = state.sorted().iter().map(|(c, _)| space.embed(c)).collect();
        let gens: Vec<_> = self
            .plaquette_blocks(plane)
            .unwrap_or_default()
            .iter()
            .flat_map(|b| {
                let p = space.plaquette(b.address);
                [p.adjoint(), p]
            })
            .collect();
        let basis = Arc::new(space.closure(&seeds, &gens, DENSE_CAP)?);
        let u = oracle::dense_step(&space, &basis, SubStep::Magnetic(plane), &self.cfg)?;
        let mut v = vec![C64::default(); basis.len()];
        for (c, a) in state.iter() {
            v[basis.index_of(&space.embed(c)).expect("seed in basis")] += a;
        }
        let w = u.apply_vec(&v);
        let mut out = state.empty_like();
        for (i, a) in w.into_iter().enumerate() {
            out.add(space.project(&basis.configs()[i]).expect("plaquettes keep opposite signs"), a);
        }
        out.prune();
        Ok(out)
    }

    /// All planes in application order.
    pub fn magnetic_all(&self, state: &SparseState) -> Result<SparseState, EvolutionError> {
        let mut s = state.clone();
        for (plane, _) in &self.blocks {
            s = self.magnetic_step(&s, *plane)?;
        }
        Ok(s)
    }

    fn fermionic_checked(&self, state: &SparseState) -> Result<SparseState, EvolutionError> {
        self.fermionic_within(state, self.max_entries)
            .ok_or(EvolutionError::TooLarge { sub: SubStep::Fermionic, limit: self.max_entries.unwrap_or(0) })
    }

    pub fn full_step(&self, state: &SparseState) -> Result<SparseState, EvolutionError> {
        let s = self.fermionic_checked(state)?;
        let s = self.electric_step(&s);
        self.magnetic_all(&s)
    }

    pub fn apply(&self, sub: SubStep, state: &SparseState) -> Result<SparseState, EvolutionError> {
        match sub {
            SubStep::Fermionic => self.fermionic_checked(state),
            SubStep::Electric => Ok(self.electric_step(state)),
            SubStep::Magnetic(p) => self.magnetic_step(state, p),
            SubStep::MagneticAll => self.magnetic_all(state),
            SubStep::Full => self.full_step(state),
            layer => {
                let budget = self.budget();
                self.gates_within(&self.layer(layer)?, state, budget.as_ref())
                    .ok_or(EvolutionError::TooLarge { sub: layer, limit: self.max_entries.unwrap_or(0) })
            }
        }
    }
}

/// `FT^dagger diag(exp(2 i theta cos(2 pi p / k))) FT`, first column.
pub fn fourier_kernel(k: u32, theta: f64) -> Vec<C64> {
    let k = k as usize;
    let norm = 1.0 / (k as f64).sqrt();
    let ft = DMatrix::from_fn(k, k, |p, n| C64::from_polar(norm, -2.0 * PI * (p * n) as f64 / k as f64));
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(k, |p, _| {
        C64::from_polar(1.0, 2.0 * theta * (2.0 * PI * p as f64 / k as f64).cos())
    }));
    let g = ft.adjoint() * diag * &ft;
    (0..k).map(|t| if g[(t, 0)].norm() < BRANCH_CUTOFF { C64::default() } else { g[(t, 0)] }).collect()
}

pub fn fermionic_step(lat: &Lattice, state: &SparseState, cfg: StepConfig) -> Result<SparseState, EvolutionError> {
    Ok(Qca::new(lat, cfg)?.fermionic_step(state))
}

pub fn electric_step(lat: &Lattice, state: &SparseState, cfg: StepConfig) -> Result<SparseState, EvolutionError> {
    Ok(Qca::new(lat, cfg)?.electric_step(state))
}

pub fn magnetic_step(lat: &Lattice, state: &SparseState, cfg: StepConfig, plane: Plane) -> Result<SparseState, EvolutionError> {
    Qca::new(lat, cfg)?.magnetic_step(state, plane)
}

pub fn full_step(lat: &Lattice, state: &SparseState, cfg: StepConfig) -> Result<SparseState, EvolutionError> {
    Qca::new(lat, cfg)?.full_step(state)
}
