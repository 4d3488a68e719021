//! Gauge-invariant initial states.
//!
//! Every preparation goes through the oracle operators: the state is embedded
//! in the per-half-link register space, the operator product is applied
//! literally, and the result is projected back.

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{BasisConfig, SparseState};
use crate::lattice::{Direction, HalfLinkId, Lattice, PlaquetteAddress};
use crate::oracle::{Expr, OracleSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrepError {
    #[error("path is disconnected at step {step}: expected site {expected}, got {got}")]
    Disconnected { step: usize, expected: usize, got: usize },
    #[error("direction {0} does not exist on this lattice")]
    BadDirection(Direction),
    #[error("site {0} is outside the lattice")]
    BadSite(usize),
    #[error("mode {0} is outside the site")]
    BadMode(usize),
    #[error("loop does not close: ends at site {end}, started at {start}")]
    NotCyclic { start: usize, end: usize },
    #[error("cannot parse path `{0}`")]
    Parse(String),
}

/// A chain of half-links `y_0:d_0, y_1:d_1, ..` with `y_{i+1} = y_i + d_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start: usize,
    pub steps: Vec<Direction>,
}

impl Path {
    pub fn new(lat: &Lattice, start: usize, steps: Vec<Direction>) -> Result<Path, PrepError> {
        if start >= lat.site_count() {
            return Err(PrepError::BadSite(start));
        }
        if let Some(d) = steps.iter().find(|d| !lat.has_axis(d.axis)) {
            return Err(PrepError::BadDirection(*d));
        }
        Ok(Path { start, steps })
    }

    /// Builds a path from explicit `(site, direction)` steps, checking that
    /// each step starts where the previous one ended.
    pub fn from_steps(lat: &Lattice, steps: &[(usize, Direction)]) -> Result<Path, PrepError> {
        let Some(&(start, _)) = steps.first() else {
            return Err(PrepError::Parse("empty step list".into()));
        };
        let mut at = start;
        for (i, &(site, dir)) in steps.iter().enumerate() {
            if site >= lat.site_count() {
                return Err(PrepError::BadSite(site));
            }
            if site != at {
                return Err(PrepError::Disconnected { step: i, expected: at, got: site });
            }
            if !lat.has_axis(dir.axis) {
                return Err(PrepError::BadDirection(dir));
            }
            at = lat.step(site, dir);
        }
        Ok(Path { start, steps: steps.iter().map(|s| s.1).collect() })
    }

    /// Parses `site:dir site:dir ..`, e.g. `0:+mu 2:+nu`.
    pub fn parse(lat: &Lattice, s: &str) -> Result<Path, PrepError> {
        let steps = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                let (site, dir) = t.split_once(':').ok_or_else(|| PrepError::Parse(t.into()))?;
                let site = site.trim().parse().map_err(|_| PrepError::Parse(t.into()))?;
                let dir = Direction::parse(dir).ok_or_else(|| PrepError::Parse(t.into()))?;
                Ok((site, dir))
            })
            .collect::<Result<Vec<_>, PrepError>>()?;
        Path::from_steps(lat, &steps)
    }

    /// Boundary of a plaquette: `x -> x+eta -> x+eta+zeta -> x+zeta -> x`.
    pub fn plaquette(lat: &Lattice, p: PlaquetteAddress) -> Path {
        let (eta, zeta) = (p.plane.first, p.plane.second);
        Path::new(lat, p.base, vec![eta.pos(), zeta.pos(), eta.neg(), zeta.neg()]).expect("plaquette axes exist")
    }

    pub fn half_links(&self, lat: &Lattice) -> Vec<HalfLinkId> {
        let mut at = self.start;
        self.steps
            .iter()
            .map(|&dir| {
                let h = HalfLinkId { site: at, dir };
                at = lat.step(at, dir);
                h
            })
            .collect()
    }

    pub fn end(&self, lat: &Lattice) -> usize {
        self.steps.iter().fold(self.start, |at, &d| lat.step(at, d))
    }
}

/// Applies an oracle expression to a sparse state.
pub fn apply_oracle(lat: &Lattice, e: &Expr, state: &SparseState) -> SparseState {
    let space = OracleSpace::new(lat);
    let input: Vec<_> = state.sorted().into_iter().map(|(c, a)| (space.embed(c), a)).collect();
    let mut out = state.empty_like();
    for (c, a) in space.apply(e, &input) {
        out.add(space.project(&c).expect("oracle operator left the opposite-sign subspace"), a);
    }
    out.prune();
    out
}

/// Modes holding the antiparticles of the Dirac sea: `1` in 2+1, `2, 3` in 3+1.
pub fn antiparticle_modes(lat: &Lattice) -> std::ops::Range<usize> {
    lat.d_modes() / 2..lat.d_modes()
}

/// Antiparticle modes filled at every site, links zero; `f(x) = d/2`.
pub fn dirac_sea(lat: &Lattice) -> SparseState {
    let mut c = BasisConfig::zero(lat);
    for x in 0..lat.site_count() {
        for j in antiparticle_modes(lat) {
            c.set_occupied(lat, x, j, true);
        }
    }
    SparseState::basis(c)
}

pub fn vacuum(lat: &Lattice) -> SparseState {
    SparseState::basis(BasisConfig::zero(lat))
}

fn check_mode(lat: &Lattice, x: usize, j: usize) -> Result<(), PrepError> {
    if x >= lat.site_count() {
        return Err(PrepError::BadSite(x));
    }
    if j >= lat.d_modes() {
        return Err(PrepError::BadMode(j));
    }
    Ok(())
}

/// `a^dagger_{x,j} prod_{y:eta in p} V_{y:eta}`.
///
/// On a torus the string does not reach a boundary, so the Gauss value moves
/// by one to the far end of the path.
pub fn string_create(lat: &Lattice, state: &SparseState, x: usize, j: usize, path: &Path) -> Result<SparseState, PrepError> {
    check_mode(lat, x, j)?;
    if path.start != x && !path.steps.is_empty() {
        return Err(PrepError::Disconnected { step: 0, expected: x, got: path.start });
    }
    let space = OracleSpace::new(lat);
    let mut factors = vec![space.creator(x, j)];
    factors.extend(path.half_links(lat).into_iter().map(|h| space.v(h)));
    Ok(apply_oracle(lat, &Expr::prod(factors), state))
}

/// `prod_{y:eta in p} V^dagger_{y:eta}` around a closed path.
pub fn loop_create(lat: &Lattice, state: &SparseState, path: &Path) -> Result<SparseState, PrepError> {
    let end = path.end(lat);
    if end != path.start {
        return Err(PrepError::NotCyclic { start: path.start, end });
    }
    let space = OracleSpace::new(lat);
    let e = Expr::prod(path.half_links(lat).into_iter().map(|h| space.v_dag(h)).collect());
    Ok(apply_oracle(lat, &e, state))
}

/// `a_{x,anti} a^dagger_{x,particle}`: moves a fermion from an antiparticle
/// mode to a particle mode at the same site.
pub fn pair_create_modes(
    lat: &Lattice,
    state: &SparseState,
    x: usize,
    particle: usize,
    antiparticle: usize,
) -> Result<SparseState, PrepError> {
    check_mode(lat, x, particle)?;
    check_mode(lat, x, antiparticle)?;
    let space = OracleSpace::new(lat);
    let e = Expr::prod(vec![space.annihilator(x, antiparticle), space.creator(x, particle)]);
    Ok(apply_oracle(lat, &e, state))
}

/// Pair creation on the first particle/antiparticle pair: `a_{x,1} a^dagger_{x,0}`
/// in 2+1, `a_{x,2} a^dagger_{x,0}` in 3+1.
pub fn pair_create(lat: &Lattice, state: &SparseState, x: usize) -> Result<SparseState, PrepError> {
    pair_create_modes(lat, state, x, 0, lat.d_modes() / 2)
}

/// Bare `a^dagger_{x,j}`. Not gauge invariant: `f(x)` grows by one.
pub fn particle(lat: &Lattice, state: &SparseState, x: usize, j: usize) -> Result<SparseState, PrepError> {
    string_create(lat, state, x, j, &Path { start: x, steps: Vec::new() })
}

/// `sum_n e^{-2 pi i n p / k} P^n |cfg> / sqrt(k)` on one plaquette: an
/// eigenstate of `P` with eigenvalue `e^{2 pi i p / k}`.
pub fn plaquette_eigenstate(lat: &Lattice, base: &BasisConfig, p: PlaquetteAddress, momentum: u32) -> SparseState {
    let space = OracleSpace::new(lat);
    let op = space.plaquette(p);
    let k = lat.k();
    let mut out = SparseState::new();
    let mut cur = vec![(space.embed(base), Complex64::new(1.0, 0.0))];
    for n in 0..k {
        let phase = Complex64::from_polar(1.0 / (k as f64).sqrt(), -2.0 * std::f64::consts::PI * (n * momentum) as f64 / k as f64);
        for (c, a) in &cur {
            out.add(space.project(c).expect("plaquette keeps opposite signs"), a * phase);
        }
        cur = space.apply(&op, &cur);
    }
    out.prune();
    out
}
