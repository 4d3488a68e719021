//! Verification suites: invariants checked against the oracle at desk scale.
//!
//! Each suite returns one [`CheckResult`] per measured quantity, including a
//! wall-clock runtime check. `qca verify` serializes them as JSON.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::evolution::{magnetic_planes, MagneticFormulation, PlaquetteBlock, Qca, StepConfig, SubStep};
use crate::fock::{sector_map, BasisConfig, SparseState};
use crate::gates::{extend_one_particle_gate, f_matrix, hadamard, mass_rotation, onsite_gate, pauli_x, transport_gate, GateParams, OnsiteKind};
use crate::lattice::{Axis, HalfLinkId, Lattice};
use crate::observables::{occupation, plaquette_expectation};
use crate::oracle::dirac::{convergence_order, gamma, step_defect};
use crate::oracle::{anticommutator, commutator, ks_hamiltonian, Basis, DenseOperator, Expr, GaugePhaseField, HamiltonianPart, OConfig, OracleSpace};
use crate::stateprep::{dirac_sea, pair_create, particle, plaquette_eigenstate, vacuum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Acceptance bound on a measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Tolerance {
    Max(f64),
    Range([f64; 2]),
    Min { min: f64 },
}

impl Tolerance {
    pub fn accepts(&self, v: f64) -> bool {
        match *self {
            Tolerance::Max(t) => v <= t,
            Tolerance::Range([lo, hi]) => lo <= v && v <= hi,
            Tolerance::Min { min } => v >= min,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Max(t) => write!(f, "<= {t:e}"),
            Tolerance::Range([lo, hi]) => write!(f, "in [{lo}, {hi}]"),
            Tolerance::Min { min } => write!(f, ">= {min}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    pub measured: f64,
    pub tolerance: Tolerance,
}

impl CheckResult {
    pub fn new(check: impl Into<String>, measured: f64, tolerance: Tolerance) -> CheckResult {
        let status = if tolerance.accepts(measured) { Status::Pass } else { Status::Fail };
        CheckResult { check: check.into(), status, measured: measured + 0.0, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{s} {} measured={:e} ({})", self.check, self.measured, self.tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Locality,
    Gauge,
    Magnetic,
    Trotter,
    DiracConvergence,
    Causality,
    Exchange,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Algebra,
        Suite::Locality,
        Suite::Gauge,
        Suite::Magnetic,
        Suite::Trotter,
        Suite::DiracConvergence,
        Suite::Causality,
        Suite::Exchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Locality => "locality",
            Suite::Gauge => "gauge",
            Suite::Magnetic => "magnetic",
            Suite::Trotter => "trotter",
            Suite::DiracConvergence => "dirac-convergence",
            Suite::Causality => "causality",
            Suite::Exchange => "exchange",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Runtime budget in seconds.
    pub fn budget(self) -> Option<f64> {
        match self {
            Suite::Algebra => Some(30.0),
            Suite::Locality | Suite::Gauge | Suite::Magnetic => Some(60.0),
            Suite::Trotter | Suite::Causality => Some(120.0),
            Suite::DiracConvergence => Some(5.0),
            Suite::Exchange => None,
        }
    }

    pub fn run(self) -> Vec<CheckResult> {
        let start = Instant::now();
        let mut out = match self {
            Suite::Algebra => algebra(),
            Suite::Locality => locality(),
            Suite::Gauge => gauge(),
            Suite::Magnetic => magnetic(),
            Suite::Trotter => trotter(),
            Suite::DiracConvergence => dirac_convergence(),
            Suite::Causality => causality(),
            Suite::Exchange => exchange(),
        };
        if let Some(b) = self.budget() {
            out.push(CheckResult::new(format!("{}/runtime_s", self.name()), start.elapsed().as_secs_f64(), Tolerance::Max(b)));
        }
        out
    }
}

fn lattice(dim: usize, dims: &[usize], k: u32) -> Lattice {
    Lattice::new(dim, dims, k).expect("fixed test lattice")
}

fn zero() -> Expr {
    Expr::Sum(Vec::new())
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn half_links(lat: &Lattice) -> Vec<HalfLinkId> {
    (0..lat.site_count()).flat_map(|site| lat.directions().into_iter().map(move |dir| HalfLinkId { site, dir })).collect()
}

fn modes(lat: &Lattice) -> Vec<(usize, usize)> {
    (0..lat.site_count()).flat_map(|x| (0..lat.d_modes()).map(move |j| (x, j))).collect()
}

// ---------------------------------------------------------------- algebra

fn algebra_on(label: &str, lat: &Lattice, columns: usize, seed: u64) -> Vec<CheckResult> {
    let space = OracleSpace::new(lat);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<OConfig> = (0..columns).map(|_| space.random_config(&mut rng, false)).collect();
    let ms = modes(lat);
    let hs = half_links(lat);
    let a: Vec<Expr> = ms.iter().map(|&(x, j)| space.annihilator(x, j)).collect();
    let s: Vec<Expr> = hs.iter().map(|&h| space.s(h)).collect();
    let v: Vec<Expr> = hs.iter().map(|&h| space.v(h)).collect();
    let dev = |l: &Expr, r: &Expr| space.max_deviation(&cols, l, r);
    let delta = |same: bool| if same { Expr::Identity } else { zero() };
    let tol = Tolerance::Max(1e-12);

    let mut aa_dag = 0.0f64;
    let mut aa = 0.0f64;
    for (i, ai) in a.iter().enumerate() {
        for (j, aj) in a.iter().enumerate() {
            aa_dag = aa_dag.max(dev(&anticommutator(ai, &aj.adjoint()), &delta(i == j)));
            aa = aa.max(dev(&anticommutator(ai, aj), &zero()));
        }
    }
    let mut vv = 0.0f64;
    for vi in &v {
        for vj in &v {
            vv = vv.max(dev(&commutator(vi, vj), &zero()));
        }
    }
    let va = max(v.iter().flat_map(|vi| a.iter().map(|aj| dev(&commutator(vi, aj), &zero()))).collect::<Vec<_>>());
    let (mut ss_diag, mut ss_off) = (0.0f64, 0.0f64);
    for (i, si) in s.iter().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            let d = dev(&anticommutator(si, &sj.adjoint()), &delta(i == j));
            if i == j {
                ss_diag = ss_diag.max(d);
            } else {
                ss_off = ss_off.max(d);
            }
        }
    }
    let as_dag = max(a.iter().flat_map(|ai| s.iter().map(|sj| dev(&anticommutator(ai, &sj.adjoint()), &zero()))).collect::<Vec<_>>());
    vec![
        CheckResult::new(format!("algebra/{label}/{{a,a+}}=delta"), aa_dag, tol),
        CheckResult::new(format!("algebra/{label}/{{a,a}}=0"), aa, tol),
        CheckResult::new(format!("algebra/{label}/[V,V]=0"), vv, tol),
        CheckResult::new(format!("algebra/{label}/[V,a]=0"), va, tol),
        CheckResult::new(format!("algebra/{label}/{{s,s+}}=delta (distinct half-links)"), ss_off, tol),
        CheckResult::new(format!("algebra/{label}/{{s,s+}}=delta (same half-link)"), ss_diag, tol),
        CheckResult::new(format!("algebra/{label}/{{a,s+}}=0"), as_dag, tol),
    ]
}

pub fn algebra() -> Vec<CheckResult> {
    let mut out = algebra_on("2d-2x2-k2", &lattice(2, &[2, 2], 2), 256, 11);
    out.extend(algebra_on("3d-2x2x2-k2", &lattice(3, &[2, 2, 2], 2), 24, 12));
    let mut g = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let ac = gamma(i) * gamma(j) + gamma(j) * gamma(i);
            let target = DMatrix::<C64>::identity(4, 4) * C64::new(if i == j { 2.0 } else { 0.0 }, 0.0);
            g = g.max((ac - target).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    out.push(CheckResult::new("algebra/gamma anticommutation", g, Tolerance::Max(1e-12)));
    out
}

// ---------------------------------------------------------------- locality

/// Largest violation of `op = M_support (x) I`: images must agree with the
/// column outside `sites`, and the action must not depend on those dofs.
fn support_defect(space: &OracleSpace, op: &Expr, sites: &[usize], cols: &[OConfig], rng: &mut impl Rng) -> f64 {
    let lat = space.lattice();
    let dps = lat.dofs_per_site();
    let outside: Vec<usize> = (0..lat.dof_count()).filter(|p| !sites.contains(&(p / dps))).collect();
    let copy_outside = |from: &OConfig, to: &OConfig| {
        let mut c = to.clone();
        for &p in &outside {
            space.set(&mut c, p, space.get(from, p));
        }
        c
    };
    let mut worst = 0.0f64;
    for c in cols {
        let img = space.apply(op, &[(c.clone(), C64::new(1.0, 0.0))]);
        for (d, _) in &img {
            if outside.iter().any(|&p| space.get(c, p) != space.get(d, p)) {
                worst = worst.max(1.0);
            }
        }
        let other = copy_outside(&space.random_config(rng, false), c);
        let other = {
            // keep the support of `c`, randomize the rest
            let mut o = other.clone();
            for p in 0..lat.dof_count() {
                if sites.contains(&(p / dps)) {
                    space.set(&mut o, p, space.get(c, p));
                }
            }
            o
        };
        let img2 = space.apply(op, &[(other.clone(), C64::new(1.0, 0.0))]);
        let moved: Vec<(OConfig, C64)> = img.iter().map(|(d, a)| (copy_outside(&other, d), *a)).collect();
        for (d, a) in &moved {
            let b = img2.iter().find(|(e, _)| e == d).map(|x| x.1).unwrap_or_default();
            worst = worst.max((a - b).norm());
        }
        for (e, b) in &img2 {
            if !moved.iter().any(|(d, _)| d == e) {
                worst = worst.max(b.norm());
            }
        }
    }
    worst
}

fn random_basis_config(lat: &Lattice, rng: &mut impl Rng, fill: f64) -> BasisConfig {
    let mut c = BasisConfig::zero(lat);
    for x in 0..lat.site_count() {
        for j in 0..lat.d_modes() {
            c.set_occupied(lat, x, j, rng.gen_bool(fill));
        }
    }
    for l in lat.links() {
        c.set_link_value(lat, l, rng.gen_range(0..lat.k()));
    }
    c
}

fn to_oracle(space: &OracleSpace, s: &SparseState) -> Vec<(OConfig, C64)> {
    let mut v: Vec<(OConfig, C64)> = s.iter().map(|(c, a)| (space.embed(c), *a)).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn svec_distance(a: &[(OConfig, C64)], b: &[(OConfig, C64)]) -> f64 {
    let mut d = 0.0;
    for (c, x) in a {
        let y = b.iter().find(|(e, _)| e == c).map(|p| p.1).unwrap_or_default();
        d += (x - y).norm_sqr();
    }
    for (c, y) in b {
        if !a.iter().any(|(e, _)| e == c) {
            d += y.norm_sqr();
        }
    }
    d.sqrt()
}

pub fn locality() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = Tolerance::Max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in [2u32, 4] {
        let lat = lattice(2, &[3, 3], k);
        let space = OracleSpace::new(&lat);
        let cols: Vec<OConfig> = (0..48).map(|_| space.random_config(&mut rng, false)).collect();
        let mut hop = 0.0f64;
        for x in 0..lat.site_count() {
            for axis in lat.axes() {
                let y = lat.shift(x, axis, 1);
                for j in 0..lat.d_modes() {
                    for jp in 0..lat.d_modes() {
                        hop = hop.max(support_defect(&space, &space.hopping_term(x, axis, j, jp), &[x, y], &cols, &mut rng));
                    }
                }
            }
        }
        out.push(CheckResult::new(format!("locality/3x3-k{k}/hopping term support"), hop, tol));
        let (mut plaq, mut corners) = (0.0f64, 0.0f64);
        for p in lat.plaquettes() {
            plaq = plaq.max(support_defect(&space, &space.plaquette(p), &p.sites(&lat), &cols, &mut rng));
            corners = corners.max(space.max_deviation(&cols, &space.plaquette(p), &space.plaquette_from_corners(p)));
        }
        out.push(CheckResult::new(format!("locality/3x3-k{k}/plaquette support"), plaq, tol));
        out.push(CheckResult::new(format!("locality/3x3-k{k}/P = -(corner product)"), corners, tol));

        // Fast gates against oracle operators, column by column.
        let (mut tr, mut pl) = (0.0f64, 0.0f64);
        for _ in 0..64 {
            let c = random_basis_config(&lat, &mut rng, 0.5);
            for x in 0..lat.site_count() {
                for axis in lat.axes() {
                    let g = transport_gate(&lat, x, axis).expect("axis exists");
                    let mut img = Vec::new();
                    g.apply(&lat, &c, C64::new(1.0, 0.0), &mut img);
                    let fast = to_oracle(&space, &SparseState::from_entries(img));
                    let slow = space.apply(&space.transport_expr(x, 1, axis, 0), &[(space.embed(&c), C64::new(1.0, 0.0))]);
                    tr = tr.max(svec_distance(&fast, &slow));
                }
            }
            for p in lat.plaquettes() {
                let (img, a) = PlaquetteBlock::new(&lat, p).apply_p(&lat, &c, C64::new(1.0, 0.0));
                let slow = space.apply(&space.plaquette(p), &[(space.embed(&c), C64::new(1.0, 0.0))]);
                pl = pl.max(svec_distance(&[(space.embed(&img), a)], &slow));
            }
        }
        out.push(CheckResult::new(format!("locality/3x3-k{k}/fast transport = oracle"), tr, tol));
        out.push(CheckResult::new(format!("locality/3x3-k{k}/fast plaquette = oracle"), pl, tol));
    }

    let lat = lattice(3, &[2, 2, 2], 2);
    let space = OracleSpace::new(&lat);
    let cfg = StepConfig::free(2, 0.3, 0.8, 1.0, 1.0).expect("valid");
    let q = Qca::new(&lat, cfg).expect("valid");
    let (mut tr, mut pl) = (0.0f64, 0.0f64);
    for _ in 0..8 {
        let c = random_basis_config(&lat, &mut rng, 0.15);
        for axis in lat.axes() {
            let fast = q.apply(SubStep::Transport(axis), &SparseState::basis(c.clone())).expect("layer");
            let e = space.step_expr(SubStep::Transport(axis), &cfg).expect("layer");
            let slow = space.apply(&e, &[(space.embed(&c), C64::new(1.0, 0.0))]);
            tr = tr.max(svec_distance(&to_oracle(&space, &fast), &slow));
        }
        for p in lat.plaquettes() {
            let (img, a) = PlaquetteBlock::new(&lat, p).apply_p(&lat, &c, C64::new(1.0, 0.0));
            let slow = space.apply(&space.plaquette(p), &[(space.embed(&c), C64::new(1.0, 0.0))]);
            pl = pl.max(svec_distance(&[(space.embed(&img), a)], &slow));
        }
    }
    out.push(CheckResult::new("locality/2x2x2-k2/fast transport layer = oracle", tr, tol));
    out.push(CheckResult::new("locality/2x2x2-k2/fast plaquette = oracle", pl, tol));
    out
}

// ---------------------------------------------------------------- gauge

fn gauge_transform(space: &OracleSpace, s: &SparseState, field: &GaugePhaseField) -> SparseState {
    let mut out = s.clone();
    for (c, a) in out.iter_mut() {
        *a *= space.gauge_phase(&space.embed(c), field);
    }
    out
}

fn random_state(lat: &Lattice, rng: &mut impl Rng, terms: usize, fill: f64) -> SparseState {
    let mut s = SparseState::new();
    for _ in 0..terms {
        s.add(random_basis_config(lat, rng, fill), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    s.normalize();
    s
}

pub fn gauge() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = Tolerance::Max(1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let lat = lattice(2, &[2, 2], 4);
    let space = OracleSpace::new(&lat);
    let base = StepConfig::free(4, 0.4, 0.7, 1.1, 1.3).expect("valid");
    let plane = lat.planes()[0];
    let cases: Vec<(String, StepConfig, SubStep)> = vec![
        ("mass".into(), base, SubStep::Mass),
        ("swap".into(), base, SubStep::Swap),
        ("transport mu".into(), base, SubStep::Transport(Axis::MU)),
        ("transport nu".into(), base, SubStep::Transport(Axis::NU)),
        ("basis change mu".into(), base, SubStep::BasisChange(Axis::MU)),
        ("basis change mu adjoint".into(), base, SubStep::BasisChangeAdjoint(Axis::MU)),
        ("electric free".into(), base, SubStep::Electric),
        ("electric locked".into(), StepConfig::locked(4, 1.1, 0.7).expect("valid"), SubStep::Electric),
        ("magnetic fourier".into(), base, SubStep::Magnetic(plane)),
        ("magnetic qwsplit".into(), base.with_magnetic(MagneticFormulation::QwSplit), SubStep::Magnetic(plane)),
        ("full step".into(), base, SubStep::Full),
    ];
    let fields: Vec<GaugePhaseField> = (0..50).map(|_| GaugePhaseField::random_zk(&mut rng, lat.site_count(), lat.k())).collect();
    let v = random_state(&lat, &mut rng, 4, 0.5);
    for (name, cfg, sub) in cases {
        let q = Qca::new(&lat, cfg).expect("valid");
        let uv = q.apply(sub, &v).expect("sub-step");
        let worst = max(fields.iter().map(|f| {
            let lhs = q.apply(sub, &gauge_transform(&space, &v, f)).expect("sub-step");
            lhs.distance(&gauge_transform(&space, &uv, f))
        }));
        out.push(CheckResult::new(format!("gauge/2x2-k4/{name} commutes with g_phi (50 fields)"), worst, tol));
    }

    // Real-valued phases where no residue wraps.
    let lat_r = lattice(2, &[3, 3], 16);
    let space_r = OracleSpace::new(&lat_r);
    let q = Qca::new(&lat_r, StepConfig::free(16, 0.4, 0.7, 1.1, 1.3).expect("valid")).expect("valid");
    let mut c = BasisConfig::zero(&lat_r);
    c.set_occupied(&lat_r, 4, 0, true);
    c.set_occupied(&lat_r, 0, 1, true);
    let v = SparseState::basis(c);
    let mut worst = 0.0f64;
    for sub in [SubStep::Fermionic, SubStep::Electric] {
        let uv = q.apply(sub, &v).expect("sub-step");
        for _ in 0..50 {
            let f = GaugePhaseField::random_real(&mut rng, lat_r.site_count());
            let lhs = q.apply(sub, &gauge_transform(&space_r, &v, &f)).expect("sub-step");
            worst = worst.max(lhs.distance(&gauge_transform(&space_r, &uv, &f)));
        }
    }
    out.push(CheckResult::new("gauge/3x3-k16/fermionic+electric commute with real g_phi (no wrap)", worst, tol));

    // Sector conservation over 100 full steps.
    let lat = lattice(2, &[2, 2], 2);
    let q = Qca::new(&lat, StepConfig::free(2, 0.4, 0.7, 1.1, 1.3).expect("valid")).expect("valid");
    let mut s = pair_create(&lat, &dirac_sea(&lat), 0).expect("valid site");
    let start = sector_map(&lat, &s);
    let mut changed = 0usize;
    let mut drift = 0.0f64;
    for _ in 0..100 {
        s = q.full_step(&s).expect("step");
        if sector_map(&lat, &s) != start {
            changed += 1;
        }
        drift = drift.max((s.norm() - 1.0).abs());
    }
    out.push(CheckResult::new("gauge/2x2-k2/sector changes over 100 full steps", changed as f64, Tolerance::Max(0.0)));
    out.push(CheckResult::new("gauge/2x2-k2/norm drift over 100 full steps", drift, tol));
    out
}

// ---------------------------------------------------------------- magnetic

fn orbit_basis(space: &OracleSpace, seeds: &[OConfig], ops: &[Expr]) -> Arc<Basis> {
    let gens: Vec<Expr> = ops.iter().flat_map(|p| [p.adjoint(), p.clone()]).collect();
    Arc::new(space.closure(seeds, &gens, crate::oracle::DENSE_CAP).expect("orbit below cap"))
}

/// Matrix of a fast sparse map on an oracle basis.
fn fast_matrix(space: &OracleSpace, basis: &Basis, f: impl Fn(&SparseState) -> SparseState) -> DMatrix<C64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (j, c) in basis.configs().iter().enumerate() {
        let img = f(&SparseState::basis(space.project(c).expect("physical")));
        for (d, a) in img.iter() {
            let i = basis.index_of(&space.embed(d)).expect("fast image stays in the oracle basis");
            m[(i, j)] += a;
        }
    }
    m
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn spectral(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}

pub fn magnetic() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = Tolerance::Max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in [2u32, 4] {
        let lat = lattice(2, &[2, 2], k);
        let space = OracleSpace::new(&lat);
        let cfg = StepConfig::free(k, 0.3, 0.8, 1.1, 1.7).expect("valid");
        let q = Qca::new(&lat, cfg).expect("valid");
        let addr = lat.plaquettes()[0];
        let block = PlaquetteBlock::new(&lat, addr);
        let p = space.plaquette(addr);
        let mut single = 0.0f64;
        for _ in 0..8 {
            let seed = random_basis_config(&lat, &mut rng, 0.5);
            let basis = orbit_basis(&space, &[space.embed(&seed)], std::slice::from_ref(&p));
            let h = DenseOperator::from_expr(&space, &basis, &Expr::Sum(vec![(C64::new(1.0, 0.0), p.adjoint()), (C64::new(1.0, 0.0), p.clone())]))
                .expect("small");
            let exact = h.expm_i(cfg.magnetic_theta()).expect("small").to_dense().expect("small");
            let fast = fast_matrix(&space, &basis, |s| q.plaquette_gate(s, &block));
            single = single.max(max_abs(&(fast - exact)));
        }
        out.push(CheckResult::new(format!("magnetic/k{k}/single plaquette fourier = exp(i theta (P+P+))"), single, tol));

        let plane = lat.planes()[0];
        let ops: Vec<Expr> = lat.plaquettes().into_iter().filter(|a| a.plane == plane).map(|a| space.plaquette(a)).collect();
        let mut layer = 0.0f64;
        for _ in 0..4 {
            let seed = random_basis_config(&lat, &mut rng, 0.5);
            let basis = orbit_basis(&space, &[space.embed(&seed)], &ops);
            let exact = crate::oracle::dense_step(&space, &basis, SubStep::Magnetic(plane), &cfg).expect("small").to_dense().expect("small");
            let fast = fast_matrix(&space, &basis, |s| q.magnetic_step(s, plane).expect("plane"));
            layer = layer.max(max_abs(&(fast - exact)));
        }
        out.push(CheckResult::new(format!("magnetic/2x2-k{k}/fourier layer = exact exponential"), layer, tol));

        let mut eig = 0.0f64;
        for mom in 0..k {
            let base = random_basis_config(&lat, &mut rng, 0.5);
            let st = plaquette_eigenstate(&lat, &base, addr, mom);
            let expect = C64::from_polar(1.0, 2.0 * PI * mom as f64 / k as f64);
            eig = eig.max((plaquette_expectation(&lat, &st, addr) - expect).norm());
        }
        out.push(CheckResult::new(format!("magnetic/k{k}/<P> = e^(2 pi i p/k) on eigenstates"), eig, tol));
    }

    // QW-split against Fourier: one-step defect scales as eps^4. On a 4-cycle
    // the two pairings commute and the split is exact, so k = 6.
    let k = 6;
    let lat = lattice(2, &[2, 2], k);
    let space = OracleSpace::new(&lat);
    let addr = lat.plaquettes()[0];
    let block = PlaquetteBlock::new(&lat, addr);
    let seed = random_basis_config(&lat, &mut rng, 0.5);
    let basis = orbit_basis(&space, &[space.embed(&seed)], &[space.plaquette(addr)]);
    let defects: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let cfg = StepConfig::free(k, eps, 0.0, 1.0, 1.0).expect("valid");
            let f = Qca::new(&lat, cfg).expect("valid");
            let s = Qca::new(&lat, cfg.with_magnetic(MagneticFormulation::QwSplit)).expect("valid");
            let mf = fast_matrix(&space, &basis, |v| f.plaquette_gate(v, &block));
            let ms = fast_matrix(&space, &basis, |v| s.plaquette_gate(v, &block));
            spectral(&(ms - mf))
        })
        .collect();
    for (i, w) in defects.windows(2).enumerate() {
        let eps = [0.2, 0.1, 0.05][i];
        out.push(CheckResult::new(
            format!("magnetic/k6/|qwsplit - fourier| ratio eps={eps} -> {}", eps / 2.0),
            w[0] / w[1],
            Tolerance::Range([12.0, 20.0]),
        ));
    }

    // Plaquette commutation, exhaustive on the physical 2x2 k=2 space.
    for (k, exhaustive) in [(2u32, true), (4, false)] {
        let lat = lattice(2, &[2, 2], k);
        let space = OracleSpace::new(&lat);
        let cols: Vec<OConfig> = if exhaustive {
            space.physical_basis().expect("2^16 configs").configs().to_vec()
        } else {
            (0..4096).map(|_| space.random_config(&mut rng, true)).collect()
        };
        let ps = lat.plaquettes();
        let mut worst = 0.0f64;
        for (i, a) in ps.iter().enumerate() {
            for b in &ps[i + 1..] {
                let (la, lb) = (a.links(&lat), b.links(&lat));
                if la.iter().any(|l| lb.contains(l)) {
                    let (pa, pb) = (space.plaquette(*a), space.plaquette(*b));
                    worst = worst.max(space.max_deviation(&cols, &commutator(&pa, &pb), &zero()));
                    worst = worst.max(space.max_deviation(&cols, &commutator(&pa, &pb.adjoint()), &zero()));
                }
            }
        }
        let how = if exhaustive { "all physical columns" } else { "4096 sampled columns" };
        out.push(CheckResult::new(format!("magnetic/2x2-k{k}/[P_a, P_b] = 0 overlapping pairs ({how})"), worst, tol));
    }
    out
}

// ---------------------------------------------------------------- trotter

pub fn trotter() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let lat = lattice(2, &[2, 2], 4);
    let space = OracleSpace::new(&lat);
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < 256 {
        seen.insert(space.random_config(&mut rng, true));
    }
    let basis = Arc::new(Basis::new(seen.into_iter().collect()));
    for cfg in [StepConfig::free(4, 0.37, 0.5, 1.3, 1.0).expect("valid"), StepConfig::locked(4, 1.3, 0.5).expect("valid")] {
        let q = Qca::new(&lat, cfg).expect("valid");
        let h = ks_hamiltonian(&space, &basis, HamiltonianPart::Electric, &cfg).expect("diagonal");
        let exact = h.expm_i(cfg.eps).expect("small").to_dense().expect("small");
        let fast = fast_matrix(&space, &basis, |s| q.electric_step(s));
        let mode = if cfg.coupling == crate::evolution::CouplingMode::Locked { "locked" } else { "free" };
        out.push(CheckResult::new(format!("trotter/2x2-k4/D_E = exp(i eps H_E) ({mode})"), max_abs(&(fast - exact)), Tolerance::Max(1e-12)));
    }

    // Pure gauge, zero-charge sector of 2x2 k=2.
    let lat = lattice(2, &[2, 2], 2);
    let space = OracleSpace::new(&lat);
    let ops: Vec<Expr> = lat.plaquettes().into_iter().map(|p| space.plaquette(p)).collect();
    let basis = orbit_basis(&space, &[space.zero()], &ops);
    let defects: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let cfg = StepConfig::free(2, eps, 0.0, 1.0, 1.3).expect("valid");
            let q = Qca::new(&lat, cfg).expect("valid");
            let he = ks_hamiltonian(&space, &basis, HamiltonianPart::Electric, &cfg).expect("small");
            let hm = ks_hamiltonian(&space, &basis, HamiltonianPart::Magnetic, &cfg).expect("small");
            let exact = he.add(&hm, C64::new(1.0, 0.0)).expect("same basis").expm_i(eps).expect("small").to_dense().expect("small");
            let fast = fast_matrix(&space, &basis, |s| q.magnetic_all(&q.electric_step(s)).expect("planes"));
            spectral(&(fast - exact))
        })
        .collect();
    out.push(CheckResult::new("trotter/2x2-k2/zero-charge sector dimension", basis.len() as f64, Tolerance::Min { min: 2.0 }));
    for (i, w) in defects.windows(2).enumerate() {
        let eps = [0.2, 0.1, 0.05][i];
        out.push(CheckResult::new(
            format!("trotter/2x2-k2/D_M D_E vs exp(i eps (H_E+H_M)) ratio eps={eps} -> {}", eps / 2.0),
            w[0] / w[1],
            Tolerance::Range([12.0, 20.0]),
        ));
    }
    out
}

// ---------------------------------------------------------------- dirac

pub fn dirac_convergence() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let eps = [0.1, 0.05, 0.025, 0.0125];
    for dim in [2usize, 3] {
        let dir: Vec<f64> = vec![1.0 / (dim as f64).sqrt(); dim];
        for (kabs, m) in [(0.5, 0.0), (0.5, 0.5), (1.0, 0.3)] {
            let kvec: Vec<f64> = dir.iter().map(|d| d * kabs).collect();
            let (_, order) = convergence_order(&kvec, m, &eps, dim);
            out.push(CheckResult::new(format!("dirac/{dim}d/|k|={kabs} m={m} order"), order, Tolerance::Min { min: 0.9 }));
        }
        let exact = max([0.0, 0.5, 1.0].iter().map(|&m| step_defect(&vec![0.0; dim], 0.1, m, dim)));
        out.push(CheckResult::new(format!("dirac/{dim}d/kvec=0 exact"), exact, Tolerance::Max(1e-12)));
    }
    out
}

// ---------------------------------------------------------------- causality

/// Occupation outside the Chebyshev ball of radius `t` around `x0`.
pub fn outside_cone(lat: &Lattice, s: &SparseState, x0: usize, t: usize) -> f64 {
    (0..lat.site_count())
        .filter(|&x| lat.distance(x, x0) > t)
        .map(|x| (0..lat.d_modes()).map(|j| occupation(lat, s, x, j)).sum::<f64>())
        .sum()
}

pub fn causality() -> Vec<CheckResult> {
    // eps^2 g_M^2 = pi/2: every plaquette gate is i sigma P, so the state stays
    // sparse with all couplings on.
    let lat = lattice(2, &[6, 6], 2);
    let eps = 0.5;
    let cfg = StepConfig::free(2, eps, 0.6, 1.2, (PI / 2.0).sqrt() / eps).expect("valid");
    let q = Qca::new(&lat, cfg).expect("valid");
    let x0 = lat.site_at(&[2, 3]);
    let mut s = particle(&lat, &vacuum(&lat), x0, 0).expect("valid site");
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for t in 1..=10 {
        s = q.full_step(&s).expect("step");
        worst = worst.max(outside_cone(&lat, &s, x0, t));
        drift = drift.max((s.norm() - 1.0).abs());
    }
    vec![
        CheckResult::new("causality/6x6-k2/occupation outside radius-t cone, 10 steps", worst, Tolerance::Max(1e-12)),
        CheckResult::new("causality/6x6-k2/norm drift", drift, Tolerance::Max(1e-10)),
        CheckResult::new("causality/6x6-k2/final support size", s.len() as f64, Tolerance::Min { min: 1.0 }),
    ]
}

// ---------------------------------------------------------------- exchange

pub fn exchange() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let lat = lattice(2, &[2, 2], 2);
    let params = GateParams { eps: 0.3, mass: 0.7 };
    let one = C64::new(1.0, 0.0);
    let image = |g: &crate::gates::LocalGate, c: &BasisConfig| {
        let mut v = Vec::new();
        g.apply(&lat, c, one, &mut v);
        SparseState::from_entries(v)
    };
    let mut c = BasisConfig::zero(&lat);
    c.set_occupied(&lat, 0, 0, true);
    c.set_occupied(&lat, 0, 1, true);
    let s = onsite_gate(&lat, 0, OnsiteKind::Swap, params).expect("2d kind");
    let expect = SparseState::from_entries([(c.clone(), -one)]);
    out.push(CheckResult::new("exchange/S|11> = -|11>", image(&s, &c).distance(&expect), Tolerance::Max(0.0)));

    for k in [2u32, 4] {
        let lat_k = lattice(2, &[2, 2], k);
        let y = lat_k.shift(0, Axis::MU, 1);
        let mut c = BasisConfig::zero(&lat_k);
        c.set_occupied(&lat_k, 0, 1, true);
        c.set_occupied(&lat_k, y, 0, true);
        c.set_link_value(&lat_k, crate::lattice::LinkId { site: 0, axis: Axis::MU }, k - 1);
        let t = transport_gate(&lat_k, 0, Axis::MU).expect("axis");
        let mut v = Vec::new();
        t.apply(&lat_k, &c, one, &mut v);
        let got = SparseState::from_entries(v);
        let expect = SparseState::from_entries([(c.clone(), -one)]);
        out.push(CheckResult::new(format!("exchange/T|11> = -|11> (k={k})"), got.distance(&expect), Tolerance::Max(0.0)));
    }

    let c = mass_rotation(0.3 * 0.7);
    let ms: [(&str, Matrix2<C64>); 4] = [("X", pauli_x()), ("H", hadamard()), ("F", f_matrix()), ("C_eps", c)];
    for (name, m) in ms {
        let g = extend_one_particle_gate(&m).expect("unitary");
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let mut target = nalgebra::Matrix4::<C64>::zeros();
        target[(0, 0)] = one;
        for r in 0..2 {
            for col in 0..2 {
                target[(1 + r, 1 + col)] = m[(r, col)];
            }
        }
        target[(3, 3)] = det;
        let d = (g - target).iter().map(|z| z.norm()).fold(0.0, f64::max);
        out.push(CheckResult::new(format!("exchange/extension 1+{name}+det"), d, Tolerance::Max(0.0)));
    }
    let x = extend_one_particle_gate(&pauli_x()).expect("unitary");
    out.push(CheckResult::new("exchange/X extension |11> entry = -1", (x[(3, 3)] + one).norm(), Tolerance::Max(0.0)));
    out
}

/// Every suite, in `Suite::ALL` order.
pub fn all() -> Vec<(Suite, Vec<CheckResult>)> {
    Suite::ALL.into_iter().map(|s| (s, s.run())).collect()
}

/// Planes in the order the full step applies them.
pub fn step_plane_order(lat: &Lattice) -> Vec<String> {
    magnetic_planes(lat).iter().map(|p| p.to_string()).collect()
}
