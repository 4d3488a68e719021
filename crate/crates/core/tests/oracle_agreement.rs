//! The fast stepper against the brute-force Jordan-Wigner oracle, column by
//! column on random basis configurations.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use qca_core::evolution::{MagneticFormulation, Qca, StepConfig, SubStep};
use qca_core::fock::{BasisConfig, SparseState};
use qca_core::lattice::{Axis, Lattice};
use qca_core::oracle::{dense_step, Expr, OracleSpace, DENSE_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_config(lat: &Lattice, rng: &mut impl Rng, fill: f64) -> BasisConfig {
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

fn oracle_column(space: &OracleSpace, e: &Expr, c: &BasisConfig) -> SparseState {
    let out = space.apply(e, &[(space.embed(c), C64::new(1.0, 0.0))]);
    let mut s = SparseState::new();
    for (o, a) in out {
        s.add(space.project(&o).expect("physical subspace is preserved"), a);
    }
    s.prune();
    s
}

fn check_expr(lat: &Lattice, cfg: StepConfig, sub: SubStep, samples: usize, seed: u64) {
    let fill = if lat.spatial_dim() == 3 { 0.1 } else { 0.5 };
    let q = Qca::new(lat, cfg).unwrap();
    let space = OracleSpace::new(lat);
    let e = space.step_expr(sub, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let c = random_config(lat, &mut rng, fill);
        let fast = q.apply(sub, &SparseState::basis(c.clone())).unwrap();
        let slow = oracle_column(&space, &e, &c);
        let d = fast.distance(&slow);
        assert!(d < 1e-12, "{sub:?} on {} deviates by {d}", c.to_hex(lat));
    }
}

fn cfg(k: u32) -> StepConfig {
    StepConfig::free(k, 0.3, 0.8, 1.1, 1.7).unwrap()
}

#[test]
fn layers_2d() {
    let lat = Lattice::new(2, &[2, 2], 2).unwrap();
    for sub in [
        SubStep::Mass,
        SubStep::Swap,
        SubStep::BasisChange(Axis::MU),
        SubStep::BasisChangeAdjoint(Axis::MU),
        SubStep::Transport(Axis::MU),
        SubStep::Transport(Axis::NU),
        SubStep::Electric,
    ] {
        check_expr(&lat, cfg(2), sub, 40, 1);
    }
}

#[test]
fn fermionic_2d_rectangular() {
    for (dims, k) in [([2, 2], 4), ([3, 2], 2), ([2, 3], 4)] {
        let lat = Lattice::new(2, &dims, k).unwrap();
        check_expr(&lat, cfg(k), SubStep::Fermionic, 30, 2);
    }
}

#[test]
fn layers_3d() {
    let lat = Lattice::new(3, &[2, 2, 2], 2).unwrap();
    for a in [Axis::MU, Axis::NU, Axis::KAPPA] {
        for sub in [SubStep::BasisChange(a), SubStep::Transport(a)] {
            check_expr(&lat, cfg(2), sub, 10, 3);
        }
    }
    for sub in [SubStep::Mass, SubStep::Swap] {
        check_expr(&lat, cfg(2), sub, 10, 3);
    }
}

#[test]
fn fermionic_3d() {
    let lat = Lattice::new(3, &[2, 2, 2], 2).unwrap();
    check_expr(&lat, cfg(2), SubStep::Fermionic, 6, 4);
}

#[test]
fn electric_locked() {
    let lat = Lattice::new(2, &[2, 2], 6).unwrap();
    check_expr(&lat, StepConfig::locked(6, 1.3, 0.5).unwrap(), SubStep::Electric, 30, 5);
}

fn check_magnetic(lat: &Lattice, cfg: StepConfig, samples: usize, seed: u64) {
    let space = OracleSpace::new(lat);
    let q = Qca::new(lat, cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for plane in lat.planes() {
        let gens: Vec<Expr> = lat
            .plaquettes()
            .into_iter()
            .filter(|p| p.plane == plane)
            .flat_map(|p| {
                let e = space.plaquette(p);
                [e.adjoint(), e]
            })
            .collect();
        for _ in 0..samples {
            let c = random_config(lat, &mut rng, 0.5);
            let basis = Arc::new(space.closure(&[space.embed(&c)], &gens, DENSE_CAP).unwrap());
            let u = dense_step(&space, &basis, SubStep::Magnetic(plane), &cfg).unwrap();
            let mut v = vec![C64::default(); basis.len()];
            v[basis.index_of(&space.embed(&c)).unwrap()] = C64::new(1.0, 0.0);
            let mut slow = SparseState::new();
            for (i, a) in u.apply_vec(&v).into_iter().enumerate() {
                slow.add(space.project(&basis.configs()[i]).unwrap(), a);
            }
            slow.prune();
            let fast = q.magnetic_step(&SparseState::basis(c.clone()), plane).unwrap();
            let d = fast.distance(&slow);
            assert!(d < 1e-10, "{:?} plane {plane:?} on {} deviates by {d}", cfg.magnetic, c.to_hex(lat));
        }
    }
}

#[test]
fn magnetic_fourier_matches_exponential() {
    let lat = Lattice::new(2, &[2, 2], 4).unwrap();
    check_magnetic(&lat, cfg(4), 8, 6);
    let lat = Lattice::new(2, &[3, 2], 2).unwrap();
    check_magnetic(&lat, cfg(2), 8, 7);
}

#[test]
fn magnetic_fourier_3d() {
    let lat = Lattice::new(3, &[2, 2, 2], 2).unwrap();
    check_magnetic(&lat, cfg(2), 3, 8);
}

#[test]
fn magnetic_qw_split_k2_is_exact() {
    // With k = 2 the two pairings coincide and the split is the exponential.
    let lat = Lattice::new(2, &[2, 2], 2).unwrap();
    check_magnetic(&lat, cfg(2).with_magnetic(MagneticFormulation::QwSplit), 8, 9);
}
