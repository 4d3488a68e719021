use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use qca_core::evolution::{magnetic_planes, EvolutionError, MagneticFormulation, Qca, StepConfig, SubStep};
use qca_core::fock::{sector_map, BasisConfig, SparseState};
use qca_core::lattice::{Axis, Lattice, LinkId};
use qca_core::oracle::dirac::qw_momentum_step;
use qca_core::stateprep::{dirac_sea, vacuum};
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

fn random_state(lat: &Lattice, seed: u64, terms: usize) -> SparseState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SparseState::new();
    for _ in 0..terms {
        s.add(random_config(lat, &mut rng, 0.5), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    s.normalize();
    s
}

#[test]
fn vacuum_is_fixed_by_fermionic_step() {
    for (dim, dims) in [(2, vec![3, 3]), (3, vec![2, 2, 2])] {
        let lat = Lattice::new(dim, &dims, 4).unwrap();
        let q = Qca::new(&lat, StepConfig::locked(4, 1.0, 0.8).unwrap()).unwrap();
        let v = SparseState::basis(BasisConfig::zero(&lat));
        assert!(q.fermionic_step(&v).distance(&v) < 1e-14);
    }
}

#[test]
fn locked_electric_phase_on_one_link() {
    let lat = Lattice::new(2, &[2, 2], 4).unwrap();
    let q = Qca::new(&lat, StepConfig::locked(4, 1.3, 0.0).unwrap()).unwrap();
    for value in [1, 3] {
        let mut c = BasisConfig::zero(&lat);
        c.set_link_value(&lat, LinkId { site: 0, axis: Axis::MU }, value);
        let out = q.electric_step(&SparseState::basis(c.clone()));
        assert!((out.get(&c) - C64::new(0.0, 1.0)).norm() < 1e-15, "value {value}");
    }
    let v = SparseState::basis(BasisConfig::zero(&lat));
    assert_eq!(q.electric_step(&v).get(&BasisConfig::zero(&lat)), C64::new(1.0, 0.0));
}

#[test]
fn zero_magnetic_coupling_is_identity() {
    let lat = Lattice::new(2, &[2, 3], 4).unwrap();
    for form in [MagneticFormulation::Fourier, MagneticFormulation::QwSplit] {
        let q = Qca::new(&lat, StepConfig::free(4, 0.3, 0.5, 1.0, 0.0).unwrap().with_magnetic(form)).unwrap();
        let v = random_state(&lat, 3, 5);
        assert!(q.magnetic_all(&v).unwrap().distance(&v) < 1e-14);
    }
}

#[test]
fn norm_and_sector_over_100_steps() {
    let lat = Lattice::new(2, &[2, 2], 2).unwrap();
    let q = Qca::new(&lat, StepConfig::free(2, 0.4, 0.7, 1.1, 1.3).unwrap()).unwrap();
    let mut s = dirac_sea(&lat);
    let start = sector_map(&lat, &s);
    for _ in 0..100 {
        s = q.full_step(&s).unwrap();
        assert_eq!(sector_map(&lat, &s), start);
    }
    assert!((s.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn workers_match_serial() {
    let lat = Lattice::new(2, &[3, 2], 2).unwrap();
    let cfg = StepConfig::free(2, 0.3, 0.6, 1.2, 1.1).unwrap();
    let serial = Qca::new(&lat, cfg).unwrap();
    let parallel = Qca::new(&lat, cfg).unwrap().with_workers(4);
    let mut a = random_state(&lat, 4, 6);
    let mut b = a.clone();
    for _ in 0..2 {
        a = serial.full_step(&a).unwrap();
        b = parallel.full_step(&b).unwrap();
    }
    assert!(a.distance(&b) < 1e-13);
}

#[test]
fn magnetic_plane_order_is_immaterial() {
    let lat = Lattice::new(3, &[2, 2, 2], 2).unwrap();
    let q = Qca::new(&lat, StepConfig::free(2, 0.3, 0.6, 1.2, 1.1).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = SparseState::basis(random_config(&lat, &mut rng, 0.3));
    // Pairwise: all three planes at a generic coupling would branch 2^24 ways.
    let planes = magnetic_planes(&lat);
    for (i, &p) in planes.iter().enumerate() {
        for &r in &planes[i + 1..] {
            let pr = q.magnetic_step(&q.magnetic_step(&v, p).unwrap(), r).unwrap();
            let rp = q.magnetic_step(&q.magnetic_step(&v, r).unwrap(), p).unwrap();
            assert!(pr.distance(&rp) < 1e-12, "{p:?} {r:?}");
        }
    }
}

#[test]
fn exact_formulation_matches_fourier_on_small_lattice() {
    let lat = Lattice::new(2, &[2, 2], 2).unwrap();
    let cfg = StepConfig::free(2, 0.3, 0.6, 1.2, 1.1).unwrap();
    let f = Qca::new(&lat, cfg).unwrap();
    let e = Qca::new(&lat, cfg.with_magnetic(MagneticFormulation::Exact)).unwrap();
    let v = random_state(&lat, 6, 2);
    let (a, b) = (f.magnetic_all(&v).unwrap(), e.magnetic_all(&v).unwrap());
    assert!(a.distance(&b) < 1e-10, "{}", a.distance(&b));
}

/// Position-space one-step kernel `W(delta)[j', j]` of a single particle,
/// read off the many-body step. Link registers record the path, and each
/// displacement is reached along exactly one path.
fn one_particle_kernel(lat: &Lattice, q: &Qca, x0: usize) -> BTreeMap<Vec<isize>, DMatrix<C64>> {
    let d = lat.d_modes();
    let c0 = lat.coords(x0);
    let mut w: BTreeMap<Vec<isize>, DMatrix<C64>> = BTreeMap::new();
    for j in 0..d {
        let mut c = BasisConfig::zero(lat);
        c.set_occupied(lat, x0, j, true);
        let out = q.fermionic_step(&SparseState::basis(c));
        let mut seen = Vec::new();
        for (cfg, a) in out.iter() {
            let (y, jp) = (0..lat.site_count())
                .flat_map(|y| (0..d).map(move |jp| (y, jp)))
                .find(|&(y, jp)| cfg.occupied(lat, y, jp))
                .unwrap();
            assert!(!seen.contains(&(y, jp)), "two paths reach ({y}, {jp})");
            seen.push((y, jp));
            let delta: Vec<isize> = lat
                .coords(y)
                .iter()
                .zip(&c0)
                .zip(lat.dims())
                .map(|((&a, &b), &n)| {
                    let r = (a as isize - b as isize).rem_euclid(n as isize);
                    if r > n as isize / 2 {
                        r - n as isize
                    } else {
                        r
                    }
                })
                .collect();
            w.entry(delta).or_insert_with(|| DMatrix::zeros(d, d))[(jp, j)] += a;
        }
    }
    w
}

fn equal_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let (i, _) = b.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).unwrap();
    let phase = b.as_slice()[i] / a.as_slice()[i];
    assert!((phase.norm() - 1.0).abs() < 1e-12);
    (a * phase - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn single_particle_reduces_to_the_dirac_walk() {
    for (dim, dims) in [(2, vec![5, 5]), (3, vec![3, 3, 3])] {
        let lat = Lattice::new(dim, &dims, 2).unwrap();
        for (eps, m) in [(0.3, 0.0), (0.2, 0.9)] {
            let q = Qca::new(&lat, StepConfig::free(2, eps, m, 0.0, 0.0).unwrap()).unwrap();
            let x0 = lat.site_at(&vec![1; dim]);
            let w = one_particle_kernel(&lat, &q, x0);
            for kvec in [vec![0.7, -0.4, 0.2], vec![1.5, 0.3, -1.1]] {
                let kvec = &kvec[..dim];
                let mut reduced = DMatrix::zeros(lat.d_modes(), lat.d_modes());
                for (delta, wd) in &w {
                    let arg: f64 = delta.iter().zip(kvec).map(|(&d, &k)| eps * k * d as f64).sum::<f64>();
                    reduced += wd * C64::from_polar(1.0, arg);
                }
                let qw = qw_momentum_step(kvec, eps, m, dim);
                let dev = equal_up_to_phase(&reduced, &qw);
                assert!(dev < 1e-12, "dim {dim} eps {eps} m {m} k {kvec:?}: {dev}");
            }
        }
    }
}


#[test]
fn entry_budget_stops_the_magnetic_blowup() {
    let lat = Lattice::new(2, &[3, 3], 4).unwrap();
    let cfg = StepConfig::free(4, 0.4, 0.0, 1.0, 1.0).unwrap();
    let q = Qca::new(&lat, cfg).unwrap().with_max_entries(1000);
    let v = vacuum(&lat);
    let err = q.full_step(&v).unwrap_err();
    assert!(matches!(err, EvolutionError::TooLarge { sub: SubStep::Magnetic(_), limit: 1000 }), "{err}");
    let small = Lattice::new(2, &[2, 2], 2).unwrap();
    let q = Qca::new(&small, StepConfig::free(2, 0.4, 0.0, 1.0, 1.0).unwrap()).unwrap();
    let free = q.full_step(&vacuum(&small)).unwrap();
    let capped = Qca::new(&small, StepConfig::free(2, 0.4, 0.0, 1.0, 1.0).unwrap()).unwrap().with_max_entries(1 << 20);
    assert_eq!(capped.full_step(&vacuum(&small)).unwrap().distance(&free), 0.0);
}
