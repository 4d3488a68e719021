use num_complex::Complex64 as C64;
use qca_core::fock::{sector_map, BasisConfig, SectorReport, SparseState};
use qca_core::lattice::{Axis, Direction, Lattice};
use qca_core::oracle::{GaugePhaseField, OracleSpace};
use qca_core::stateprep::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lat2() -> Lattice {
    Lattice::new(2, &[2, 2], 4).unwrap()
}

fn f_values(lat: &Lattice, s: &SparseState) -> Vec<u32> {
    match sector_map(lat, s) {
        SectorReport::Pure(m) => m.f,
        SectorReport::Mixed(v) => panic!("mixed sectors: {v:?}"),
    }
}

#[test]
fn dirac_sea_sector() {
    let lat = lat2();
    let s = dirac_sea(&lat);
    assert!((s.norm() - 1.0).abs() < 1e-15);
    assert_eq!(f_values(&lat, &s), vec![1; 4]);
    let lat3 = Lattice::new(3, &[2, 2, 2], 4).unwrap();
    assert_eq!(f_values(&lat3, &dirac_sea(&lat3)), vec![2; 8]);
    assert_eq!(f_values(&lat, &vacuum(&lat)), vec![0; 4]);
}

#[test]
fn dirac_sea_is_a_gauge_eigenvector() {
    let lat = lat2();
    let space = OracleSpace::new(&lat);
    let s = dirac_sea(&lat);
    let (c, _) = s.iter().next().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let field = GaugePhaseField::random_real(&mut rng, lat.site_count());
    assert!((space.gauge_phase(&space.embed(c), &field).norm() - 1.0).abs() < 1e-15);
    assert_eq!(s.len(), 1);
}

#[test]
fn pair_creation_on_the_sea() {
    let lat = lat2();
    let sea = dirac_sea(&lat);
    let s = pair_create(&lat, &sea, 2).unwrap();
    assert_eq!(s.len(), 1);
    let (c, a) = s.iter().next().unwrap();
    assert!(c.occupied(&lat, 2, 0) && !c.occupied(&lat, 2, 1));
    for x in [0, 1, 3] {
        assert!(!c.occupied(&lat, x, 0) && c.occupied(&lat, x, 1));
    }
    assert!((a.norm() - 1.0).abs() < 1e-15);
    assert_eq!(sector_map(&lat, &s), sector_map(&lat, &sea));
    assert!(pair_create(&lat, &s, 2).unwrap().is_empty());
}

#[test]
fn bare_creation_shifts_the_sector() {
    let lat = lat2();
    let s = particle(&lat, &vacuum(&lat), 1, 0).unwrap();
    assert_eq!(f_values(&lat, &s), vec![0, 1, 0, 0]);
    assert!(particle(&lat, &s, 1, 0).unwrap().is_empty());
}

#[test]
fn string_moves_the_charge_to_the_far_end() {
    let lat = lat2();
    let path = Path::parse(&lat, "0:+mu").unwrap();
    let s = string_create(&lat, &vacuum(&lat), 0, 0, &path).unwrap();
    assert_eq!(s.len(), 1);
    let f = f_values(&lat, &s);
    let end = path.end(&lat);
    for x in 0..lat.site_count() {
        assert_eq!(f[x], if x == end { 1 } else { 0 }, "site {x}");
    }
    let twice = string_create(&lat, &s, 0, 0, &path).unwrap();
    assert!(twice.is_empty());
}

#[test]
fn paths_are_checked() {
    let lat = lat2();
    assert!(matches!(Path::parse(&lat, "0:+mu 0:+nu"), Err(PrepError::Disconnected { .. })));
    assert!(matches!(Path::parse(&lat, "0:+kappa"), Err(PrepError::BadDirection(_))));
    assert!(matches!(Path::parse(&lat, "9:+mu"), Err(PrepError::BadSite(9))));
    assert!(matches!(Path::parse(&lat, "0+mu"), Err(PrepError::Parse(_))));
    let open = Path::parse(&lat, "0:+mu").unwrap();
    assert!(matches!(loop_create(&lat, &vacuum(&lat), &open), Err(PrepError::NotCyclic { .. })));
    let x = lat.site_at(&[1, 0]);
    let p = Path::from_steps(&lat, &[(0, Axis::MU.pos()), (x, Axis::NU.pos())]).unwrap();
    assert_eq!(p.end(&lat), lat.site_at(&[1, 1]));
    assert_eq!(p.steps, vec![Direction::parse("+mu").unwrap(), Direction::parse("+nu").unwrap()]);
}

#[test]
fn plaquette_loop_keeps_sectors_and_reverses() {
    let lat = lat2();
    let addr = lat.plaquettes()[0];
    let path = Path::plaquette(&lat, addr);
    let vac = vacuum(&lat);
    let s = loop_create(&lat, &vac, &path).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(sector_map(&lat, &s), sector_map(&lat, &vac));
    let (c, _) = s.iter().next().unwrap();
    assert_ne!(c, &BasisConfig::zero(&lat));
    let reverse = Path::new(&lat, addr.base, path.steps.iter().rev().map(|d| d.reversed()).collect()).unwrap();
    let back = loop_create(&lat, &s, &reverse).unwrap();
    assert!(back.distance(&vac) < 1e-15);
}

#[test]
fn loop_is_gauge_invariant() {
    let lat = lat2();
    let space = OracleSpace::new(&lat);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sea = dirac_sea(&lat);
    let s = loop_create(&lat, &sea, &Path::plaquette(&lat, lat.plaquettes()[1])).unwrap();
    let field = GaugePhaseField::random_zk(&mut rng, lat.site_count(), lat.k());
    let phase = |st: &SparseState| {
        let (c, _) = st.iter().next().unwrap();
        space.gauge_phase(&space.embed(c), &field)
    };
    assert!((phase(&s) - phase(&sea)).norm() < 1e-12);
}

#[test]
fn plaquette_eigenstates_are_normalized() {
    let lat = lat2();
    let addr = lat.plaquettes()[0];
    for p in 0..4 {
        let s = plaquette_eigenstate(&lat, &BasisConfig::zero(&lat), addr, p);
        assert_eq!(s.len(), 4);
        assert!((s.norm() - 1.0).abs() < 1e-14);
        let (_, a) = s.iter().next().unwrap();
        assert!((a.norm() - 0.5).abs() < 1e-15);
    }
    let _ = C64::default();
}
