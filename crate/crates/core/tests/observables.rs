use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use qca_core::evolution::{Qca, StepConfig};
use qca_core::fock::{BasisConfig, SectorReport, SparseState};
use qca_core::lattice::{Axis, HalfLinkId, Lattice, LinkId};
use qca_core::observables::*;
use qca_core::oracle::{GaugePhaseField, OracleSpace};
use qca_core::stateprep::{dirac_sea, loop_create, particle, plaquette_eigenstate, vacuum, Path};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lat2() -> Lattice {
    Lattice::new(2, &[2, 2], 4).unwrap()
}

#[test]
fn occupations() {
    let lat = lat2();
    let sea = dirac_sea(&lat);
    for x in 0..4 {
        assert_eq!(occupation(&lat, &sea, x, 1), 1.0);
        assert_eq!(occupation(&lat, &sea, x, 0), 0.0);
        assert_eq!(occupation(&lat, &vacuum(&lat), x, 0), 0.0);
    }
    let mut half = vacuum(&lat);
    half.scale(C64::new(0.5f64.sqrt(), 0.0));
    let mut one = particle(&lat, &vacuum(&lat), 0, 0).unwrap();
    one.scale(C64::new(0.5f64.sqrt(), 0.0));
    for (c, a) in one.iter() {
        half.add(c.clone(), *a);
    }
    assert!((occupation(&lat, &half, 0, 0) - 0.5).abs() < 1e-15);
}

#[test]
fn electric_field_signs() {
    let lat = lat2();
    let link = LinkId { site: 0, axis: Axis::MU };
    let (pos, neg) = lat.link_halves(link);
    assert_eq!(electric_expectation(&lat, &vacuum(&lat), pos), 0.0);
    let mut c = BasisConfig::zero(&lat);
    c.set_link_value(&lat, link, 1);
    let s = SparseState::basis(c);
    assert_eq!(electric_expectation(&lat, &s, pos), 1.0);
    assert_eq!(electric_expectation(&lat, &s, neg), -1.0);
}

#[test]
fn loop_field_pattern() {
    // Oracle loop on vacuum: one unit of flux around the plaquette, each
    // canonical link carrying +-1 according to the loop orientation.
    let lat = lat2();
    let addr = lat.plaquettes()[0];
    let path = Path::plaquette(&lat, addr);
    let s = loop_create(&lat, &vacuum(&lat), &path).unwrap();
    let along: Vec<f64> = path.half_links(&lat).into_iter().map(|h| electric_expectation(&lat, &s, h)).collect();
    assert!(along.iter().all(|e| e.abs() == 1.0), "{along:?}");
    assert!(along.windows(2).all(|w| w[0] == w[1]), "{along:?}");
    for h in path.half_links(&lat) {
        let far = HalfLinkId { site: lat.step(h.site, h.dir), dir: h.dir.reversed() };
        assert_eq!(electric_expectation(&lat, &s, far), -electric_expectation(&lat, &s, h));
    }
}

#[test]
fn energy_and_plaquette() {
    let lat = lat2();
    let cfg = StepConfig::free(4, 0.3, 0.0, 1.7, 1.0).unwrap();
    assert_eq!(electric_energy(&lat, &vacuum(&lat), &cfg), 0.0);
    let addr = lat.plaquettes()[0];
    assert_eq!(plaquette_expectation(&lat, &vacuum(&lat), addr), C64::new(0.0, 0.0));
    let mut c = BasisConfig::zero(&lat);
    c.set_link_value(&lat, LinkId { site: 1, axis: Axis::NU }, 1);
    let e = electric_energy(&lat, &SparseState::basis(c), &cfg);
    assert!((e - 1.7 * 1.7 * 0.3 / 2.0).abs() < 1e-15);
    for p in 0..4 {
        let s = plaquette_eigenstate(&lat, &BasisConfig::zero(&lat), addr, p);
        let expect = C64::from_polar(1.0, 2.0 * PI * p as f64 / 4.0);
        assert!((plaquette_expectation(&lat, &s, addr) - expect).norm() < 1e-14);
    }
}

#[test]
fn gauss_reports() {
    let lat = lat2();
    assert!(matches!(gauss_report(&lat, &dirac_sea(&lat)), SectorReport::Pure(m) if m.f == vec![1; 4]));
    assert!(matches!(gauss_report(&lat, &vacuum(&lat)), SectorReport::Pure(m) if m.f == vec![0; 4]));
    let mut mixed = vacuum(&lat);
    for (c, a) in particle(&lat, &vacuum(&lat), 0, 0).unwrap().iter() {
        mixed.add(c.clone(), *a);
    }
    assert!(matches!(gauss_report(&lat, &mixed), SectorReport::Mixed(v) if v.len() == 2));
}

#[test]
fn observables_are_gauge_invariant() {
    let lat = lat2();
    let space = OracleSpace::new(&lat);
    let q = Qca::new(&lat, StepConfig::locked(4, 1.1, 0.6).unwrap()).unwrap();
    let s = q.full_step(&particle(&lat, &dirac_sea(&lat), 0, 0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let field = GaugePhaseField::random_zk(&mut rng, lat.site_count(), lat.k());
    let mut g = s.clone();
    for (c, a) in g.iter_mut() {
        *a *= space.gauge_phase(&space.embed(c), &field);
    }
    let cfg = *q.config();
    let names = ["occ[0;0]", "occ[3;1]", "E[1;mu]", "E[2;-nu]", "Eenergy", "P[0;mu,nu]"];
    for name in names {
        for o in Observable::parse(&lat, name).unwrap() {
            assert!((o.evaluate(&lat, &s, &cfg) - o.evaluate(&lat, &g, &cfg)).abs() < 1e-12, "{o}");
        }
    }
}

#[test]
fn column_names_roundtrip() {
    let lat = lat2();
    for name in ["occ[0;1]", "E[1;mu]", "E[2;-nu]", "Eenergy", "ReP[0;mu,nu]", "ImP[3;mu,nu]"] {
        let o = Observable::parse(&lat, name).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].to_string(), name);
    }
    let both = Observable::parse(&lat, "P[0;mu,nu]").unwrap();
    assert_eq!(both.iter().map(|o| o.to_string()).collect::<Vec<_>>(), ["ReP[0;mu,nu]", "ImP[0;mu,nu]"]);
    for bad in ["occ[9;0]", "occ[0;2]", "E[0;kappa]", "foo", "P[0;mu,kappa]"] {
        assert!(Observable::parse(&lat, bad).is_err(), "{bad}");
    }
}
