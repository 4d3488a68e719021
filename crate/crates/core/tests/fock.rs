use num_complex::Complex64;
use qca_core::fock::*;
use qca_core::lattice::{build_lattice, Axis, DofId, LinkId};

#[test]
fn zero_roundtrip() {
    let lat = build_lattice(2, &[2, 2], 4).unwrap();
    let z = encode(&lat, &[false; 8], &[0; 8]).unwrap();
    assert_eq!(z, BasisConfig::zero(&lat));
    assert_eq!(decode(&lat, &z), (vec![false; 8], vec![0; 8]));
}

#[test]
fn out_of_range_value() {
    let lat = build_lattice(2, &[2, 2], 4).unwrap();
    let mut v = vec![0; 8];
    v[3] = 4;
    assert_eq!(encode(&lat, &[false; 8], &v), Err(FockError::ValueOutOfRange { value: 4, k: 4 }));
    assert!(matches!(encode(&lat, &[false; 7], &[0; 8]), Err(FockError::WrongArity { .. })));
}

#[test]
fn parity_examples() {
    let lat = build_lattice(2, &[2, 2], 4).unwrap();
    let mut c = BasisConfig::zero(&lat);
    let a = DofId::mode(0, 0);
    assert_eq!(interval_parity(&lat, &c, a, a), 1);
    c.set_occupied(&lat, 0, 1, true);
    assert_eq!(interval_parity(&lat, &c, a, DofId::half(0, Axis::MU.neg())), -1);
    let link = LinkId { site: 1, axis: Axis::NU };
    let lo = DofId::half(1, Axis::NU.pos());
    let hi = DofId::mode(2, 0);
    c.set_link_value(&lat, link, 3);
    assert_eq!(interval_parity(&lat, &c, lo, hi), -1);
    c.set_link_value(&lat, link, 2);
    assert_eq!(interval_parity(&lat, &c, lo, hi), 1);
}

#[test]
fn electric_signs() {
    let lat = build_lattice(2, &[2, 3], 4).unwrap();
    let mut c = BasisConfig::zero(&lat);
    let link = LinkId { site: 0, axis: Axis::NU };
    c.set_link_value(&lat, link, 1);
    let (p, n) = lat.link_halves(link);
    assert_eq!(electric_value(&lat, &c, p), 1);
    assert_eq!(electric_value(&lat, &c, n), -1);
    c.set_link_value(&lat, link, 3);
    assert_eq!(electric_value(&lat, &c, p), -1);
}

#[test]
fn hex_roundtrip() {
    let lat = build_lattice(2, &[6, 6], 2).unwrap();
    let mut c = BasisConfig::zero(&lat);
    c.set_occupied(&lat, 35, 1, true);
    c.set_link_value(&lat, LinkId { site: 20, axis: Axis::MU }, 1);
    let h = c.to_hex(&lat);
    assert_eq!(h.len(), 36);
    assert_eq!(BasisConfig::from_hex(&lat, &h).unwrap(), c);
}

#[test]
fn state_algebra() {
    let lat = build_lattice(2, &[2, 2], 2).unwrap();
    let a = SparseState::basis(BasisConfig::zero(&lat));
    let mut c = BasisConfig::zero(&lat);
    c.set_occupied(&lat, 0, 0, true);
    let b = SparseState::basis(c);
    assert_eq!(a.inner(&b), Complex64::new(0.0, 0.0));
    assert_eq!(axpy(Complex64::new(0.0, 0.0), &a, &b).sorted(), b.sorted());
    let s = axpy(Complex64::new(0.0, 2.0), &a, &b);
    assert!((s.inner(&s).re - s.norm().powi(2)).abs() < 1e-15);
}

#[test]
fn sectors() {
    let lat = build_lattice(2, &[2, 2], 2).unwrap();
    let vac = SparseState::basis(BasisConfig::zero(&lat));
    assert_eq!(sector_map(&lat, &vac), SectorReport::Pure(SectorMap { f: vec![0; 4] }));
    let mut c = BasisConfig::zero(&lat);
    c.set_occupied(&lat, 0, 0, true);
    let mix = SparseState::from_entries([
        (BasisConfig::zero(&lat), Complex64::new(0.6, 0.0)),
        (c, Complex64::new(0.8, 0.0)),
    ]);
    match sector_map(&lat, &mix) {
        SectorReport::Mixed(v) => assert_eq!(v.len(), 2),
        r => panic!("{r:?}"),
    }
}
