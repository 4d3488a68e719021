use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use qca_core::oracle::dirac::*;

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn gamma_anticommute() {
    for a in 0..4 {
        for b in 0..4 {
            let ac = gamma(a) * gamma(b) + gamma(b) * gamma(a);
            let expect = DMatrix::<C64>::identity(4, 4) * C64::new(if a == b { 2.0 } else { 0.0 }, 0.0);
            assert!(max_abs(&(ac - expect)) < 1e-15);
        }
    }
}

#[test]
fn basis_changes_give_gammas() {
    let z = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(-1.0, 0.0)]));
    for axis in 0..3 {
        let b = basis_change_3d(axis);
        assert!(max_abs(&(b.adjoint() * &z * &b - gamma(axis + 1))) < 1e-14, "axis {axis}");
    }
}

#[test]
fn zero_momentum_is_exact() {
    for dim in [2, 3] {
        let k = vec![0.0; dim];
        assert!(step_defect(&k, 0.1, 0.7, dim) < 1e-12);
    }
}

#[test]
fn massless_single_direction_eigenphases() {
    let u = qw_momentum_step(&[0.8, 0.0], 0.1, 0.0, 2);
    let tr = u.trace();
    assert!((tr - C64::new(2.0 * (0.08f64).cos(), 0.0)).norm() < 1e-14);
    assert!(step_defect(&[0.8, 0.0], 0.1, 0.0, 2) < 1e-14);
}
