//! Momentum-space Dirac walk and its continuum limit.
//!
//! A lattice plane wave `exp(-i eps k.x)` reduces the one-particle automaton
//! to [`qw_momentum_step`]: every displacement becomes
//! `diag(e^{i eps k}, e^{-i eps k})` on the moving/counter-moving modes.

use nalgebra::{DMatrix, Matrix2};

use super::C64;
use crate::gates::{f_matrix, hadamard, mass_rotation};

fn dm(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn pauli(i: usize) -> DMatrix<C64> {
    let z = C64::default();
    let o = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    let v = match i {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -im, im, z],
        _ => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

/// `gamma_0 = Y x I`, `gamma_1 = Z x X`, `gamma_2 = Z x Y`, `gamma_3 = Z x Z`.
pub fn gamma(mu: usize) -> DMatrix<C64> {
    match mu {
        0 => kron(&pauli(2), &pauli(0)),
        m => kron(&pauli(3), &pauli(m)),
    }
}

/// Swap of one-particle modes `a` and `b` in 3+1.
fn mode_swap(a: usize, b: usize) -> DMatrix<C64> {
    let mut m = DMatrix::identity(4, 4);
    m.swap_columns(a, b);
    m
}

fn pair_block(j: usize, g: &Matrix2<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::identity(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            m[(j + r, j + c)] = g[(r, c)];
        }
    }
    m
}

fn displacement(dim: usize, phase: f64) -> DMatrix<C64> {
    let p = C64::from_polar(1.0, phase);
    if dim == 2 {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![p, p.conj()]))
    } else {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![p, p, p.conj(), p.conj()]))
    }
}

/// One-particle basis changes of 3+1: `H_kappa` exchanges `m1` and `m3`,
/// `H_mu = H_kappa (I x H)`, `H_nu = H_kappa (I x F)`.
pub fn basis_change_3d(axis: usize) -> DMatrix<C64> {
    let h_kappa = mode_swap(1, 2) * mode_swap(2, 3) * mode_swap(1, 2);
    match axis {
        0 => &h_kappa * pair_block(0, &hadamard()) * pair_block(2, &hadamard()),
        1 => &h_kappa * pair_block(0, &f_matrix()) * pair_block(2, &f_matrix()),
        _ => h_kappa,
    }
}

pub fn qw_momentum_step(kvec: &[f64], eps: f64, m: f64, dim: usize) -> DMatrix<C64> {
    assert_eq!(kvec.len(), dim);
    let c = mass_rotation(eps * m);
    if dim == 2 {
        let h = dm(&hadamard());
        let mu = &h * displacement(2, eps * kvec[0]) * &h;
        return dm(&c) * displacement(2, eps * kvec[1]) * mu;
    }
    let mass = mode_swap(1, 2) * pair_block(0, &c) * pair_block(2, &c) * mode_swap(1, 2);
    let mut u = DMatrix::identity(4, 4);
    for axis in (0..3).rev() {
        let b = basis_change_3d(axis);
        u = b.adjoint() * displacement(3, eps * kvec[axis]) * &b * u;
    }
    mass * u
}

/// `exp(-i eps (alpha.k + m beta))` with `beta = Y`, `alpha = (-X, -Z)` in
/// 2+1 and `beta = gamma_0`, `alpha_eta = -gamma_eta` in 3+1.
pub fn continuum_momentum_step(kvec: &[f64], eps: f64, m: f64, dim: usize) -> DMatrix<C64> {
    assert_eq!(kvec.len(), dim);
    let (beta, alphas): (DMatrix<C64>, Vec<DMatrix<C64>>) = if dim == 2 {
        (pauli(2), vec![-pauli(1), -pauli(3)])
    } else {
        (gamma(0), (1..4).map(|i| -gamma(i)).collect())
    };
    let mut g = beta * C64::new(m, 0.0);
    for (a, &k) in alphas.iter().zip(kvec) {
        g += a * C64::new(k, 0.0);
    }
    (g * C64::new(0.0, -eps)).exp()
}

/// Spectral norm of `QW - continuum`.
pub fn step_defect(kvec: &[f64], eps: f64, m: f64, dim: usize) -> f64 {
    let d = qw_momentum_step(kvec, eps, m, dim) - continuum_momentum_step(kvec, eps, m, dim);
    d.singular_values().max()
}

/// Least-squares slope of `log defect` against `log eps`.
pub fn convergence_order(kvec: &[f64], m: f64, eps: &[f64], dim: usize) -> (Vec<f64>, f64) {
    let defects: Vec<f64> = eps.iter().map(|&e| step_defect(kvec, e, m, dim)).collect();
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.ln()).collect();
    (defects, fit_slope(&xs, &ys))
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
