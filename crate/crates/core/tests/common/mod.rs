//! Independent frame oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use adiabatic_qjump::mat2::{Ket, Mat2, C64};
use adiabatic_qjump::model::hamiltonian_at;
use adiabatic_qjump::renorm::{frame1, frame2, frame_for};
use adiabatic_qjump::{Order, SystemConfig};
use nalgebra::{Complex, Matrix2};

fn to_na(m: &Mat2) -> Matrix2<Complex<f64>> {
    let a = &m.0;
    Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1])
}

/// Eigenvalues (ascending) and the eigenvector of the larger one.
pub fn eigen(m: &Mat2) -> ([f64; 2], Ket) {
    let eig = to_na(m).symmetric_eigen();
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let v = eig.eigenvectors.column(hi);
    ([eig.eigenvalues[lo], eig.eigenvalues[hi]], Ket::new(v[0], v[1]))
}

fn five_point_ket(f: impl Fn(f64) -> Ket, t: f64, h: f64) -> Ket {
    let s = |k: &Ket, x: f64| k.scale(C64::new(x, 0.0));
    let num = s(&f(t - 2.0 * h), 1.0) - s(&f(t - h), 8.0) + s(&f(t + h), 8.0) - s(&f(t + 2.0 * h), 1.0);
    s(&num, 1.0 / (12.0 * h))
}

/// Components of the order-n frame kets in the order-(n−1) frame.
fn relative_basis(c: &SystemConfig, t: f64, order: Order) -> Mat2 {
    let d = frame_for(c, t, order).basis();
    match order {
        Order::Diabatic => d,
        Order::Adiabatic => frame_for(c, t, Order::Diabatic).basis().adjoint() * d,
        Order::Superadiabatic => frame_for(c, t, Order::Adiabatic).basis().adjoint() * d,
    }
}

fn column(m: &Mat2, j: usize) -> Ket {
    Ket::new(m.0[0][j], m.0[1][j])
}

/// −i C†Ċ for the step from order n−1 to n, by five-point differences.
pub fn generator_by_differences(c: &SystemConfig, t: f64, order: Order) -> Mat2 {
    let h = 1e-3;
    let de = five_point_ket(|s| column(&relative_basis(c, s, order), 0), t, h);
    let dg = five_point_ket(|s| column(&relative_basis(c, s, order), 1), t, h);
    let cdot = Mat2::from_columns(&de, &dg);
    (relative_basis(c, t, order).adjoint() * cdot).scale(C64::new(0.0, -1.0))
}

/// Times spread over the whole protocol, avoiding the exact endpoints.
pub fn sample_times(c: &SystemConfig, per_cycle: usize) -> Vec<f64> {
    let tc = c.t_drive();
    let n = per_cycle * c.n_cycles as usize;
    (0..n).map(|i| (i as f64 + 0.37) * tc / per_cycle as f64).collect()
}

/// Worst residual of the order-1 frame against an independent eigensolver:
/// energies, eigenvector overlap and off-diagonal part of D†HD.
pub fn adiabatic_residual(c: &SystemConfig, times: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in times {
        let h = hamiltonian_at(c, t);
        let f = frame1(c, t);
        let ([lo, hi], v) = eigen(&h);
        let diag = f.basis().adjoint() * h * f.basis();
        worst = worst
            .max((f.energy_g - lo).abs())
            .max((f.energy_e - hi).abs())
            .max((f.ket_e.inner(&v).norm() - 1.0).abs())
            .max(diag.0[0][1].norm())
            .max(diag.0[1][0].norm());
    }
    worst
}

/// Worst residual of the order-2 frame as eigenbasis of the rotated
/// Hamiltonian diag(E⁽¹⁾) + ŵ₁.
pub fn superadiabatic_residual(c: &SystemConfig, times: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in times {
        let f1 = frame1(c, t);
        let f2 = frame2(c, t);
        let rotated = Mat2::diag(C64::new(f1.energy_e, 0.0), C64::new(f1.energy_g, 0.0))
            + f1.rotation_generator();
        let c2 = f1.basis().adjoint() * f2.basis();
        let d = c2.adjoint() * rotated * c2;
        let ([lo, hi], _) = eigen(&rotated);
        worst = worst
            .max(d.0[0][1].norm())
            .max(d.0[1][0].norm())
            .max((f2.energy_e - hi).abs())
            .max((f2.energy_g - lo).abs());
    }
    worst
}

/// (worst relative error of w_ge, worst |diagonal|) against finite differences.
pub fn generator_errors(c: &SystemConfig, times: &[f64], order: Order) -> (f64, f64) {
    let mut rel: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for &t in times {
        let f = frame_for(c, t, order);
        let w = generator_by_differences(c, t, order);
        let scale = f.w_ge.norm().max(1e-3);
        rel = rel.max((w.0[1][0] - f.w_ge).norm() / scale);
        diag = diag.max(w.0[0][0].norm()).max(w.0[1][1].norm());
    }
    (rel, diag)
}
