mod common;

use adiabatic_qjump::renorm::{alpha_table, frame_for, Frame};
use adiabatic_qjump::{Order, SystemConfig};
use proptest::prelude::*;

#[test]
fn adiabatic_frame_matches_eigen_solver() {
    let c = SystemConfig::default();
    assert!(common::adiabatic_residual(&c, &common::sample_times(&c, 80)) < 1e-12);
}

#[test]
fn superadiabatic_basis_diagonalizes_rotated_hamiltonian() {
    let c = SystemConfig::default();
    assert!(common::superadiabatic_residual(&c, &common::sample_times(&c, 80)) < 1e-10);
}

#[test]
fn rotation_generator_matches_finite_differences() {
    let c = SystemConfig::default();
    let times = common::sample_times(&c, 80);
    for order in [Order::Adiabatic, Order::Superadiabatic] {
        let (rel, diag) = common::generator_errors(&c, &times, order);
        assert!(rel < 1e-6, "{order}: {rel}");
        assert!(diag < 1e-8, "{order}: {diag}");
    }
}

#[test]
fn diabatic_generator_vanishes() {
    let c = SystemConfig::default();
    let w = common::generator_by_differences(&c, 3.3, Order::Diabatic);
    assert!(w.frobenius_norm() < 1e-12);
}

#[test]
fn superadiabatic_parameter_is_smaller_at_its_peak() {
    let c = SystemConfig::default();
    let table = alpha_table(&c, 2000);
    let max1 = table.iter().map(|s| s.alpha1).fold(0.0, f64::max);
    let max2 = table.iter().map(|s| s.alpha2).fold(0.0, f64::max);
    assert!(max2 < max1);
}

#[test]
fn stronger_drive_keeps_oracles_tight() {
    let c = SystemConfig { lambda0: 1.5, omega_d: 0.2, ..SystemConfig::default() };
    let times = common::sample_times(&c, 40);
    assert!(common::adiabatic_residual(&c, &times) < 1e-12);
    assert!(common::superadiabatic_residual(&c, &times) < 1e-10);
}

fn continuous(a: &Frame, b: &Frame) -> bool {
    (a.ket_e - b.ket_e).norm_sqr() < 1e-6 && (a.ket_g - b.ket_g).norm_sqr() < 1e-6
}

proptest! {
    #[test]
    fn frames_are_continuous_in_time(t in 0.0f64..63.0, order in 0u32..3) {
        let c = SystemConfig::default();
        let o = Order::try_from(order).unwrap();
        prop_assert!(continuous(&frame_for(&c, t, o), &frame_for(&c, t + 1e-4, o)));
    }

    #[test]
    fn frames_are_orthonormal(t in 0.0f64..63.0, order in 0u32..3, lambda0 in 0.0f64..2.0) {
        let c = SystemConfig { lambda0, ..SystemConfig::default() };
        let f = frame_for(&c, t, Order::try_from(order).unwrap());
        prop_assert!((f.ket_e.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((f.ket_g.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(f.ket_e.inner(&f.ket_g).norm() < 1e-12);
        prop_assert!(f.energy_e >= f.energy_g);
    }
}
