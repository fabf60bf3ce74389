use std::f64::consts::PI;

use gamow_lab::gamow::{
    decay_curve, eigenvalue_defect, make_gamow, survival_amplitude, truncated_gamow, GamowSupport,
};
use gamow_lab::grid::{EnergyGrid, HardyClass, Role, SampledWaveFunction};
use gamow_lab::{Complex64, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn standard() -> gamow_lab::GamowState {
    let grid = EnergyGrid::full_line(2.0, 3000.0, 1 << 17).unwrap();
    make_gamow(c(2.0, -0.2), &grid).unwrap()
}

#[test]
fn survival_starts_at_one_and_decays_at_gamma() {
    let g = standard();
    assert!((survival_amplitude(&g, 0.0).unwrap() - 1.0).norm() < 1e-14);
    let a = survival_amplitude(&g, 2.5).unwrap();
    assert!((a.norm_sqr() - (-1.0f64).exp()).abs() < 1e-4);
}

#[test]
fn negative_time_is_an_error() {
    let g = standard();
    assert!(matches!(survival_amplitude(&g, -0.1), Err(Error::OutsideSemigroup(_))));
}

#[test]
fn decay_csv_has_the_documented_header() {
    let g = standard();
    let series = decay_curve(&g, &[0.0, 1.0, 2.0]).unwrap();
    let mut buf = Vec::new();
    series.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re_A,im_A,survival"));
    assert_eq!(lines.count(), 3);
    for (s, a) in series.survival().iter().zip(series.amplitude()) {
        assert_eq!(*s, a.norm_sqr());
    }
}

#[test]
fn widening_the_grid_barely_moves_the_survival() {
    let pole = c(2.0, -0.2);
    let times = [3.0 / 0.4];
    let narrow = make_gamow(pole, &EnergyGrid::full_line(2.0, 3000.0, 1 << 17).unwrap()).unwrap();
    let wide = make_gamow(pole, &EnergyGrid::full_line(2.0, 6000.0, 1 << 18).unwrap()).unwrap();
    let a = decay_curve(&narrow, &times).unwrap();
    let b = decay_curve(&wide, &times).unwrap();
    for (x, y) in a.survival().iter().zip(b.survival()) {
        assert!((x - y).abs() <= 1e-5, "{x} vs {y}");
    }
}

#[test]
fn truncated_state_needs_a_half_line_grid() {
    let full = EnergyGrid::full_line(2.0, 100.0, 1 << 12).unwrap();
    assert!(truncated_gamow(c(2.0, -0.2), &full).is_err());
    let half = EnergyGrid::half_line(200.0, 1 << 14).unwrap();
    let g = truncated_gamow(c(2.0, -0.2), &half).unwrap();
    assert_eq!(g.support(), GamowSupport::HalfLine);
    assert_eq!(g.wavefunction().hardy_class(), HardyClass::Unknown);
}

#[test]
fn eigenvalue_defect_is_small_for_an_upper_analytic_test() {
    let g = standard();
    let t = SampledWaveFunction::from_fn(g.grid(), Role::Observable, HardyClass::H2Plus, |e| {
        1.0 / (c(e, 0.0) - c(1.0, -0.8)).powi(3)
    })
    .unwrap();
    assert!(eigenvalue_defect(&g, &t).unwrap().norm() < 1e-6);
}

#[test]
fn eigenvalue_defect_rejects_lower_analytic_tests() {
    let g = standard();
    let t = SampledWaveFunction::from_fn(g.grid(), Role::Observable, HardyClass::Unknown, |e| {
        1.0 / (c(e, 0.0) - c(1.0, 0.8)).powi(2)
    })
    .unwrap();
    assert!(matches!(eigenvalue_defect(&g, &t), Err(Error::ClassMismatch { .. })));
}

#[test]
fn survival_composes_within_the_semigroup() {
    // Self-normalization leaves A(t) ≈ e^{−i z_R t}(1 + Γ/(πW)), so the
    // composition defect is about Γ/(πW); spacing Γ/6 keeps the aliased
    // copies of e^{−Γt/2} below 1e−7 up to t = 2/Γ.
    let (e_r, gamma) = (2.0, 0.4);
    let n = 1usize << 23;
    let h = gamma / 6.0;
    let grid = EnergyGrid::full_line(e_r, 0.5 * h * n as f64, n).unwrap();
    let g = make_gamow(c(e_r, -0.5 * gamma), &grid).unwrap();
    let span = 2.0 / gamma;
    for (u1, u2) in [(0.1, 0.2), (0.25, 0.75), (0.5, 0.5), (0.9, 0.05), (0.33, 0.6)] {
        let (t1, t2) = (span * u1, span * u2);
        let a1 = survival_amplitude(&g, t1).unwrap();
        let a2 = survival_amplitude(&g, t2).unwrap();
        let a12 = survival_amplitude(&g, t1 + t2).unwrap();
        assert!((a12 - a1 * a2).norm() <= 1e-6, "{t1},{t2}: {}", (a12 - a1 * a2).norm());
        let phase = (a1.arg() + e_r * t1).rem_euclid(2.0 * PI);
        assert!(phase.min(2.0 * PI - phase) <= 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn defect_ignores_test_scaling((re, im) in (-5.0..5.0f64, -5.0..5.0f64)) {
        let s = c(re, im);
        prop_assume!(s.norm() > 1e-3);
        let g = standard();
        let t = SampledWaveFunction::from_fn(g.grid(), Role::Observable, HardyClass::H2Plus, |e| {
            1.0 / (c(e, 0.0) - c(2.5, -1.0)).powi(3)
        })
        .unwrap();
        let a = eigenvalue_defect(&g, &t).unwrap();
        let b = eigenvalue_defect(&g, &t.scaled(s)).unwrap();
        // Only summation rounding over 2¹⁷ samples separates the two.
        prop_assert!((a - b).norm() <= 1e-10, "{}", (a - b).norm());
    }
}
