use gamow_lab::grid::{inner_product, l2_norm, EnergyGrid, HardyClass, Role, SampledWaveFunction};
use gamow_lab::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sampled(grid: &EnergyGrid, role: Role, values: &[(f64, f64)]) -> SampledWaveFunction {
    SampledWaveFunction::new(
        grid.clone(),
        values.iter().map(|&(a, b)| c(a, b)).collect(),
        role,
        HardyClass::Unknown,
    )
    .unwrap()
}

const N: usize = 64;

fn samples() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), N)
}

#[test]
fn trapezoid_converges_at_second_order() {
    // ∫_{-1}^{3} E² e^{iE} dE; antiderivative e^{iE}(−iE² + 2E + 2i).
    let g = |e: f64| Complex64::from_polar(1.0, e) * c(2.0 * e, 2.0 - e * e);
    let exact = g(3.0) - g(-1.0);
    let errors: Vec<f64> = [64usize, 128, 256, 512]
        .iter()
        .map(|&n| {
            let grid = EnergyGrid::full_line(1.0, 2.0, n).unwrap();
            let one = SampledWaveFunction::from_fn(&grid, Role::Observable, HardyClass::Unknown, |_| c(1.0, 0.0)).unwrap();
            let f = SampledWaveFunction::from_fn(&grid, Role::State, HardyClass::Unknown, |e| {
                Complex64::from_polar(e * e, e)
            })
            .unwrap();
            (inner_product(&one, &f).unwrap() - exact).norm()
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((ratio - 4.0).abs() <= 0.3 * 4.0, "ratio {ratio} from {errors:?}");
    }
}

#[test]
fn half_line_grid_starts_at_zero() {
    let grid = EnergyGrid::half_line(10.0, 101).unwrap();
    assert_eq!(grid.points()[0], 0.0);
    assert!((grid.upper() - 10.0).abs() < 1e-15);
    let total: f64 = grid.weights().iter().sum();
    assert!((total - 10.0).abs() < 1e-12);
}

#[test]
fn lorentzian_tail_bound_covers_the_truncation() {
    let pole = c(2.0, -0.2);
    let grid = EnergyGrid::full_line(2.0, 100.0, 1 << 14).unwrap();
    let f = SampledWaveFunction::from_fn(&grid, Role::Observable, HardyClass::Unknown, |e| {
        c((0.4 / (2.0 * std::f64::consts::PI)).sqrt(), 0.0) / (c(e, 0.0) - pole)
    })
    .unwrap();
    let missing = 1.0 - l2_norm(&f).powi(2);
    let bound = grid.lorentzian_tail_mass(pole);
    assert!((missing - bound).abs() < 1e-8, "{missing} vs {bound}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_conjugate_symmetric(a in samples(), b in samples()) {
        let grid = EnergyGrid::full_line(0.0, 5.0, N).unwrap();
        let f = sampled(&grid, Role::Observable, &a);
        let g = sampled(&grid, Role::State, &b);
        let fg = inner_product(&f, &g).unwrap();
        let gf = inner_product(&g, &f).unwrap();
        prop_assert!((fg - gf.conj()).norm() <= 1e-12);
    }

    #[test]
    fn inner_product_is_sesquilinear(
        a in samples(),
        b in samples(),
        d in samples(),
        (sr, si) in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let grid = EnergyGrid::full_line(0.0, 5.0, N).unwrap();
        let s = c(sr, si);
        let f = sampled(&grid, Role::Observable, &a);
        let g = sampled(&grid, Role::State, &b);
        let h = sampled(&grid, Role::State, &d);
        let lhs = inner_product(&f, &g.scaled(s).try_add(&h).unwrap()).unwrap();
        let rhs = s * inner_product(&f, &g).unwrap() + inner_product(&f, &h).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
        let lhs = inner_product(&f.scaled(s), &g).unwrap();
        let rhs = s.conj() * inner_product(&f, &g).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn norm_is_non_negative_and_homogeneous(a in samples(), k in 0.1..10.0f64) {
        let grid = EnergyGrid::full_line(0.0, 5.0, N).unwrap();
        let f = sampled(&grid, Role::State, &a);
        let n = l2_norm(&f);
        prop_assert!(n >= 0.0);
        prop_assert!((l2_norm(&f.scaled(c(k, 0.0))) - k * n).abs() <= 1e-12 * k * n.max(1.0));
    }
}
