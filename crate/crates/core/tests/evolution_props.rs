use gamow_lab::evolution::{
    born_probability, born_probability_heisenberg, causality_leak, evolve, evolve_state, Direction,
    EvolutionRequest,
};
use gamow_lab::grid::{l2_norm, EnergyGrid, HardyClass, Role, SampledWaveFunction};
use gamow_lab::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid() -> EnergyGrid {
    EnergyGrid::full_line(0.0, 800.0, 1 << 16).unwrap()
}

fn pole_state(grid: &EnergyGrid, b: f64) -> SampledWaveFunction {
    SampledWaveFunction::from_fn(grid, Role::State, HardyClass::H2Minus, |e| 1.0 / (c(e, 0.0) - c(1.0, b))).unwrap()
}

fn random(grid: &EnergyGrid, role: Role, values: &[(f64, f64)]) -> SampledWaveFunction {
    let n = grid.len();
    let v = (0..n).map(|k| {
        let (a, b) = values[k % values.len()];
        c(a, b) * (-(grid.points()[k] / 20.0).powi(2)).exp()
    });
    SampledWaveFunction::new(grid.clone(), v.collect(), role, HardyClass::Unknown).unwrap()
}

#[test]
fn causality_leak_tracks_the_exponential_law() {
    let g = grid();
    let b = 0.5;
    let phi = pole_state(&g, b);
    let baseline = causality_leak(&phi, 0.0).unwrap();
    let mut previous = baseline;
    for t in [-0.25, -0.5, -1.0, -2.0, -4.0] {
        let leak = causality_leak(&phi, t).unwrap();
        assert!((leak - (1.0 - (-2.0 * b * f64::abs(t)).exp())).abs() <= 1e-3, "t={t}: {leak}");
        assert!(leak >= previous);
        previous = leak;
    }
    for t in [0.5, 1.0, 3.0] {
        assert!(causality_leak(&phi, t).unwrap() <= baseline + 1e-8);
    }
}

#[test]
fn observables_leak_for_negative_heisenberg_times() {
    let g = grid();
    let psi = pole_state(&g, 0.5).conj();
    assert_eq!(psi.hardy_class(), HardyClass::H2Plus);
    let leak = causality_leak(&psi, -1.0).unwrap();
    assert!((leak - (1.0 - (-1.0f64).exp())).abs() <= 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_composes(t1 in 0.0..10.0f64, t2 in 0.0..10.0f64, heisenberg in any::<bool>()) {
        let g = EnergyGrid::full_line(0.0, 200.0, 1 << 14).unwrap();
        let f = pole_state(&g, 0.5);
        let dir = if heisenberg { Direction::HeisenbergObservable } else { Direction::SchrodingerState };
        let step = |f: &SampledWaveFunction, t| evolve(f, &EvolutionRequest::new(t, dir)).unwrap();
        let two = step(&step(&f, t1), t2);
        let one = step(&f, t1 + t2);
        for (a, b) in two.values().iter().zip(one.values()) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn evolution_preserves_norms(t in -50.0..50.0f64) {
        let g = EnergyGrid::full_line(0.0, 200.0, 1 << 14).unwrap();
        let f = pole_state(&g, 0.5);
        let out = evolve(&f, &EvolutionRequest::diagnostic(t, Direction::SchrodingerState)).unwrap();
        prop_assert!((l2_norm(&out) - l2_norm(&f)).abs() <= 1e-12 * l2_norm(&f));
    }

    #[test]
    fn pictures_agree(
        a in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16),
        b in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16),
        t in 0.0..10.0f64,
    ) {
        let g = EnergyGrid::full_line(0.0, 50.0, 512).unwrap();
        let psi = random(&g, Role::Observable, &a);
        let phi = random(&g, Role::State, &b);
        let s = born_probability(&psi, &phi, t).unwrap();
        let h = born_probability_heisenberg(&psi, &phi, t).unwrap();
        let scale = (l2_norm(&psi) * l2_norm(&phi)).powi(2);
        prop_assert!((s - h).abs() <= 1e-12 * scale);
    }

    #[test]
    fn negative_times_are_refused(t in -10.0..-1e-9f64) {
        let g = EnergyGrid::full_line(0.0, 50.0, 512).unwrap();
        let f = pole_state(&g, 0.5);
        prop_assert!(evolve_state(&f, t).is_err());
    }
}
