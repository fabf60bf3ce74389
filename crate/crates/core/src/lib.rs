//! Time-asymmetric quantum mechanics in the energy representation.
//!
//! Wave functions are sampled on uniform energy grids ([`grid`]). The
//! [`hardy`] module splits them into the Hardy spaces H²₊ (observables) and
//! H²₋ (states) by their Fourier support and continues them off the real
//! axis. [`resonance`] covers Breit–Wigner line shapes and pole fits,
//! [`gamow`] the decaying Gamow states, [`smatrix`] the pole/background split
//! of S-matrix elements and [`evolution`] the t ≥ 0 semigroups with their
//! causality diagnostics.
//!
//! Units use ħ = 1 throughout.
//!
//! ```
//! use gamow_lab::{gamow, grid::EnergyGrid};
//! use num_complex::Complex64;
//!
//! let grid = EnergyGrid::full_line(2.0, 400.0, 1 << 14)?;
//! let state = gamow::make_gamow(Complex64::new(2.0, -0.2), &grid)?;
//! let a = gamow::survival_amplitude(&state, 2.5)?;
//! assert!((a.norm_sqr() - (-1.0f64).exp()).abs() < 1e-3);
//! # Ok::<(), gamow_lab::Error>(())
//! ```

pub mod error;
pub mod evolution;
pub mod gamow;
pub mod grid;
pub mod hardy;
mod quadrature;
pub mod resonance;
pub mod smatrix;

pub use error::{Error, Result};
pub use evolution::{
    born_probability, born_probability_heisenberg, causality_leak, evolve, evolve_observable,
    evolve_state, Direction, EvolutionRequest,
};
pub use gamow::{
    decay_curve, eigenvalue_defect, make_gamow, survival_amplitude, truncated_gamow, DecaySeries,
    GamowState, GamowSupport,
};
pub use grid::{
    half_line_inner_product, inner_product, l2_norm, EnergyGrid, GridKind, HardyClass,
    QuantumLabels, Role, SampledWaveFunction,
};
pub use hardy::{
    decompose, extend, extend_line, fourier_transform, hardy_leakage, inverse_fourier_transform,
    norm_profile, project_minus, project_plus, Continuation, FourierConvention, FrequencySpectrum,
    HalfPlanePoint, Sheet,
};
pub use resonance::{
    bw_amplitude, bw_cross_section, fit_pole, fit_pole_with, AngularMomentum, BreitWignerParams,
    FitOptions, FitReport,
};
pub use smatrix::{
    pole_background_decomposition, single_pole_smatrix, smatrix_element, PoleBackground,
    SMatrixModel,
};
pub use num_complex::Complex64;

/// `make_line_grid(center, half_width, n)`: uniform full-line grid.
pub fn make_line_grid(center: f64, half_width: f64, n: usize) -> Result<EnergyGrid> {
    EnergyGrid::full_line(center, half_width, n)
}

/// `make_halfline_grid(e_max, n)`: uniform grid on [0, e_max].
pub fn make_halfline_grid(e_max: f64, n: usize) -> Result<EnergyGrid> {
    EnergyGrid::half_line(e_max, n)
}

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/grids.md")]
    struct Grids;
    #[doc = include_str!("../../../book/src/hardy.md")]
    struct Hardy;
    #[doc = include_str!("../../../book/src/resonance.md")]
    struct Resonance;
    #[doc = include_str!("../../../book/src/gamow.md")]
    struct Gamow;
    #[doc = include_str!("../../../book/src/smatrix.md")]
    struct SMatrix;
    #[doc = include_str!("../../../book/src/evolution.md")]
    struct Evolution;
}
