//! Semigroup time evolution in the energy representation.
//!
//! States evolve by `φ(t) = e^{−iEt} φ` (Schrödinger picture) and observables
//! by `ψ(t) = e^{+iEt} ψ` (Heisenberg picture), both for t ≥ 0 only. Both
//! multipliers are unimodular, so norms are preserved for every t; what fails
//! for t < 0 is the Hardy class, which [`causality_leak`] measures.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{inner_product, HardyClass, Role, SampledWaveFunction};
use crate::hardy::hardy_leakage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Multiply by `e^{−iEt}`.
    SchrodingerState,
    /// Multiply by `e^{+iEt}`.
    HeisenbergObservable,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::SchrodingerState => -1.0,
            Direction::HeisenbergObservable => 1.0,
        }
    }

    /// The direction under which functions of `class` keep their class for
    /// t ≥ 0.
    pub fn preserving(class: HardyClass) -> Option<Self> {
        match class {
            HardyClass::H2Minus => Some(Direction::SchrodingerState),
            HardyClass::H2Plus => Some(Direction::HeisenbergObservable),
            HardyClass::Unknown => None,
        }
    }

    fn role(self) -> Role {
        match self {
            Direction::SchrodingerState => Role::State,
            Direction::HeisenbergObservable => Role::Observable,
        }
    }
}

/// A time step and direction. With `enforce_semigroup` (the default) only
/// t ≥ 0 is accepted; turning it off is a diagnostic escape hatch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRequest {
    pub t: f64,
    pub direction: Direction,
    #[serde(default = "enforced")]
    pub enforce_semigroup: bool,
}

fn enforced() -> bool {
    true
}

impl EvolutionRequest {
    pub fn new(t: f64, direction: Direction) -> Self {
        Self {
            t,
            direction,
            enforce_semigroup: true,
        }
    }

    /// Request that also accepts t < 0.
    pub fn diagnostic(t: f64, direction: Direction) -> Self {
        Self {
            t,
            direction,
            enforce_semigroup: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(invalid(format!("t must be finite, got {}", self.t)));
        }
        if self.enforce_semigroup && self.t < 0.0 {
            return Err(Error::OutsideSemigroup(self.t));
        }
        Ok(())
    }
}

// e^{isE} with the product sE carried to twice working precision, so the
// phase error does not grow with |sE| beyond the rounding of s itself.
fn phase(s: f64, e: f64) -> Complex64 {
    let hi = s * e;
    let lo = s.mul_add(e, -hi);
    Complex64::from_polar(1.0, hi) * Complex64::new(1.0, lo)
}

fn multiply(f: &SampledWaveFunction, t: f64, direction: Direction) -> SampledWaveFunction {
    let s = direction.sign() * t;
    f.with_values(
        f.values()
            .iter()
            .zip(f.grid().points())
            .map(|(v, e)| v * phase(s, *e))
            .collect(),
    )
}

/// Applies the request to `f` regardless of its role.
pub fn evolve(f: &SampledWaveFunction, request: &EvolutionRequest) -> Result<SampledWaveFunction> {
    request.validate()?;
    Ok(multiply(f, request.t, request.direction))
}

fn evolve_role(f: &SampledWaveFunction, t: f64, direction: Direction) -> Result<SampledWaveFunction> {
    if f.role() != direction.role() {
        return Err(Error::RoleMismatch(format!(
            "{direction:?} evolution applies to a {:?}, got a {:?}",
            direction.role(),
            f.role()
        )));
    }
    evolve(f, &EvolutionRequest::new(t, direction))
}

/// `φ(t) = e^{−iEt} φ` for a state, t ≥ 0.
pub fn evolve_state(phi: &SampledWaveFunction, t: f64) -> Result<SampledWaveFunction> {
    evolve_role(phi, t, Direction::SchrodingerState)
}

/// `ψ(t) = e^{+iEt} ψ` for an observable, t ≥ 0.
pub fn evolve_observable(psi: &SampledWaveFunction, t: f64) -> Result<SampledWaveFunction> {
    evolve_role(psi, t, Direction::HeisenbergObservable)
}

/// Born probability `|⟨ψ|φ(t)⟩|²`, Schrödinger picture.
pub fn born_probability(psi: &SampledWaveFunction, phi: &SampledWaveFunction, t: f64) -> Result<f64> {
    let evolved = evolve(phi, &EvolutionRequest::new(t, Direction::SchrodingerState))?;
    Ok(inner_product(psi, &evolved)?.norm_sqr())
}

/// Born probability `|⟨ψ(t)|φ⟩|²`, Heisenberg picture.
pub fn born_probability_heisenberg(
    psi: &SampledWaveFunction,
    phi: &SampledWaveFunction,
    t: f64,
) -> Result<f64> {
    let evolved = evolve(psi, &EvolutionRequest::new(t, Direction::HeisenbergObservable))?;
    Ok(inner_product(&evolved, phi)?.norm_sqr())
}

/// Hardy leakage of `f` after evolving it by `t` in the direction that
/// preserves its declared class for t ≥ 0 (e^{−iEt} for H²₋, e^{+iEt} for
/// H²₊). Any t is accepted: this is the diagnostic that shows the class
/// breaking down for t < 0.
pub fn causality_leak(f: &SampledWaveFunction, t: f64) -> Result<f64> {
    let direction = Direction::preserving(f.hardy_class()).ok_or(Error::ClassRequired)?;
    let evolved = evolve(f, &EvolutionRequest::diagnostic(t, direction))?;
    hardy_leakage(&evolved, f.hardy_class())
}
