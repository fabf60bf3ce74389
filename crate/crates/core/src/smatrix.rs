//! Rational unitary S-matrix models, S-matrix elements between Hardy-class
//! wave functions and their split into resonance pole term plus background.
//!
//! The model is `S(E) = Π_k (E − z̄_k)/(E − z_k)` with every pole `z_k` in the
//! lower half-plane, so `|S(E)| = 1` on the real axis and the continuation to
//! the second sheet is the same rational function.
//!
//! For `(ψ, Sφ) = ∫₀^∞ ψ*(E) S(E) φ(E) dE` the integration path is rotated
//! from the positive real axis onto the negative imaginary axis. The poles of
//! S in the fourth quadrant are crossed on the way, giving
//!
//! ```text
//! (ψ, Sφ) = −2πi Σ_k Res_{z_k} S · ψ̄(z_k) φ(z_k)  −  i ∫₀^∞ ψ̄(−iy) S(−iy) φ(−iy) dy
//! ```
//!
//! where `ψ̄(z) = conj(ψ(z̄))` continues ψ* into the lower half-plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{EnergyGrid, HardyClass, Role, SampledWaveFunction};
use crate::hardy::{Continuation, DEFAULT_LEAKAGE_THRESHOLD};
use crate::quadrature::gauss_legendre;

/// Relative closure defect above which a decomposition is rejected.
pub const DEFAULT_CLOSURE_TOLERANCE: f64 = 1e-6;

const RAY_ORDER: usize = 20;
const RAY_FIRST_PANEL: f64 = 1.0 / 16.0;
const RAY_CUTOFF: f64 = 1e-12;
const RAY_MAX_PANELS: usize = 200;

/// Unitary rational S-matrix with simple poles in the lower half-plane.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SMatrixModel {
    poles: Vec<Complex64>,
}

impl SMatrixModel {
    /// `S ≡ 1`.
    pub fn identity() -> Self {
        Self { poles: Vec::new() }
    }

    /// `S(E) = (E − z̄_R)/(E − z_R)`.
    pub fn single_pole(pole: Complex64) -> Result<Self> {
        Self::with_poles(vec![pole])
    }

    pub fn with_poles(poles: Vec<Complex64>) -> Result<Self> {
        for &z in &poles {
            if !z.re.is_finite() || !z.im.is_finite() || !(z.im < 0.0) {
                return Err(Error::PoleNotInLowerHalfPlane(z));
            }
        }
        for (i, a) in poles.iter().enumerate() {
            if poles[..i].contains(a) {
                return Err(invalid(format!("repeated pole {a}")));
            }
        }
        Ok(Self { poles })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// Value of the rational function at any complex energy away from the poles.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.poles
            .iter()
            .map(|p| (z - p.conj()) / (z - p))
            .product()
    }

    pub fn eval_real(&self, e: f64) -> Complex64 {
        self.eval(Complex64::new(e, 0.0))
    }

    /// Residue of S at its `k`-th pole.
    pub fn residue(&self, k: usize) -> Complex64 {
        let zk = self.poles[k];
        let others: Complex64 = self
            .poles
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, p)| (zk - p.conj()) / (zk - p))
            .product();
        (zk - zk.conj()) * others
    }

    /// Continuous phase of S(E), the sum of the per-pole phases
    /// `2 atan((E − E_k)/(Γ_k/2)) − π`, which vanishes as E → ∞.
    pub fn phase(&self, e: f64) -> f64 {
        self.poles
            .iter()
            .map(|p| 2.0 * ((e - p.re) / -p.im).atan() - PI)
            .sum()
    }
}

/// `S(E) = (E − z̄_R)/(E − z_R)`.
pub fn single_pole_smatrix(pole: Complex64) -> Result<SMatrixModel> {
    SMatrixModel::single_pole(pole)
}

/// Checks shared by the direct and contour evaluations: observable ψ in H²₊,
/// state φ in H²₋, same full-line grid.
fn check_pair(psi: &SampledWaveFunction, phi: &SampledWaveFunction) -> Result<()> {
    if psi.grid() != phi.grid() {
        return Err(Error::IncompatibleGrids);
    }
    if !psi.grid().is_full_line() {
        return Err(Error::NeedsFullLine);
    }
    if psi.role() != Role::Observable {
        return Err(Error::RoleMismatch("psi must be an observable".into()));
    }
    if phi.role() != Role::State {
        return Err(Error::RoleMismatch("phi must be a state".into()));
    }
    Ok(())
}

fn continuations<'a>(
    psi: &'a SampledWaveFunction,
    phi: &'a SampledWaveFunction,
) -> Result<(Continuation<'a>, Continuation<'a>)> {
    check_pair(psi, phi)?;
    Ok((
        Continuation::with_threshold(psi, HardyClass::H2Plus, DEFAULT_LEAKAGE_THRESHOLD)?,
        Continuation::with_threshold(phi, HardyClass::H2Minus, DEFAULT_LEAKAGE_THRESHOLD)?,
    ))
}

fn direct(psi: &SampledWaveFunction, phi: &SampledWaveFunction, s: &SMatrixModel) -> Complex64 {
    let grid: &EnergyGrid = psi.grid();
    grid.half_line_weights()
        .iter()
        .zip(grid.points())
        .zip(psi.values().iter().zip(phi.values()))
        .filter(|((w, _), _)| **w != 0.0)
        .map(|((w, e), (a, b))| *w * a.conj() * s.eval_real(*e) * b)
        .sum()
}

/// `∫₀^∞ ψ*(E) S(E) φ(E) dE` over the E ≥ 0 samples of the shared grid.
pub fn smatrix_element(
    psi: &SampledWaveFunction,
    phi: &SampledWaveFunction,
    s: &SMatrixModel,
) -> Result<Complex64> {
    continuations(psi, phi)?;
    Ok(direct(psi, phi, s))
}

/// Direct integral and its contour split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleBackground {
    pub direct: Complex64,
    pub pole_term: Complex64,
    pub background: Complex64,
    /// `|pole_term + background − direct| / |direct|`.
    pub closure_defect: f64,
}

/// Splits `(ψ, Sφ)` into pole and background terms, failing when they do not
/// add up to the direct integral within [`DEFAULT_CLOSURE_TOLERANCE`].
pub fn pole_background_decomposition(
    psi: &SampledWaveFunction,
    phi: &SampledWaveFunction,
    s: &SMatrixModel,
) -> Result<PoleBackground> {
    pole_background_decomposition_with(psi, phi, s, DEFAULT_CLOSURE_TOLERANCE)
}

pub fn pole_background_decomposition_with(
    psi: &SampledWaveFunction,
    phi: &SampledWaveFunction,
    s: &SMatrixModel,
    tolerance: f64,
) -> Result<PoleBackground> {
    let (cpsi, cphi) = continuations(psi, phi)?;
    let grid = psi.grid();
    if !(grid.lower() < 0.0 && grid.upper() > 0.0) {
        return Err(invalid("the grid must straddle E = 0"));
    }
    if let Some(p) = s.poles().iter().find(|p| p.re == 0.0) {
        return Err(invalid(format!("pole {p} lies on the deformed contour")));
    }

    let direct = direct(psi, phi, s);

    let mut pole_term = Complex64::new(0.0, 0.0);
    for (k, &z) in s.poles().iter().enumerate() {
        if z.re > 0.0 {
            let psi_bar = cpsi.at(z.conj())?.conj();
            let phi_z = cphi.at(z)?;
            pole_term += Complex64::new(0.0, -2.0 * PI) * s.residue(k) * psi_bar * phi_z;
        }
    }

    let integrand = |y: f64| -> Complex64 {
        let z = Complex64::new(0.0, -y);
        cpsi.at_unguarded(z.conj()).conj() * s.eval(z) * cphi.at_unguarded(z)
    };
    let background = Complex64::new(0.0, -1.0) * ray_integral(integrand);

    let closure_defect = if direct.norm() > 0.0 {
        (pole_term + background - direct).norm() / direct.norm()
    } else {
        (pole_term + background).norm()
    };
    if !(closure_defect <= tolerance) {
        return Err(Error::DecompositionInconsistent {
            direct,
            pole_term,
            background,
            defect: closure_defect,
        });
    }
    Ok(PoleBackground {
        direct,
        pole_term,
        background,
        closure_defect,
    })
}

/// `∫₀^∞ f(y) dy` with Gauss–Legendre panels doubling in length, stopped once
/// a whole panel stays below `RAY_CUTOFF` of the largest value seen.
fn ray_integral(f: impl Fn(f64) -> Complex64) -> Complex64 {
    let (nodes, weights) = gauss_legendre(RAY_ORDER);
    let mut total = Complex64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    let (mut a, mut b) = (0.0, RAY_FIRST_PANEL);
    for _ in 0..RAY_MAX_PANELS {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut panel_max: f64 = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let v = f(mid + half * x);
            panel_max = panel_max.max(v.norm());
            total += v * (half * w);
        }
        peak = peak.max(panel_max);
        if panel_max < RAY_CUTOFF * peak {
            break;
        }
        a = b;
        b *= 2.0;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unitary_on_axis() {
        let s = single_pole_smatrix(c(2.0, -0.2)).unwrap();
        for e in [0.0, 2.0, 10.0] {
            assert!((s.eval_real(e).norm() - 1.0).abs() < 1e-12);
        }
        assert!((s.eval_real(2.0) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn phase_rises_across_resonance() {
        let s = single_pole_smatrix(c(2.0, -0.2)).unwrap();
        let rise = s.phase(2.0 + 4.0) - s.phase(2.0 - 4.0);
        assert!((rise - 4.0 * 20f64.atan()).abs() < 1e-12);
        // The continuous phase agrees with arg S modulo 2π.
        for e in [0.3, 1.9, 2.4, 7.0] {
            let d = (s.phase(e) - s.eval_real(e).arg()).rem_euclid(2.0 * PI);
            assert!(d < 1e-12 || 2.0 * PI - d < 1e-12);
        }
    }

    #[test]
    fn rejects_upper_pole() {
        assert!(matches!(
            single_pole_smatrix(c(2.0, 0.2)),
            Err(Error::PoleNotInLowerHalfPlane(_))
        ));
    }

    #[test]
    fn residue_of_single_pole() {
        let z = c(2.0, -0.2);
        let s = single_pole_smatrix(z).unwrap();
        assert!((s.residue(0) - c(0.0, -0.4)).norm() < 1e-15);
        // Compare with (z − z_R) S(z) on a small circle.
        let eps = 1e-7;
        let near = z + c(eps, 0.0);
        assert!(((near - z) * s.eval(near) - s.residue(0)).norm() < 1e-6);
    }

    #[test]
    fn ray_integral_of_rational() {
        // ∫₀^∞ dy/(1+y)⁴ = 1/3
        let v = ray_integral(|y| c((1.0 + y).powi(-4), 0.0));
        assert!((v - c(1.0 / 3.0, 0.0)).norm() < 1e-10);
    }
}
