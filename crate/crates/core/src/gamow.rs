//! Gamow states, survival amplitudes and decay curves.
//!
//! The Gamow wave function of a pole `z_R = E_R − iΓ/2` is
//! `ψ(E) = i √(Γ/2π) / (E − z_R)`, a Lorentzian amplitude whose squared
//! modulus integrates to one over the real line. Its survival amplitude
//! `A(t) = ∫ e^{−iEt} |ψ(E)|² dE` equals `e^{−i z_R t}` for t ≥ 0.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{inner_product, l2_norm, EnergyGrid, HardyClass, Role, SampledWaveFunction};
use crate::hardy::{hardy_leakage, DEFAULT_LEAKAGE_THRESHOLD};

/// Largest Lorentzian probability mass allowed outside the grid window.
pub const MAX_TAIL_MASS: f64 = 1e-3;

/// Whether a Gamow wave function spans the whole real line or only the
/// physical spectrum E ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GamowSupport {
    /// Raw values on a full-line grid; the norm falls short of one by the
    /// Lorentzian tail mass outside the window.
    FullLine,
    /// Values on [0, E_max], rescaled to unit norm.
    HalfLine,
}

/// A resonance pole with its sampled Gamow wave function.
#[derive(Clone, Debug)]
pub struct GamowState {
    pole: Complex64,
    wavefunction: SampledWaveFunction,
    support: GamowSupport,
    tail_mass: f64,
    scale: f64,
}

impl GamowState {
    pub fn pole(&self) -> Complex64 {
        self.pole
    }

    pub fn e_r(&self) -> f64 {
        self.pole.re
    }

    /// Γ = −2 Im z_R.
    pub fn gamma(&self) -> f64 {
        -2.0 * self.pole.im
    }

    pub fn wavefunction(&self) -> &SampledWaveFunction {
        &self.wavefunction
    }

    pub fn grid(&self) -> &EnergyGrid {
        self.wavefunction.grid()
    }

    pub fn support(&self) -> GamowSupport {
        self.support
    }

    /// The √(2πΓ) factor relating the Gamow ket to its Lorentzian
    /// energy wave function.
    pub fn normalization(&self) -> f64 {
        (2.0 * PI * self.gamma()).sqrt()
    }

    /// Lorentzian probability mass outside the sampled window. For
    /// full-line states the squared norm converges to `1 − tail_mass`.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Factor applied on top of `i√(Γ/2π)/(E − z_R)`: 1 for full-line states,
    /// the renormalization constant for truncated ones.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Closed-form amplitude `e^{−i z_R t}` of the ideal full-line state.
    pub fn exponential_amplitude(&self, t: f64) -> Complex64 {
        (Complex64::new(0.0, -t) * self.pole).exp()
    }
}

fn lorentzian_amplitude(pole: Complex64, e: f64) -> Complex64 {
    let gamma = -2.0 * pole.im;
    Complex64::new(0.0, (gamma / (2.0 * PI)).sqrt()) / (Complex64::new(e, 0.0) - pole)
}

fn check_pole(pole: Complex64) -> Result<()> {
    if !pole.re.is_finite() || !pole.im.is_finite() || !(pole.im < 0.0) {
        return Err(Error::PoleNotInLowerHalfPlane(pole));
    }
    Ok(())
}

fn check_resolution(grid: &EnergyGrid, pole: Complex64) -> Result<()> {
    let gamma = -2.0 * pole.im;
    if grid.spacing() > 0.5 * gamma {
        return Err(Error::InsufficientGrid(format!(
            "spacing {:.3e} does not resolve the width {gamma:.3e} (need spacing <= Gamma/2)",
            grid.spacing()
        )));
    }
    Ok(())
}

/// Gamow state of `pole` sampled on a full-line grid.
///
/// The grid must resolve the width (spacing ≤ Γ/2) and leave at most
/// [`MAX_TAIL_MASS`] of the Lorentzian outside the window. Values are the raw
/// Lorentzian amplitude, not renormalized.
pub fn make_gamow(pole: Complex64, grid: &EnergyGrid) -> Result<GamowState> {
    check_pole(pole)?;
    if !grid.is_full_line() {
        return Err(Error::NeedsFullLine);
    }
    check_resolution(grid, pole)?;
    let tail_mass = grid.lorentzian_tail_mass(pole);
    if tail_mass > MAX_TAIL_MASS {
        return Err(Error::InsufficientGrid(format!(
            "Lorentzian tail mass {tail_mass:.3e} outside the window exceeds {MAX_TAIL_MASS:.0e}"
        )));
    }
    let values = grid
        .points()
        .iter()
        .map(|&e| lorentzian_amplitude(pole, e))
        .collect();
    // Analytic in the upper half-plane, yet it evolves as a decaying state.
    let wavefunction =
        SampledWaveFunction::new_exempt(grid.clone(), values, Role::State, HardyClass::H2Plus);
    Ok(GamowState {
        pole,
        wavefunction,
        support: GamowSupport::FullLine,
        tail_mass,
        scale: 1.0,
    })
}

/// The Gamow amplitude restricted to the physical spectrum [0, E_max] of a
/// half-line grid and rescaled to unit norm.
pub fn truncated_gamow(pole: Complex64, grid: &EnergyGrid) -> Result<GamowState> {
    check_pole(pole)?;
    if grid.is_full_line() {
        return Err(invalid("truncated Gamow states need a half-line grid"));
    }
    check_resolution(grid, pole)?;
    let half = -pole.im;
    let above = 0.5 - ((grid.upper() - pole.re) / half).atan() / PI;
    let below_zero = 0.5 + ((0.0 - pole.re) / half).atan() / PI;
    let kept = 1.0 - above - below_zero;
    if above > MAX_TAIL_MASS * kept {
        return Err(Error::InsufficientGrid(format!(
            "E_max = {} leaves a relative Lorentzian tail {:.3e} above the window",
            grid.upper(),
            above / kept
        )));
    }
    let raw: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&e| lorentzian_amplitude(pole, e))
        .collect();
    let unscaled =
        SampledWaveFunction::new_exempt(grid.clone(), raw, Role::State, HardyClass::Unknown);
    let scale = 1.0 / l2_norm(&unscaled);
    let wavefunction = unscaled.scaled(Complex64::new(scale, 0.0));
    Ok(GamowState {
        pole,
        wavefunction,
        support: GamowSupport::HalfLine,
        tail_mass: above + below_zero,
        scale,
    })
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() {
        return Err(invalid("t is NaN"));
    }
    if t < 0.0 {
        return Err(Error::OutsideSemigroup(t));
    }
    Ok(())
}

fn density(g: &GamowState) -> Vec<f64> {
    g.grid()
        .weights()
        .iter()
        .zip(g.wavefunction.values())
        .map(|(w, v)| w * v.norm_sqr())
        .collect()
}

fn amplitude_from_density(grid: &EnergyGrid, density: &[f64], total: f64, t: f64) -> Complex64 {
    // Factor out the carrier e^{−i c t} at the window center so the summed
    // phases stay small.
    let c = grid.center();
    let sum: Complex64 = grid
        .points()
        .iter()
        .zip(density)
        .map(|(e, d)| Complex64::from_polar(*d, -(e - c) * t))
        .sum();
    Complex64::from_polar(1.0, -c * t) * sum / total
}

/// `A(t) = ⟨ψ| e^{−iHt} ψ⟩ / ⟨ψ|ψ⟩` by quadrature on the state's grid, t ≥ 0.
pub fn survival_amplitude(g: &GamowState, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let d = density(g);
    let total: f64 = d.iter().sum();
    Ok(amplitude_from_density(g.grid(), &d, total, t))
}

/// Survival amplitudes at each of `times` (ascending, non-negative),
/// evaluated in parallel.
pub fn decay_curve(g: &GamowState, times: &[f64]) -> Result<DecaySeries> {
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|p| p[1] < p[0]) {
        return Err(invalid("times must be ascending"));
    }
    let d = density(g);
    let total: f64 = d.iter().sum();
    let amplitude: Vec<Complex64> = times
        .par_iter()
        .map(|&t| amplitude_from_density(g.grid(), &d, total, t))
        .collect();
    Ok(DecaySeries::new(times.to_vec(), amplitude))
}

/// Survival amplitudes and probabilities on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    times: Vec<f64>,
    amplitude: Vec<Complex64>,
    survival: Vec<f64>,
}

impl DecaySeries {
    fn new(times: Vec<f64>, amplitude: Vec<Complex64>) -> Self {
        let survival = amplitude.iter().map(|a| a.norm_sqr()).collect();
        Self {
            times,
            amplitude,
            survival,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Least-squares slope of ln(survival) against t over points with
    /// `t <= t_max`.
    pub fn log_slope(&self, t_max: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.survival)
            .filter(|(t, s)| **t <= t_max && **s > 0.0)
            .map(|(t, s)| (*t, s.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(invalid("need at least two positive points for a slope"));
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
        if sxx == 0.0 {
            return Err(invalid("all times coincide"));
        }
        Ok(sxy / sxx)
    }

    /// CSV with header `t,re_A,im_A,survival`, 17 significant digits.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "re_A", "im_A", "survival"])?;
        for ((t, a), s) in self.times.iter().zip(&self.amplitude).zip(&self.survival) {
            w.write_record([
                format!("{t:.16e}"),
                format!("{:.16e}", a.re),
                format!("{:.16e}", a.im),
                format!("{s:.16e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Weak eigenvalue defect `⟨t|E·ψ⟩ / ⟨t|ψ⟩ − z_R` of the Gamow state against
/// an H²₊ test function.
pub fn eigenvalue_defect(g: &GamowState, test: &SampledWaveFunction) -> Result<Complex64> {
    if test.grid() != g.grid() {
        return Err(Error::IncompatibleGrids);
    }
    let leakage = hardy_leakage(test, HardyClass::H2Plus)?;
    if test.hardy_class() == HardyClass::H2Minus || leakage > DEFAULT_LEAKAGE_THRESHOLD {
        return Err(Error::ClassMismatch {
            expected: HardyClass::H2Plus,
            leakage,
        });
    }
    let psi = g.wavefunction();
    let e_psi = psi.with_values(
        psi.values()
            .iter()
            .zip(g.grid().points())
            .map(|(v, e)| v * *e)
            .collect(),
    );
    let overlap = inner_product(test, psi)?;
    if overlap.norm() < 1e-8 * l2_norm(test) * l2_norm(psi) {
        return Err(Error::DegenerateTest);
    }
    Ok(inner_product(test, &e_psi)? / overlap - g.pole())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_upper_pole_and_narrow_grid() {
        let grid = EnergyGrid::full_line(2.0, 200.0, 1 << 14).unwrap();
        assert!(matches!(
            make_gamow(c(2.0, 0.2), &grid),
            Err(Error::PoleNotInLowerHalfPlane(_))
        ));
        let narrow = EnergyGrid::full_line(2.0, 20.0, 1 << 12).unwrap();
        assert!(matches!(
            make_gamow(c(2.0, -0.2), &narrow),
            Err(Error::InsufficientGrid(_))
        ));
        let coarse = EnergyGrid::full_line(2.0, 2000.0, 1 << 12).unwrap();
        assert!(matches!(
            make_gamow(c(2.0, -0.2), &coarse),
            Err(Error::InsufficientGrid(_))
        ));
    }

    #[test]
    fn norm_matches_truncated_lorentzian_mass() {
        let grid = EnergyGrid::full_line(2.0, 202.0, 1 << 16).unwrap();
        let g = make_gamow(c(2.0, -0.2), &grid).unwrap();
        let norm = l2_norm(g.wavefunction());
        assert!((norm - (1.0 - g.tail_mass()).sqrt()).abs() < 1e-6);
        assert!((norm - 1.0).abs() < g.tail_mass());
    }

    #[test]
    fn survival_basics() {
        let grid = EnergyGrid::full_line(2.0, 4000.0, 1 << 17).unwrap();
        let g = make_gamow(c(2.0, -0.2), &grid).unwrap();
        assert!((survival_amplitude(&g, 0.0).unwrap() - 1.0).norm() < 1e-12);
        // Γ = 0.4, so the lifetime is 2.5.
        let s = survival_amplitude(&g, 2.5).unwrap().norm_sqr();
        assert!((s - (-1.0f64).exp()).abs() < 1e-4);
        let s = survival_amplitude(&g, 5.0).unwrap().norm_sqr();
        assert!((s - (-2.0f64).exp()).abs() < 1e-4);
        assert!(matches!(
            survival_amplitude(&g, -1.0),
            Err(Error::OutsideSemigroup(_))
        ));
    }

    #[test]
    fn decay_curve_single_time() {
        let grid = EnergyGrid::full_line(2.0, 400.0, 1 << 14).unwrap();
        let g = make_gamow(c(2.0, -0.2), &grid).unwrap();
        let d = decay_curve(&g, &[0.0]).unwrap();
        assert!((d.survival()[0] - 1.0).abs() < 1e-12);
        assert!(decay_curve(&g, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn truncated_state_is_unit_normalized() {
        let grid = EnergyGrid::half_line(400.0, 1 << 14).unwrap();
        let g = truncated_gamow(c(2.0, -0.2), &grid).unwrap();
        assert!((l2_norm(g.wavefunction()) - 1.0).abs() < 1e-12);
        let full = EnergyGrid::full_line(0.0, 400.0, 1 << 14).unwrap();
        assert!(truncated_gamow(c(2.0, -0.2), &full).is_err());
    }

    #[test]
    fn defect_rejects_h2_minus_test() {
        let grid = EnergyGrid::full_line(2.0, 400.0, 1 << 14).unwrap();
        let g = make_gamow(c(2.0, -0.2), &grid).unwrap();
        let t = SampledWaveFunction::from_fn(&grid, Role::State, HardyClass::H2Minus, |e| {
            1.0 / (c(e, 0.0) - c(1.0, 0.8)).powi(2)
        })
        .unwrap();
        assert!(matches!(
            eigenvalue_defect(&g, &t),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn csv_header() {
        let grid = EnergyGrid::full_line(2.0, 400.0, 1 << 14).unwrap();
        let g = make_gamow(c(2.0, -0.2), &grid).unwrap();
        let d = decay_curve(&g, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,re_A,im_A,survival\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
