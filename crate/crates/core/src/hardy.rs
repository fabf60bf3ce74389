//! Hardy-space tools on full-line grids: Fourier transform, the orthogonal
//! split L² = H²₊ ⊕ H²₋, leakage tests, analytic continuation off the real
//! axis and line-norm profiles.
//!
//! The transform convention is
//!
//! ```text
//! F(ω) = (2π)^{-1/2} ∫ f(E) e^{+iωE} dE
//! ```
//!
//! With this sign a function analytic in the upper half-plane (H²₊) has its
//! spectrum on ω < 0, and a lower half-plane function (H²₋) on ω > 0. The
//! discrete transform samples ω at half-integer multiples of Δω = 2π/(nh), so
//! no frequency sits at ω = 0 and the two halves partition the spectrum.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{EnergyGrid, HardyClass, Role, SampledWaveFunction};
use crate::quadrature::fornberg_weights;

/// Leakage above which a function is not considered a member of a Hardy space.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-6;

/// Continuation is refused closer than this many grid spacings to the axis.
pub const NEAR_AXIS_SPACINGS: f64 = 2.0;

// Below this distance (in spacings) the continuation subtracts a local Taylor
// polynomial before applying the Poisson kernel.
const SUBTRACTION_SPACINGS: f64 = 8.0;

/// Sign and normalization of the Fourier transform in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierConvention {
    /// `F(ω) = (2π)^{-1/2} ∫ f(E) e^{+iωE} dE`; H²₊ spectra live on ω < 0.
    UnitaryPositiveExponent,
}

impl FourierConvention {
    /// Sign of the exponent in the forward kernel.
    pub fn kernel_sign(self) -> i32 {
        1
    }

    /// Class whose spectrum is supported on ω < 0.
    pub fn negative_side_class(self) -> HardyClass {
        HardyClass::H2Plus
    }
}

/// Discrete spectrum of a wave function, frequencies ascending.
#[derive(Clone, Debug)]
pub struct FrequencySpectrum {
    grid: EnergyGrid,
    freqs: Vec<f64>,
    amplitudes: Vec<Complex64>,
    convention: FourierConvention,
}

impl FrequencySpectrum {
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn convention(&self) -> FourierConvention {
        self.convention
    }

    /// Energy grid the spectrum was computed from.
    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    /// Frequency spacing Δω = 2π/(n h).
    pub fn spacing(&self) -> f64 {
        2.0 * PI / (self.grid.len() as f64 * self.grid.spacing())
    }

    /// Σ |F(ω)|² Δω, equal to the squared norm of the boundary function.
    pub fn energy(&self) -> f64 {
        self.spacing() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }
}

/// Side label for points off the real axis. Informational only: the rational
/// models used here continue to the second sheet without branch tracking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sheet {
    Physical,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub z: Complex64,
    pub sheet: Sheet,
}

impl HalfPlanePoint {
    pub fn new(z: Complex64) -> Self {
        Self {
            z,
            sheet: Sheet::Physical,
        }
    }

    pub fn on_sheet(z: Complex64, sheet: Sheet) -> Self {
        Self { z, sheet }
    }
}

impl From<Complex64> for HalfPlanePoint {
    fn from(z: Complex64) -> Self {
        Self::new(z)
    }
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .plan_fft(n, direction)
}

fn check_fourier_grid(grid: &EnergyGrid) -> Result<()> {
    if !grid.is_full_line() {
        return Err(Error::NeedsFullLine);
    }
    if grid.len() % 2 != 0 {
        return Err(invalid(format!(
            "Fourier operations need an even number of samples, got {}",
            grid.len()
        )));
    }
    Ok(())
}

// e^{i ω_m E_0}, with the phase reduced before it is scaled by 2π.
fn origin_phase(m: i64, grid: &EnergyGrid) -> Complex64 {
    let n = grid.len() as f64;
    let cycles = ((m as f64 + 0.5) * (grid.lower() / (n * grid.spacing()))).rem_euclid(1.0);
    Complex64::from_polar(1.0, 2.0 * PI * cycles)
}

fn weight_factors(grid: &EnergyGrid) -> impl Iterator<Item = f64> + '_ {
    let h = grid.spacing();
    grid.weights().iter().map(move |w| (w / h).sqrt())
}

// Spectrum at ω_p = (p − n/2 + ½)Δω, p = 0..n.
fn forward(grid: &EnergyGrid, values: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len();
    let half = n / 2;
    let mut buf: Vec<Complex64> = values
        .iter()
        .zip(weight_factors(grid))
        .enumerate()
        .map(|(k, (v, c))| v * c * Complex64::from_polar(1.0, PI * k as f64 / n as f64))
        .collect();
    plan(n, FftDirection::Inverse).process(&mut buf);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    (0..n)
        .map(|p| {
            let m = p as i64 - half as i64;
            scale * origin_phase(m, grid) * buf[(p + half) % n]
        })
        .collect()
}

fn inverse(grid: &EnergyGrid, spectrum: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len();
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (p, a) in spectrum.iter().enumerate() {
        let m = p as i64 - half as i64;
        buf[(p + half) % n] = a * origin_phase(m, grid).conj();
    }
    plan(n, FftDirection::Forward).process(&mut buf);
    let dw = 2.0 * PI / (n as f64 * grid.spacing());
    let scale = dw / (2.0 * PI).sqrt();
    buf.iter()
        .zip(weight_factors(grid))
        .enumerate()
        .map(|(k, (b, c))| b * Complex64::from_polar(scale / c, -PI * k as f64 / n as f64))
        .collect()
}

fn frequencies(grid: &EnergyGrid) -> Vec<f64> {
    let n = grid.len();
    let dw = 2.0 * PI / (n as f64 * grid.spacing());
    (0..n)
        .map(|p| (p as f64 - (n / 2) as f64 + 0.5) * dw)
        .collect()
}

pub fn fourier_transform(f: &SampledWaveFunction) -> Result<FrequencySpectrum> {
    check_fourier_grid(f.grid())?;
    Ok(FrequencySpectrum {
        grid: f.grid().clone(),
        freqs: frequencies(f.grid()),
        amplitudes: forward(f.grid(), f.values()),
        convention: FourierConvention::UnitaryPositiveExponent,
    })
}

/// Inverse of [`fourier_transform`], tagging the result with `role` and `class`.
pub fn inverse_fourier_transform(
    spectrum: &FrequencySpectrum,
    role: Role,
    class: HardyClass,
) -> Result<SampledWaveFunction> {
    let values = inverse(&spectrum.grid, &spectrum.amplitudes);
    SampledWaveFunction::new(spectrum.grid.clone(), values, role, class)
}

fn role_for(class: HardyClass) -> Role {
    match class {
        HardyClass::H2Plus => Role::Observable,
        _ => Role::State,
    }
}

// Positions of the spectrum that belong to `class`.
fn allowed(class: HardyClass, p: usize, n: usize) -> bool {
    match class {
        HardyClass::H2Plus => p < n / 2,
        HardyClass::H2Minus => p >= n / 2,
        HardyClass::Unknown => true,
    }
}

fn masked(f: &SampledWaveFunction, spectrum: &[Complex64], class: HardyClass) -> SampledWaveFunction {
    let n = spectrum.len();
    let kept: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(p, a)| if allowed(class, p, n) { *a } else { Complex64::new(0.0, 0.0) })
        .collect();
    let values = inverse(f.grid(), &kept);
    SampledWaveFunction::new_exempt(f.grid().clone(), values, role_for(class), class)
        .with_labels(f.labels().clone())
}

/// Orthogonal projection onto H²₊ (spectrum restricted to ω < 0).
/// The result is tagged as an observable.
pub fn project_plus(f: &SampledWaveFunction) -> Result<SampledWaveFunction> {
    check_fourier_grid(f.grid())?;
    Ok(masked(f, &forward(f.grid(), f.values()), HardyClass::H2Plus))
}

/// Orthogonal projection onto H²₋ (spectrum restricted to ω > 0).
/// The result is tagged as a state.
pub fn project_minus(f: &SampledWaveFunction) -> Result<SampledWaveFunction> {
    check_fourier_grid(f.grid())?;
    Ok(masked(f, &forward(f.grid(), f.values()), HardyClass::H2Minus))
}

/// Both projections from a single transform: `(P₊f, P₋f)`.
pub fn decompose(f: &SampledWaveFunction) -> Result<(SampledWaveFunction, SampledWaveFunction)> {
    check_fourier_grid(f.grid())?;
    let spectrum = forward(f.grid(), f.values());
    Ok((
        masked(f, &spectrum, HardyClass::H2Plus),
        masked(f, &spectrum, HardyClass::H2Minus),
    ))
}

fn leakage_of(spectrum: &[Complex64], target: HardyClass) -> Result<f64> {
    let n = spectrum.len();
    let (mut total, mut forbidden) = (0.0, 0.0);
    for (p, a) in spectrum.iter().enumerate() {
        let e = a.norm_sqr();
        total += e;
        if !allowed(target, p, n) {
            forbidden += e;
        }
    }
    if total == 0.0 {
        return Err(Error::UndefinedLeakage);
    }
    Ok(forbidden / total)
}

fn require_side(target: HardyClass) -> Result<()> {
    if target == HardyClass::Unknown {
        return Err(invalid("target class must be H2_plus or H2_minus"));
    }
    Ok(())
}

/// Fraction of spectral energy on the side forbidden for `target`.
pub fn hardy_leakage(f: &SampledWaveFunction, target: HardyClass) -> Result<f64> {
    require_side(target)?;
    check_fourier_grid(f.grid())?;
    leakage_of(&forward(f.grid(), f.values()), target)
}

/// Checked membership of `f` in a Hardy space, reused for many continuation
/// queries.
///
/// Values off the axis come from the Poisson integral of the boundary data,
/// which for an H²₊ function at `z = x + iy` reads
/// `f(z) = (1/π) ∫ f(E) y / ((E − x)² + y²) dE` (the Cauchy integral minus
/// the vanishing Cauchy integral at the mirror point z̄). Its discretization
/// error grows like spacing/|y| near the axis; within eight spacings a local
/// quadratic is subtracted and integrated exactly.
#[derive(Clone, Debug)]
pub struct Continuation<'a> {
    f: &'a SampledWaveFunction,
    side: HardyClass,
    leakage: f64,
}

impl<'a> Continuation<'a> {
    pub fn new(f: &'a SampledWaveFunction, side: HardyClass) -> Result<Self> {
        Self::with_threshold(f, side, DEFAULT_LEAKAGE_THRESHOLD)
    }

    pub fn with_threshold(f: &'a SampledWaveFunction, side: HardyClass, threshold: f64) -> Result<Self> {
        require_side(side)?;
        let leakage = hardy_leakage(f, side)?;
        if f.hardy_class() == side.conjugate() || leakage > threshold {
            return Err(Error::ClassMismatch {
                expected: side,
                leakage,
            });
        }
        Ok(Self { f, side, leakage })
    }

    pub fn side(&self) -> HardyClass {
        self.side
    }

    /// Leakage measured when the continuation was set up.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// Value at `z`, which must lie in the half-plane of analyticity and at
    /// least [`NEAR_AXIS_SPACINGS`] grid spacings off the axis.
    pub fn at(&self, z: Complex64) -> Result<Complex64> {
        let expected = if z.im > 0.0 {
            HardyClass::H2Plus
        } else {
            HardyClass::H2Minus
        };
        if expected != self.side {
            return Err(Error::ClassMismatch {
                expected,
                leakage: hardy_leakage(self.f, expected).unwrap_or(1.0),
            });
        }
        let limit = NEAR_AXIS_SPACINGS * self.f.grid().spacing();
        if z.im.abs() < limit {
            return Err(Error::TooCloseToAxis {
                distance: z.im.abs(),
                limit,
            });
        }
        Ok(self.at_unguarded(z))
    }

    /// Value at `z` without the near-axis guard or side check. For points
    /// on the wrong side it returns the continuation of the mirror image.
    pub(crate) fn at_unguarded(&self, z: Complex64) -> Complex64 {
        let grid = self.f.grid();
        let pts = grid.points();
        let w = grid.weights();
        let vals = self.f.values();
        let (x, s) = (z.re, z.im.abs());
        let h = grid.spacing();
        let kernel = |e: f64| s / (PI * ((e - x) * (e - x) + s * s));
        let n = pts.len();

        if s >= SUBTRACTION_SPACINGS * h || x < pts[0] || x > pts[n - 1] {
            return pts
                .iter()
                .zip(w)
                .zip(vals)
                .map(|((e, w), v)| v * (w * kernel(*e)))
                .sum();
        }

        let k = grid.nearest_index(x);
        let start = k.saturating_sub(2).min(n - 6);
        let nodes = &pts[start..start + 6];
        let fw = fornberg_weights(x, nodes, 2);
        let taylor: Vec<Complex64> = fw
            .iter()
            .map(|row| row.iter().zip(&vals[start..]).map(|(c, v)| v * *c).sum())
            .collect();
        let (f0, f1, f2) = (taylor[0], taylor[1], taylor[2]);

        let residual: Complex64 = pts
            .iter()
            .zip(w)
            .zip(vals)
            .map(|((e, w), v)| {
                let u = e - x;
                (v - f0 - f1 * u - f2 * (0.5 * u * u)) * (w * kernel(*e))
            })
            .sum();

        let a = pts[0] - x;
        let b = pts[n - 1] - x;
        let dat = (b / s).atan() - (a / s).atan();
        let i0 = dat / PI;
        let i1 = s / (2.0 * PI) * ((b * b + s * s) / (a * a + s * s)).ln();
        let i2 = s / PI * ((b - a) - s * dat);
        residual + f0 * i0 + f1 * i1 + f2 * (0.5 * i2)
    }
}

/// Value of the analytic continuation of `f` at `p`.
///
/// `f` must be H²₊ for points above the axis and H²₋ below, by declared class
/// and by leakage ≤ [`DEFAULT_LEAKAGE_THRESHOLD`].
pub fn extend(f: &SampledWaveFunction, p: HalfPlanePoint) -> Result<Complex64> {
    if p.z.im == 0.0 {
        return Err(Error::TooCloseToAxis {
            distance: 0.0,
            limit: NEAR_AXIS_SPACINGS * f.grid().spacing(),
        });
    }
    let side = if p.z.im > 0.0 {
        HardyClass::H2Plus
    } else {
        HardyClass::H2Minus
    };
    Continuation::new(f, side)?.at(p.z)
}

fn checked_side(f: &SampledWaveFunction) -> Result<(HardyClass, Vec<Complex64>)> {
    let side = f.hardy_class();
    if side == HardyClass::Unknown {
        return Err(Error::ClassRequired);
    }
    check_fourier_grid(f.grid())?;
    let spectrum = forward(f.grid(), f.values());
    let leakage = leakage_of(&spectrum, side)?;
    if leakage > DEFAULT_LEAKAGE_THRESHOLD {
        return Err(Error::ClassMismatch {
            expected: side,
            leakage,
        });
    }
    Ok((side, spectrum))
}

fn damping(side: HardyClass, omega: f64, alpha: f64) -> f64 {
    match side {
        HardyClass::H2Plus if omega < 0.0 => (omega * alpha).exp(),
        HardyClass::H2Minus if omega > 0.0 => (-omega * alpha).exp(),
        _ => 0.0,
    }
}

/// Samples of `f(E + iα)` for H²₊ functions, or `f(E − iα)` for H²₋, on the
/// grid of `f`. Computed by damping the masked spectrum.
pub fn extend_line(f: &SampledWaveFunction, alpha: f64) -> Result<SampledWaveFunction> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    let (side, spectrum) = checked_side(f)?;
    let freqs = frequencies(f.grid());
    let damped: Vec<Complex64> = spectrum
        .iter()
        .zip(&freqs)
        .map(|(a, w)| a * damping(side, *w, alpha))
        .collect();
    let values = inverse(f.grid(), &damped);
    Ok(f.with_values(values))
}

/// Line norms `∫ |f(x + iα)|² dx` for each α (mirrored below the axis for
/// H²₋ functions). The sequence is non-increasing and bounded by `‖f‖²`.
pub fn norm_profile(f: &SampledWaveFunction, alphas: &[f64]) -> Result<Vec<f64>> {
    if alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(invalid("alphas must be positive"));
    }
    if alphas.windows(2).any(|p| p[1] < p[0]) {
        return Err(invalid("alphas must be ascending"));
    }
    let (side, spectrum) = checked_side(f)?;
    let freqs = frequencies(f.grid());
    let dw = 2.0 * PI / (f.grid().len() as f64 * f.grid().spacing());
    Ok(alphas
        .iter()
        .map(|&alpha| {
            dw * spectrum
                .iter()
                .zip(&freqs)
                .map(|(a, w)| a.norm_sqr() * damping(side, *w, alpha).powi(2))
                .sum::<f64>()
        })
        .collect())
}
