//! Breit–Wigner amplitudes, cross sections and line-shape fits.
//!
//! The pole sits at `z_R = E_R − iΓ/2`, so the amplitude is
//! `a(E) = R / (E − E_R + iΓ/2)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Non-negative half-integer angular momentum, stored as `2j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularMomentum {
    twice_j: u32,
}

impl AngularMomentum {
    pub const ZERO: Self = Self { twice_j: 0 };

    pub fn from_twice(twice_j: u32) -> Self {
        Self { twice_j }
    }

    /// Accepts `j` = 0, ½, 1, … and rejects anything else.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !(j >= 0.0) || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(invalid(format!("j must be a non-negative half-integer, got {j}")));
        }
        Ok(Self {
            twice_j: twice as u32,
        })
    }

    pub fn value(self) -> f64 {
        0.5 * self.twice_j as f64
    }

    pub fn twice(self) -> u32 {
        self.twice_j
    }

    /// Degeneracy factor 2j + 1.
    pub fn multiplicity(self) -> f64 {
        self.twice_j as f64 + 1.0
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_j % 2 == 0 {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

impl Serialize for AngularMomentum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for AngularMomentum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = f64::deserialize(d)?;
        AngularMomentum::new(j).map_err(serde::de::Error::custom)
    }
}

/// Resonance energy, width, residue and spin of a Breit–Wigner resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BreitWignerWire", into = "BreitWignerWire")]
pub struct BreitWignerParams {
    e_r: f64,
    gamma: f64,
    residue: Complex64,
    j: AngularMomentum,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BreitWignerWire {
    #[serde(rename = "E_R")]
    e_r: f64,
    #[serde(rename = "Gamma")]
    gamma: f64,
    #[serde(rename = "R")]
    residue: Complex64,
    j: AngularMomentum,
}

impl TryFrom<BreitWignerWire> for BreitWignerParams {
    type Error = Error;
    fn try_from(w: BreitWignerWire) -> Result<Self> {
        BreitWignerParams::new(w.e_r, w.gamma, w.residue, w.j)
    }
}

impl From<BreitWignerParams> for BreitWignerWire {
    fn from(p: BreitWignerParams) -> Self {
        Self {
            e_r: p.e_r,
            gamma: p.gamma,
            residue: p.residue,
            j: p.j,
        }
    }
}

impl BreitWignerParams {
    pub fn new(e_r: f64, gamma: f64, residue: Complex64, j: AngularMomentum) -> Result<Self> {
        if !(e_r > 0.0) || !e_r.is_finite() {
            return Err(invalid(format!("E_R must be positive, got {e_r}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("Gamma must be positive, got {gamma}")));
        }
        if !residue.re.is_finite() || !residue.im.is_finite() {
            return Err(invalid("residue must be finite"));
        }
        Ok(Self {
            e_r,
            gamma,
            residue,
            j,
        })
    }

    /// Unit residue, j = 0.
    pub fn simple(e_r: f64, gamma: f64) -> Result<Self> {
        Self::new(e_r, gamma, Complex64::new(1.0, 0.0), AngularMomentum::ZERO)
    }

    pub fn e_r(&self) -> f64 {
        self.e_r
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn residue(&self) -> Complex64 {
        self.residue
    }

    pub fn j(&self) -> AngularMomentum {
        self.j
    }

    /// `z_R = E_R − iΓ/2`.
    pub fn pole(&self) -> Complex64 {
        Complex64::new(self.e_r, -0.5 * self.gamma)
    }

    /// Lifetime τ = 1/Γ (ħ = 1).
    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// `a(E) = R / (E − z_R)`.
pub fn bw_amplitude(p: &BreitWignerParams, e: f64) -> Complex64 {
    p.residue / (Complex64::new(e, 0.0) - p.pole())
}

/// Lorentzian line-shape factor `(Γ/2)² / ((E − E_R)² + (Γ/2)²)`, 1 at the peak.
pub fn lorentzian_factor(e_r: f64, gamma: f64, e: f64) -> f64 {
    let g = 0.5 * gamma;
    let d = e - e_r;
    g * g / (d * d + g * g)
}

/// Peak cross section `(4π/p²)(2j + 1)`.
pub fn peak_cross_section(momentum: f64, j: AngularMomentum) -> Result<f64> {
    if !(momentum > 0.0) || !momentum.is_finite() {
        return Err(invalid(format!("momentum must be positive, got {momentum}")));
    }
    Ok(4.0 * PI / (momentum * momentum) * j.multiplicity())
}

/// `σ(E) = (4π/p²)(2j + 1)(Γ/2)² / ((E − E_R)² + (Γ/2)²)`.
pub fn bw_cross_section(p: &BreitWignerParams, momentum: f64, e: f64) -> Result<f64> {
    Ok(peak_cross_section(momentum, p.j)? * lorentzian_factor(p.e_r, p.gamma, e))
}

/// Controls for the Levenberg–Marquardt line-shape fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative step size below which the fit is converged.
    pub step_tolerance: f64,
    /// Gradient norm, relative to its starting value, below which the fit is
    /// converged.
    pub gradient_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-12,
            gradient_tolerance: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

/// Outcome of a line-shape fit. Parameter order in `covariance` is
/// (amplitude, E_R, Γ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(rename = "E_R")]
    pub e_r: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    /// Fitted peak height.
    pub amplitude: f64,
    /// Fitted peak height over the (4π/p²)(2j + 1) prediction.
    pub amplitude_ratio: f64,
    /// Euclidean norm of the residual vector.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub covariance: [[f64; 3]; 3],
    pub gradient_norm: f64,
    pub initial_gradient_norm: f64,
}

impl FitReport {
    /// One-sigma uncertainties from the covariance diagonal (amplitude, E_R, Γ).
    pub fn standard_errors(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.covariance[i][i].max(0.0).sqrt())
    }
}

struct Problem<'a> {
    samples: &'a [(f64, f64)],
}

impl Problem<'_> {
    // Residuals model − data and Jacobian rows for θ = (A, E_R, Γ).
    fn evaluate(&self, theta: &Vector3<f64>) -> (f64, Matrix3<f64>, Vector3<f64>) {
        let (a, e_r, gamma) = (theta[0], theta[1], theta[2]);
        let g = 0.5 * gamma;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        let mut cost = 0.0;
        for &(e, sigma) in self.samples {
            let d = e - e_r;
            let den = d * d + g * g;
            let l = g * g / den;
            let r = a * l - sigma;
            let row = Vector3::new(l, a * g * g * 2.0 * d / (den * den), a * g * d * d / (den * den));
            cost += r * r;
            jtj += row * row.transpose();
            jtr += row * r;
        }
        (cost, jtj, jtr)
    }

    // cost(trial) − cost(theta). Each model difference is formed from the
    // parameter deltas rather than by subtracting two model values, so
    // decreases far below the rounding of the model itself are resolved.
    fn cost_change(&self, theta: &Vector3<f64>, trial: &Vector3<f64>) -> f64 {
        let delta = trial - theta;
        let (a0, e0, g0) = (theta[0], theta[1], 0.5 * theta[2]);
        let (e1, g1) = (trial[1], 0.5 * trial[2]);
        let (de, dg) = (delta[1], 0.5 * delta[2]);
        self.samples
            .iter()
            .map(|&(e, sigma)| {
                let (d0, d1) = (e - e0, e - e1);
                let (den0, den1) = (d0 * d0 + g0 * g0, d1 * d1 + g1 * g1);
                let (l0, l1) = (g0 * g0 / den0, g1 * g1 / den1);
                let dl = (dg * d0 + g0 * de) * (g1 * d0 + g0 * d1) / (den0 * den1);
                let dm = delta[0] * l1 + a0 * dl;
                dm * ((trial[0] * l1 - sigma) + (a0 * l0 - sigma))
            })
            .sum()
    }

    // Least-squares peak height for fixed (E_R, Γ).
    fn best_amplitude(&self, e_r: f64, gamma: f64) -> f64 {
        let (num, den) = self.samples.iter().fold((0.0, 0.0), |(n, d), &(e, s)| {
            let l = lorentzian_factor(e_r, gamma, e);
            (n + s * l, d + l * l)
        });
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

/// Starting point: highest sample (lowest energy on ties) and the width
/// between linearly interpolated half-maximum crossings.
pub fn initial_guess(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    validate_samples(samples)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (peak_idx, &(e_peak, s_peak)) = sorted
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &(f64, f64))>, (i, s)| match best {
            Some((_, b)) if b.1 >= s.1 => best,
            _ => Some((i, s)),
        })
        .expect("samples are non-empty");
    let half = 0.5 * s_peak;
    let crossing = |a: (f64, f64), b: (f64, f64)| a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1);
    let left = (1..=peak_idx)
        .rev()
        .find(|&i| sorted[i - 1].1 <= half)
        .map(|i| crossing(sorted[i - 1], sorted[i]));
    let right = (peak_idx..sorted.len() - 1)
        .find(|&i| sorted[i + 1].1 <= half)
        .map(|i| crossing(sorted[i], sorted[i + 1]));
    let span = sorted[sorted.len() - 1].0 - sorted[0].0;
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (e_peak - l),
        (None, Some(r)) => 2.0 * (r - e_peak),
        (None, None) => 0.5 * span,
    };
    let width = if width > 0.0 { width } else { 0.5 * span };
    Ok((e_peak, width))
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 5 {
        return Err(invalid(format!(
            "need at least 5 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|(e, s)| !e.is_finite() || !s.is_finite() || *s < 0.0)
    {
        return Err(invalid("samples must be finite with sigma >= 0"));
    }
    let first = samples[0].0;
    if samples.iter().all(|(e, _)| *e == first) {
        return Err(invalid("all samples share one energy"));
    }
    if samples.iter().all(|(_, s)| *s == 0.0) {
        return Err(invalid("all cross sections are zero"));
    }
    Ok(())
}

/// Fits `σ(E) = A(Γ/2)²/((E − E_R)² + (Γ/2)²)` with default options.
pub fn fit_pole(
    samples: &[(f64, f64)],
    momentum: f64,
    j: AngularMomentum,
    init: Option<&BreitWignerParams>,
) -> Result<(BreitWignerParams, FitReport)> {
    fit_pole_with(samples, momentum, j, init, &FitOptions::default())
}

/// Levenberg–Marquardt fit of the Breit–Wigner line shape.
///
/// The peak height A is a free parameter, so rescaling every σ by c > 0
/// rescales A and leaves (E_R, Γ) unchanged. The returned parameters keep
/// the residue of `init`, or 1 when no initial guess is given.
pub fn fit_pole_with(
    samples: &[(f64, f64)],
    momentum: f64,
    j: AngularMomentum,
    init: Option<&BreitWignerParams>,
    options: &FitOptions,
) -> Result<(BreitWignerParams, FitReport)> {
    let peak = peak_cross_section(momentum, j)?;
    validate_samples(samples)?;
    let (e0, g0) = match init {
        Some(p) => (p.e_r(), p.gamma()),
        None => initial_guess(samples)?,
    };
    let residue = init.map_or(Complex64::new(1.0, 0.0), |p| p.residue());
    let problem = Problem { samples };
    let mut theta = Vector3::new(problem.best_amplitude(e0, g0), e0, g0);

    let (mut cost, mut jtj, mut jtr) = problem.evaluate(&theta);
    let initial_gradient = jtr.norm();
    let mut lambda = options.initial_damping;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += lambda * jtj[(i, i)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = theta + step;
            if !(trial[2] > 0.0 && trial.iter().all(|v| v.is_finite())) {
                lambda *= 10.0;
                continue;
            }
            if problem.cost_change(&theta, &trial) < 0.0 {
                // A short step under heavy damping says nothing about convergence.
                let small_step = lambda <= 1.0
                    && (0..3).all(|i| step[i].abs() <= options.step_tolerance * theta[i].abs());
                theta = trial;
                (cost, jtj, jtr) = problem.evaluate(&theta);
                lambda = (lambda / 10.0).max(1e-15);
                let flat = jtr.norm() <= options.gradient_tolerance * initial_gradient;
                converged = small_step || flat || cost == 0.0;
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: the gradient vanishes to
            // working precision.
            converged = true;
        }
    }

    let m = samples.len() as f64;
    let s2 = if m > 3.0 { cost / (m - 3.0) } else { 0.0 };
    let covariance = jtj
        .try_inverse()
        .map(|inv| {
            let mut c = [[0.0; 3]; 3];
            for (i, row) in c.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = s2 * inv[(i, k)];
                }
            }
            c
        })
        .unwrap_or([[f64::NAN; 3]; 3]);

    let report = FitReport {
        e_r: theta[1],
        gamma: theta[2],
        amplitude: theta[0],
        amplitude_ratio: theta[0] / peak,
        residual: cost.sqrt(),
        iterations,
        converged,
        covariance,
        gradient_norm: jtr.norm(),
        initial_gradient_norm: initial_gradient,
    };
    if !converged {
        return Err(Error::FitFailed {
            report: Box::new(report),
        });
    }
    let params = BreitWignerParams::new(theta[1], theta[2], residue, j).map_err(|_| {
        Error::FitFailed {
            report: Box::new(report.clone()),
        }
    })?;
    Ok((params, report))
}

/// Cross-section samples at `energies` with multiplicative Gaussian noise of
/// relative size `noise`, drawn from a ChaCha8 stream seeded with `seed`.
pub fn synthetic_line_shape(
    p: &BreitWignerParams,
    momentum: f64,
    energies: &[f64],
    noise: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(invalid(format!("noise must be non-negative, got {noise}")));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    energies
        .iter()
        .map(|&e| {
            let sigma = bw_cross_section(p, momentum, e)?;
            let factor = if noise > 0.0 {
                1.0 + noise * normal.sample(&mut rng)
            } else {
                1.0
            };
            Ok((e, sigma * factor))
        })
        .collect()
}

/// `n` energies evenly spaced on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Serialize, Deserialize)]
struct LineRow {
    #[serde(rename = "E")]
    e: f64,
    sigma: f64,
}

/// Reads `E,sigma` CSV rows.
pub fn read_line_shape_csv(reader: impl Read) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "E" || &headers[1] != "sigma" {
        return Err(Error::Parse(format!(
            "expected header \"E,sigma\", found {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize::<LineRow>()
        .map(|row| row.map(|r| (r.e, r.sigma)).map_err(Error::from))
        .collect()
}

/// Writes `E,sigma` CSV with 17 significant digits.
pub fn write_line_shape_csv(writer: impl Write, samples: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["E", "sigma"])?;
    for (e, s) in samples {
        w.write_record([format!("{e:.16e}"), format!("{s:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BreitWignerParams {
        BreitWignerParams::simple(2.0, 0.4).unwrap()
    }

    #[test]
    fn amplitude_at_peak() {
        let a = bw_amplitude(&params(), 2.0);
        assert!((a - Complex64::new(0.0, -5.0)).norm() < 1e-15);
    }

    #[test]
    fn amplitude_half_width() {
        let p = params();
        let peak = bw_amplitude(&p, 2.0).norm_sqr();
        for e in [1.8, 2.2] {
            assert!((bw_amplitude(&p, e).norm_sqr() - 0.5 * peak).abs() < 1e-12 * peak);
        }
    }

    #[test]
    fn amplitude_tail_is_one_over_e() {
        let p = params();
        // a − R/E = R z_R / (E (E − z_R)), so the relative gap is |z_R|/E.
        let e = 2000.0;
        let a = bw_amplitude(&p, e);
        let gap = (a - p.residue() / e).norm() / a.norm();
        assert!((gap - p.pole().norm() / e).abs() < 1e-12);
        assert!(gap < 1.01e-3);
        let a = bw_amplitude(&p, 4000.0);
        assert!((a - p.residue() / 4000.0).norm() / a.norm() < 1e-3);
    }

    #[test]
    fn cross_section_peak_and_spin() {
        let p = params();
        assert!((bw_cross_section(&p, 1.0, 2.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((bw_cross_section(&p, 1.0, 2.2).unwrap() - 2.0 * PI).abs() < 1e-12);
        let p1 = BreitWignerParams::new(2.0, 0.4, Complex64::new(1.0, 0.0), AngularMomentum::new(1.0).unwrap())
            .unwrap();
        assert!((bw_cross_section(&p1, 1.0, 2.0).unwrap() - 12.0 * PI).abs() < 1e-12);
        assert!(bw_cross_section(&p, 0.0, 2.0).is_err());
    }

    #[test]
    fn params_validate() {
        assert!(BreitWignerParams::simple(2.0, -0.1).is_err());
        assert!(BreitWignerParams::simple(0.0, 0.1).is_err());
        assert!(AngularMomentum::new(0.3).is_err());
        assert_eq!(AngularMomentum::new(1.5).unwrap().twice(), 3);
        assert_eq!(params().pole(), Complex64::new(2.0, -0.2));
    }

    #[test]
    fn fit_rejects_degenerate_samples() {
        let same = vec![(2.0, 1.0); 10];
        assert!(matches!(
            fit_pole(&same, 1.0, AngularMomentum::ZERO, None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn initial_guess_prefers_lowest_energy_on_ties() {
        let s = vec![(0.0, 0.0), (1.0, 2.0), (2.0, 5.0), (3.0, 5.0), (4.0, 2.0), (5.0, 0.0)];
        let (e, w) = initial_guess(&s).unwrap();
        assert_eq!(e, 2.0);
        assert!(w > 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let samples = synthetic_line_shape(&params(), 1.0, &linspace(1.0, 3.0, 11), 0.0, 0).unwrap();
        let mut buf = Vec::new();
        write_line_shape_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("E,sigma\n"));
        let back = read_line_shape_csv(buf.as_slice()).unwrap();
        assert_eq!(back, samples);
        assert!(read_line_shape_csv("x,y\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn report_json_keys() {
        let samples = synthetic_line_shape(&params(), 1.0, &linspace(1.0, 3.0, 101), 0.0, 0).unwrap();
        let (_, report) = fit_pole(&samples, 1.0, AngularMomentum::ZERO, None).unwrap();
        let v = serde_json::to_value(&report).unwrap();
        for key in ["E_R", "Gamma", "residual", "iterations", "converged"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!((report.amplitude_ratio - 1.0).abs() < 1e-9);
    }
}
