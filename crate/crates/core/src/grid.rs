//! Energy grids, sampled wave functions and quadrature inner products.
//!
//! Everything in the library lives on a uniform energy grid with trapezoidal
//! weights. A full-line grid truncates −∞ < E < ∞ to a symmetric window
//! around a center; a half-line grid truncates the physical spectrum
//! 0 ≤ E < ∞ at `E_max`. Units use ħ = 1, so energies and inverse times share
//! a unit.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gregory_corrections, interpolant_integral_weights};

/// Smallest sample count accepted by the grid constructors.
pub const MIN_GRID_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    FullLine,
    HalfLine,
}

struct GridData {
    kind: GridKind,
    points: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    half_line: OnceLock<Vec<f64>>,
}

/// A uniform energy grid with trapezoidal quadrature weights.
///
/// Cloning is cheap; clones share the sample storage. Two grids compare equal
/// only when they were built from identical parameters (same kind, same
/// endpoints bit for bit, same sample count).
#[derive(Clone)]
pub struct EnergyGrid(Arc<GridData>);

impl EnergyGrid {
    /// Uniform full-line grid on `[center − half_width, center + half_width]`.
    pub fn full_line(center: f64, half_width: f64, n: usize) -> Result<Self> {
        if !center.is_finite() {
            return Err(invalid("grid center must be finite"));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid(format!("half_width must be positive, got {half_width}")));
        }
        check_count(n)?;
        let h = 2.0 * half_width / (n - 1) as f64;
        let mid = 0.5 * (n - 1) as f64;
        // Offsets are computed from the middle so the grid is exactly symmetric.
        let points = (0..n).map(|k| center + (k as f64 - mid) * h).collect();
        Ok(Self::from_parts(GridKind::FullLine, points, h))
    }

    /// Uniform half-line grid on `[0, e_max]`.
    pub fn half_line(e_max: f64, n: usize) -> Result<Self> {
        if !(e_max > 0.0) || !e_max.is_finite() {
            return Err(invalid(format!("E_max must be positive, got {e_max}")));
        }
        check_count(n)?;
        let h = e_max / (n - 1) as f64;
        let points = (0..n).map(|k| k as f64 * h).collect();
        Ok(Self::from_parts(GridKind::HalfLine, points, h))
    }

    fn from_parts(kind: GridKind, points: Vec<f64>, spacing: f64) -> Self {
        let n = points.len();
        let mut weights = vec![spacing; n];
        weights[0] = 0.5 * spacing;
        weights[n - 1] = 0.5 * spacing;
        EnergyGrid(Arc::new(GridData {
            kind,
            points,
            weights,
            spacing,
            half_line: OnceLock::new(),
        }))
    }

    pub fn kind(&self) -> GridKind {
        self.0.kind
    }

    pub fn points(&self) -> &[f64] {
        &self.0.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.0.weights
    }

    pub fn len(&self) -> usize {
        self.0.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.0.spacing
    }

    pub fn lower(&self) -> f64 {
        self.0.points[0]
    }

    pub fn upper(&self) -> f64 {
        *self.0.points.last().expect("grids are never empty")
    }

    /// Midpoint of the window.
    pub fn center(&self) -> f64 {
        0.5 * (self.lower() + self.upper())
    }

    pub fn is_full_line(&self) -> bool {
        self.0.kind == GridKind::FullLine
    }

    /// Probability mass of the unit Lorentzian `(Γ/2π)/|E − z|²` that falls
    /// outside the grid window, where `z = E_R − iΓ/2`.
    ///
    /// This is the truncation bound for Lorentzian-type integrands: the
    /// trapezoid sum of the Lorentzian over the window converges to
    /// `1 − tail` as the spacing shrinks.
    pub fn lorentzian_tail_mass(&self, pole: Complex64) -> f64 {
        let half_width = -pole.im;
        let hi = ((self.upper() - pole.re) / half_width).atan();
        let lo = ((self.lower() - pole.re) / half_width).atan();
        (1.0 - (hi - lo) / PI).max(0.0)
    }

    /// Quadrature weights for ∫ over E ≥ 0 using the samples of this grid.
    ///
    /// The trapezoid rule is end-corrected to sixth order at both ends of the
    /// E ≥ 0 portion; when E = 0 falls between two samples the partial cell
    /// is integrated through a local interpolant, which may place small
    /// weights on samples with E < 0.
    pub fn half_line_weights(&self) -> &[f64] {
        self.0
            .half_line
            .get_or_init(|| half_line_weights(&self.0.points, self.0.spacing))
    }

    /// Index of the sample closest to `e`.
    pub fn nearest_index(&self, e: f64) -> usize {
        let k = ((e - self.lower()) / self.spacing()).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < MIN_GRID_POINTS {
        return Err(invalid(format!(
            "grid needs at least {MIN_GRID_POINTS} points, got {n}"
        )));
    }
    Ok(())
}

fn half_line_weights(points: &[f64], h: f64) -> Vec<f64> {
    let n = points.len();
    let mut w = vec![0.0; n];
    let a = points[0].max(0.0);
    let Some(k0) = points.iter().position(|&e| e >= a) else {
        return w;
    };
    let m = n - k0;
    if m >= 14 {
        for wk in &mut w[k0..] {
            *wk = h;
        }
        w[k0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        for (j, c) in gregory_corrections().iter().enumerate() {
            w[k0 + j] += h * c;
            w[n - 1 - j] += h * c;
        }
    } else if m >= 2 {
        for wk in &mut w[k0..] {
            *wk = h;
        }
        w[k0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    if points[k0] > a && n >= 6 {
        let start = k0.saturating_sub(3).min(n - 6);
        let local = interpolant_integral_weights(&points[start..start + 6], a, points[k0]);
        for (wk, l) in w[start..start + 6].iter_mut().zip(local) {
            *wk += l;
        }
    }
    w
}

impl PartialEq for EnergyGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.kind() == other.kind()
                && self.len() == other.len()
                && self.lower().to_bits() == other.lower().to_bits()
                && self.upper().to_bits() == other.upper().to_bits())
    }
}

impl fmt::Debug for EnergyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnergyGrid")
            .field("kind", &self.kind())
            .field("lower", &self.lower())
            .field("upper", &self.upper())
            .field("n", &self.len())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridWire {
    kind: GridKind,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Serialize for EnergyGrid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridWire {
            kind: self.kind(),
            points: self.points().to_vec(),
            weights: self.weights().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnergyGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = GridWire::deserialize(d)?;
        EnergyGrid::try_from_wire(wire).map_err(serde::de::Error::custom)
    }
}

impl EnergyGrid {
    fn try_from_wire(wire: GridWire) -> Result<Self> {
        let GridWire {
            kind,
            points,
            weights,
        } = wire;
        let n = points.len();
        check_count(n)?;
        if weights.len() != n {
            return Err(invalid("points and weights differ in length"));
        }
        if points.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(invalid("grid points must be strictly increasing"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("grid weights must be strictly positive"));
        }
        if kind == GridKind::HalfLine && points[0] < 0.0 {
            return Err(invalid("half-line grids start at E >= 0"));
        }
        let h = (points[n - 1] - points[0]) / (n - 1) as f64;
        let tol = 1e-9 * h.max(points[n - 1].abs().max(points[0].abs()) * 1e-6);
        for (k, p) in points.iter().enumerate() {
            if (p - (points[0] + k as f64 * h)).abs() > tol.max(1e-12 * h) {
                return Err(invalid("only uniform grids are supported"));
            }
        }
        let grid = Self::from_parts(kind, points, h);
        for (w, expected) in weights.iter().zip(grid.weights()) {
            if (w - expected).abs() > 1e-9 * h {
                return Err(invalid("weights are not the trapezoid weights of the grid"));
            }
        }
        Ok(grid)
    }
}

/// Whether a sampled function plays the part of a prepared state or of a
/// registered observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    State,
    Observable,
}

/// Claimed Hardy-space membership of a sampled function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HardyClass {
    /// Boundary values of a function analytic in the lower half-plane.
    #[serde(rename = "H2_minus")]
    H2Minus,
    /// Boundary values of a function analytic in the upper half-plane.
    #[serde(rename = "H2_plus")]
    H2Plus,
    #[serde(rename = "unknown")]
    Unknown,
}

impl HardyClass {
    /// The other Hardy space (complex conjugation swaps the two).
    pub fn conjugate(self) -> Self {
        match self {
            HardyClass::H2Minus => HardyClass::H2Plus,
            HardyClass::H2Plus => HardyClass::H2Minus,
            HardyClass::Unknown => HardyClass::Unknown,
        }
    }
}

impl fmt::Display for HardyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HardyClass::H2Minus => "H2_minus",
            HardyClass::H2Plus => "H2_plus",
            HardyClass::Unknown => "unknown",
        })
    }
}

fn role_allows(role: Role, class: HardyClass) -> bool {
    matches!(
        (role, class),
        (_, HardyClass::Unknown)
            | (Role::State, HardyClass::H2Minus)
            | (Role::Observable, HardyClass::H2Plus)
    )
}

/// Channel quantum numbers carried along as metadata. Computations are
/// single-channel and never read these.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumLabels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
}

/// Complex energy wave function sampled on an [`EnergyGrid`].
#[derive(Clone, Debug)]
pub struct SampledWaveFunction {
    grid: EnergyGrid,
    values: Vec<Complex64>,
    role: Role,
    hardy_class: HardyClass,
    labels: QuantumLabels,
}

impl SampledWaveFunction {
    pub fn new(
        grid: EnergyGrid,
        values: Vec<Complex64>,
        role: Role,
        hardy_class: HardyClass,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("wave function values must be finite"));
        }
        if !role_allows(role, hardy_class) {
            return Err(Error::RoleMismatch(format!(
                "a {role:?} cannot be declared {hardy_class}"
            )));
        }
        Ok(Self {
            grid,
            values,
            role,
            hardy_class,
            labels: QuantumLabels::default(),
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(
        grid: &EnergyGrid,
        role: Role,
        hardy_class: HardyClass,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let values = grid.points().iter().map(|&e| f(e)).collect();
        Self::new(grid.clone(), values, role, hardy_class)
    }

    /// Gamow functions are tagged as states but are upper-half-plane analytic;
    /// they bypass the role/class pairing check.
    pub(crate) fn new_exempt(
        grid: EnergyGrid,
        values: Vec<Complex64>,
        role: Role,
        hardy_class: HardyClass,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            role,
            hardy_class,
            labels: QuantumLabels::default(),
        }
    }

    /// Same samples with new values; role, class and labels are kept as is.
    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.len());
        Self {
            grid: self.grid.clone(),
            values,
            role: self.role,
            hardy_class: self.hardy_class,
            labels: self.labels.clone(),
        }
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn hardy_class(&self) -> HardyClass {
        self.hardy_class
    }

    pub fn labels(&self) -> &QuantumLabels {
        &self.labels
    }

    pub fn with_labels(mut self, labels: QuantumLabels) -> Self {
        self.labels = labels;
        self
    }

    /// Re-tags the function, checking the role/class pairing.
    pub fn with_role(mut self, role: Role) -> Result<Self> {
        if !role_allows(role, self.hardy_class) {
            return Err(Error::RoleMismatch(format!(
                "a {role:?} cannot be declared {}",
                self.hardy_class
            )));
        }
        self.role = role;
        Ok(self)
    }

    pub fn with_class(mut self, hardy_class: HardyClass) -> Result<Self> {
        if !role_allows(self.role, hardy_class) {
            return Err(Error::RoleMismatch(format!(
                "a {:?} cannot be declared {hardy_class}",
                self.role
            )));
        }
        self.hardy_class = hardy_class;
        Ok(self)
    }

    /// Pointwise complex conjugate. The Hardy class flips and the role follows
    /// it when the class is known.
    pub fn conj(&self) -> Self {
        let class = self.hardy_class.conjugate();
        let role = match class {
            HardyClass::H2Plus => Role::Observable,
            HardyClass::H2Minus => Role::State,
            HardyClass::Unknown => self.role,
        };
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
            role,
            hardy_class: class,
            labels: self.labels.clone(),
        }
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    /// `self + other` on the same grid, keeping the tags of `self`.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        same_grid(self, other)?;
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Rescaled copy with unit l2 norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = l2_norm(self);
        if norm == 0.0 {
            return Err(invalid("cannot normalize the zero function"));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }
}

fn same_grid(f: &SampledWaveFunction, g: &SampledWaveFunction) -> Result<()> {
    if f.grid != g.grid {
        return Err(Error::IncompatibleGrids);
    }
    Ok(())
}

/// Discretized (f, g) = ∫ f*(E) g(E) dE, conjugate-linear in `f`.
pub fn inner_product(f: &SampledWaveFunction, g: &SampledWaveFunction) -> Result<Complex64> {
    same_grid(f, g)?;
    Ok(weighted_overlap(f.grid.weights(), &f.values, &g.values))
}

/// ∫₀^∞ f*(E) g(E) dE using [`EnergyGrid::half_line_weights`].
pub fn half_line_inner_product(
    f: &SampledWaveFunction,
    g: &SampledWaveFunction,
) -> Result<Complex64> {
    same_grid(f, g)?;
    Ok(weighted_overlap(
        f.grid.half_line_weights(),
        &f.values,
        &g.values,
    ))
}

pub(crate) fn weighted_overlap(w: &[f64], f: &[Complex64], g: &[Complex64]) -> Complex64 {
    w.iter()
        .zip(f.iter().zip(g))
        .map(|(w, (a, b))| *w * a.conj() * b)
        .sum()
}

pub fn l2_norm(f: &SampledWaveFunction) -> f64 {
    f.grid
        .weights()
        .iter()
        .zip(&f.values)
        .map(|(w, v)| w * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveWire {
    grid: EnergyGrid,
    re: Vec<f64>,
    im: Vec<f64>,
    role: Role,
    hardy_class: HardyClass,
    #[serde(default)]
    labels: QuantumLabels,
}

impl Serialize for SampledWaveFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WaveWire {
            grid: self.grid.clone(),
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
            role: self.role,
            hardy_class: self.hardy_class,
            labels: self.labels.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledWaveFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WaveWire::deserialize(d)?;
        if w.re.len() != w.im.len() {
            return Err(serde::de::Error::custom("re and im differ in length"));
        }
        let values = w
            .re
            .iter()
            .zip(&w.im)
            .map(|(r, i)| Complex64::new(*r, *i))
            .collect();
        SampledWaveFunction::new(w.grid, values, w.role, w.hardy_class)
            .map(|f| f.with_labels(w.labels))
            .map_err(serde::de::Error::custom)
    }
}
