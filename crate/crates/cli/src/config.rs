//! Run configuration: a JSON file whose keys are checked strictly, plus
//! command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use gamow_lab::{Direction, GridKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Decompose,
    Evolve,
    DecayCurve,
    FitPole,
    SmatrixDecompose,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decompose => "decompose",
            Experiment::Evolve => "evolve",
            Experiment::DecayCurve => "decay-curve",
            Experiment::FitPole => "fit-pole",
            Experiment::SmatrixDecompose => "smatrix-decompose",
        }
    }

    fn needs_full_line(self) -> bool {
        matches!(
            self,
            Experiment::Decompose | Experiment::Evolve | Experiment::SmatrixDecompose
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub kind: GridKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(rename = "E_max", default, skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    pub n: usize,
}

impl GridConfig {
    fn full_line(center: f64, half_width: f64, n: usize) -> Self {
        Self {
            kind: GridKind::FullLine,
            center: Some(center),
            half_width: Some(half_width),
            e_max: None,
            n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    #[serde(rename = "E_R")]
    pub e_r: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(rename = "R_re", default = "one")]
    pub r_re: f64,
    #[serde(rename = "R_im", default)]
    pub r_im: f64,
    #[serde(default)]
    pub j: f64,
    /// Channel momentum for the unitarity-limit peak height.
    #[serde(default = "one")]
    pub momentum: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            e_r: 2.0,
            gamma: 0.4,
            r_re: 1.0,
            r_im: 0.0,
            j: 0.0,
            momentum: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimesConfig {
    List(Vec<f64>),
    Range(TimeRange),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeRange {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
}

impl TimesConfig {
    /// Time points; a range of `steps` points includes both ends.
    pub fn values(&self) -> Vec<f64> {
        match self {
            TimesConfig::List(v) => v.clone(),
            TimesConfig::Range(r) => gamow_lab::resonance::linspace(r.t_min, r.t_max, r.steps),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Everything a run needs. Sections left out of the file take
/// per-experiment defaults (see [`RunConfig::defaults`]).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimesConfig>,
    #[serde(default)]
    pub io: IoConfig,
    #[serde(default)]
    pub seed: u64,
    /// Relative noise level of synthetic line shapes.
    #[serde(default)]
    pub noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Accept t < 0 in `evolve`.
    #[serde(default)]
    pub diagnostic: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            CliError::validation(field, e.into_inner().to_string())
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fills every section the file left out.
    pub fn resolve(mut self) -> Result<Resolved, CliError> {
        let experiment = self
            .experiment
            .ok_or_else(|| CliError::validation("experiment", "no experiment given"))?;
        let resonance = self.resonance.take().unwrap_or_default();
        let grid = self.grid.take().unwrap_or_else(|| default_grid(experiment, &resonance));
        let times = self.times.take().unwrap_or(match experiment {
            Experiment::Evolve => TimesConfig::List(vec![0.0, 0.5, 1.0, 2.0, 5.0]),
            _ => TimesConfig::Range(TimeRange {
                t_min: 0.0,
                t_max: 25.0,
                steps: 251,
            }),
        });
        let format = self.io.format.unwrap_or(match experiment {
            Experiment::FitPole | Experiment::SmatrixDecompose => Format::Json,
            _ => Format::Csv,
        });
        let output_path = self
            .io
            .output_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.{}", experiment.name(), format.extension())));
        let resolved = Resolved {
            experiment,
            grid,
            resonance,
            times: times.values(),
            input_csv: self.io.input_csv.clone(),
            output_path,
            format,
            seed: self.seed,
            noise: self.noise,
            direction: self.direction.unwrap_or(Direction::SchrodingerState),
            diagnostic: self.diagnostic,
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

fn default_grid(experiment: Experiment, r: &ResonanceConfig) -> GridConfig {
    match experiment {
        Experiment::Decompose | Experiment::Evolve => GridConfig::full_line(r.e_r, 200.0, 1 << 14),
        Experiment::DecayCurve => GridConfig::full_line(r.e_r, 2000.0, 1 << 17),
        Experiment::FitPole => GridConfig::full_line(r.e_r, 5.0 * r.gamma, 101),
        Experiment::SmatrixDecompose => GridConfig::full_line(0.0, 1000.0, 1 << 16),
    }
}

/// A configuration with every default applied and every field checked.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub resonance: ResonanceConfig,
    pub times: Vec<f64>,
    pub input_csv: Option<PathBuf>,
    pub output_path: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub noise: f64,
    pub direction: Direction,
    pub diagnostic: bool,
}

fn finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(field, format!("must be positive, got {v}")))
    }
}

impl Resolved {
    fn validate(&self) -> Result<(), CliError> {
        self.validate_grid()?;
        let r = &self.resonance;
        finite("resonance.E_R", r.e_r)?;
        positive("resonance.Gamma", r.gamma)?;
        finite("resonance.R_re", r.r_re)?;
        finite("resonance.R_im", r.r_im)?;
        gamow_lab::AngularMomentum::new(r.j).map_err(|e| CliError::validation("resonance.j", e.to_string()))?;
        positive("resonance.momentum", r.momentum)?;
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(CliError::validation("noise", format!("must be non-negative, got {}", self.noise)));
        }
        self.validate_times()
    }

    fn validate_grid(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if g.n < 8 {
            return Err(CliError::validation("grid.n", format!("needs at least 8 points, got {}", g.n)));
        }
        match g.kind {
            GridKind::FullLine => {
                if g.e_max.is_some() {
                    return Err(CliError::validation("grid.E_max", "only valid for a half-line grid"));
                }
                finite("grid.center", g.center.unwrap_or(0.0))?;
                let w = g
                    .half_width
                    .ok_or_else(|| CliError::validation("grid.half_width", "required for a full-line grid"))?;
                positive("grid.half_width", w)?;
                if self.experiment.needs_full_line() && g.n % 2 != 0 {
                    return Err(CliError::validation(
                        "grid.n",
                        format!("{} needs an even sample count, got {}", self.experiment.name(), g.n),
                    ));
                }
            }
            GridKind::HalfLine => {
                if self.experiment.needs_full_line() {
                    return Err(CliError::validation(
                        "grid.kind",
                        format!("{} needs a full-line grid", self.experiment.name()),
                    ));
                }
                for (field, v) in [("grid.center", g.center), ("grid.half_width", g.half_width)] {
                    if v.is_some() {
                        return Err(CliError::validation(field, "only valid for a full-line grid"));
                    }
                }
                let e = g
                    .e_max
                    .ok_or_else(|| CliError::validation("grid.E_max", "required for a half-line grid"))?;
                positive("grid.E_max", e)?;
            }
        }
        Ok(())
    }

    fn validate_times(&self) -> Result<(), CliError> {
        if !matches!(self.experiment, Experiment::Evolve | Experiment::DecayCurve) {
            return Ok(());
        }
        if self.times.is_empty() {
            return Err(CliError::validation("times", "no time points"));
        }
        for &t in &self.times {
            finite("times", t)?;
            if t < 0.0 && !(self.diagnostic && self.experiment == Experiment::Evolve) {
                return Err(CliError::validation(
                    "times",
                    format!("t = {t} is outside the semigroup t >= 0 (use diagnostic mode for evolve)"),
                ));
            }
        }
        if self.experiment == Experiment::DecayCurve && self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::validation("times", "must be ascending"));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<gamow_lab::EnergyGrid, CliError> {
        let g = &self.grid;
        let built = match g.kind {
            GridKind::FullLine => gamow_lab::EnergyGrid::full_line(
                g.center.unwrap_or(0.0),
                g.half_width.unwrap_or_default(),
                g.n,
            ),
            GridKind::HalfLine => gamow_lab::EnergyGrid::half_line(g.e_max.unwrap_or_default(), g.n),
        };
        built.map_err(|e| CliError::library("grid", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: CliError) -> String {
        match err {
            CliError::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        let err = RunConfig::from_json(r#"{"grid": {"kind": "full-line", "n": 64, "width": 3}}"#).unwrap_err();
        assert_eq!(field_of(err), "grid.width");
        let err = RunConfig::from_json(r#"{"sed": 3}"#).unwrap_err();
        assert_eq!(field_of(err), "sed");
    }

    #[test]
    fn negative_width_names_the_field() {
        let cfg = RunConfig::from_json(
            r#"{"experiment": "decay-curve", "resonance": {"E_R": 2.0, "Gamma": -1}}"#,
        )
        .unwrap();
        assert_eq!(field_of(cfg.resolve().unwrap_err()), "resonance.Gamma");
    }

    #[test]
    fn times_accept_lists_and_ranges() {
        let a = RunConfig::from_json(r#"{"times": [0, 1.5]}"#).unwrap();
        assert_eq!(a.times.unwrap().values(), vec![0.0, 1.5]);
        let b = RunConfig::from_json(r#"{"times": {"t_min": 0, "t_max": 1, "steps": 3}}"#).unwrap();
        assert_eq!(b.times.unwrap().values(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn negative_times_need_diagnostic_mode() {
        let mut cfg = RunConfig {
            experiment: Some(Experiment::Evolve),
            times: Some(TimesConfig::List(vec![-1.0])),
            ..RunConfig::default()
        };
        assert_eq!(field_of(cfg.clone().resolve().unwrap_err()), "times");
        cfg.diagnostic = true;
        assert!(cfg.resolve().is_ok());
    }

    #[test]
    fn hardy_experiments_refuse_half_line_grids() {
        let cfg = RunConfig::from_json(
            r#"{"experiment": "decompose", "grid": {"kind": "half-line", "E_max": 10, "n": 64}}"#,
        )
        .unwrap();
        assert_eq!(field_of(cfg.resolve().unwrap_err()), "grid.kind");
    }

    #[test]
    fn defaults_resolve_for_every_experiment() {
        for e in [
            Experiment::Decompose,
            Experiment::Evolve,
            Experiment::DecayCurve,
            Experiment::FitPole,
            Experiment::SmatrixDecompose,
        ] {
            let r = RunConfig {
                experiment: Some(e),
                ..RunConfig::default()
            }
            .resolve()
            .unwrap();
            assert!(r.build_grid().is_ok());
        }
    }
}
