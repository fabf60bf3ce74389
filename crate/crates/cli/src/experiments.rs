//! The five experiments. Each one only calls library operations and
//! serializes their results.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use gamow_lab::hardy::{decompose, hardy_leakage};
use gamow_lab::resonance::{
    fit_pole, lorentzian_factor, read_line_shape_csv, synthetic_line_shape, BreitWignerParams,
};
use gamow_lab::{
    decay_curve, evolve, l2_norm, make_gamow, pole_background_decomposition, single_pole_smatrix,
    truncated_gamow, AngularMomentum, Complex64, Direction, EnergyGrid, EvolutionRequest, GridKind,
    HardyClass, Role, SampledWaveFunction,
};
use log::{debug, info};
use serde_json::json;

use crate::config::{Experiment, Format, Resolved};
use crate::error::CliError;

/// Serialized output and the one-line summary of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub summary: String,
    pub bytes: Vec<u8>,
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::library("output", gamow_lab::Error::from(e));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::validation("output", e.to_string()))
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("JSON values serialize");
    bytes.push(b'\n');
    bytes
}

pub fn run(cfg: &Resolved) -> Result<Artifact, CliError> {
    info!("running {} on a {} grid", cfg.experiment.name(), cfg.grid.n);
    match cfg.experiment {
        Experiment::Decompose => run_decompose(cfg),
        Experiment::Evolve => run_evolve(cfg),
        Experiment::DecayCurve => run_decay_curve(cfg),
        Experiment::FitPole => run_fit_pole(cfg),
        Experiment::SmatrixDecompose => run_smatrix(cfg),
    }
}

fn pole(cfg: &Resolved) -> Complex64 {
    Complex64::new(cfg.resonance.e_r, -0.5 * cfg.resonance.gamma)
}

fn residue(cfg: &Resolved) -> Complex64 {
    Complex64::new(cfg.resonance.r_re, cfg.resonance.r_im)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `columns` (after the leading `E`) from a CSV whose energies must
/// coincide with the configured grid.
fn read_columns(path: &Path, grid: &EnergyGrid, columns: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |msg: String| CliError::validation("io.input_csv", msg);
    let mut reader = csv::Reader::from_reader(open(path)?);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let expected: Vec<&str> = std::iter::once("E").chain(columns.iter().copied()).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(bad(format!("expected header {}", expected.join(","))));
    }
    let mut out = vec![Vec::with_capacity(grid.len()); columns.len()];
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {e}", k + 1)))
        };
        let e = parse(0)?;
        let Some(&expected_e) = grid.points().get(k) else {
            return Err(bad(format!("more rows than the {} grid points", grid.len())));
        };
        if (e - expected_e).abs() > 1e-9 * (1.0 + expected_e.abs()) {
            return Err(bad(format!("row {}: E = {e} does not match grid point {expected_e}", k + 1)));
        }
        for (i, col) in out.iter_mut().enumerate() {
            col.push(parse(i + 1)?);
        }
    }
    if out[0].len() != grid.len() {
        return Err(bad(format!("{} rows for {} grid points", out[0].len(), grid.len())));
    }
    Ok(out)
}

fn complex_column(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect()
}

fn lib(field: &str) -> impl Fn(gamow_lab::Error) -> CliError + '_ {
    move |e| CliError::library(field, e)
}

fn run_decompose(cfg: &Resolved) -> Result<Artifact, CliError> {
    let grid = cfg.build_grid()?;
    let f = match &cfg.input_csv {
        Some(path) => {
            let cols = read_columns(path, &grid, &["re", "im"])?;
            SampledWaveFunction::new(grid.clone(), complex_column(&cols[0], &cols[1]), Role::State, HardyClass::Unknown)
                .map_err(lib("io.input_csv"))?
        }
        None => {
            let (z, r) = (pole(cfg), residue(cfg));
            SampledWaveFunction::from_fn(&grid, Role::State, HardyClass::Unknown, |e| {
                r / (Complex64::new(e, 0.0) - z)
            })
            .map_err(lib("resonance"))?
        }
    };
    let (plus, minus) = decompose(&f).map_err(lib("decompose"))?;
    let norm2 = l2_norm(&f).powi(2);
    let (plus2, minus2) = (l2_norm(&plus).powi(2), l2_norm(&minus).powi(2));
    let leak_plus = hardy_leakage(&f, HardyClass::H2Plus).map_err(lib("decompose"))?;
    let leak_minus = hardy_leakage(&f, HardyClass::H2Minus).map_err(lib("decompose"))?;
    debug!("norms {norm2} = {plus2} + {minus2}");

    let bytes = match cfg.format {
        Format::Csv => csv_bytes(
            &["E", "re_f", "im_f", "re_plus", "im_plus", "re_minus", "im_minus"],
            grid.points()
                .iter()
                .zip(f.values())
                .zip(plus.values().iter().zip(minus.values()))
                .map(|((e, v), (p, m))| {
                    vec![num(*e), num(v.re), num(v.im), num(p.re), num(p.im), num(m.re), num(m.im)]
                }),
        )?,
        Format::Json => json_bytes(&json!({
            "norm_squared": norm2,
            "plus_norm_squared": plus2,
            "minus_norm_squared": minus2,
            "leakage_H2_plus": leak_plus,
            "leakage_H2_minus": leak_minus,
            "E": grid.points(),
            "re_plus": plus.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            "im_plus": plus.values().iter().map(|v| v.im).collect::<Vec<_>>(),
            "re_minus": minus.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            "im_minus": minus.values().iter().map(|v| v.im).collect::<Vec<_>>(),
        })),
    };
    Ok(Artifact {
        summary: format!(
            "decompose: n = {}, |f+|^2/|f|^2 = {:.6e}, |f-|^2/|f|^2 = {:.6e}, leakage(H2_plus) = {:.3e}",
            grid.len(),
            plus2 / norm2,
            minus2 / norm2,
            leak_plus
        ),
        bytes,
    })
}

/// The resonance amplitude as an observable (H²₊), or its conjugate as a
/// state (H²₋), matching the direction that keeps it in class.
fn evolve_subject(cfg: &Resolved, grid: &EnergyGrid) -> Result<SampledWaveFunction, CliError> {
    let (z, r) = (pole(cfg), residue(cfg));
    let psi = SampledWaveFunction::from_fn(grid, Role::Observable, HardyClass::H2Plus, |e| {
        r / (Complex64::new(e, 0.0) - z)
    })
    .map_err(lib("resonance"))?;
    Ok(match cfg.direction {
        Direction::HeisenbergObservable => psi,
        Direction::SchrodingerState => psi.conj(),
    })
}

fn run_evolve(cfg: &Resolved) -> Result<Artifact, CliError> {
    let grid = cfg.build_grid()?;
    let f = evolve_subject(cfg, &grid)?;
    let class = f.hardy_class();
    let mut rows = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        let request = EvolutionRequest {
            t,
            direction: cfg.direction,
            enforce_semigroup: !cfg.diagnostic,
        };
        let evolved = evolve(&f, &request).map_err(lib("times"))?;
        let leakage = hardy_leakage(&evolved, class).map_err(lib("evolve"))?;
        rows.push((t, leakage, l2_norm(&evolved)));
    }
    let bytes = match cfg.format {
        Format::Csv => csv_bytes(
            &["t", "leakage", "norm"],
            rows.iter().map(|(t, l, n)| vec![num(*t), num(*l), num(*n)]),
        )?,
        Format::Json => json_bytes(&json!({
            "direction": cfg.direction,
            "diagnostic": cfg.diagnostic,
            "t": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
            "leakage": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            "norm": rows.iter().map(|r| r.2).collect::<Vec<_>>(),
        })),
    };
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Artifact {
        summary: format!(
            "evolve{}: {:?}, {} times, max leakage = {:.3e}",
            if cfg.diagnostic { " [diagnostic: semigroup not enforced]" } else { "" },
            cfg.direction,
            rows.len(),
            worst
        ),
        bytes,
    })
}

fn run_decay_curve(cfg: &Resolved) -> Result<Artifact, CliError> {
    let grid = cfg.build_grid()?;
    let state = match grid.kind() {
        GridKind::FullLine => make_gamow(pole(cfg), &grid),
        GridKind::HalfLine => truncated_gamow(pole(cfg), &grid),
    }
    .map_err(lib("grid"))?;
    let series = decay_curve(&state, &cfg.times).map_err(lib("times"))?;
    let t_max = *cfg.times.last().expect("validated non-empty");
    let slope = if cfg.times.len() >= 2 {
        series.log_slope(t_max).ok()
    } else {
        None
    };
    let bytes = match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            series.write_csv(&mut buf).map_err(lib("output"))?;
            buf
        }
        Format::Json => json_bytes(&json!({
            "E_R": state.e_r(),
            "Gamma": state.gamma(),
            "tail_mass": state.tail_mass(),
            "log_slope": slope,
            "t": series.times(),
            "re_A": series.amplitude().iter().map(|a| a.re).collect::<Vec<_>>(),
            "im_A": series.amplitude().iter().map(|a| a.im).collect::<Vec<_>>(),
            "survival": series.survival(),
        })),
    };
    Ok(Artifact {
        summary: format!(
            "decay-curve: z_R = {} - {}i, {} times, log-survival slope = {}",
            state.e_r(),
            0.5 * state.gamma(),
            series.len(),
            slope.map_or("n/a".to_string(), |s| format!("{s:.6e}"))
        ),
        bytes,
    })
}

fn run_fit_pole(cfg: &Resolved) -> Result<Artifact, CliError> {
    let r = &cfg.resonance;
    let j = AngularMomentum::new(r.j).map_err(lib("resonance.j"))?;
    let samples = match &cfg.input_csv {
        Some(path) => read_line_shape_csv(open(path)?).map_err(lib("io.input_csv"))?,
        None => {
            let truth = BreitWignerParams::new(r.e_r, r.gamma, residue(cfg), j).map_err(lib("resonance"))?;
            let grid = cfg.build_grid()?;
            synthetic_line_shape(&truth, r.momentum, grid.points(), cfg.noise, cfg.seed).map_err(lib("noise"))?
        }
    };
    let (_, report) = fit_pole(&samples, r.momentum, j, None).map_err(lib("fit-pole"))?;
    let bytes = match cfg.format {
        Format::Json => json_bytes(&serde_json::to_value(&report).expect("fit report serializes")),
        Format::Csv => csv_bytes(
            &["E", "sigma", "fit"],
            samples.iter().map(|&(e, s)| {
                let model = report.amplitude * lorentzian_factor(report.e_r, report.gamma, e);
                vec![num(e), num(s), num(model)]
            }),
        )?,
    };
    Ok(Artifact {
        summary: format!(
            "fit-pole: {} samples, E_R = {:.10e}, Gamma = {:.10e}, residual = {:.3e}, {} iterations",
            samples.len(),
            report.e_r,
            report.gamma,
            report.residual,
            report.iterations
        ),
        bytes,
    })
}

fn run_smatrix(cfg: &Resolved) -> Result<Artifact, CliError> {
    let grid = cfg.build_grid()?;
    let (psi, phi) = match &cfg.input_csv {
        Some(path) => {
            let c = read_columns(path, &grid, &["re_psi", "im_psi", "re_phi", "im_phi"])?;
            let psi = SampledWaveFunction::new(grid.clone(), complex_column(&c[0], &c[1]), Role::Observable, HardyClass::H2Plus)
                .map_err(lib("io.input_csv"))?;
            let phi = SampledWaveFunction::new(grid.clone(), complex_column(&c[2], &c[3]), Role::State, HardyClass::H2Minus)
                .map_err(lib("io.input_csv"))?;
            (psi, phi)
        }
        None => {
            // Double poles one unit off the axis at E_R.
            let e_r = cfg.resonance.e_r;
            let below = Complex64::new(e_r, -1.0);
            let psi = SampledWaveFunction::from_fn(&grid, Role::Observable, HardyClass::H2Plus, |e| {
                1.0 / (Complex64::new(e, 0.0) - below).powi(2)
            })
            .map_err(lib("resonance"))?;
            let phi = psi.conj();
            (psi, phi)
        }
    };
    let s = single_pole_smatrix(pole(cfg)).map_err(lib("resonance"))?;
    let d = pole_background_decomposition(&psi, &phi, &s).map_err(lib("smatrix-decompose"))?;
    let bytes = match cfg.format {
        Format::Json => json_bytes(&serde_json::to_value(d).expect("decomposition serializes")),
        Format::Csv => csv_bytes(
            &["re_direct", "im_direct", "re_pole_term", "im_pole_term", "re_background", "im_background", "closure_defect"],
            [vec![
                num(d.direct.re),
                num(d.direct.im),
                num(d.pole_term.re),
                num(d.pole_term.im),
                num(d.background.re),
                num(d.background.im),
                num(d.closure_defect),
            ]],
        )?,
    };
    Ok(Artifact {
        summary: format!(
            "smatrix-decompose: direct = {:.6e}, |pole| = {:.6e}, |background| = {:.6e}, closure defect = {:.3e}",
            d.direct,
            d.pole_term.norm(),
            d.background.norm(),
            d.closure_defect
        ),
        bytes,
    })
}
