//! Command implementations. Each returns the documents to write; `main`
//! maps failures to exit codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ccbif::bifurcation::{map_2d, scan_1d, scan_points, Grid2d, ScanOptions, ScanResult};
use ccbif::families::{
    csv_family_load, rosette_m2_solved, rosette_point, two_squares_point, two_squares_r0,
    FamilyPoint, Parameter, RosetteFamily, TwoSquaresFamily,
};
use ccbif::nbody::{AugmentedPotential, Configuration, MassVector};
use ccbif::report::{self, format_float as ff};
use ccbif::spectral::{scaled_residual_tolerance, PointSpectrum, SpectralReport};
use ccbif::Error;

use crate::config::{CliResult, Failure, FamilyKind, Format, RunConfig};

/// A document destined for `path` (stdout when `None`).
pub struct Output {
    pub path: Option<PathBuf>,
    pub content: String,
}

/// Result of a command: documents to write, plus an optional failure that is
/// reported only after they are written.
pub struct Outcome {
    pub outputs: Vec<Output>,
    pub failure: Option<Failure>,
}

impl Outcome {
    fn ok(outputs: Vec<Output>) -> Self {
        Self {
            outputs,
            failure: None,
        }
    }
}

fn primary(cfg: &RunConfig, content: String) -> Output {
    Output {
        path: cfg.out.clone(),
        content,
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// A single configuration given as JSON.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigurationFile {
    #[serde(default)]
    parameter: Option<f64>,
    configuration: Configuration,
    masses: MassVector,
}

/// Raw input points: built-in family points are verified on construction,
/// file inputs are not.
enum Inputs {
    Verified(Vec<FamilyPoint>),
    Raw(Vec<(f64, Configuration, MassVector)>),
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A built-in point failing its own criticality check is a verification
/// failure, not an input error.
fn builtin(point: ccbif::Result<FamilyPoint>) -> CliResult<Inputs> {
    match point {
        Ok(p) => Ok(Inputs::Verified(vec![p])),
        Err(e @ Error::NotCritical { .. }) => Err(Failure::Verification(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn load_inputs(cfg: &RunConfig) -> CliResult<Inputs> {
    match cfg.family {
        FamilyKind::TwoSquares => builtin(two_squares_point(cfg.param_values[0])),
        FamilyKind::Rosette => {
            let [m0, m1] = [cfg.param_values[0], cfg.param_values[1]];
            builtin(rosette_point(m0, m1))
        }
        FamilyKind::Csv => {
            let path = cfg.file.as_ref().expect("checked when resolving");
            if is_json(path) {
                let text = std::fs::read_to_string(path)?;
                let f: ConfigurationFile = serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                if f.configuration.n_bodies() != f.masses.len() {
                    return Err(Failure::Usage(format!(
                        "{}: {} positions but {} masses",
                        path.display(),
                        f.configuration.n_bodies(),
                        f.masses.len()
                    )));
                }
                Ok(Inputs::Raw(vec![(
                    f.parameter.unwrap_or(0.0),
                    f.configuration,
                    f.masses,
                )]))
            } else {
                // an infinite tolerance defers the criticality check
                let points = csv_family_load(path, f64::INFINITY)?;
                Ok(Inputs::Raw(
                    points
                        .into_iter()
                        .map(|p| (p.scalar_parameter(), p.configuration, p.masses))
                        .collect(),
                ))
            }
        }
    }
}

fn load_points(cfg: &RunConfig) -> CliResult<Vec<FamilyPoint>> {
    match load_inputs(cfg)? {
        Inputs::Verified(p) => Ok(p),
        Inputs::Raw(rows) => rows
            .into_iter()
            .enumerate()
            .map(|(i, (param, q, m))| {
                FamilyPoint::new(Parameter::One(param), q, m, cfg.residual_tol)
                    .map_err(|e| Failure::Usage(format!("input point {}: {e}", i + 1)))
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct VerifyRow {
    parameter: Parameter,
    n_bodies: usize,
    masses: MassVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    m2: Option<f64>,
    lambda: f64,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyBody {
    pass: bool,
    points: Vec<VerifyRow>,
}

fn verify_row(
    parameter: Parameter,
    q: &Configuration,
    m: MassVector,
    tol: f64,
) -> CliResult<VerifyRow> {
    let ctx = AugmentedPotential::matched(q, m)?;
    let residual = ctx.residual(q)?;
    let tolerance = scaled_residual_tolerance(tol, &ctx.hessian(q)?);
    let m2 = match parameter {
        Parameter::Two([m0, m1]) => Some(rosette_m2_solved(m0, m1)?),
        Parameter::One(_) => None,
    };
    Ok(VerifyRow {
        parameter,
        n_bodies: q.n_bodies(),
        masses: ctx.masses().clone(),
        m2,
        lambda: ctx.lambda(),
        residual,
        tolerance,
        pass: residual <= tolerance,
    })
}

pub fn verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let rows = match load_inputs(cfg)? {
        Inputs::Verified(points) => points
            .into_iter()
            .map(|p| verify_row(p.parameter, &p.configuration, p.masses, cfg.residual_tol))
            .collect::<CliResult<Vec<_>>>()?,
        Inputs::Raw(rows) => rows
            .into_iter()
            .map(|(param, q, m)| verify_row(Parameter::One(param), &q, m, cfg.residual_tol))
            .collect::<CliResult<Vec<_>>>()?,
    };
    let pass = rows.iter().all(|r| r.pass);
    let content = match cfg.format {
        Format::Json => report::json_document(cfg, &VerifyBody { pass, points: rows })?,
        Format::Csv => {
            let mut out = report::csv_config_line(cfg)?;
            out.push_str("parameter,n_bodies,lambda,residual,tolerance,pass\n");
            for r in &rows {
                let p = match r.parameter {
                    Parameter::One(p) => ff(p),
                    Parameter::Two([a, b]) => format!("{};{}", ff(a), ff(b)),
                };
                writeln!(
                    out,
                    "{p},{},{},{},{},{}",
                    r.n_bodies,
                    ff(r.lambda),
                    ff(r.residual),
                    ff(r.tolerance),
                    r.pass
                )
                .unwrap();
            }
            out
        }
    };
    let failure = (!pass).then(|| {
        Failure::Verification("residual exceeds tolerance: not a central configuration".into())
    });
    Ok(Outcome {
        outputs: vec![primary(cfg, content)],
        failure,
    })
}

#[derive(Serialize)]
struct SpectrumRow<'a> {
    parameter: Parameter,
    lambda: f64,
    residual: f64,
    kernel_dim: usize,
    morse_index_full: usize,
    morse_index_b: usize,
    det_b: f64,
    min_abs_eig: f64,
    full: &'a SpectralReport,
    restricted: &'a SpectralReport,
}

#[derive(Serialize)]
struct SpectrumBody<'a> {
    points: Vec<SpectrumRow<'a>>,
}

pub fn spectrum(cfg: &RunConfig) -> CliResult<Outcome> {
    let points = load_points(cfg)?;
    let spectra = points
        .iter()
        .map(|p| p.spectrum(cfg.tau_zero))
        .collect::<Result<Vec<PointSpectrum>, Error>>()?;
    let content = match cfg.format {
        Format::Json => {
            let rows = points
                .iter()
                .zip(&spectra)
                .map(|(p, s)| SpectrumRow {
                    parameter: p.parameter,
                    lambda: p.lambda,
                    residual: p.residual,
                    kernel_dim: s.kernel_dim(),
                    morse_index_full: s.full.morse_index,
                    morse_index_b: s.morse_index(),
                    det_b: s.det_b,
                    min_abs_eig: s.min_abs_eig(),
                    full: &s.full,
                    restricted: &s.restricted,
                })
                .collect();
            report::json_document(cfg, &SpectrumBody { points: rows })?
        }
        Format::Csv => {
            let mut out = report::csv_config_line(cfg)?;
            out.push_str("parameter,kernel_dim,morse_index_full,morse_index_b,det_B,eigenvalues\n");
            for (p, s) in points.iter().zip(&spectra) {
                let eig: Vec<String> = s.full.eigenvalues.iter().map(|&v| ff(v)).collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    ff(p.scalar_parameter()),
                    s.kernel_dim(),
                    s.full.morse_index,
                    s.morse_index(),
                    ff(s.det_b),
                    eig.join(";")
                )
                .unwrap();
            }
            out
        }
    };
    Ok(Outcome::ok(vec![primary(cfg, content)]))
}

#[derive(Serialize)]
struct FamilyInfoBody<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    r0: Option<f64>,
    points: &'a [FamilyPoint],
}

pub fn family_info(cfg: &RunConfig) -> CliResult<Outcome> {
    let points = load_points(cfg)?;
    let content = match cfg.format {
        Format::Json => {
            let r0 = (cfg.family == FamilyKind::TwoSquares).then(two_squares_r0);
            report::json_document(
                cfg,
                &FamilyInfoBody {
                    r0,
                    points: &points,
                },
            )?
        }
        Format::Csv => report::family_csv(cfg, &points)?,
    };
    Ok(Outcome::ok(vec![primary(cfg, content)]))
}

fn run_scan(cfg: &RunConfig, opts: &ScanOptions) -> CliResult<ScanResult> {
    let steps = cfg.steps.unwrap_or_default();
    Ok(match cfg.family {
        FamilyKind::TwoSquares => {
            let [lo, hi] = cfg.range.expect("resolved");
            scan_1d(&TwoSquaresFamily::new(lo, hi)?, lo, hi, steps, opts)?
        }
        FamilyKind::Rosette => {
            let [lo, hi] = cfg.range.expect("resolved");
            scan_1d(
                &RosetteFamily.slice(cfg.param_values[0]),
                lo,
                hi,
                steps,
                opts,
            )?
        }
        FamilyKind::Csv => {
            let path = cfg.file.as_ref().expect("checked when resolving");
            scan_points(&csv_family_load(path, cfg.residual_tol)?, opts)?
        }
    })
}

pub fn scan(cfg: &RunConfig, threads: Option<usize>) -> CliResult<Outcome> {
    let opts = ScanOptions {
        tau_zero: cfg.tau_zero,
        threads,
    };
    let result = run_scan(cfg, &opts)?;
    let content = match cfg.format {
        Format::Json => report::events_json(cfg, &result)?,
        Format::Csv => report::events_csv(cfg, &result)?,
    };
    let mut outputs = vec![primary(cfg, content)];
    if let Some(dump) = &cfg.dump {
        outputs.push(Output {
            path: Some(dump.clone()),
            content: report::family_csv(cfg, &result.points)?,
        });
        outputs.push(Output {
            path: Some(with_suffix(dump, ".spectra.csv")),
            content: report::samples_csv(cfg, &result.samples)?,
        });
    }
    for w in &result.warnings {
        eprintln!(
            "warning: {}",
            serde_json::to_string(w).map_err(Error::from)?
        );
    }
    let failure = (cfg.strict && !result.warnings.is_empty()).then(|| {
        Failure::Strict(format!(
            "{} grid-too-coarse warning(s); increase --steps",
            result.warnings.len()
        ))
    });
    Ok(Outcome { outputs, failure })
}

pub fn map(cfg: &RunConfig, threads: Option<usize>) -> CliResult<Outcome> {
    let [n0, n1] = cfg.grid.expect("resolved");
    let grid = Grid2d::new(
        cfg.m0_range.expect("resolved"),
        cfg.m1_range.expect("resolved"),
        n0,
        n1,
    )?;
    if grid.m0_range[0] <= 0.0 || grid.m1_range[0] <= 0.0 {
        return Err(Failure::Usage("map bounds must be positive masses".into()));
    }
    let result = map_2d(&RosetteFamily, &grid, cfg.tau_zero, threads)?;
    let summary = report::map_summary_json(cfg, &result)?;
    Ok(Outcome::ok(match cfg.format {
        Format::Json => vec![primary(cfg, summary)],
        Format::Csv => {
            let mut v = vec![primary(cfg, report::map_csv(cfg, &result)?)];
            if let Some(out) = &cfg.out {
                v.push(Output {
                    path: Some(with_suffix(out, ".regions.json")),
                    content: summary,
                });
            }
            v
        }
    }))
}
