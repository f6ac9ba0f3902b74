//! Argument parsing and the run configuration embedded in every output.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ccbif::spectral::{DEFAULT_RESIDUAL_TOL, DEFAULT_TAU_ZERO};

#[derive(Debug, Parser)]
#[command(
    name = "cc-bif",
    version,
    about = "Bifurcations of planar central configurations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the central-configuration condition at one point.
    Verify(CommonArgs),
    /// Eigenvalues, kernel dimension and Morse indices at one point.
    Spectrum(CommonArgs),
    /// Locate and classify bifurcations along a 1D family.
    Scan(CommonArgs),
    /// Morse-index regions of the rosette mass plane.
    Map(CommonArgs),
    /// Positions, masses, lambda and residual of a family point.
    FamilyInfo(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Spectrum(_) => "spectrum",
            Command::Scan(_) => "scan",
            Command::Map(_) => "map",
            Command::FamilyInfo(_) => "family-info",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Verify(a)
            | Command::Spectrum(a)
            | Command::Scan(a)
            | Command::Map(a)
            | Command::FamilyInfo(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    TwoSquares,
    Rosette,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in family, or `csv` to read `--file`.
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Family parameter: a decimal or one of sqrt2/7, sqrt2/6, sqrt2/5, pi/3;
    /// rosette points take `m0,m1`, rosette scans take `m0`.
    #[arg(long, allow_hyphen_values = true)]
    pub param: Option<String>,
    /// Configuration file (JSON or CSV) or CSV family file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Parameter range `lo:hi`; `map` also accepts `lo:hi,lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Number of scan intervals.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Map grid `NxM` (nodes along m0 and m1).
    #[arg(long)]
    pub grid: Option<String>,
    /// Relative zero threshold for eigenvalues.
    #[arg(long)]
    pub tau_zero: Option<f64>,
    /// Relative threshold on |grad phi| for accepting a configuration.
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Scan only: write the scanned family CSV here and per-point spectra to
    /// `<PATH>.spectra.csv`.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Scan only: exit 4 when the grid is too coarse to resolve an event.
    #[arg(long)]
    pub strict: bool,
}

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Strict(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Verification(_) => 3,
            Failure::Strict(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verification(m) | Failure::Strict(m) => m,
        }
    }
}

impl From<ccbif::Error> for Failure {
    fn from(e: ccbif::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

/// Parses a decimal or one of the exact literals.
pub fn parse_value(s: &str) -> CliResult<f64> {
    let t = s.trim();
    let v = match t {
        "sqrt2/7" => std::f64::consts::SQRT_2 / 7.0,
        "sqrt2/6" => std::f64::consts::SQRT_2 / 6.0,
        "sqrt2/5" => std::f64::consts::SQRT_2 / 5.0,
        "pi/3" => std::f64::consts::FRAC_PI_3,
        _ => t
            .parse::<f64>()
            .map_err(|_| Failure::Usage(format!("bad number {t:?}")))?,
    };
    if !v.is_finite() {
        return usage(format!("non-finite value {t:?}"));
    }
    Ok(v)
}

pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(parse_value).collect()
}

pub fn parse_range(s: &str) -> CliResult<[f64; 2]> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("range {s:?} is not lo:hi")))?;
    let r = [parse_value(lo)?, parse_value(hi)?];
    if !(r[0] < r[1]) {
        return usage(format!("empty range {s:?}"));
    }
    Ok(r)
}

pub fn parse_grid(s: &str) -> CliResult<[usize; 2]> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Failure::Usage(format!("grid {s:?} is not NxM")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Failure::Usage(format!("bad grid size {t:?}")))
    };
    let g = [parse(a)?, parse(b)?];
    if g[0] < 2 || g[1] < 2 {
        return usage(format!("grid sizes must be >= 2, got {s:?}"));
    }
    Ok(g)
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        usage(format!("{name} must be positive, got {v}"))
    }
}

/// Fully resolved run parameters. Serialized into every output, so it holds
/// everything that determines the output and nothing else (no worker count).
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub family: FamilyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub param_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    pub tau_zero: f64,
    pub residual_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump: Option<PathBuf>,
    pub strict: bool,
}

pub const DEFAULT_STEPS: usize = 512;
pub const DEFAULT_GRID: [usize; 2] = [64, 64];
pub const DEFAULT_MAP_RANGE: [f64; 2] = [0.1, 5.0];
pub const DEFAULT_TWO_SQUARES_RANGE: [f64; 2] = [0.20, 0.29];
pub const DEFAULT_ROSETTE_RANGE: [f64; 2] = [0.1, 5.0];

pub fn resolve(command: &Command) -> CliResult<RunConfig> {
    let a = command.args();
    let name = command.name();
    let is_scan = matches!(command, Command::Scan(_));
    let is_map = matches!(command, Command::Map(_));

    let family = match (a.family, is_map) {
        (Some(FamilyKind::Rosette) | None, true) => FamilyKind::Rosette,
        (Some(f), true) => return usage(format!("map needs the rosette family, got {f:?}")),
        (Some(f), false) => f,
        (None, false) if a.file.is_some() => FamilyKind::Csv,
        (None, false) => return usage("--family is required"),
    };
    if family == FamilyKind::Csv && a.file.is_none() {
        return usage("--family csv needs --file");
    }
    if family != FamilyKind::Csv && a.file.is_some() {
        return usage("--file is only used with --family csv");
    }
    if !is_scan && (a.dump.is_some() || a.strict || a.steps.is_some()) {
        return usage(format!(
            "--dump, --strict and --steps only apply to scan, not {name}"
        ));
    }
    if !is_map && a.grid.is_some() {
        return usage("--grid only applies to map");
    }

    let param_values = match &a.param {
        Some(p) => parse_values(p)?,
        None => Vec::new(),
    };
    // two-squares scans run over --range; everything else built-in needs a point
    let needs_param =
        family != FamilyKind::Csv && !is_map && !(is_scan && family == FamilyKind::TwoSquares);
    if is_scan && family == FamilyKind::TwoSquares && !param_values.is_empty() {
        return usage("two-squares scans take --range, not --param");
    }
    if needs_param && param_values.is_empty() {
        return usage(format!("{name} needs --param"));
    }
    if family == FamilyKind::Csv && !param_values.is_empty() {
        return usage("--param is not used with --family csv");
    }
    if is_map && !param_values.is_empty() {
        return usage("map takes --range and --grid, not --param");
    }
    let expected = match (family, is_scan) {
        (FamilyKind::Rosette, false) => 2,
        _ => 1,
    };
    if needs_param && param_values.len() != expected {
        return usage(format!(
            "--param for {name} on this family takes {expected} value(s), got {}",
            param_values.len()
        ));
    }

    let (mut range, mut map_ranges) = (None, None);
    if is_map {
        map_ranges = Some(match &a.range {
            None => [DEFAULT_MAP_RANGE, DEFAULT_MAP_RANGE],
            Some(s) => match s.split_once(',') {
                Some((x, y)) => [parse_range(x)?, parse_range(y)?],
                None => {
                    let r = parse_range(s)?;
                    [r, r]
                }
            },
        });
    } else if is_scan && family != FamilyKind::Csv {
        range = Some(match &a.range {
            Some(s) => parse_range(s)?,
            None if family == FamilyKind::TwoSquares => DEFAULT_TWO_SQUARES_RANGE,
            None => DEFAULT_ROSETTE_RANGE,
        });
    } else if a.range.is_some() {
        return usage(format!("--range does not apply to {name} here"));
    }

    let steps = if is_scan && family != FamilyKind::Csv {
        let s = a.steps.unwrap_or(DEFAULT_STEPS);
        if s < 2 {
            return usage("--steps must be >= 2");
        }
        Some(s)
    } else if a.steps.is_some() {
        return usage("--steps does not apply to csv families");
    } else {
        None
    };
    let grid = if is_map {
        Some(match &a.grid {
            Some(g) => parse_grid(g)?,
            None => DEFAULT_GRID,
        })
    } else {
        None
    };

    let default_format = match command {
        Command::Map(_) => Format::Csv,
        _ => Format::Json,
    };

    Ok(RunConfig {
        command: name,
        family,
        param: a.param.clone(),
        param_values,
        file: a.file.clone(),
        range,
        m0_range: map_ranges.map(|r| r[0]),
        m1_range: map_ranges.map(|r| r[1]),
        steps,
        grid,
        tau_zero: positive("--tau-zero", a.tau_zero.unwrap_or(DEFAULT_TAU_ZERO))?,
        residual_tol: positive(
            "--residual-tol",
            a.residual_tol.unwrap_or(DEFAULT_RESIDUAL_TOL),
        )?,
        out: a.out.clone(),
        format: a.format.unwrap_or(default_format),
        dump: a.dump.clone(),
        strict: a.strict,
    })
}

/// Worker count from `CC_BIF_THREADS`; `None` lets the pool pick.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("CC_BIF_THREADS") {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => usage(format!(
                "CC_BIF_THREADS must be a positive integer, got {v:?}"
            )),
        },
    }
}
