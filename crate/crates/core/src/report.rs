//! Output documents. Every document embeds the run configuration: JSON
//! documents under a `config` key, CSV files as a leading `# config:` line.
//! Floats use shortest round-trip formatting, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bifurcation::{
    BifurcationEvent, Boundary, CellStatus, EulerRingElement, Grid2d, Region, RegionMap,
    ScanResult, ScanSample, ScanWarning,
};
use crate::error::Result;
use crate::families::FamilyPoint;
use crate::spectral::{PointSpectrum, SpectralReport};

/// Shortest round-trip text for `v`, switching to exponent notation outside
/// `[1e-4, 1e15)` so tiny and huge values stay short.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, B: Serialize> {
    config: &'a C,
    #[serde(flatten)]
    body: &'a B,
}

/// Pretty JSON `{"config": ..., <body fields>}` with a trailing newline.
pub fn json_document<C: Serialize, B: Serialize>(config: &C, body: &B) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Document { config, body })?;
    s.push('\n');
    Ok(s)
}

/// The `# config: {...}` provenance line, newline included.
pub fn csv_config_line<C: Serialize>(config: &C) -> Result<String> {
    Ok(format!("# config: {}\n", serde_json::to_string(config)?))
}

#[derive(Serialize)]
struct EventsBody<'a> {
    family: &'a str,
    range: [f64; 2],
    n_steps: usize,
    events: &'a [BifurcationEvent],
    warnings: &'a [ScanWarning],
    index_sum: EulerRingElement,
}

pub fn events_json<C: Serialize>(config: &C, scan: &ScanResult) -> Result<String> {
    json_document(
        config,
        &EventsBody {
            family: &scan.family,
            range: scan.range,
            n_steps: scan.n_steps,
            events: &scan.events,
            warnings: &scan.warnings,
            index_sum: scan.index_sum(),
        },
    )
}

pub const EVENTS_CSV_HEADER: &str =
    "bracket_lo,bracket_hi,left_morse,right_morse,kernel_jump,classification,bif_index";

/// One row per event; warnings follow as `# warning:` comment lines.
pub fn events_csv<C: Serialize>(config: &C, scan: &ScanResult) -> Result<String> {
    let mut out = csv_config_line(config)?;
    out.push_str(EVENTS_CSV_HEADER);
    out.push('\n');
    for e in &scan.events {
        let class = serde_json::to_value(e.classification)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_float(e.bracket[0]),
            format_float(e.bracket[1]),
            e.left_morse,
            e.right_morse,
            e.kernel_jump,
            class.as_str().unwrap_or_default(),
            e.bif_index
        )
        .unwrap();
    }
    for w in &scan.warnings {
        writeln!(out, "# warning: {}", serde_json::to_string(w)?).unwrap();
    }
    Ok(out)
}

pub const SAMPLES_CSV_HEADER: &str = "parameter,kernel_dim,morse_index,det_B,min_abs_eig";

pub fn samples_csv<C: Serialize>(config: &C, samples: &[ScanSample]) -> Result<String> {
    let mut out = csv_config_line(config)?;
    out.push_str(SAMPLES_CSV_HEADER);
    out.push('\n');
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_float(s.parameter),
            s.kernel_dim,
            s.morse_index,
            format_float(s.det_b),
            format_float(s.min_abs_eig)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn family_csv<C: Serialize>(config: &C, points: &[FamilyPoint]) -> Result<String> {
    let comment = serde_json::to_string(config)?;
    let mut buf = Vec::new();
    crate::families::write_family_csv(&mut buf, points, Some(&format!("config: {comment}")))?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

pub const MAP_CSV_HEADER: &str = "m0,m1,morse_index,kernel_flag,det_B";

/// One row per grid node; `kernel_flag` is `nondegenerate`, `degenerate` or
/// `excluded`, and excluded rows leave the numeric fields empty.
pub fn map_csv<C: Serialize>(config: &C, map: &RegionMap) -> Result<String> {
    let mut out = csv_config_line(config)?;
    out.push_str(MAP_CSV_HEADER);
    out.push('\n');
    for c in &map.cells {
        let flag = match c.status {
            CellStatus::Nondegenerate => "nondegenerate",
            CellStatus::Degenerate => "degenerate",
            CellStatus::Excluded => "excluded",
        };
        let morse = c.morse_index.map(|m| m.to_string()).unwrap_or_default();
        let det = c.det_b.map(format_float).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            format_float(c.m0),
            format_float(c.m1),
            morse,
            flag,
            det
        )
        .unwrap();
    }
    Ok(out)
}

#[derive(Serialize)]
struct MapSummaryBody<'a> {
    grid: &'a Grid2d,
    index_set: Vec<usize>,
    excluded_cells: usize,
    degenerate_cells: usize,
    regions: &'a [Region],
    boundaries: &'a [Boundary],
}

pub fn map_summary_json<C: Serialize>(config: &C, map: &RegionMap) -> Result<String> {
    let count = |s: CellStatus| map.cells.iter().filter(|c| c.status == s).count();
    json_document(
        config,
        &MapSummaryBody {
            grid: &map.grid,
            index_set: map.index_set.iter().copied().collect(),
            excluded_cells: count(CellStatus::Excluded),
            degenerate_cells: count(CellStatus::Degenerate),
            regions: &map.regions,
            boundaries: &map.boundaries,
        },
    )
}

#[derive(Serialize)]
struct SpectrumBody<'a> {
    point: &'a FamilyPoint,
    kernel_dim: usize,
    morse_index_full: usize,
    morse_index_b: usize,
    det_b: f64,
    min_abs_eig: f64,
    full: &'a SpectralReport,
    restricted: &'a SpectralReport,
}

pub fn spectrum_json<C: Serialize>(
    config: &C,
    point: &FamilyPoint,
    spectrum: &PointSpectrum,
) -> Result<String> {
    json_document(
        config,
        &SpectrumBody {
            point,
            kernel_dim: spectrum.kernel_dim(),
            morse_index_full: spectrum.full.morse_index,
            morse_index_b: spectrum.morse_index(),
            det_b: spectrum.det_b,
            min_abs_eig: spectrum.min_abs_eig(),
            full: &spectrum.full,
            restricted: &spectrum.restricted,
        },
    )
}

/// Header plus one `parameter,kernel_dim,morse_index,det_B,min_abs_eig` row.
pub fn spectrum_csv<C: Serialize>(
    config: &C,
    parameter: f64,
    spectrum: &PointSpectrum,
) -> Result<String> {
    samples_csv(
        config,
        &[ScanSample {
            parameter,
            kernel_dim: spectrum.kernel_dim(),
            morse_index: spectrum.morse_index(),
            det_b: spectrum.det_b,
            min_abs_eig: spectrum.min_abs_eig(),
        }],
    )
}
