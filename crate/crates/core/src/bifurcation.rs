//! Locating and classifying bifurcations along families.
//!
//! At a nondegenerate orbit with trivial isotropy the equivariant gradient
//! degree has a single coordinate, `(-1)^{m-(B)}` on the free orbit type.
//! A change of Morse index across a parameter segment gives a local
//! bifurcation; a change of parity makes the bifurcation index nonzero and
//! the bifurcation global.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{has_trivial_isotropy, Family1d, FamilyPoint, RosetteFamily};
use crate::spectral::{PointSpectrum, DEFAULT_TAU_ZERO};

/// Orbit-type label of free orbits `SO(2)/{Id}`.
pub const FREE_ORBIT: &str = "SO(2)/Id";

/// Bisection stops once a bracket is at most `range / 2^20` wide.
pub const REFINE_DEPTH: i32 = 20;

/// Formal integer combination of orbit-type labels; only the additive group
/// structure is modeled.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, i64>", into = "BTreeMap<String, i64>")]
pub struct EulerRingElement {
    coefficients: BTreeMap<String, i64>,
}

impl EulerRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(label: impl Into<String>, coefficient: i64) -> Self {
        let mut e = Self::zero();
        e.add_term(label.into(), coefficient);
        e
    }

    fn add_term(&mut self, label: String, k: i64) {
        let c = self.coefficients.entry(label).or_insert(0);
        *c += k;
        if *c == 0 {
            self.coefficients.retain(|_, v| *v != 0);
        }
    }

    pub fn coefficient(&self, label: &str) -> i64 {
        self.coefficients.get(label).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.coefficients.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl From<BTreeMap<String, i64>> for EulerRingElement {
    fn from(mut coefficients: BTreeMap<String, i64>) -> Self {
        coefficients.retain(|_, v| *v != 0);
        Self { coefficients }
    }
}

impl From<EulerRingElement> for BTreeMap<String, i64> {
    fn from(e: EulerRingElement) -> Self {
        e.coefficients
    }
}

impl AddAssign<&EulerRingElement> for EulerRingElement {
    fn add_assign(&mut self, rhs: &EulerRingElement) {
        for (label, &k) in &rhs.coefficients {
            self.add_term(label.clone(), k);
        }
    }
}

impl Add for EulerRingElement {
    type Output = EulerRingElement;
    fn add(mut self, rhs: EulerRingElement) -> EulerRingElement {
        self += &rhs;
        self
    }
}

impl Neg for EulerRingElement {
    type Output = EulerRingElement;
    fn neg(mut self) -> EulerRingElement {
        for v in self.coefficients.values_mut() {
            *v = -*v;
        }
        self
    }
}

impl Sub for EulerRingElement {
    type Output = EulerRingElement;
    fn sub(self, rhs: EulerRingElement) -> EulerRingElement {
        self + (-rhs)
    }
}

impl std::iter::Sum for EulerRingElement {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl fmt::Display for EulerRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (label, k)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{k}*[{label}]")?;
        }
        Ok(())
    }
}

/// Degree of the gradient at an isolated critical orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeValue {
    pub element: EulerRingElement,
}

fn parity_sign(morse: usize) -> i64 {
    if morse.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(-1)^{m-(B)} [SO(2)/Id]` from an already computed spectrum.
pub fn degree_from_spectrum(spectrum: &PointSpectrum) -> Result<DegreeValue> {
    if !spectrum.is_nondegenerate() {
        return Err(Error::DegenerateOrbit {
            kernel_dim: spectrum.kernel_dim(),
        });
    }
    Ok(DegreeValue {
        element: EulerRingElement::term(FREE_ORBIT, parity_sign(spectrum.morse_index())),
    })
}

pub fn degree_at(point: &FamilyPoint, tau_zero: f64) -> Result<DegreeValue> {
    if !has_trivial_isotropy(&point.configuration, 1e-9) {
        return Err(Error::InvalidArgument(
            "degree formula needs trivial isotropy".into(),
        ));
    }
    degree_from_spectrum(&point.spectrum(tau_zero)?)
}

/// `deg(right) - deg(left)`; nonzero certifies a global bifurcation between.
pub fn bifurcation_index(
    left: &FamilyPoint,
    right: &FamilyPoint,
    tau_zero: f64,
) -> Result<EulerRingElement> {
    Ok(degree_at(right, tau_zero)?.element - degree_at(left, tau_zero)?.element)
}

fn index_between(left_morse: usize, right_morse: usize) -> EulerRingElement {
    EulerRingElement::term(
        FREE_ORBIT,
        parity_sign(right_morse) - parity_sign(left_morse),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// Morse index changes with equal parity.
    Local,
    /// Morse index parity changes; nonzero bifurcation index.
    Global,
    /// Degeneracy observed without an index change; necessary condition only.
    Candidate,
}

impl Classification {
    pub fn from_indices(left: usize, right: usize) -> Self {
        if left % 2 != right % 2 {
            Classification::Global
        } else if left != right {
            Classification::Local
        } else {
            Classification::Candidate
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub bracket: [f64; 2],
    pub left_morse: usize,
    pub right_morse: usize,
    /// Largest full-Hessian kernel dimension observed inside the bracket.
    pub kernel_jump: usize,
    pub classification: Classification,
    pub bif_index: EulerRingElement,
    /// Set when events closer than the refinement resolution were combined.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub merged: bool,
}

impl BifurcationEvent {
    fn new(bracket: [f64; 2], left_morse: usize, right_morse: usize, kernel_jump: usize) -> Self {
        Self {
            bracket,
            left_morse,
            right_morse,
            kernel_jump,
            classification: Classification::from_indices(left_morse, right_morse),
            bif_index: index_between(left_morse, right_morse),
            merged: false,
        }
    }

    pub fn width(&self) -> f64 {
        self.bracket[1] - self.bracket[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanWarning {
    /// Adjacent grid points whose indices differ by an odd number >= 3; a
    /// pair of events may hide in between.
    GridTooCoarse {
        bracket: [f64; 2],
        left_morse: usize,
        right_morse: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub tau_zero: f64,
    /// Worker count; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            tau_zero: DEFAULT_TAU_ZERO,
            threads: None,
        }
    }
}

/// One grid row: parameter, full kernel dimension, `m-(B)`, `det B` and the
/// smallest `|eigenvalue|` of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub parameter: f64,
    pub kernel_dim: usize,
    pub morse_index: usize,
    pub det_b: f64,
    pub min_abs_eig: f64,
}

impl ScanSample {
    fn new(parameter: f64, s: &PointSpectrum) -> Self {
        Self {
            parameter,
            kernel_dim: s.kernel_dim(),
            morse_index: s.morse_index(),
            det_b: s.det_b,
            min_abs_eig: s.min_abs_eig(),
        }
    }

    fn nondegenerate(&self) -> bool {
        self.kernel_dim == 1
    }

    fn sign(&self) -> bool {
        self.det_b > 0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub family: String,
    pub range: [f64; 2],
    pub n_steps: usize,
    pub samples: Vec<ScanSample>,
    pub events: Vec<BifurcationEvent>,
    pub warnings: Vec<ScanWarning>,
    #[serde(skip)]
    pub points: Vec<FamilyPoint>,
}

impl ScanResult {
    pub fn index_sum(&self) -> EulerRingElement {
        index_sum_check(&self.events)
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn evaluate(
    family: &dyn Family1d,
    rho: f64,
    tau_zero: f64,
) -> Result<(FamilyPoint, PointSpectrum)> {
    let point = family.point(rho).map_err(|e| e.at(rho))?;
    let spectrum = point.spectrum(tau_zero).map_err(|e| e.at(rho))?;
    Ok((point, spectrum))
}

/// Scans `[lo, hi]` on `n_steps` equal intervals, then refines every
/// bracket where `det B` changes sign or the Morse index changes.
pub fn scan_1d(
    family: &dyn Family1d,
    lo: f64,
    hi: f64,
    n_steps: usize,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    if n_steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 steps, got {n_steps}"
        )));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    if !(opts.tau_zero > 0.0) {
        return Err(Error::InvalidArgument("tau_zero must be positive".into()));
    }
    let grid: Vec<f64> = (0..=n_steps)
        .map(|k| {
            if k == n_steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / n_steps as f64
            }
        })
        .collect();
    let evals = with_pool(opts.threads, || {
        grid.par_iter()
            .map(|&rho| evaluate(family, rho, opts.tau_zero))
            .collect::<Vec<_>>()
    })?;
    let mut points = Vec::with_capacity(grid.len());
    let mut samples = Vec::with_capacity(grid.len());
    for (rho, e) in grid.iter().zip(evals) {
        let (p, s) = e?;
        samples.push(ScanSample::new(*rho, &s));
        points.push(p);
    }

    let resolution = (hi - lo) / 2f64.powi(REFINE_DEPTH);
    let refine = |rho: f64| -> Result<ScanSample> {
        let (_, s) = evaluate(family, rho, opts.tau_zero)?;
        Ok(ScanSample::new(rho, &s))
    };
    let (events, warnings) = detect_events(&samples, Some(&refine), resolution)?;
    Ok(ScanResult {
        family: family.name(),
        range: [lo, hi],
        n_steps,
        samples,
        events,
        warnings,
        points,
    })
}

/// Event detection on precomputed family points (for example a CSV family),
/// without refinement: brackets are adjacent rows. Points are sorted by
/// parameter first.
pub fn scan_points(points: &[FamilyPoint], opts: &ScanOptions) -> Result<ScanResult> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two family points".into(),
        ));
    }
    let mut points = points.to_vec();
    points.sort_by(|a, b| a.scalar_parameter().total_cmp(&b.scalar_parameter()));
    let spectra = with_pool(opts.threads, || {
        points
            .par_iter()
            .map(|p| {
                p.spectrum(opts.tau_zero)
                    .map_err(|e| e.at(p.scalar_parameter()))
            })
            .collect::<Vec<_>>()
    })?;
    let mut samples = Vec::with_capacity(points.len());
    for (p, s) in points.iter().zip(spectra) {
        samples.push(ScanSample::new(p.scalar_parameter(), &s?));
    }
    let lo = samples[0].parameter;
    let hi = samples[samples.len() - 1].parameter;
    let (events, warnings) = detect_events(&samples, None, 0.0)?;
    Ok(ScanResult {
        family: "csv".into(),
        range: [lo, hi],
        n_steps: samples.len() - 1,
        samples,
        events,
        warnings,
        points,
    })
}

type Refiner<'a> = &'a (dyn Fn(f64) -> Result<ScanSample> + Sync);

fn differs(a: &ScanSample, b: &ScanSample) -> bool {
    a.morse_index != b.morse_index || a.sign() != b.sign()
}

/// Nondegenerate sample near the middle of `(a, b)`, trying a few offsets
/// if the midpoint happens to be degenerate.
fn probe(
    refine: Refiner<'_>,
    a: f64,
    b: f64,
    kernel_seen: &mut usize,
) -> Result<Option<ScanSample>> {
    for frac in [0.5, 0.375, 0.625] {
        let s = refine(a + (b - a) * frac)?;
        *kernel_seen = (*kernel_seen).max(s.kernel_dim);
        if s.nondegenerate() {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Shrinks `[a, b]` around one change. Sign changes of `det B` take
/// precedence; otherwise the leftmost Morse-index change is tracked.
fn bisect(
    refine: Refiner<'_>,
    mut a: ScanSample,
    mut b: ScanSample,
    resolution: f64,
    kernel_seen: &mut usize,
) -> Result<(ScanSample, ScanSample)> {
    let by_sign = a.sign() != b.sign();
    while b.parameter - a.parameter > resolution {
        let Some(mid) = probe(refine, a.parameter, b.parameter, kernel_seen)? else {
            break;
        };
        let go_right = if by_sign {
            mid.sign() == a.sign()
        } else {
            mid.morse_index == a.morse_index
        };
        if go_right {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}

fn detect_events(
    samples: &[ScanSample],
    refine: Option<Refiner<'_>>,
    resolution: f64,
) -> Result<(Vec<BifurcationEvent>, Vec<ScanWarning>)> {
    let mut events = Vec::new();
    let mut warnings = Vec::new();
    let anchors: Vec<usize> = (0..samples.len())
        .filter(|&k| samples[k].nondegenerate())
        .collect();

    for w in anchors.windows(2) {
        let (ka, kb) = (w[0], w[1]);
        let (sa, sb) = (samples[ka], samples[kb]);
        let grid_kernel = samples[ka..=kb]
            .iter()
            .map(|s| s.kernel_dim)
            .max()
            .unwrap_or(1);
        if !differs(&sa, &sb) {
            if grid_kernel > 1 {
                events.push(BifurcationEvent::new(
                    [sa.parameter, sb.parameter],
                    sa.morse_index,
                    sb.morse_index,
                    grid_kernel,
                ));
            }
            continue;
        }
        let jump = sa.morse_index.abs_diff(sb.morse_index);
        if jump >= 3 && jump % 2 == 1 {
            warnings.push(ScanWarning::GridTooCoarse {
                bracket: [sa.parameter, sb.parameter],
                left_morse: sa.morse_index,
                right_morse: sb.morse_index,
            });
        }
        let Some(refine) = refine else {
            events.push(BifurcationEvent::new(
                [sa.parameter, sb.parameter],
                sa.morse_index,
                sb.morse_index,
                grid_kernel,
            ));
            continue;
        };
        // every refined event splits its interval; leftovers are re-examined
        let mut pending = VecDeque::from([(sa, sb)]);
        while let Some((a, b)) = pending.pop_front() {
            if !differs(&a, &b) {
                continue;
            }
            let mut kernel_seen = grid_kernel;
            let (ra, rb) = bisect(refine, a, b, resolution, &mut kernel_seen)?;
            events.push(BifurcationEvent::new(
                [ra.parameter, rb.parameter],
                ra.morse_index,
                rb.morse_index,
                kernel_seen,
            ));
            if ra.parameter > a.parameter {
                pending.push_back((a, ra));
            }
            if rb.parameter < b.parameter {
                pending.push_back((rb, b));
            }
        }
    }

    events.sort_by(|x, y| x.bracket[0].total_cmp(&y.bracket[0]));
    Ok((merge_close(events, resolution), warnings))
}

fn merge_close(events: Vec<BifurcationEvent>, resolution: f64) -> Vec<BifurcationEvent> {
    let mut out: Vec<BifurcationEvent> = Vec::with_capacity(events.len());
    for e in events {
        match out.last_mut() {
            Some(prev) if resolution > 0.0 && e.bracket[0] - prev.bracket[1] <= resolution => {
                let mut m = BifurcationEvent::new(
                    [prev.bracket[0], e.bracket[1].max(prev.bracket[1])],
                    prev.left_morse,
                    e.right_morse,
                    prev.kernel_jump.max(e.kernel_jump),
                );
                m.merged = true;
                *prev = m;
            }
            _ => out.push(e),
        }
    }
    out
}

/// Componentwise total of the bifurcation indices; reported, not asserted.
pub fn index_sum_check(events: &[BifurcationEvent]) -> EulerRingElement {
    events.iter().map(|e| e.bif_index.clone()).sum()
}

// ---------------------------------------------------------------------------
// 2D region mapping over the rosette mass plane

/// Inclusive grid `m0_range x m1_range` with `n0 x n1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2d {
    pub m0_range: [f64; 2],
    pub m1_range: [f64; 2],
    pub n0: usize,
    pub n1: usize,
}

impl Grid2d {
    pub fn new(m0_range: [f64; 2], m1_range: [f64; 2], n0: usize, n1: usize) -> Result<Self> {
        if n0 < 2 || n1 < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least 2x2 nodes".into(),
            ));
        }
        for r in [m0_range, m1_range] {
            if !(r[0] < r[1]) || !r[0].is_finite() || !r[1].is_finite() {
                return Err(Error::InvalidArgument(format!("empty range {r:?}")));
            }
        }
        Ok(Self {
            m0_range,
            m1_range,
            n0,
            n1,
        })
    }

    pub fn m0(&self, i: usize) -> f64 {
        node(self.m0_range, self.n0, i)
    }

    pub fn m1(&self, j: usize) -> f64 {
        node(self.m1_range, self.n1, j)
    }
}

fn node(range: [f64; 2], n: usize, i: usize) -> f64 {
    if i + 1 == n {
        range[1]
    } else {
        range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Nondegenerate,
    Degenerate,
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub m0: f64,
    pub m1: f64,
    pub status: CellStatus,
    pub morse_index: Option<usize>,
    pub kernel_dim: Option<usize>,
    pub det_b: Option<f64>,
    pub region: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: usize,
    pub morse_index: usize,
    pub cells: usize,
    /// A member cell nearest to the region's centroid.
    pub sample: [f64; 2],
}

/// Cell edges separating two regions, aggregated per region pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub regions: [usize; 2],
    pub morse_indices: [usize; 2],
    pub edges: usize,
    pub global: bool,
    /// Index from the first region to the second.
    pub bif_index: EulerRingElement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub grid: Grid2d,
    /// Row-major: index `i0 * n1 + i1`.
    pub cells: Vec<MapCell>,
    pub regions: Vec<Region>,
    pub boundaries: Vec<Boundary>,
    pub index_set: BTreeSet<usize>,
}

impl RegionMap {
    pub fn cell(&self, i0: usize, i1: usize) -> &MapCell {
        &self.cells[i0 * self.grid.n1 + i1]
    }

    /// Morse-index changes met along the row `m0 = grid.m0(i0)` as `m1`
    /// increases, skipping degenerate and excluded cells.
    pub fn row_transitions(&self, i0: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut last = None;
        for i1 in 0..self.grid.n1 {
            if let Some(m) = self
                .cell(i0, i1)
                .morse_index
                .filter(|_| self.cell(i0, i1).status == CellStatus::Nondegenerate)
            {
                if let Some(prev) = last {
                    if prev != m {
                        out.push((prev, m));
                    }
                }
                last = Some(m);
            }
        }
        out
    }

    /// Values of `m0` whose row crosses exactly `count` index changes.
    pub fn rows_with_transitions(&self, count: usize) -> Vec<f64> {
        (0..self.grid.n0)
            .filter(|&i0| self.row_transitions(i0).len() == count)
            .map(|i0| self.grid.m0(i0))
            .collect()
    }

    pub fn global_boundaries(&self) -> impl Iterator<Item = &Boundary> {
        self.boundaries.iter().filter(|b| b.global)
    }
}

/// Per-node Morse indices of the rosette family over `grid`, with connected
/// constant-index regions and the boundaries between them. Nodes where the
/// masses are inadmissible are excluded rather than fatal.
pub fn map_2d(
    family: &RosetteFamily,
    grid: &Grid2d,
    tau_zero: f64,
    threads: Option<usize>,
) -> Result<RegionMap> {
    let nodes: Vec<(f64, f64)> = (0..grid.n0)
        .flat_map(|i| (0..grid.n1).map(move |j| (i, j)))
        .map(|(i, j)| (grid.m0(i), grid.m1(j)))
        .collect();
    let evals = with_pool(threads, || {
        nodes
            .par_iter()
            .map(|&(m0, m1)| match family.point(m0, m1) {
                Ok(p) => p.spectrum(tau_zero).map(Some),
                Err(Error::InvalidMasses(_)) | Err(Error::MassSolveFailed(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Vec<_>>()
    })?;

    let mut cells = Vec::with_capacity(nodes.len());
    for (&(m0, m1), e) in nodes.iter().zip(evals) {
        let cell = match e? {
            None => MapCell {
                m0,
                m1,
                status: CellStatus::Excluded,
                morse_index: None,
                kernel_dim: None,
                det_b: None,
                region: None,
            },
            Some(s) => MapCell {
                m0,
                m1,
                status: if s.is_nondegenerate() {
                    CellStatus::Nondegenerate
                } else {
                    CellStatus::Degenerate
                },
                morse_index: Some(s.morse_index()),
                kernel_dim: Some(s.kernel_dim()),
                det_b: Some(s.det_b),
                region: None,
            },
        };
        cells.push(cell);
    }

    let (n0, n1) = (grid.n0, grid.n1);
    let idx = |i: usize, j: usize| i * n1 + j;
    let in_region = |c: &MapCell| c.status == CellStatus::Nondegenerate;
    let neighbors = |i: usize, j: usize| {
        let mut v = Vec::with_capacity(4);
        if i > 0 {
            v.push((i - 1, j));
        }
        if i + 1 < n0 {
            v.push((i + 1, j));
        }
        if j > 0 {
            v.push((i, j - 1));
        }
        if j + 1 < n1 {
            v.push((i, j + 1));
        }
        v
    };

    let mut regions = Vec::new();
    for i in 0..n0 {
        for j in 0..n1 {
            if !in_region(&cells[idx(i, j)]) || cells[idx(i, j)].region.is_some() {
                continue;
            }
            let label = regions.len();
            let morse = cells[idx(i, j)].morse_index.unwrap();
            let mut members = Vec::new();
            let mut queue = VecDeque::from([(i, j)]);
            cells[idx(i, j)].region = Some(label);
            while let Some((a, b)) = queue.pop_front() {
                members.push((a, b));
                for (c, d) in neighbors(a, b) {
                    let cell = &mut cells[idx(c, d)];
                    if cell.status == CellStatus::Nondegenerate
                        && cell.region.is_none()
                        && cell.morse_index == Some(morse)
                    {
                        cell.region = Some(label);
                        queue.push_back((c, d));
                    }
                }
            }
            members.sort();
            let count = members.len() as f64;
            let ci = members.iter().map(|m| m.0 as f64).sum::<f64>() / count;
            let cj = members.iter().map(|m| m.1 as f64).sum::<f64>() / count;
            let &(si, sj) = members
                .iter()
                .min_by(|x, y| {
                    let dx = (x.0 as f64 - ci).powi(2) + (x.1 as f64 - cj).powi(2);
                    let dy = (y.0 as f64 - ci).powi(2) + (y.1 as f64 - cj).powi(2);
                    dx.total_cmp(&dy)
                })
                .unwrap();
            regions.push(Region {
                label,
                morse_index: morse,
                cells: members.len(),
                sample: [grid.m0(si), grid.m1(sj)],
            });
        }
    }

    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..n0 {
        for j in 0..n1 {
            let Some(ra) = cells[idx(i, j)].region else {
                continue;
            };
            for (c, d) in [(i + 1, j), (i, j + 1)] {
                if c >= n0 || d >= n1 {
                    continue;
                }
                if let Some(rb) = cells[idx(c, d)].region {
                    if ra != rb && regions[ra].morse_index != regions[rb].morse_index {
                        *edges.entry((ra.min(rb), ra.max(rb))).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    let boundaries = edges
        .into_iter()
        .map(|((a, b), count)| {
            let (ma, mb) = (regions[a].morse_index, regions[b].morse_index);
            Boundary {
                regions: [a, b],
                morse_indices: [ma, mb],
                edges: count,
                global: ma % 2 != mb % 2,
                bif_index: index_between(ma, mb),
            }
        })
        .collect();
    let index_set = regions.iter().map(|r| r.morse_index).collect();

    Ok(RegionMap {
        grid: *grid,
        cells,
        regions,
        boundaries,
        index_set,
    })
}
