//! Trivial families of central configurations.
//!
//! Masses are recovered by a ring-wise linear solve: on a ring-symmetric
//! shape each ring contributes one radial balance equation that is linear
//! in the unknown ring masses and in `lambda`. The reference closed forms
//! are kept only for cross-checking.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI, SQRT_2};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbody::{AugmentedPotential, Configuration, MassVector, Rotation};
use crate::spectral::{
    analyze_point, scaled_residual_tolerance, PointSpectrum, DEFAULT_RESIDUAL_TOL,
};

/// A 1D or 2D family parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Parameter {
    One(f64),
    Two([f64; 2]),
}

/// A verified central configuration on a family, with its frozen `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub parameter: Parameter,
    pub configuration: Configuration,
    pub masses: MassVector,
    pub lambda: f64,
    /// `|grad phi|` at the configuration.
    pub residual: f64,
}

impl FamilyPoint {
    /// Computes `lambda` and rejects the point unless
    /// `|grad phi| <= residual_tol * max(1, |H|_F)`.
    pub fn new(
        parameter: Parameter,
        configuration: Configuration,
        masses: MassVector,
        residual_tol: f64,
    ) -> Result<Self> {
        let ctx = AugmentedPotential::matched(&configuration, masses)?;
        let h = ctx.hessian(&configuration)?;
        let residual = ctx.residual(&configuration)?;
        let tolerance = scaled_residual_tolerance(residual_tol, &h);
        if !(residual <= tolerance) {
            return Err(Error::NotCritical {
                residual,
                tolerance,
            });
        }
        let lambda = ctx.lambda();
        Ok(Self {
            parameter,
            configuration,
            masses: ctx.masses().clone(),
            lambda,
            residual,
        })
    }

    pub fn potential(&self) -> AugmentedPotential {
        AugmentedPotential::new(self.masses.clone(), self.lambda)
            .expect("family lambda is positive by construction")
    }

    pub fn spectrum(&self, tau_zero: f64) -> Result<PointSpectrum> {
        analyze_point(&self.configuration, &self.potential(), tau_zero)
    }

    /// Scalar parameter, or the second coordinate of a 2D one.
    pub fn scalar_parameter(&self) -> f64 {
        match self.parameter {
            Parameter::One(p) => p,
            Parameter::Two([_, p]) => p,
        }
    }
}

/// One-parameter family of central configurations.
pub trait Family1d: Sync {
    fn name(&self) -> String;
    fn point(&self, parameter: f64) -> Result<FamilyPoint>;
}

/// True when no rotation `2 pi k / L` (`L <= 2N`, `0 < k < L`) fixes the
/// labeled configuration.
pub fn has_trivial_isotropy(q: &Configuration, tol: f64) -> bool {
    let n = q.n_bodies();
    for l in 2..=(2 * n) {
        for k in 1..l {
            let g = Rotation::new(2.0 * PI * k as f64 / l as f64);
            let moved = q.rotated(&g);
            let dist = moved
                .as_slice()
                .iter()
                .zip(q.as_slice())
                .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
            if dist <= tol {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// ring-wise balancing masses

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RingMass {
    Fixed(f64),
    Unknown,
}

/// Bodies sharing one mass at a common radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    pub bodies: Vec<usize>,
    pub mass: RingMass,
}

impl Ring {
    pub fn fixed(bodies: impl IntoIterator<Item = usize>, mass: f64) -> Self {
        Self {
            bodies: bodies.into_iter().collect(),
            mass: RingMass::Fixed(mass),
        }
    }

    pub fn unknown(bodies: impl IntoIterator<Item = usize>) -> Self {
        Self {
            bodies: bodies.into_iter().collect(),
            mass: RingMass::Unknown,
        }
    }
}

/// Raw solution of the ring balance equations; masses may be nonpositive.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSolution {
    /// One mass per ring, in the order given.
    pub ring_masses: Vec<f64>,
    pub lambda: f64,
}

impl RingSolution {
    pub fn body_masses(&self, rings: &[Ring], n_bodies: usize) -> Vec<f64> {
        let mut m = vec![0.0; n_bodies];
        for (ring, &mass) in rings.iter().zip(&self.ring_masses) {
            for &b in &ring.bodies {
                m[b] = mass;
            }
        }
        m
    }
}

const RING_RADIUS_TOL: f64 = 1e-12;

fn validate_rings(shape: &Configuration, rings: &[Ring]) -> Result<Vec<f64>> {
    let n = shape.n_bodies();
    let mut seen = vec![false; n];
    for ring in rings {
        if ring.bodies.is_empty() {
            return Err(Error::InvalidArgument("empty ring".into()));
        }
        for &b in &ring.bodies {
            if b >= n || seen[b] {
                return Err(Error::InvalidArgument(format!(
                    "body {b} is out of range or in more than one ring"
                )));
            }
            seen[b] = true;
        }
        if let RingMass::Fixed(m) = ring.mass {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidMasses(format!("fixed ring mass {m}")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidArgument("rings must cover every body".into()));
    }
    if !rings.iter().any(|r| matches!(r.mass, RingMass::Fixed(_))) {
        return Err(Error::InvalidArgument(
            "at least one ring mass must be fixed".into(),
        ));
    }
    let mut radii = Vec::with_capacity(rings.len());
    for (k, ring) in rings.iter().enumerate() {
        let rs: Vec<f64> = ring
            .bodies
            .iter()
            .map(|&b| {
                let p = shape.point(b);
                p[0].hypot(p[1])
            })
            .collect();
        let lo = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rs.iter().cloned().fold(0.0, f64::max);
        if hi - lo > RING_RADIUS_TOL * hi.max(1.0) {
            return Err(Error::AsymmetricShape {
                ring: k,
                spread: hi - lo,
            });
        }
        radii.push(hi);
    }
    Ok(radii)
}

/// Solves the radial balance equations of a ring-symmetric shape.
///
/// For the first body `i` of each ring at radius `R > 0`,
/// `sum_l m_l c_l + lambda R = 0` with
/// `c_l = sum_{j in ring l, j != i} (q_j - q_i) . u_i / |q_j - q_i|^3`.
/// Rings at the origin contribute no equation.
pub fn solve_ring_system(shape: &Configuration, rings: &[Ring]) -> Result<RingSolution> {
    shape.check_separated(crate::nbody::DEFAULT_COLLISION_FLOOR)?;
    let radii = validate_rings(shape, rings)?;
    let unknown: Vec<usize> = rings
        .iter()
        .enumerate()
        .filter(|(_, r)| r.mass == RingMass::Unknown)
        .map(|(k, _)| k)
        .collect();
    let n_unknowns = unknown.len() + 1;
    let equations: Vec<usize> = (0..rings.len()).filter(|&k| radii[k] > 0.0).collect();
    if equations.len() < n_unknowns {
        return Err(Error::MassSolveFailed(format!(
            "{} balance equations for {} unknowns",
            equations.len(),
            n_unknowns
        )));
    }

    let mut a = DMatrix::zeros(equations.len(), n_unknowns);
    let mut rhs = DVector::zeros(equations.len());
    for (row, &k) in equations.iter().enumerate() {
        let i = rings[k].bodies[0];
        let qi = shape.point(i);
        let u = [qi[0] / radii[k], qi[1] / radii[k]];
        for (l, ring) in rings.iter().enumerate() {
            let c: f64 = ring
                .bodies
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    let qj = shape.point(j);
                    let d = [qj[0] - qi[0], qj[1] - qi[1]];
                    let r = d[0].hypot(d[1]);
                    (d[0] * u[0] + d[1] * u[1]) / (r * r * r)
                })
                .sum();
            match ring.mass {
                RingMass::Fixed(m) => rhs[row] -= m * c,
                RingMass::Unknown => {
                    let col = unknown.iter().position(|&x| x == l).unwrap();
                    a[(row, col)] = c;
                }
            }
        }
        a[(row, n_unknowns - 1)] = radii[k];
    }

    let x = if equations.len() == n_unknowns {
        a.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::MassSolveFailed("singular balance system".into()))?
    } else {
        a.svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::MassSolveFailed(e.to_string()))?
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::MassSolveFailed("non-finite solution".into()));
    }

    let ring_masses = rings
        .iter()
        .enumerate()
        .map(|(l, ring)| match ring.mass {
            RingMass::Fixed(m) => m,
            RingMass::Unknown => x[unknown.iter().position(|&u| u == l).unwrap()],
        })
        .collect();
    Ok(RingSolution {
        ring_masses,
        lambda: x[n_unknowns - 1],
    })
}

/// Masses that make `shape` central, verified through the gradient residual.
pub fn solve_balancing_masses(shape: &Configuration, rings: &[Ring]) -> Result<MassVector> {
    let sol = solve_ring_system(shape, rings)?;
    if let Some((k, &m)) = sol
        .ring_masses
        .iter()
        .enumerate()
        .find(|(_, &m)| !(m > 0.0))
    {
        return Err(Error::MassSolveFailed(format!(
            "ring {k} gets nonpositive mass {m}"
        )));
    }
    if !(sol.lambda > 0.0) {
        return Err(Error::MassSolveFailed(format!(
            "nonpositive lambda {}",
            sol.lambda
        )));
    }
    let masses = MassVector::new(sol.body_masses(rings, shape.n_bodies()))?;
    let ctx = AugmentedPotential::matched(shape, masses)?;
    let residual = ctx.residual(shape)?;
    let tolerance = scaled_residual_tolerance(DEFAULT_RESIDUAL_TOL, &ctx.hessian(shape)?);
    if residual > tolerance {
        return Err(Error::MassSolveFailed(format!(
            "solved masses leave residual {residual:e} (tolerance {tolerance:e})"
        )));
    }
    Ok(ctx.masses().clone())
}

// ---------------------------------------------------------------------------
// two nested squares

/// Reference upper end of the two-squares parameter range, for comparison
/// with the located value.
pub const TWO_SQUARES_R0_PRINTED: f64 = 0.37602;

/// Outer unit square (bodies 1-4) and an inner square of circumradius `r`
/// (bodies 5-8), in the printed order.
pub fn two_squares_shape(r: f64) -> Result<Configuration> {
    let s = SQRT_2 / 2.0 * r;
    Configuration::from_points(&[
        [-0.5, -0.5],
        [0.5, -0.5],
        [0.5, 0.5],
        [-0.5, 0.5],
        [-s, -s],
        [s, -s],
        [s, s],
        [-s, s],
    ])
}

/// Outer square carries the unknown mass, inner square mass 1.
pub fn two_squares_rings() -> Vec<Ring> {
    vec![Ring::unknown(0..4), Ring::fixed(4..8, 1.0)]
}

/// Signed outer mass from the ring solve, without positivity checks.
pub fn two_squares_outer_mass(r: f64) -> Result<f64> {
    Ok(solve_ring_system(&two_squares_shape(r)?, &two_squares_rings())?.ring_masses[0])
}

/// Upper end of the family: the zero of the solved outer mass, bracketed in
/// `[0.3, 0.45]` and bisected to width `1e-10`.
pub fn two_squares_r0() -> f64 {
    static R0: OnceLock<f64> = OnceLock::new();
    *R0.get_or_init(|| {
        let (mut lo, mut hi) = (0.3, 0.45);
        let mass = |r: f64| two_squares_outer_mass(r).expect("shape is collision-free here");
        debug_assert!(mass(lo) > 0.0 && mass(hi) < 0.0);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

pub fn two_squares_point(r: f64) -> Result<FamilyPoint> {
    let r0 = two_squares_r0();
    if !(r > 0.0 && r < r0) {
        return Err(Error::OutOfRange {
            value: r,
            lo: 0.0,
            hi: r0,
        });
    }
    let shape = two_squares_shape(r)?;
    let masses = solve_balancing_masses(&shape, &two_squares_rings())?;
    FamilyPoint::new(Parameter::One(r), shape, masses, DEFAULT_RESIDUAL_TOL)
}

/// Which square the indices `q_1..q_4` of the closed-form mass refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingLabeling {
    /// `q_1..q_4` is the outer square, as listed in the family definition.
    AsPrinted,
    /// `q_1..q_4` is the inner square.
    Swapped,
}

/// Closed-form mass `M_r = -B(r) / A(r)` of the bodies `q_1..q_4`, with
/// `R_ij = |q_i - q_j|^-3` and `D_ijk = (q_i - q_j) ^ (q_i - q_k)`.
pub fn two_squares_closed_form_mass(r: f64, labeling: RingLabeling) -> Result<f64> {
    let shape = two_squares_shape(r)?;
    let order: [usize; 8] = match labeling {
        RingLabeling::AsPrinted => [0, 1, 2, 3, 4, 5, 6, 7],
        RingLabeling::Swapped => [4, 5, 6, 7, 0, 1, 2, 3],
    };
    let q = |i: usize| shape.point(order[i - 1]);
    let rr = |i: usize, j: usize| {
        let (a, b) = (q(i), q(j));
        (a[0] - b[0]).hypot(a[1] - b[1]).powi(-3)
    };
    let wedge = |i: usize, j: usize, k: usize| {
        let (a, b, c) = (q(i), q(j), q(k));
        let u = [a[0] - b[0], a[1] - b[1]];
        let v = [a[0] - c[0], a[1] - c[1]];
        u[0] * v[1] - u[1] * v[0]
    };
    let a = (rr(1, 2) - rr(1, 5)) * wedge(1, 5, 2)
        + (rr(1, 3) - rr(1, 6)) * wedge(1, 6, 3)
        + (rr(1, 7) - rr(1, 2)) * wedge(1, 7, 2);
    let b = (rr(6, 7) - rr(1, 5)) * wedge(1, 5, 6)
        + (rr(1, 7) - rr(6, 7)) * wedge(5, 6, 3)
        + (rr(1, 6) - rr(5, 7)) * wedge(1, 6, 8);
    if a == 0.0 {
        return Err(Error::MassSolveFailed("A(r) vanishes".into()));
    }
    Ok(-b / a)
}

/// The labeling under which the closed form reproduces the solved mass at
/// `r`, if any does to `rel_tol`.
pub fn resolve_two_squares_labeling(r: f64, rel_tol: f64) -> Result<Option<RingLabeling>> {
    let solved = two_squares_outer_mass(r)?;
    for labeling in [RingLabeling::AsPrinted, RingLabeling::Swapped] {
        let cf = two_squares_closed_form_mass(r, labeling)?;
        if (cf - solved).abs() <= rel_tol * solved.abs() {
            return Ok(Some(labeling));
        }
    }
    Ok(None)
}

/// Two-squares family restricted to `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSquaresFamily {
    pub r_min: f64,
    pub r_max: f64,
}

impl TwoSquaresFamily {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        let r0 = two_squares_r0();
        if !(0.0 < r_min && r_min < r_max && r_max < r0) {
            return Err(Error::OutOfRange {
                value: if r_min <= 0.0 { r_min } else { r_max },
                lo: 0.0,
                hi: r0,
            });
        }
        Ok(Self { r_min, r_max })
    }

    /// The whole admissible range `(0, r0)`.
    pub fn full() -> Self {
        Self {
            r_min: f64::MIN_POSITIVE,
            r_max: two_squares_r0(),
        }
    }
}

impl Family1d for TwoSquaresFamily {
    fn name(&self) -> String {
        "two-squares".into()
    }

    fn point(&self, r: f64) -> Result<FamilyPoint> {
        if !(self.r_min <= r && r <= self.r_max) {
            return Err(Error::OutOfRange {
                value: r,
                lo: self.r_min,
                hi: self.r_max,
            });
        }
        two_squares_point(r)
    }
}

// ---------------------------------------------------------------------------
// 13-body rosette

/// Angle splitting the unit radius between the two hexagons.
pub const ROSETTE_THETA: f64 = FRAC_PI_3;
pub const ROSETTE_RADIUS: f64 = 1.0;

/// Hexagon of radius `cos(theta)` (bodies 1-6), hexagon of radius
/// `sin(theta)` rotated by `pi/6` (bodies 7-12) and a central body.
pub fn rosette_shape() -> Configuration {
    let r1 = ROSETTE_RADIUS * ROSETTE_THETA.cos();
    let r2 = ROSETTE_RADIUS * ROSETTE_THETA.sin();
    let mut pts = Vec::with_capacity(13);
    for k in 0..6 {
        pts.push(Rotation::new(2.0 * PI * k as f64 / 6.0).apply([r1, 0.0]));
    }
    for k in 0..6 {
        pts.push(Rotation::new(FRAC_PI_6 + 2.0 * PI * k as f64 / 6.0).apply([r2, 0.0]));
    }
    pts.push([0.0, 0.0]);
    Configuration::from_points(&pts).expect("rosette coordinates are finite")
}

pub fn rosette_rings(m0: f64, m1: f64) -> Vec<Ring> {
    vec![
        Ring::fixed(0..6, m1),
        Ring::unknown(6..12),
        Ring::fixed([12], m0),
    ]
}

/// Reference closed form for the outer-hexagon mass `m2(m0, m1)`.
pub fn rosette_m2_closed_form(m0: f64, m1: f64) -> f64 {
    let s3 = 3.0_f64.sqrt();
    let s7 = 7.0_f64.sqrt();
    let denom = -1862.0 * s3 - 7203.0 + 810.0 * s7 + 90.0 * s7 * s3;
    let c1 = 6.0 * (81.0 * s7 - 441.0 * s3 + 9.0 * s3 * s7 - 147.0);
    (-7644.0 * m0 + c1 * m1) / denom
}

/// Outer-hexagon mass from the ring solve.
pub fn rosette_m2_solved(m0: f64, m1: f64) -> Result<f64> {
    Ok(solve_ring_system(&rosette_shape(), &rosette_rings(m0, m1))?.ring_masses[1])
}

pub fn rosette_point(m0: f64, m1: f64) -> Result<FamilyPoint> {
    if !(m0 > 0.0 && m1 > 0.0 && m0.is_finite() && m1.is_finite()) {
        return Err(Error::InvalidMasses(format!(
            "m0 = {m0}, m1 = {m1} must be positive"
        )));
    }
    let shape = rosette_shape();
    let m2 = rosette_m2_solved(m0, m1)?;
    if !(m2 > 0.0) {
        return Err(Error::InvalidMasses(format!("m2({m0}, {m1}) = {m2} <= 0")));
    }
    let masses = solve_balancing_masses(&shape, &rosette_rings(m0, m1))?;
    FamilyPoint::new(
        Parameter::Two([m0, m1]),
        shape,
        masses,
        DEFAULT_RESIDUAL_TOL,
    )
}

/// The rosette family over the mass plane `(m0, m1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RosetteFamily;

impl RosetteFamily {
    pub fn point(&self, m0: f64, m1: f64) -> Result<FamilyPoint> {
        rosette_point(m0, m1)
    }

    pub fn slice(&self, m0: f64) -> RosetteSlice {
        RosetteSlice { m0 }
    }
}

/// Rosette family at fixed `m0`, parameterized by `m1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosetteSlice {
    pub m0: f64,
}

impl Family1d for RosetteSlice {
    fn name(&self) -> String {
        format!("rosette(m0={})", self.m0)
    }

    fn point(&self, m1: f64) -> Result<FamilyPoint> {
        rosette_point(self.m0, m1)
    }
}

// ---------------------------------------------------------------------------
// CSV-backed families: `parameter, x1, y1, ..., xN, yN, m1, ..., mN`

/// Parses family rows, skipping blank lines and `#` comments. Row numbers in
/// errors are 1-based line numbers.
pub fn parse_family_csv<R: Read>(reader: R, residual_tol: f64) -> Result<Vec<FamilyPoint>> {
    let mut points = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let row = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: row,
                    message: format!("bad number {:?}: {e}", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < 4 || (values.len() - 1) % 3 != 0 {
            return Err(Error::Parse {
                line: row,
                message: format!(
                    "expected 1 + 3N columns (parameter, positions, masses), got {}",
                    values.len()
                ),
            });
        }
        let n = (values.len() - 1) / 3;
        let wrap = |e: Error| Error::Parse {
            line: row,
            message: e.to_string(),
        };
        let q = Configuration::new(values[1..1 + 2 * n].to_vec()).map_err(wrap)?;
        let m = MassVector::new(values[1 + 2 * n..].to_vec()).map_err(wrap)?;
        let point = match FamilyPoint::new(Parameter::One(values[0]), q, m, residual_tol) {
            Ok(p) => p,
            Err(Error::NotCritical { residual, .. }) => {
                return Err(Error::NotCentral { row, residual })
            }
            Err(e) => return Err(wrap(e)),
        };
        points.push(point);
    }
    Ok(points)
}

pub fn csv_family_load(path: impl AsRef<Path>, residual_tol: f64) -> Result<Vec<FamilyPoint>> {
    parse_family_csv(std::fs::File::open(path)?, residual_tol)
}

/// Writes family rows using shortest round-trip float formatting, so that
/// [`parse_family_csv`] reproduces the inputs exactly. `comment`, if given,
/// is written first as a `#` line.
pub fn write_family_csv<W: Write>(
    mut out: W,
    points: &[FamilyPoint],
    comment: Option<&str>,
) -> Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    for p in points {
        let fields: Vec<String> = std::iter::once(p.scalar_parameter())
            .chain(p.configuration.as_slice().iter().copied())
            .chain(p.masses.as_slice().iter().copied())
            .map(crate::report::format_float)
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_squares_point_is_central() {
        let p = two_squares_point(0.2).unwrap();
        let m = p.masses.as_slice();
        assert!(m[0] > 0.0 && m[..4].iter().all(|&x| x == m[0]));
        assert!(m[4..].iter().all(|&x| x == 1.0));
        assert!(p.residual < 1e-9);
    }

    #[test]
    fn two_squares_range_errors() {
        assert!(matches!(
            two_squares_point(0.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            two_squares_point(0.4),
            Err(Error::OutOfRange { .. })
        ));
        assert!(TwoSquaresFamily::new(0.3, 0.2).is_err());
        assert!(TwoSquaresFamily::new(0.1, 0.38).is_err());
    }

    #[test]
    fn outer_mass_changes_sign_at_r0() {
        let r0 = two_squares_r0();
        assert!(two_squares_outer_mass(r0 - 1e-6).unwrap() > 0.0);
        assert!(two_squares_outer_mass(r0 + 1e-6).unwrap() < 0.0);
        // past r0 the family has no positive masses
        let shape = two_squares_shape(0.38).unwrap();
        assert!(matches!(
            solve_balancing_masses(&shape, &two_squares_rings()),
            Err(Error::MassSolveFailed(_))
        ));
    }

    #[test]
    fn printed_labeling_resolves() {
        assert_eq!(
            resolve_two_squares_labeling(0.25, 1e-9).unwrap(),
            Some(RingLabeling::AsPrinted)
        );
    }

    #[test]
    fn equilateral_triangle_any_fixed_mass() {
        let s = 3.0_f64.sqrt() / 2.0;
        let q = Configuration::from_points(&[[1.0, 0.0], [-0.5, s], [-0.5, -s]]).unwrap();
        let m = solve_balancing_masses(&q, &[Ring::fixed(0..3, 2.5)]).unwrap();
        assert_eq!(m.as_slice(), &[2.5, 2.5, 2.5]);
        let ctx = AugmentedPotential::matched(&q, m).unwrap();
        assert!(ctx.residual(&q).unwrap() < 1e-12);
    }

    #[test]
    fn ring_validation() {
        let q = Configuration::from_points(&[[1.0, 0.0], [-0.5, 0.0]]).unwrap();
        assert!(matches!(
            solve_ring_system(&q, &[Ring::fixed(0..2, 1.0)]),
            Err(Error::AsymmetricShape { ring: 0, .. })
        ));
        assert!(solve_ring_system(&q, &[Ring::fixed([0], 1.0)]).is_err());
        assert!(solve_ring_system(&q, &[Ring::unknown([0]), Ring::unknown([1])]).is_err());
    }

    #[test]
    fn rosette_geometry() {
        let q = rosette_shape();
        assert_eq!(q.n_bodies(), 13);
        assert_eq!(q.point(12), [0.0, 0.0]);
        let r1 = q.point(0)[0].hypot(q.point(0)[1]);
        let r2 = q.point(6)[0].hypot(q.point(6)[1]);
        assert!((r1 - 0.5).abs() < 1e-15);
        assert!((r2 / r1 - 3.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rosette_rejects_bad_masses() {
        assert!(matches!(
            rosette_point(-1.0, 1.0),
            Err(Error::InvalidMasses(_))
        ));
        assert!(matches!(
            rosette_point(1.0, 0.0),
            Err(Error::InvalidMasses(_))
        ));
    }

    #[test]
    fn isotropy_is_trivial_on_families() {
        assert!(has_trivial_isotropy(
            &two_squares_point(0.25).unwrap().configuration,
            1e-9
        ));
        assert!(has_trivial_isotropy(&rosette_shape(), 1e-9));
    }

    #[test]
    fn csv_parse_errors() {
        let bad = "0.0, 1, 0, -1, 0, 1, 1\n0.1, 1.1, 0, -1, 0, 1, 1\n";
        match parse_family_csv(bad.as_bytes(), 1e-9) {
            Err(Error::NotCentral { row, residual }) => {
                assert_eq!(row, 2);
                assert!(residual > 1e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_family_csv("0.0, 1, x, -1, 0, 1, 1".as_bytes(), 1e-9),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_family_csv("# c\n0.0, 1, 0, -1".as_bytes(), 1e-9),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn csv_two_body_row() {
        let pts = parse_family_csv("# two body\n0.0,1,0,-1,0,1,1\n".as_bytes(), 1e-9).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].lambda, 0.25);
    }
}
