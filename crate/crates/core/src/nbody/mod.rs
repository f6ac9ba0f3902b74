//! Planar N-body geometry and the rotation-invariant augmented potential
//! `phi = U + lambda * I`.
//!
//! Everything uses the flat layout `(x1, y1, x2, y2, ...)`; matrices are
//! indexed the same way. The gravitational constant is 1.

pub mod fd;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lower bound on pairwise distances.
pub const DEFAULT_COLLISION_FLOOR: f64 = 1e-12;

/// Moments of inertia at or below this are rejected by [`lambda_of`].
pub const INERTIA_FLOOR: f64 = 1e-24;

/// Configurations with Euclidean norm below this have no orbit tangent.
pub const ZERO_CONFIGURATION_TOL: f64 = 1e-12;

/// Positions of `N` bodies in the plane, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Configuration {
    flat: Vec<f64>,
}

impl Configuration {
    pub fn new(flat: Vec<f64>) -> Result<Self> {
        if flat.is_empty() || !flat.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "flat position vector must have even positive length, got {}",
                flat.len()
            )));
        }
        if let Some(k) = flat.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {k} is not finite"
            )));
        }
        Ok(Self { flat })
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().flat_map(|p| [p[0], p[1]]).collect())
    }

    pub fn n_bodies(&self) -> usize {
        self.flat.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.flat.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flat
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.flat[2 * i], self.flat[2 * i + 1]]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.flat.chunks_exact(2).map(|c| [c[0], c[1]])
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.flat)
    }

    pub fn norm(&self) -> f64 {
        self.flat.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Smallest pairwise distance and the pair attaining it. A single body
    /// yields `(inf, 0, 0)`.
    pub fn min_pair_distance(&self) -> (f64, usize, usize) {
        let n = self.n_bodies();
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            let a = self.point(i);
            for j in (i + 1)..n {
                let b = self.point(j);
                let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        best
    }

    /// Membership in the collision-free set, with a distance floor.
    pub fn check_separated(&self, floor: f64) -> Result<()> {
        let (distance, i, j) = self.min_pair_distance();
        if distance <= floor {
            return Err(Error::Collision {
                i,
                j,
                distance,
                floor,
            });
        }
        Ok(())
    }

    pub fn rotated(&self, g: &Rotation) -> Self {
        Self {
            flat: g.apply_flat(&self.flat),
        }
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            flat: self.flat.iter().map(|x| r * x).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for Configuration {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Configuration> for Vec<f64> {
    fn from(c: Configuration) -> Self {
        c.flat
    }
}

/// Strictly positive body masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassVector(Vec<f64>);

impl MassVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::DimensionMismatch("empty mass vector".into()));
        }
        for (index, &value) in masses.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveMass { index, value });
            }
        }
        Ok(Self(masses))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|m| c * m).collect())
    }

    fn check_matches(&self, q: &Configuration) -> Result<()> {
        if self.len() != q.n_bodies() {
            return Err(Error::DimensionMismatch(format!(
                "{} masses for {} bodies",
                self.len(),
                q.n_bodies()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for MassVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MassVector> for Vec<f64> {
    fn from(m: MassVector) -> Self {
        m.0
    }
}

/// An element of SO(2), parameterized by its angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub angle: f64,
}

impl Rotation {
    pub fn new(angle: f64) -> Self {
        Self { angle }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.angle.sin_cos();
        [[c, -s], [s, c]]
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation::new(self.angle + other.angle)
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let m = self.matrix();
        [
            m[0][0] * p[0] + m[0][1] * p[1],
            m[1][0] * p[0] + m[1][1] * p[1],
        ]
    }

    /// Applies the rotation to every consecutive pair of a flat vector.
    pub fn apply_flat(&self, v: &[f64]) -> Vec<f64> {
        v.chunks_exact(2)
            .flat_map(|c| self.apply([c[0], c[1]]))
            .collect()
    }

    /// Block-diagonal lift to `2n` dimensions.
    pub fn lift(&self, n_bodies: usize) -> DMatrix<f64> {
        let m = self.matrix();
        let mut g = DMatrix::zeros(2 * n_bodies, 2 * n_bodies);
        for b in 0..n_bodies {
            for r in 0..2 {
                for c in 0..2 {
                    g[(2 * b + r, 2 * b + c)] = m[r][c];
                }
            }
        }
        g
    }
}

/// Newtonian potential `sum_{i<j} m_i m_j / |q_i - q_j|`.
pub fn potential_u(q: &Configuration, m: &MassVector) -> Result<f64> {
    potential_u_with_floor(q, m, DEFAULT_COLLISION_FLOOR)
}

pub fn potential_u_with_floor(q: &Configuration, m: &MassVector, floor: f64) -> Result<f64> {
    m.check_matches(q)?;
    q.check_separated(floor)?;
    let ms = m.as_slice();
    let n = q.n_bodies();
    let mut u = 0.0;
    for i in 0..n {
        let a = q.point(i);
        for j in (i + 1)..n {
            let b = q.point(j);
            u += ms[i] * ms[j] / (a[0] - b[0]).hypot(a[1] - b[1]);
        }
    }
    Ok(u)
}

/// `1/2 sum_j m_j |q_j|^2`. Total on any configuration of matching size.
pub fn moment_of_inertia(q: &Configuration, m: &MassVector) -> Result<f64> {
    m.check_matches(q)?;
    Ok(0.5
        * q.points()
            .zip(m.as_slice())
            .map(|(p, mj)| mj * (p[0] * p[0] + p[1] * p[1]))
            .sum::<f64>())
}

/// The central-configuration multiplier `U / (2 I)`.
pub fn lambda_of(q: &Configuration, m: &MassVector) -> Result<f64> {
    let inertia = moment_of_inertia(q, m)?;
    if inertia <= INERTIA_FLOOR {
        return Err(Error::DegenerateInertia(inertia));
    }
    Ok(potential_u(q, m)? / (2.0 * inertia))
}

/// Unit tangent `(J q_1, ..., J q_N)` to the rotation orbit through `q`,
/// where `J` is the rotation by a right angle.
pub fn orbit_tangent(q: &Configuration) -> Result<DVector<f64>> {
    let norm = q.norm();
    if norm < ZERO_CONFIGURATION_TOL {
        return Err(Error::ZeroConfiguration(norm));
    }
    let mut t = DVector::zeros(q.dim());
    for (i, p) in q.points().enumerate() {
        t[2 * i] = -p[1] / norm;
        t[2 * i + 1] = p[0] / norm;
    }
    Ok(t)
}

/// `phi(q) = U(q, m) + lambda I(q, m)` with masses and `lambda` frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPotential {
    masses: MassVector,
    lambda: f64,
    collision_floor: f64,
}

impl AugmentedPotential {
    pub fn new(masses: MassVector, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidLambda(lambda));
        }
        Ok(Self {
            masses,
            lambda,
            collision_floor: DEFAULT_COLLISION_FLOOR,
        })
    }

    /// Context whose `lambda` is the one making `q` balanced, if it is.
    pub fn matched(q: &Configuration, masses: MassVector) -> Result<Self> {
        let lambda = lambda_of(q, &masses)?;
        Self::new(masses, lambda)
    }

    pub fn with_collision_floor(mut self, floor: f64) -> Self {
        self.collision_floor = floor;
        self
    }

    pub fn masses(&self) -> &MassVector {
        &self.masses
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn collision_floor(&self) -> f64 {
        self.collision_floor
    }

    fn check(&self, q: &Configuration) -> Result<()> {
        self.masses.check_matches(q)?;
        q.check_separated(self.collision_floor)
    }

    pub fn value(&self, q: &Configuration) -> Result<f64> {
        let u = potential_u_with_floor(q, &self.masses, self.collision_floor)?;
        Ok(u + self.lambda * moment_of_inertia(q, &self.masses)?)
    }

    pub fn gradient(&self, q: &Configuration) -> Result<DVector<f64>> {
        self.check(q)?;
        let m = self.masses.as_slice();
        let n = q.n_bodies();
        let mut g = DVector::zeros(2 * n);
        for i in 0..n {
            let a = q.point(i);
            g[2 * i] += self.lambda * m[i] * a[0];
            g[2 * i + 1] += self.lambda * m[i] * a[1];
            for j in (i + 1)..n {
                let b = q.point(j);
                let d = [a[0] - b[0], a[1] - b[1]];
                let r = d[0].hypot(d[1]);
                let s = m[i] * m[j] / (r * r * r);
                g[2 * i] -= s * d[0];
                g[2 * i + 1] -= s * d[1];
                g[2 * j] += s * d[0];
                g[2 * j + 1] += s * d[1];
            }
        }
        Ok(g)
    }

    /// Closed-form Hessian. Each pair contributes `m_i m_j (3 u u^T - Id) / r^3`
    /// to the diagonal blocks and its negative off the diagonal; the inertia
    /// term adds `lambda m_j Id` to each diagonal block.
    pub fn hessian(&self, q: &Configuration) -> Result<DMatrix<f64>> {
        self.check(q)?;
        let m = self.masses.as_slice();
        let n = q.n_bodies();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let a = q.point(i);
            h[(2 * i, 2 * i)] += self.lambda * m[i];
            h[(2 * i + 1, 2 * i + 1)] += self.lambda * m[i];
            for j in (i + 1)..n {
                let b = q.point(j);
                let d = [a[0] - b[0], a[1] - b[1]];
                let r = d[0].hypot(d[1]);
                let u = [d[0] / r, d[1] / r];
                let s = m[i] * m[j] / (r * r * r);
                for r_ in 0..2 {
                    for c in 0..2 {
                        let delta = if r_ == c { 1.0 } else { 0.0 };
                        let v = s * (3.0 * u[r_] * u[c] - delta);
                        h[(2 * i + r_, 2 * i + c)] += v;
                        h[(2 * j + r_, 2 * j + c)] += v;
                        h[(2 * i + r_, 2 * j + c)] -= v;
                        h[(2 * j + r_, 2 * i + c)] -= v;
                    }
                }
            }
        }
        let ht = h.transpose();
        Ok((h + ht) * 0.5)
    }

    /// Euclidean norm of the gradient.
    pub fn residual(&self, q: &Configuration) -> Result<f64> {
        Ok(self.gradient(q)?.norm())
    }
}

/// `grad phi` for a potential context; see [`AugmentedPotential::gradient`].
pub fn grad_phi(q: &Configuration, ctx: &AugmentedPotential) -> Result<DVector<f64>> {
    ctx.gradient(q)
}

pub fn hessian_phi(q: &Configuration, ctx: &AugmentedPotential) -> Result<DMatrix<f64>> {
    ctx.hessian(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_body() -> (Configuration, MassVector) {
        (
            Configuration::from_points(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap(),
            MassVector::new(vec![1.0, 1.0]).unwrap(),
        )
    }

    #[test]
    fn two_body_closed_forms() {
        let (q, m) = two_body();
        assert_eq!(potential_u(&q, &m).unwrap(), 0.5);
        assert_eq!(moment_of_inertia(&q, &m).unwrap(), 1.0);
        assert_eq!(lambda_of(&q, &m).unwrap(), 0.25);
        let lam2 = lambda_of(&q.scaled(2.0), &m).unwrap();
        assert!((lam2 - 1.0 / 32.0).abs() < 1e-16);
    }

    #[test]
    fn two_body_is_critical() {
        let (q, m) = two_body();
        let ctx = AugmentedPotential::new(m, 0.25).unwrap();
        assert!(ctx.gradient(&q).unwrap().amax() < 1e-14);
    }

    #[test]
    fn u_scales_quadratically_in_masses() {
        let q = Configuration::from_points(&[[0.3, 0.1], [-0.7, 0.2], [0.1, -0.9]]).unwrap();
        let m = MassVector::new(vec![1.0, 2.0, 0.5]).unwrap();
        let u = potential_u(&q, &m).unwrap();
        let u3 = potential_u(&q, &m.scaled(3.0).unwrap()).unwrap();
        assert!((u3 - 9.0 * u).abs() < 1e-13 * u3);
    }

    #[test]
    fn inertia_zero_at_origin() {
        let q = Configuration::new(vec![0.0; 6]).unwrap();
        let m = MassVector::new(vec![1.0; 3]).unwrap();
        assert_eq!(moment_of_inertia(&q, &m).unwrap(), 0.0);
        assert!(matches!(potential_u(&q, &m), Err(Error::Collision { .. })));
        assert!(matches!(
            lambda_of(&q, &m),
            Err(Error::DegenerateInertia(_))
        ));
    }

    #[test]
    fn collision_floor_is_configurable() {
        let q = Configuration::from_points(&[[0.0, 0.0], [1e-6, 0.0]]).unwrap();
        let m = MassVector::new(vec![1.0, 1.0]).unwrap();
        assert!(potential_u(&q, &m).is_ok());
        assert!(matches!(
            potential_u_with_floor(&q, &m, 1e-3),
            Err(Error::Collision { i: 0, j: 1, .. })
        ));
        let ctx = AugmentedPotential::new(m, 1.0)
            .unwrap()
            .with_collision_floor(1e-3);
        assert!(ctx.hessian(&q).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Configuration::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(Configuration::new(vec![]).is_err());
        assert!(matches!(
            MassVector::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveMass { index: 1, .. })
        ));
        let m = MassVector::new(vec![1.0]).unwrap();
        assert!(matches!(
            AugmentedPotential::new(m.clone(), -1.0),
            Err(Error::InvalidLambda(_))
        ));
        let (q, _) = two_body();
        assert!(matches!(
            potential_u(&q, &m),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn tangent_of_single_body() {
        let q = Configuration::from_points(&[[1.0, 0.0]]).unwrap();
        let t = orbit_tangent(&q).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 1.0]);
        let z = Configuration::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            orbit_tangent(&z),
            Err(Error::ZeroConfiguration(_))
        ));
    }

    #[test]
    fn tangent_is_orthogonal_and_equivariant() {
        let q = Configuration::from_points(&[[0.3, -0.2], [1.1, 0.4], [-0.5, 0.9]]).unwrap();
        let t = orbit_tangent(&q).unwrap();
        assert!(t.dot(&q.to_vector()).abs() < 1e-14);
        assert!((t.norm() - 1.0).abs() < 1e-14);
        let g = Rotation::new(0.83);
        let tg = orbit_tangent(&q.rotated(&g)).unwrap();
        let gt = g.apply_flat(t.as_slice());
        for (a, b) in tg.iter().zip(&gt) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_group_laws() {
        let (s, t) = (Rotation::new(0.4), Rotation::new(-2.3));
        let m = s.matrix();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - 1.0).abs() < 1e-15);
        let g = s.lift(3);
        assert!((&g * g.transpose() - DMatrix::identity(6, 6)).amax() < 1e-15);
        let st = s.lift(1) * t.lift(1);
        assert!((st - s.compose(&t).lift(1)).amax() < 1e-15);
    }

    #[test]
    fn serde_roundtrip_validates() {
        let (q, m) = two_body();
        let js = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<Configuration>(&js).unwrap(), q);
        assert!(serde_json::from_str::<MassVector>("[1.0, -2.0]").is_err());
        let js = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<MassVector>(&js).unwrap(), m);
    }
}
