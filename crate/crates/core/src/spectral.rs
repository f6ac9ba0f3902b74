//! Symmetric eigenanalysis: the full Hessian, its compression onto the
//! complement of the orbit tangent, kernel dimensions and Morse indices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbody::{orbit_tangent, AugmentedPotential, Configuration};

/// Default relative zero threshold for eigenvalue classification.
pub const DEFAULT_TAU_ZERO: f64 = 1e-8;

/// Default relative threshold on `|grad phi|` for a point to count as critical.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues, with eigenvectors as matching columns if requested.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<f64>>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Cyclic Jacobi eigensolver for small dense symmetric matrices.
pub fn eigh(m: &DMatrix<f64>, want_vectors: bool) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let scale = max_abs(m);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) || !scale.is_finite() {
        return Err(Error::NotSymmetric(asym));
    }

    // row-major working copy of the symmetrized input
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].abs())
            .sum();
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // after a few sweeps, entries negligible against both diagonals are dropped
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let nrp = arp - s * (arq + tau * arp);
                    let nrq = arq + s * (arp - tau * arq);
                    a[r * n + p] = nrp;
                    a[p * n + r] = nrp;
                    a[r * n + q] = nrq;
                    a[q * n + r] = nrq;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[r * n + p];
                        let vrq = v[r * n + q];
                        v[r * n + p] = vrp - s * (vrq + tau * vrp);
                        v[r * n + q] = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = v.map(|v| DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]));
    Ok(SymmetricEigen { values, vectors })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(eigh(m, false)?.values)
}

/// Orthonormal basis of the complement of a unit vector, as the columns of a
/// `n x (n-1)` matrix. Built from the Householder reflector that maps `t` to
/// a coordinate axis.
pub fn complement_basis(t: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = t.len();
    let norm = t.norm();
    if n < 2 || !(norm > 0.0) {
        return Err(Error::InvalidArgument(
            "orbit tangent must be a nonzero vector of dimension >= 2".into(),
        ));
    }
    let t = t / norm;
    let k = t.iamax();
    let mut w = t.clone();
    w[k] += t[k].signum();
    let beta = 2.0 / w.norm_squared();
    let reflector = DMatrix::identity(n, n) - (&w * w.transpose()) * beta;
    Ok(reflector.remove_column(k))
}

/// The Hessian compressed onto the complement of the orbit tangent.
#[derive(Debug, Clone)]
pub struct RestrictedHessian {
    pub b_matrix: DMatrix<f64>,
    pub basis: DMatrix<f64>,
}

impl RestrictedHessian {
    pub fn dim(&self) -> usize {
        self.b_matrix.nrows()
    }
}

/// `Q^T H Q` for a given orthonormal basis `Q` (columns).
pub fn restrict_with_basis(h: &DMatrix<f64>, basis: DMatrix<f64>) -> Result<RestrictedHessian> {
    if basis.nrows() != h.nrows() || h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows for a {}x{} matrix",
            basis.nrows(),
            h.nrows(),
            h.ncols()
        )));
    }
    let b = basis.transpose() * h * &basis;
    let bt = b.transpose();
    Ok(RestrictedHessian {
        b_matrix: (b + bt) * 0.5,
        basis,
    })
}

pub fn restrict_to_orbit_complement(
    h: &DMatrix<f64>,
    t: &DVector<f64>,
) -> Result<RestrictedHessian> {
    restrict_with_basis(h, complement_basis(t)?)
}

/// Classification of a symmetric matrix's spectrum against a zero threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub morse_index: usize,
    pub nonzero_product: f64,
    pub zero_tolerance_used: f64,
}

impl SpectralReport {
    /// Classify already computed ascending eigenvalues. Zero means
    /// `|mu| <= tau_zero * max(1, spectral radius)`.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, tau_zero: f64) -> Self {
        let radius = eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let zero_tolerance_used = tau_zero * radius.max(1.0);
        let mut kernel_dim = 0;
        let mut morse_index = 0;
        let mut nonzero_product = 1.0;
        for &mu in &eigenvalues {
            if mu.abs() <= zero_tolerance_used {
                kernel_dim += 1;
            } else {
                if mu < 0.0 {
                    morse_index += 1;
                }
                nonzero_product *= mu;
            }
        }
        Self {
            eigenvalues,
            kernel_dim,
            morse_index,
            nonzero_product,
            zero_tolerance_used,
        }
    }

    pub fn positive_count(&self) -> usize {
        self.eigenvalues.len() - self.kernel_dim - self.morse_index
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, x| a.min(x.abs()))
    }

    /// Product of all eigenvalues, i.e. the determinant.
    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }
}

pub fn spectral_report(m: &DMatrix<f64>, tau_zero: f64) -> Result<SpectralReport> {
    if !(tau_zero > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau_zero must be positive, got {tau_zero}"
        )));
    }
    Ok(SpectralReport::from_eigenvalues(eigenvalues(m)?, tau_zero))
}

/// Residual threshold `tol * max(1, |H|_F)` for criticality checks.
pub fn scaled_residual_tolerance(tol: f64, hessian: &DMatrix<f64>) -> f64 {
    tol * hessian.norm().max(1.0)
}

/// Everything the scans need at one point of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrum {
    /// Report for the full Hessian.
    pub full: SpectralReport,
    /// Report for the restricted Hessian `B`.
    pub restricted: SpectralReport,
    pub det_b: f64,
    /// `|grad phi|` at the point.
    pub residual: f64,
}

impl PointSpectrum {
    pub fn kernel_dim(&self) -> usize {
        self.full.kernel_dim
    }

    /// Morse index of `B`; the one used for degrees and classification.
    pub fn morse_index(&self) -> usize {
        self.restricted.morse_index
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.full.kernel_dim == 1
    }

    pub fn min_abs_eig(&self) -> f64 {
        self.restricted.min_abs_eigenvalue()
    }
}

/// Full and restricted spectral reports at `q`. Does not require `q` to be
/// critical; callers that need that should check `residual`.
pub fn analyze_point(
    q: &Configuration,
    ctx: &AugmentedPotential,
    tau_zero: f64,
) -> Result<PointSpectrum> {
    let h = ctx.hessian(q)?;
    let residual = ctx.residual(q)?;
    let full = spectral_report(&h, tau_zero)?;
    let b = restrict_to_orbit_complement(&h, &orbit_tangent(q)?)?;
    let restricted = spectral_report(&b.b_matrix, tau_zero)?;
    let det_b = restricted.determinant();
    Ok(PointSpectrum {
        full,
        restricted,
        det_b,
        residual,
    })
}

/// `det B` at a critical point. It vanishes exactly when the orbit is
/// degenerate, and equals the product of the nonzero Hessian eigenvalues
/// otherwise.
pub fn degeneracy_indicator(
    q: &Configuration,
    ctx: &AugmentedPotential,
    residual_tol: f64,
) -> Result<f64> {
    let h = ctx.hessian(q)?;
    let residual = ctx.residual(q)?;
    let tolerance = scaled_residual_tolerance(residual_tol, &h);
    if residual > tolerance {
        return Err(Error::NotCritical {
            residual,
            tolerance,
        });
    }
    let b = restrict_to_orbit_complement(&h, &orbit_tangent(q)?)?;
    Ok(eigenvalues(&b.b_matrix)?.iter().product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbody::MassVector;

    #[test]
    fn diagonal_and_swap() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(eigenvalues(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ev = eigenvalues(&s).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(eigh(&m, false), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn reconstruction() {
        let m = DMatrix::from_fn(7, 7, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let m = &m + m.transpose();
        let e = eigh(&m, true).unwrap();
        let v = e.vectors.unwrap();
        let lam = DMatrix::from_diagonal(&DVector::from_vec(e.values));
        let rebuilt = &v * lam * v.transpose();
        assert!((rebuilt - &m).amax() < 1e-12 * m.amax());
        assert!((v.transpose() * &v - DMatrix::identity(7, 7)).amax() < 1e-13);
    }

    #[test]
    fn report_counts() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 0.0, 5.0]));
        let r = spectral_report(&d, 1e-8).unwrap();
        assert_eq!((r.kernel_dim, r.morse_index), (1, 1));
        assert_eq!(r.nonzero_product, -10.0);
        assert_eq!(r.positive_count(), 1);
        assert!(spectral_report(&d, 0.0).is_err());
    }

    #[test]
    fn identity_restricts_to_identity() {
        let t = DVector::from_vec(vec![0.6, 0.0, -0.8, 0.0]);
        let b = restrict_to_orbit_complement(&DMatrix::identity(4, 4), &t).unwrap();
        assert_eq!(b.dim(), 3);
        assert!((b.b_matrix - DMatrix::identity(3, 3)).amax() < 1e-15);
        assert!((b.basis.transpose() * &t).amax() < 1e-15);
    }

    #[test]
    fn invariant_subspace_splitting() {
        // H has t in its kernel
        let t = DVector::from_vec(vec![1.0, 1.0, 0.0]).normalize();
        let u = DVector::from_vec(vec![1.0, -1.0, 0.0]).normalize();
        let w = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let h = &u * u.transpose() * 3.0 - &w * w.transpose() * 2.0;
        let b = restrict_to_orbit_complement(&h, &t).unwrap();
        let ev = eigenvalues(&b.b_matrix).unwrap();
        assert!((ev[0] + 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn two_body_indicator() {
        // spectrum {0, 1/4, 1/4, 3/4} by hand, so det B = 3/64
        let q = Configuration::from_points(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let ctx = AugmentedPotential::new(MassVector::new(vec![1.0, 1.0]).unwrap(), 0.25).unwrap();
        let d = degeneracy_indicator(&q, &ctx, DEFAULT_RESIDUAL_TOL).unwrap();
        assert!((d - 3.0 / 64.0).abs() < 1e-15);
        let p = analyze_point(&q, &ctx, DEFAULT_TAU_ZERO).unwrap();
        assert_eq!((p.kernel_dim(), p.morse_index()), (1, 0));
    }

    #[test]
    fn indicator_requires_critical_point() {
        let q = Configuration::from_points(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let ctx = AugmentedPotential::new(MassVector::new(vec![1.0, 1.0]).unwrap(), 0.5).unwrap();
        assert!(matches!(
            degeneracy_indicator(&q, &ctx, DEFAULT_RESIDUAL_TOL),
            Err(Error::NotCritical { .. })
        ));
    }
}
