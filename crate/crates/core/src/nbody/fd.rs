//! Central-difference oracles for checking the analytic derivatives.
//!
//! Truncation error is `O(h^2)` for both oracles. The Hessian oracle
//! differentiates the analytic gradient, which is itself checked against
//! the gradient oracle built from potential values only.

use nalgebra::{DMatrix, DVector};

use super::{AugmentedPotential, Configuration};
use crate::error::{Error, Result};

/// Step `cbrt(eps) * max(1, |q|_inf)`, balancing truncation against roundoff
/// for central differences.
pub fn default_step(q: &Configuration) -> f64 {
    let scale = q.as_slice().iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    f64::EPSILON.cbrt() * scale
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<F>(f: F, x: &[f64], h: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let mut g = DVector::zeros(x.len());
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let fp = f(&probe)?;
        probe[k] = x[k] - h;
        let fm = f(&probe)?;
        probe[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference Jacobian of a vector function; column `k` holds the
/// derivative along coordinate `k`. Not symmetrized.
pub fn fd_jacobian<F>(g: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let n = x.len();
    let mut probe = x.to_vec();
    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        probe[k] = x[k] + h;
        let gp = g(&probe)?;
        probe[k] = x[k] - h;
        let gm = g(&probe)?;
        probe[k] = x[k];
        if gp.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "function returned {} components for {n} inputs",
                gp.len()
            )));
        }
        jac.set_column(k, &((gp - gm) / (2.0 * h)));
    }
    Ok(jac)
}

fn check_margin(q: &Configuration, ctx: &AugmentedPotential, h: f64) -> Result<()> {
    // every probe moves one coordinate by h, so pair distances shrink by at most h
    q.check_separated(ctx.collision_floor() + h)
}

pub fn fd_gradient_oracle(
    q: &Configuration,
    ctx: &AugmentedPotential,
    h: f64,
) -> Result<DVector<f64>> {
    check_margin(q, ctx, h)?;
    fd_gradient(
        |x| ctx.value(&Configuration::new(x.to_vec())?),
        q.as_slice(),
        h,
    )
}

/// Raw central-difference Hessian (columns from gradient differences).
pub fn fd_hessian_oracle_raw(
    q: &Configuration,
    ctx: &AugmentedPotential,
    h: f64,
) -> Result<DMatrix<f64>> {
    check_margin(q, ctx, h)?;
    fd_jacobian(
        |x| ctx.gradient(&Configuration::new(x.to_vec())?),
        q.as_slice(),
        h,
    )
}

pub fn fd_hessian_oracle(
    q: &Configuration,
    ctx: &AugmentedPotential,
    h: f64,
) -> Result<DMatrix<f64>> {
    let raw = fd_hessian_oracle_raw(q, ctx, h)?;
    let t = raw.transpose();
    Ok((raw + t) * 0.5)
}
