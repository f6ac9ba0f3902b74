#![allow(dead_code)]

use ccbif::nbody::{AugmentedPotential, Configuration, MassVector};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` bodies in `[-1, 1]^2`, pairwise at least `min_sep` apart.
pub fn random_configuration<R: Rng>(rng: &mut R, n: usize, min_sep: f64) -> Configuration {
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if pts
            .iter()
            .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= min_sep)
        {
            pts.push(p);
        }
    }
    Configuration::from_points(&pts).unwrap()
}

pub fn random_potential<R: Rng>(rng: &mut R, n: usize) -> AugmentedPotential {
    let m = MassVector::new((0..n).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
    AugmentedPotential::new(m, rng.gen_range(0.5..2.0)).unwrap()
}

/// `max |a - b| / max |b|`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0_f64, |s, (x, y)| s.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Number of eigenvalues of symmetric `m` below `x`, from the inertia of a
/// symmetric-pivoted block LDL^T factorization of `m - x I` (Sylvester's law
/// of inertia). Uses 1x1 pivots when a diagonal entry is large enough,
/// otherwise 2x2 pivots.
pub fn count_below(m: &DMatrix<f64>, x: f64) -> usize {
    const ALPHA: f64 = 0.6404; // (1 + sqrt 17) / 8
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= x;
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut count = 0;
    while !active.is_empty() {
        let (mut pd, mut dmax) = (active[0], 0.0_f64);
        for &i in &active {
            if a[(i, i)].abs() >= dmax {
                dmax = a[(i, i)].abs();
                pd = i;
            }
        }
        let (mut po, mut omax) = ((active[0], active[0]), 0.0_f64);
        for (ii, &i) in active.iter().enumerate() {
            for &j in &active[ii + 1..] {
                if a[(i, j)].abs() > omax {
                    omax = a[(i, j)].abs();
                    po = (i, j);
                }
            }
        }
        if omax == 0.0 && dmax == 0.0 {
            // remaining block is zero: those eigenvalues equal x, not below
            break;
        }
        if dmax >= ALPHA * omax {
            let p = a[(pd, pd)];
            if p < 0.0 {
                count += 1;
            }
            active.retain(|&i| i != pd);
            for &i in &active {
                let f = a[(i, pd)] / p;
                for &j in &active {
                    a[(i, j)] -= f * a[(pd, j)];
                }
            }
        } else {
            let (r, s) = po;
            let (e11, e12, e22) = (a[(r, r)], a[(r, s)], a[(s, s)]);
            let det = e11 * e22 - e12 * e12;
            if det < 0.0 {
                count += 1;
            } else if e11 + e22 < 0.0 {
                count += 2;
            }
            active.retain(|&i| i != r && i != s);
            let (c11, c12, c22) = (e22 / det, -e12 / det, e11 / det);
            let rows: Vec<(usize, f64, f64)> =
                active.iter().map(|&i| (i, a[(i, r)], a[(i, s)])).collect();
            for &(i, ir, is) in &rows {
                let (wr, ws) = (ir * c11 + is * c12, ir * c12 + is * c22);
                for &(j, jr, js) in &rows {
                    a[(i, j)] -= wr * jr + ws * js;
                }
            }
        }
    }
    count
}

/// Eigenvalues by bisection on the inertia count; independent of any
/// eigensolver.
pub fn eigenvalues_by_bisection(m: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    let n = m.nrows();
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        lo = lo.min(m[(i, i)] - r);
        hi = hi.max(m[(i, i)] + r);
    }
    (0..n)
        .map(|k| {
            // k-th smallest: smallest x with count_below(x) > k
            let (mut a, mut b) = (lo - 1.0, hi + 1.0);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if count_below(m, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}
