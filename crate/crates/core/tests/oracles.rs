//! Frozen reference values computed independently at 40 significant digits.

#![allow(clippy::excessive_precision)]

use std::f64::consts::SQRT_2;

use ccbif::families::{
    rosette_m2_solved, rosette_point, two_squares_outer_mass, two_squares_point, two_squares_shape,
};
use ccbif::nbody::{
    lambda_of, moment_of_inertia, potential_u, AugmentedPotential, Configuration, MassVector,
};
use ccbif::spectral::{analyze_point, DEFAULT_TAU_ZERO};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn rosette_m2_at_unit_masses() {
    let m2 = rosette_m2_solved(1.0, 1.0).unwrap();
    assert!(
        close(m2, 1.470382023691939387830080869194678737225, 1e-13),
        "{m2}"
    );
}

#[test]
fn rosette_potential_and_lambda_at_unit_masses() {
    let p = rosette_point(1.0, 1.0).unwrap();
    let i = moment_of_inertia(&p.configuration, &p.masses).unwrap();
    let u = potential_u(&p.configuration, &p.masses).unwrap();
    assert!(
        close(i, 4.058359553306863622617681955688027158756, 1e-13),
        "{i}"
    );
    assert!(
        close(u, 137.7588777284220089406700218308519684789, 1e-13),
        "{u}"
    );
    assert!(close(
        p.lambda,
        16.97223667826231226962919240449156892045,
        1e-13
    ));
}

#[test]
fn two_squares_outer_mass_at_0_2() {
    let m = two_squares_outer_mass(0.2).unwrap();
    assert!(
        close(m, 9.731872589686146871548585349187560368253, 1e-12),
        "{m}"
    );
    let q = two_squares_shape(0.2).unwrap();
    let masses = MassVector::new(vec![m, m, m, m, 1.0, 1.0, 1.0, 1.0]).unwrap();
    let u = potential_u(&q, &masses).unwrap();
    assert!(
        close(u, 757.5437532919541254764784647611953613648, 1e-12),
        "{u}"
    );
}

#[test]
fn two_squares_at_first_reference_radius() {
    let p = two_squares_point(SQRT_2 / 7.0).unwrap();
    assert!(close(
        p.masses.as_slice()[0],
        9.355925279924375929824589656805590838744,
        1e-12
    ));
    assert!(close(
        p.lambda,
        37.61092485650708147495437148325101517052,
        1e-12
    ));
    assert!(close(
        lambda_of(&p.configuration, &p.masses).unwrap(),
        p.lambda,
        1e-15
    ));
}

#[test]
fn two_body_spectrum_is_exact() {
    let q = Configuration::new(vec![1.0, 0.0, -1.0, 0.0]).unwrap();
    let m = MassVector::new(vec![1.0, 1.0]).unwrap();
    let ctx = AugmentedPotential::new(m, 0.25).unwrap();
    let s = analyze_point(&q, &ctx, DEFAULT_TAU_ZERO).unwrap();
    let expect = [0.0, 0.25, 0.25, 0.75];
    for (a, b) in s.full.eigenvalues.iter().zip(expect) {
        assert!((a - b).abs() < 1e-14, "{:?}", s.full.eigenvalues);
    }
    assert!((s.det_b - 3.0 / 64.0).abs() < 1e-15);
    assert_eq!(s.kernel_dim(), 1);
    assert_eq!(s.morse_index(), 0);
}
