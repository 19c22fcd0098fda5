use std::f64::consts::PI;

use hodge_cgo::checks;
use hodge_cgo::media::{self, presets};
use hodge_cgo::{rng, Complex64, ComplexCovector, DerivedMedium, FormField, GradedForm, Grid, Medium, MediumSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn reference() -> DerivedMedium {
    let g = Grid::new(presets::REFERENCE_N, presets::REFERENCE_SIDE).unwrap();
    media::derive(&presets::reference_medium().sample(g).unwrap()).unwrap()
}

/// E = dx2 e^{ik x₁}, H = dE/(iωμ) in a homogeneous medium.
fn plane_wave(g: Grid, k: f64, omega: f64, mu: f64) -> FormField {
    let e = GradedForm::one_form([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let dir = GradedForm::real_one_form([k, 0.0, 0.0]);
    let h = dir.wedge(&e).scale(I / (I * omega * mu));
    FormField::from_fn(g, |x| (e + h).scale(Complex64::from_polar(1.0, k * x[0])))
}

#[test]
fn plane_wave_solves_maxwell_in_background() {
    let g = Grid::new(16, 2.0 * PI).unwrap();
    let dm = media::derive(&Medium::background(g, 1.0, 1.0, 1.0).unwrap()).unwrap();
    let u = plane_wave(g, 1.0, 1.0, 1.0);
    assert!(media::maxwell_residual(&u, &dm).max_norm() < 1e-12);
    // rescaled graded form is annihilated by P
    let v = u.map_points(|p, x| x.grade(1).scale(dm.gamma_sqrt.data[p]) + x.grade(2).scale(dm.mu_sqrt.data[p]));
    assert!(media::apply_p(&v, &dm).max_norm() < 1e-12);
    // wrong dispersion relation is detected
    let dm2 = media::derive(&Medium::background(g, 1.3, 1.0, 1.0).unwrap()).unwrap();
    let u2 = plane_wave(g, 1.0, 1.3, 1.0);
    assert!(media::maxwell_residual(&u2, &dm2).max_norm() > 0.1);
}

#[test]
fn background_potential_vanishes() {
    let g = Grid::new(8, 3.0).unwrap();
    let dm = media::derive(&Medium::background(g, 2.0, 1.5, 0.5).unwrap()).unwrap();
    let mut r = rng::stream(1, 0);
    let w = rng::bandlimited_field(&mut r, g, 2, &[0, 1, 2, 3]);
    assert!(media::apply_q(&w, &dm).max_norm() < 1e-12 * w.max_norm());
    assert!(media::apply_qt(&w, &dm).max_norm() < 1e-12 * w.max_norm());
    for c in checks::factorization_suite(&dm, 2, 3, 2) {
        assert!(c.max_error < 1e-12, "{c:?}");
    }
}

#[test]
fn factorization_identities_on_reference_medium() {
    let dm = reference();
    for c in checks::factorization_suite(&dm, 17, 4, 4) {
        assert!(c.passed, "{c:?}");
        assert!(c.max_error < 1e-9, "{c:?}");
    }
}

#[test]
fn p_transpose_is_the_bilinear_adjoint() {
    let dm = reference();
    let mut r = rng::stream(3, 0);
    let w = rng::bandlimited_field(&mut r, dm.grid, 4, &[0, 1, 2, 3]);
    let phi = rng::bandlimited_field(&mut r, dm.grid, 4, &[0, 1, 2, 3]);
    let a = media::apply_p(&w, &dm).integrate_inner(&phi);
    let b = w.integrate_inner(&media::apply_pt(&phi, &dm));
    assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
}

#[test]
fn conjugated_q_equals_q() {
    let dm = reference();
    let mut r = rng::stream(4, 0);
    let w = rng::bandlimited_field(&mut r, dm.grid, 4, &[0, 1, 2, 3]);
    let zeta = ComplexCovector::from_parts([5.0, -1.0, 2.0], [0.5, 3.0, 1.0]);
    let diff = media::apply_q_conj(&w, &dm, &zeta).sub(&media::apply_q(&w, &dm));
    assert!(diff.l2_norm() < 1e-11 * media::apply_q(&w, &dm).l2_norm());
}

#[test]
fn derived_coefficients_are_consistent() {
    let dm = reference();
    for p in 0..dm.grid.len() {
        assert!(((2.0 * dm.a.data[p]).exp() - dm.gamma.data[p]).norm() < 1e-12);
        assert!(((2.0 * dm.b.data[p]).exp() - dm.mu.data[p]).norm() < 1e-12);
        assert!(dm.gamma.data[p].re >= dm.eps0 * (1.0 - 1e-3));
    }
    assert!(dm.chain_rule_defect() < 1e-5);
    assert!(!dm.is_background());
}

#[test]
fn medium_outside_box_is_rejected() {
    let g = Grid::new(16, 2.0 * PI).unwrap();
    let mut spec = presets::reference_medium();
    spec.eps[0].center = [2.0, 0.0, 0.0];
    let err = spec.sample(g).unwrap_err();
    assert!(matches!(err, hodge_cgo::Error::InvalidMedium(_)), "{err}");
}

#[test]
fn medium_spec_roundtrips_through_json() {
    let spec = presets::reference_medium_alt();
    let text = serde_json::to_string(&spec).unwrap();
    let back: MediumSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
}
