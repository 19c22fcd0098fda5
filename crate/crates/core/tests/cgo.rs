use std::f64::consts::PI;

use hodge_cgo::cgo::{self, CGOGeometry, Family, Polarization, SolverSettings};
use hodge_cgo::media::{self, presets};
use hodge_cgo::{rng, ClampSettings, Complex64, DerivedMedium, GradedForm, Grid, Medium};
use rand::Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn grid() -> Grid {
    Grid::new(presets::REFERENCE_N, presets::REFERENCE_SIDE).unwrap()
}

fn reference() -> DerivedMedium {
    media::derive(&presets::reference_medium().sample(grid()).unwrap()).unwrap()
}

fn background() -> DerivedMedium {
    media::derive(&Medium::background(grid(), 1.0, 1.0, 1.0).unwrap()).unwrap()
}

fn geometry(s: f64) -> CGOGeometry {
    let g = grid();
    let (e1, e2) = cgo::frame([1.0, 1.0, 1.0], 0.3);
    CGOGeometry::new(&g, [1, 1, 1], e1, e2, s, 1.0).unwrap()
}

#[test]
fn geometry_invariants_over_random_frames() {
    let g = grid();
    let mut r = rng::stream(77, 0);
    for _ in 0..100 {
        let rho_index: [i64; 3] = std::array::from_fn(|_| r.gen_range(-3..=3));
        let h = g.dual_spacing();
        let rho = rho_index.map(|m| h * m as f64);
        let (e1, e2) = cgo::frame(rho, r.gen_range(0.0..2.0 * PI));
        let s = r.gen_range(1.0..60.0);
        let k = r.gen_range(0.1..3.0);
        let geo = CGOGeometry::new(&g, rho_index, e1, e2, s, k).unwrap();
        for z in [geo.zeta1, geo.zeta2] {
            assert!((z.dot(&z) + k * k).norm() <= 1e-10 * z.norm().powi(2));
        }
        let sum = geo.zeta1.add(&geo.zeta2);
        for j in 0..3 {
            assert!((sum.z[j] - I * rho[j]).norm() <= 1e-12);
        }
        let pols: &[Polarization] = if rho_index == [0, 0, 0] { &[Polarization::E] } else { &[Polarization::E, Polarization::H] };
        for &pol in pols {
            let a = cgo::amplitude_a(&geo, pol).unwrap();
            assert!(cgo::incidence_residual(&geo.zeta1, k, &a).max_abs() <= 1e-12, "{pol:?} {geo:?}");
        }
    }
}

#[test]
fn amplitudes_tend_to_their_limits() {
    let g = grid();
    let (e1, e2) = cgo::frame([1.0, 0.0, 0.0], 1.1);
    let one = GradedForm::scalar(Complex64::new(1.0, 0.0));
    let mut last = [f64::INFINITY; 2];
    for s in [1e2, 1e3, 1e4] {
        let geo = CGOGeometry::new(&g, [1, 0, 0], e1, e2, s, 1.0).unwrap();
        let a = cgo::amplitude_a(&geo, Polarization::E).unwrap();
        let b = cgo::amplitude_b(&geo, Polarization::E).unwrap();
        // closed forms for E-mode: A₁ = −1, B₂ = −1 + iη₂∧η₁
        let a1 = cgo::limit_a(&geo, Polarization::E).unwrap();
        let b2 = cgo::limit_b(&geo, Polarization::E).unwrap();
        assert!((a1 + one).max_abs() < 1e-14);
        let wedge = GradedForm::real_one_form(e2).wedge(&GradedForm::real_one_form(e1)).scale(I);
        assert!((b2 - (wedge - one)).max_abs() < 1e-14);
        let err = [(a - a1).max_abs(), (b - b2).max_abs()];
        for j in 0..2 {
            assert!(err[j] < 2.0 / s, "s={s} err={err:?}");
            assert!(err[j] < last[j]);
        }
        last = err;
        for pol in [Polarization::E, Polarization::H] {
            assert!(cgo::amplitude_a(&geo, pol).unwrap().norm() < 2.0);
        }
    }
    // H-mode: A₁ = −(η₁+iη₂)∧β is a volume form, B₂ lives in grades 1 and 3
    let geo = CGOGeometry::new(&g, [1, 0, 0], e1, e2, 1e4, 1.0).unwrap();
    let ah = cgo::limit_a(&geo, Polarization::H).unwrap();
    assert!((ah - ah.grade(3)).max_abs() < 1e-14 && ah.norm() > 0.5);
    let bh = cgo::limit_b(&geo, Polarization::H).unwrap();
    assert!((bh - bh.grade(1) - bh.grade(3)).max_abs() < 1e-14);
}

#[test]
fn background_solve_is_trivial() {
    let dm = background();
    let geo = geometry(8.0);
    let settings = SolverSettings::default_for(&dm.grid);
    for pol in [Polarization::E, Polarization::H] {
        let (_, sol) = cgo::solve_family(&dm, &geo, pol, Family::W1, &settings).unwrap();
        assert_eq!(sol.diagnostics.iterations, 1);
        assert_eq!(sol.remainder.max_norm(), 0.0);
        assert!(cgo::check_grade03(&dm, &sol) < 1e-10);
    }
    let est = cgo::q_norm_estimate(&dm, &geo.zeta1, 16, 1, ClampSettings::default_for(&dm.grid)).unwrap();
    assert!(est.estimate < 1e-12);
}

#[test]
fn reference_solve_converges_at_s32() {
    let dm = reference();
    let settings = SolverSettings::default_for(&dm.grid);
    let (_, sol) = cgo::solve_family(&dm, &geometry(32.0), Polarization::E, Family::W1, &settings).unwrap();
    let d = sol.diagnostics;
    assert!(d.contraction < 0.5, "{d:?}");
    assert!(d.residual < 1e-8, "{d:?}");
    assert!(d.remainder_norm <= 2.0 * d.qa_norm, "{d:?}");
    assert!(d.remainder_norm <= d.qa_norm / (1.0 - d.contraction) * (1.0 + 1e-6), "{d:?}");
}

#[test]
fn grade03_ratio_decreases_and_negative_control_does_not() {
    let dm = reference();
    let settings = SolverSettings::default_for(&dm.grid);
    let mut ratios = Vec::new();
    for s in [8.0, 16.0, 32.0] {
        let (_, sol) = cgo::solve_family(&dm, &geometry(s), Polarization::E, Family::W1, &settings).unwrap();
        ratios.push(cgo::check_grade03(&dm, &sol));
    }
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");

    let geo = geometry(32.0);
    let scalar = GradedForm::scalar(Complex64::new(1.0, 0.0));
    assert!(cgo::incidence_residual(&geo.zeta1, geo.k, &scalar).max_abs() > 0.5);
    let sol = cgo::solve_cgo(&dm, &geo.zeta1, &scalar, &settings).unwrap();
    assert!(cgo::check_grade03(&dm, &sol) > 1e-2);
}

#[test]
fn tiny_s_diverges() {
    // strong contrast at s = 1 leaves the Neumann region
    let g = grid();
    let mut spec = presets::reference_medium();
    for b in spec.eps.iter_mut().chain(spec.mu.iter_mut()) {
        b.amplitude *= 20.0;
    }
    let dm = media::derive(&spec.sample(g).unwrap()).unwrap();
    let settings = SolverSettings::default_for(&g);
    let err = cgo::solve_family(&dm, &geometry(1.0), Polarization::E, Family::W1, &settings).unwrap_err();
    assert!(matches!(err, hodge_cgo::Error::Divergence { .. }), "{err}");
}

#[test]
fn decay_study_is_deterministic() {
    let dm = reference();
    let settings = SolverSettings::default_for(&dm.grid);
    let run = || cgo::decay_study(&dm, [1, 1, 1], Polarization::E, &[4.0], 8, 9, &settings).unwrap();
    let (rows_a, sum_a) = run();
    let (rows_b, sum_b) = run();
    assert_eq!(rows_a, rows_b);
    assert_eq!(sum_a, sum_b);
    assert_eq!(sum_a[0].failures, 0);
    assert!(rows_a.iter().all(|r| r.s >= 4.0 && r.s <= 8.0));
    assert!(cgo::decay_study(&dm, [1, 1, 1], Polarization::E, &[4.0], 4, 9, &settings).is_err());
    assert!(cgo::decay_study(&dm, [1, 1, 1], Polarization::E, &[8.0, 4.0], 8, 9, &settings).is_err());
}

#[test]
fn q_norm_estimate_decreases_with_zeta() {
    let dm = reference();
    let clamp = ClampSettings::default_for(&dm.grid);
    let est: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&s| cgo::q_norm_estimate(&dm, &geometry(s).zeta1, 16, 5, clamp).unwrap().estimate)
        .collect();
    assert!(est.windows(2).all(|w| w[1] < w[0]), "{est:?}");
}
