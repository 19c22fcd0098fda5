use std::f64::consts::PI;

use hodge_cgo::cgo::{Polarization, SolverSettings};
use hodge_cgo::media::{presets, BumpSpec, MediumSpec};
use hodge_cgo::uniqueness::{self, UcpCoefficients};
use hodge_cgo::{ClampSettings, Complex64, Grid, Medium, MediumPair};

fn grid() -> Grid {
    Grid::new(presets::REFERENCE_N, presets::REFERENCE_SIDE).unwrap()
}

fn sample(spec: &MediumSpec) -> Medium {
    spec.sample(grid()).unwrap()
}

fn reference_pair() -> MediumPair {
    MediumPair::new(&sample(&presets::reference_medium()), &sample(&presets::reference_medium_alt())).unwrap()
}

#[test]
fn identical_media_give_zero_pairing_and_targets() {
    let m = sample(&presets::reference_medium());
    let mp = MediumPair::new(&m, &m).unwrap();
    assert_eq!(uniqueness::target_a(&mp, [1, 1, 1]), Complex64::new(0.0, 0.0));
    let out = uniqueness::convergence_experiment(&mp, [1, 1, 1], 0.3, Polarization::E, &[8.0], &SolverSettings::default_for(&grid()))
        .unwrap();
    assert!(out[0].pairing.norm() < 1e-9, "{out:?}");
}

#[test]
fn spectral_targets_match_direct_quadrature() {
    let mp = reference_pair();
    for rho in [[1, 1, 1], [-1, -1, -1], [2, 0, -1], [0, 0, 0]] {
        for use_b in [false, true] {
            let spec = if use_b { uniqueness::target_b(&mp, rho) } else { uniqueness::target_a(&mp, rho) };
            let quad = uniqueness::target_quadrature(&mp, rho, use_b);
            assert!((spec - quad).norm() < 1e-10 * quad.norm().max(1.0), "{rho:?} {spec} {quad}");
        }
    }
}

#[test]
fn targets_flip_sign_when_media_are_swapped() {
    let mp = reference_pair();
    let sw = mp.swapped();
    for rho in [[1, 1, 1], [0, 1, 1]] {
        assert!((uniqueness::target_a(&mp, rho) + uniqueness::target_a(&sw, rho)).norm() < 1e-12);
        assert!((uniqueness::target_b(&mp, rho) + uniqueness::target_b(&sw, rho)).norm() < 1e-12);
    }
}

/// Composite Simpson on [0, r_max].
fn simpson(f: impl Fn(f64) -> f64, r_max: f64, n: usize) -> f64 {
    let h = r_max / n as f64;
    let mut s = f(0.0) + f(r_max);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn target_matches_radial_oracle_for_a_single_bump() {
    // background vs one permittivity bump: a₁ = 0, a₂ = ½ log γ₂(r), b₁ = b₂
    let bump = BumpSpec { center: [0.3, -0.2, 0.1], radius: 2.2, amplitude: 0.4, exponent: 6.0 };
    let mut spec2 = MediumSpec::background(1.0, 1.0, 1.0);
    spec2.eps.push(bump);
    spec2.support_half_width = Some(0.45 * presets::REFERENCE_SIDE);
    let mut spec1 = MediumSpec::background(1.0, 1.0, 1.0);
    spec1.support_half_width = spec2.support_half_width;
    let mp = MediumPair::new(&sample(&spec1), &sample(&spec2)).unwrap();

    let (amp, rad) = (bump.amplitude, bump.radius);
    let beta = |r: f64| amp * (1.0 - r * r / (rad * rad)).powi(6);
    let beta1 = |r: f64| -12.0 * amp * r / (rad * rad) * (1.0 - r * r / (rad * rad)).powi(5);
    let beta2 = |r: f64| {
        let t = 1.0 - r * r / (rad * rad);
        amp * (30.0 * t.powi(4) * (2.0 * r / (rad * rad)).powi(2) - 12.0 * t.powi(5) / (rad * rad))
    };
    // r_a = −a'' − 2a'/r − a'² + ω²(γ₂ − γ₁)
    let r_a = |r: f64| {
        let g = 1.0 + beta(r);
        let a1 = beta1(r) / (2.0 * g);
        let a2 = beta2(r) / (2.0 * g) - beta1(r).powi(2) / (2.0 * g * g);
        let lap = if r == 0.0 { 3.0 * a2 } else { a2 + 2.0 * a1 / r };
        -lap - a1 * a1 + beta(r)
    };
    let g = grid();
    for rho_index in [[1i64, 1, 1], [2, 0, -1], [0, 3, 1]] {
        let rho = rho_index.map(|m| g.dual_spacing() * m as f64);
        let rn = (rho[0] * rho[0] + rho[1] * rho[1] + rho[2] * rho[2]).sqrt();
        let sinc = |r: f64| if r == 0.0 { 1.0 } else { (rn * r).sin() / (rn * r) };
        let phase = Complex64::from_polar(1.0, (0..3).map(|j| rho[j] * bump.center[j]).sum());
        let radial = |f: &dyn Fn(f64) -> f64| 4.0 * PI * simpson(|r| f(r) * r * r * sinc(r), rad, 20_000);
        let oracle_a = phase * radial(&r_a);
        let oracle_b = phase * radial(&beta);
        let ta = uniqueness::target_a(&mp, rho_index);
        let tb = uniqueness::target_b(&mp, rho_index);
        assert!((ta - oracle_a).norm() < 1e-3 * oracle_a.norm().max(1e-2), "{rho_index:?} {ta} {oracle_a}");
        assert!((tb - oracle_b).norm() < 1e-3 * oracle_b.norm().max(1e-2), "{rho_index:?} {tb} {oracle_b}");
    }
}

#[test]
fn pair_rejects_mismatched_media() {
    let m = sample(&presets::reference_medium());
    let other_grid = presets::reference_medium().sample(Grid::new(16, presets::REFERENCE_SIDE).unwrap());
    if let Ok(m16) = other_grid {
        assert!(MediumPair::new(&m, &m16).is_err());
    }
    let mut spec = presets::reference_medium();
    spec.omega = 1.5;
    assert!(MediumPair::new(&m, &sample(&spec)).is_err());
    // a perturbation outside the sub-box of the second medium
    let mut m2 = m.clone();
    let p = grid().index([0, 0, 0]);
    m2.eps[p] += 0.1;
    assert!(MediumPair::new(&m, &m2).is_err());
}

#[test]
fn pairing_approaches_its_limit_for_both_polarizations() {
    let mp = reference_pair();
    let settings = SolverSettings::default_for(&grid());
    for pol in [Polarization::E, Polarization::H] {
        let out = uniqueness::convergence_experiment(&mp, [1, 1, 1], 0.3, pol, &[8.0, 32.0], &settings).unwrap();
        let expected = match pol {
            Polarization::E => -out[0].target_a,
            Polarization::H => -out[0].target_b,
        };
        assert_eq!(out[0].limit, expected);
        assert!(out[1].error < out[0].error, "{pol:?} {out:?}");
    }
}

#[test]
fn ucp_system_residual_is_the_weighted_relation_residual() {
    // −Δf + Vf + af + bg = 2Γ₁Γ₂/(Γ₁+Γ₂)·r_a with Γ = γ^{1/2}; likewise for g with μ and r_b
    let mp = reference_pair();
    let coeffs = UcpCoefficients::from_pair(&mp);
    let (r1, r2) = coeffs.system_residual(&mp);
    let (ra, rb) = uniqueness::recovery_residual(&mp);
    let (d1, d2) = (&mp.dm1, &mp.dm2);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for p in 0..grid().len() {
        let (g1, g2) = (d1.gamma_sqrt.data[p], d2.gamma_sqrt.data[p]);
        let (m1, m2) = (d1.mu_sqrt.data[p], d2.mu_sqrt.data[p]);
        let x = ra.data[p] * 2.0 * g1 * g2 / (g1 + g2);
        let y = rb.data[p] * 2.0 * m1 * m2 / (m1 + m2);
        err = err.max((r1.data[p] - x).norm()).max((r2.data[p] - y).norm());
        scale = scale.max(x.norm()).max(y.norm());
    }
    assert!(scale > 0.5);
    assert!(err < 1e-4 * scale, "{err} vs {scale}");
}

#[test]
fn ucp_with_zero_coefficients_is_trivial() {
    let g = Grid::new(8, 2.0).unwrap();
    let zeta = uniqueness::generic_null_covector(8.0, 0.2);
    assert!(zeta.dot(&zeta).norm() < 1e-12);
    let rep = uniqueness::ucp_contraction_check(&UcpCoefficients::zeros(g), &zeta, 2, 1, ClampSettings::default_for(&g)).unwrap();
    assert_eq!(rep.estimate, 0.0);
    assert!(rep.contraction && !rep.inconclusive);
    assert!(rep.fixed_point_norms.iter().all(|&n| n == 0.0));
}

#[test]
fn ucp_estimate_decreases_with_zeta() {
    let mp = reference_pair();
    let coeffs = UcpCoefficients::from_pair(&mp);
    let clamp = ClampSettings::default_for(&grid());
    let reps: Vec<_> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&z| uniqueness::ucp_contraction_check(&coeffs, &uniqueness::generic_null_covector(z, 0.0), 2, 3, clamp).unwrap())
        .collect();
    let est: Vec<f64> = reps.iter().map(|r| r.estimate).collect();
    assert!(est.windows(2).all(|w| w[1] < w[0]), "{est:?}");
    assert!(est[2] < 1.0);
    assert!(reps[2].fixed_point_norms.iter().all(|&n| n < 1e-8), "{:?}", reps[2].fixed_point_norms);
}
