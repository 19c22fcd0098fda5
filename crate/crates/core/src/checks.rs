//! Identity suites behind the `check-*` commands.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraTables, Blade, GradedForm};
use crate::bourgain::{ClampSettings, ComplexCovector, ConjugatedSymbol};
use crate::calculus::{
    coderiv, conj_laplacian, dirac, ext_deriv, hodge_laplacian, sobolev_norms, sym_coderiv,
};
use crate::field::{FormField, Grid, ScalarField, SymTensorField};
use crate::media::{self, DerivedMedium};
use crate::rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: &str, max_error: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), max_error, tolerance, passed: max_error.is_finite() && max_error < tolerance }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn sign(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Test forms: every basis blade (unit and imaginary) followed by `n_random` seeded random forms.
fn sample_forms(seed: u64, n_random: usize) -> Vec<GradedForm> {
    let mut out: Vec<GradedForm> = Blade::all().iter().map(|&b| GradedForm::blade(b, Complex64::new(1.0, 0.0))).collect();
    out.push(GradedForm::blade(Blade::from_index(5), I));
    let mut r = rng::stream(seed, 0);
    out.extend((0..n_random).map(|_| rng::graded_form(&mut r)));
    out
}

/// Pure-grade parts of a form.
fn parts(u: &GradedForm) -> [GradedForm; 4] {
    std::array::from_fn(|l| u.grade(l))
}

/// Pointwise identities of the graded algebra, evaluated with the given tables.
///
/// Basis blades are checked exhaustively; random forms are paired cyclically so the cost stays
/// linear in `n_random`.
pub fn algebra_suite(t: &AlgebraTables, seed: u64, n_random: usize) -> Vec<CheckResult> {
    let tol = 1e-12;
    let forms = sample_forms(seed, n_random);
    let n_basis = 9;
    let mut triples: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n_basis {
        for j in 0..n_basis {
            for k in 0..n_basis {
                triples.push((i, j, k));
            }
        }
    }
    let m = forms.len();
    for i in n_basis..m {
        triples.push((i, n_basis + (i + 1 - n_basis) % (m - n_basis), n_basis + (i + 2 - n_basis) % (m - n_basis)));
    }

    let mut err = [0.0f64; 8];
    let mut r = rng::stream(seed, 1);
    for &(i, j, k) in &triples {
        let (u, v, w) = (&forms[i], &forms[j], &forms[k]);
        let (pu, pv, pw) = (parts(u), parts(v), parts(w));
        for l in 0..4 {
            for m2 in 0..4 {
                // anti-commutation
                let lhs = t.wedge(&pu[l], &pv[m2]);
                let rhs = t.wedge(&pv[m2], &pu[l]) * sign(l * m2);
                err[0] = err[0].max((lhs - rhs).max_abs());
                // vee-wedge adjunction ⟨w∧v, u⟩ = ⟨w, v∨u⟩
                for q in 0..4 {
                    let a = t.wedge(&pw[q], &pv[m2]).inner(&pu[l]);
                    let b = pw[q].inner(&t.vee(&pv[m2], &pu[l]));
                    err[4] = err[4].max((a - b).norm());
                }
            }
            // ∗∗u = (−1)^{l(n−l)}u
            err[1] = err[1].max((t.hodge(&t.hodge(&pu[l])) - pu[l] * sign(l * (3 - l))).max_abs());
            // ⟨u,v⟩ = ∗(u∧∗v) = ∗(v∧∗u)
            let ip = pu[l].inner(&pv[l]);
            let a = t.hodge(&t.wedge(&pu[l], &t.hodge(&pv[l]))).c[0];
            let b = t.hodge(&t.wedge(&pv[l], &t.hodge(&pu[l]))).c[0];
            err[2] = err[2].max((ip - a).norm()).max((ip - b).norm());
            // ⟨u,v⟩ = ⟨∗u,∗v⟩
            err[3] = err[3].max((ip - t.hodge(&pu[l]).inner(&t.hodge(&pv[l]))).norm());
        }
        // 1-form commutator: u∨(v∧w) − v∧(u∨w) = (−1)^l⟨u,v⟩w
        let (u1, v1) = (&pu[1], &pv[1]);
        for (l, wl) in pw.iter().enumerate() {
            let lhs = t.vee(u1, &t.wedge(v1, wl)) - t.wedge(v1, &t.vee(u1, wl));
            let rhs = *wl * (u1.inner(v1) * sign(l));
            err[5] = err[5].max((lhs - rhs).max_abs());
            // ⟨u¹∨uˡ, v¹∨vˡ⟩ + ⟨v¹∧uˡ, u¹∧vˡ⟩ = ⟨u¹,v¹⟩⟨uˡ,vˡ⟩
            let (ul, vl) = (&pu[l], &pv[l]);
            let lhs = t.vee(u1, ul).inner(&t.vee(v1, vl)) + t.wedge(v1, ul).inner(&t.wedge(u1, vl));
            let rhs = u1.inner(v1) * ul.inner(vl);
            err[6] = err[6].max((lhs - rhs).norm());
        }
        // δ = (−1)^{n(l+1)+1}∗d∗ on symbols: i(−1)^l ξ∨û = (−1)^{3(l+1)+1}∗(iξ∧∗û)
        let xi: [f64; 3] = std::array::from_fn(|_| r.gen_range(-3.0..3.0));
        let xf = GradedForm::real_one_form(xi).scale(I);
        for (l, ul) in pu.iter().enumerate() {
            let lhs = t.vee(&xf, ul) * sign(l);
            let rhs = t.hodge(&t.wedge(&xf, &t.hodge(ul))) * sign(3 * (l + 1) + 1);
            err[7] = err[7].max((lhs - rhs).max_abs());
        }
    }
    let names = [
        "anti-commutation",
        "double hodge star",
        "inner product via hodge star",
        "hodge star isometry",
        "vee-wedge adjunction",
        "one-form commutator",
        "inner-inner corollary",
        "codifferential via hodge star",
    ];
    names.iter().zip(err).map(|(n, e)| CheckResult::new(n, e, tol)).collect()
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Pointwise ζ∧u on a field.
fn wedge_const(zeta: &GradedForm, f: &FormField) -> FormField {
    f.map_points(|_, u| zeta.wedge(&u))
}

fn vee_const(zeta: &GradedForm, f: &FormField) -> FormField {
    f.map_points(|_, u| zeta.vee(&u))
}

/// Conjugated Hodge Laplacian written out term by term for a pure grade-l field.
fn conj_laplacian_expanded(u: &FormField, l: usize, zeta: &ComplexCovector) -> FormField {
    let z = zeta.to_form();
    let s = sign(l);
    let mut out = hodge_laplacian(u);
    out.axpy(Complex64::new(s, 0.0), &ext_deriv(&vee_const(&z, u)));
    out.add_assign(&wedge_const(&z, &coderiv(u)));
    out.add_assign(&coderiv(&wedge_const(&z, u)));
    out.axpy(Complex64::new(-s, 0.0), &vee_const(&z, &ext_deriv(u)));
    out.axpy(-zeta.dot(zeta), u);
    out
}

/// Differential identities on seeded band-limited random fields.
pub fn calculus_suite(grid: Grid, seed: u64, band: usize) -> Vec<CheckResult> {
    let tol = 1e-10;
    let all = [0, 1, 2, 3];
    let mut r = rng::stream(seed, 2);
    let u = rng::bandlimited_field(&mut r, grid, band, &all);
    let v = rng::bandlimited_field(&mut r, grid, band, &all);
    let mut out = Vec::new();

    let lap = hodge_laplacian(&u).l2_norm();
    out.push(CheckResult::new("d∘d = 0", rel(ext_deriv(&ext_deriv(&u)).l2_norm(), lap), tol));
    out.push(CheckResult::new("δ∘δ = 0", rel(coderiv(&coderiv(&u)).l2_norm(), lap), tol));

    let du = ext_deriv(&u);
    let a = du.integrate_inner(&v);
    let b = u.integrate_inner(&coderiv(&v));
    out.push(CheckResult::new("d/δ adjointness", rel((a - b).norm(), du.l2_norm() * v.l2_norm()), tol));

    let direct = u.integrate_hermitian(&u).re;
    let spectral = sobolev_norms(&u).0.powi(2);
    out.push(CheckResult::new("Parseval", rel((direct - spectral).abs(), direct), tol));

    let (l2, hm1) = sobolev_norms(&u);
    let (_, thm1) = sobolev_norms(&dirac(&u, &ComplexCovector::zero()));
    out.push(CheckResult::new("L² = H⁻¹ + Dirac H⁻¹ split", rel((l2 * l2 - hm1 * hm1 - thm1 * thm1).abs(), l2 * l2), tol));

    let zeta = ComplexCovector::new(std::array::from_fn(|_| rng::complex(&mut r)));
    let mut e_sym: f64 = 0.0;
    let mut e_dirac: f64 = 0.0;
    for l in 0..4 {
        let ul = u.grades(&[l]);
        let spec = conj_laplacian(&ul, &zeta);
        let scale = spec.l2_norm();
        e_sym = e_sym.max(rel(conj_laplacian_expanded(&ul, l, &zeta).sub(&spec).l2_norm(), scale));
        let tt = dirac(&dirac(&ul, &zeta), &zeta).neg();
        e_dirac = e_dirac.max(rel(tt.sub(&spec).l2_norm(), scale));
    }
    out.push(CheckResult::new("conjugated Laplacian symbol", e_sym, tol));
    out.push(CheckResult::new("conjugated Dirac factorization", e_dirac, tol));

    let u1 = u.grades(&[1]);
    let v1 = v.grades(&[1]);
    let (du1, dv1) = (ext_deriv(&u1), ext_deriv(&v1));
    let (su1, sv1) = (coderiv(&u1), coderiv(&v1));
    let lhs = u1.zip_points(&v1, |p, x, y| {
        x.vee(&dv1.get(p)) + y.vee(&du1.get(p)) + su1.get(p).vee(&y) + sv1.get(p).vee(&x)
    });
    let dot = ScalarField { grid, data: (0..grid.len()).map(|p| u1.get(p).inner(&v1.get(p))).collect() };
    let mut rhs = ext_deriv(&dot.to_form());
    rhs.add_assign(&sym_coderiv(&SymTensorField::sym_product(&u1, &v1)));
    out.push(CheckResult::new("symmetric-tensor identity", rel(lhs.sub(&rhs).l2_norm(), lhs.l2_norm()), tol));
    out
}

/// Clamped resolvent Ẋ^{−1/2} → Ẋ^{1/2} norm: tabulated diagonal maximum and the ratio on
/// random fields, both compared with 1.
pub fn resolvent_norm_check(grid: Grid, zeta: &ComplexCovector, clamp: ClampSettings, seed: u64) -> Vec<CheckResult> {
    let sym = ConjugatedSymbol::new(grid, *zeta, clamp);
    let diag = sym.resolvent_operator_norm();
    let mut r = rng::stream(seed, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let f = rng::bandlimited_field(&mut r, grid, grid.n / 2, &[0, 1, 2, 3]);
        let ratio = sym.norm(&sym.resolve(&f), 0.5) / sym.norm(&f, -0.5);
        worst = worst.max((ratio - 1.0).abs());
    }
    vec![
        CheckResult::new("resolvent diagonal norm = 1", (diag - 1.0).abs(), 1e-14),
        CheckResult::new("resolvent isometry on random fields", worst, 1e-12),
    ]
}

/// Weak factorization identities against a medium on seeded random band-limited pairs.
///
/// Errors are relative to max(|reference pairing|, ‖w‖‖φ‖), which stays meaningful when the
/// potential vanishes (background medium).
pub fn factorization_suite(dm: &DerivedMedium, seed: u64, pairs: usize, band: usize) -> Vec<CheckResult> {
    let tol = 1e-6;
    let g = dm.grid;
    let mut r = rng::stream(seed, 4);
    let mut e = [0.0f64; 4];
    for _ in 0..pairs {
        let w = rng::bandlimited_field(&mut r, g, band, &[0, 1, 2, 3]);
        let phi = rng::bandlimited_field(&mut r, g, band, &[0, 1, 2, 3]);
        let cs = w.l2_norm() * phi.l2_norm();
        let helm = media::helmholtz_pairing(&w, &phi, dm.k);

        let ptpt = media::apply_pt(&w, dm).integrate_inner(&media::apply_pt(&phi, dm));
        let weak_q = media::weak_q_pairing(&w, &phi, dm);
        e[0] = e[0].max(rel((ptpt - helm - weak_q).norm(), ptpt.norm().max(cs)));

        let pp = media::apply_p(&w, dm).integrate_inner(&media::apply_p(&phi, dm));
        let weak_qt = media::weak_qt_pairing(&w, &phi, dm);
        e[1] = e[1].max(rel((pp - helm - weak_qt).norm(), pp.norm().max(cs)));

        let strong = media::apply_q(&w, dm).integrate_inner(&phi);
        e[2] = e[2].max(rel((strong - weak_q).norm(), strong.norm().max(cs)));

        let (w03, p03) = (w.grades(&[0, 3]), phi.grades(&[0, 3]));
        let strong_t = media::apply_qtilde(&w03, dm).map(|q| q.integrate_inner(&p03)).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let weak_t = media::weak_qtilde_pairing(&w03, &p03, dm);
        e[3] = e[3].max(rel((strong_t - weak_t).norm(), strong_t.norm().max(w03.l2_norm() * p03.l2_norm())));
    }
    vec![
        CheckResult::new("P Pᵗ factorization (weak)", e[0], tol),
        CheckResult::new("Pᵗ P factorization (weak)", e[1], tol),
        CheckResult::new("weak Q matches strong Q", e[2], tol),
        CheckResult::new("weak q̃ matches strong q̃ on grades 0,3", e[3], tol),
    ]
}
