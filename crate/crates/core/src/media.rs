//! Medium coefficients, the rescaled first-order operators P, Pᵗ and the zeroth-order
//! potentials Q, Q̃, q̃, plus the Maxwell residual.
//!
//! With T = (d + δ)∘Σ(−1)^l and M, M' the zeroth-order parts of P and Pᵗ:
//! P = T + M, Pᵗ = −T + M', and T(−T) = Δ, so
//! Q = PPᵗ − Δ + k² = T M' − M T + M M' + k² and Q̃ = −T M + M' T + M' M + k².
//! Writing Q this way avoids forming PPᵗ and subtracting two second-order terms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::GradedForm;
use crate::bourgain::ComplexCovector;
use crate::calculus::{self, dirac, gradient, lowpass_scalar, sym_coderiv};
use crate::error::{Error, Result};
use crate::field::{FormField, Grid, ScalarField, SymTensorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Radial bump A·(1 − r²/R²)^p for r < R, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: [f64; 3],
    pub radius: f64,
    pub amplitude: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

fn default_exponent() -> f64 {
    6.0
}

impl BumpSpec {
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let r2: f64 = (0..3).map(|j| (x[j] - self.center[j]).powi(2)).sum();
        let t = 1.0 - r2 / (self.radius * self.radius);
        if t <= 0.0 {
            0.0
        } else {
            self.amplitude * t.powf(self.exponent)
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let ok = self.center.iter().all(|c| c.is_finite())
            && self.radius.is_finite()
            && self.radius > 0.0
            && self.amplitude.is_finite()
            && self.exponent.is_finite()
            && self.exponent >= 2.0;
        if !ok {
            return Err(Error::InvalidMedium(format!(
                "{field}: bump needs finite center, radius > 0, finite amplitude, exponent >= 2"
            )));
        }
        Ok(())
    }
}

/// Analytic medium description: background constants plus bump perturbations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    #[serde(default)]
    pub eps: Vec<BumpSpec>,
    #[serde(default)]
    pub mu: Vec<BumpSpec>,
    #[serde(default)]
    pub sigma: Vec<BumpSpec>,
    /// Half width of the central sub-box holding the perturbation; defaults to L/4.
    #[serde(default)]
    pub support_half_width: Option<f64>,
}

impl MediumSpec {
    pub fn background(omega: f64, eps0: f64, mu0: f64) -> Self {
        Self { omega, eps0, mu0, eps: vec![], mu: vec![], sigma: vec![], support_half_width: None }
    }

    pub fn sample(&self, grid: Grid) -> Result<Medium> {
        let hw = self.support_half_width.unwrap_or(grid.side / 4.0);
        for (name, v) in [("omega", self.omega), ("eps0", self.eps0), ("mu0", self.mu0), ("support_half_width", hw)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidMedium(format!("{name} must be positive, got {v}")));
            }
        }
        if hw > grid.side / 2.0 {
            return Err(Error::InvalidMedium(format!(
                "support_half_width {hw} exceeds half the box side {}",
                grid.side / 2.0
            )));
        }
        for (name, bumps) in [("eps", &self.eps), ("mu", &self.mu), ("sigma", &self.sigma)] {
            for bump in bumps.iter() {
                bump.validate(name)?;
                if bump.center.iter().any(|c| c.abs() + bump.radius > hw) {
                    return Err(Error::InvalidMedium(format!(
                        "{name}: bump at {:?} with radius {} leaves the sub-box of half width {hw}",
                        bump.center, bump.radius
                    )));
                }
            }
        }
        let eval = |bumps: &[BumpSpec], base: f64| -> Vec<f64> {
            (0..grid.len()).map(|p| base + bumps.iter().map(|b| b.value(grid.point(p))).sum::<f64>()).collect()
        };
        Medium::from_samples(
            grid,
            self.omega,
            self.eps0,
            self.mu0,
            eval(&self.eps, self.eps0),
            eval(&self.mu, self.mu0),
            eval(&self.sigma, 0.0),
            hw,
        )
    }
}

/// Sampled medium on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Medium {
    pub grid: Grid,
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub support_half_width: f64,
}

impl Medium {
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        grid: Grid,
        omega: f64,
        eps0: f64,
        mu0: f64,
        eps: Vec<f64>,
        mu: Vec<f64>,
        sigma: Vec<f64>,
        support_half_width: f64,
    ) -> Result<Self> {
        let m = Self { grid, omega, eps0, mu0, eps, mu, sigma, support_half_width };
        m.validate()?;
        Ok(m)
    }

    pub fn background(grid: Grid, omega: f64, eps0: f64, mu0: f64) -> Result<Self> {
        MediumSpec::background(omega, eps0, mu0).sample(grid)
    }

    pub fn in_support_box(&self, x: [f64; 3]) -> bool {
        x.iter().all(|c| c.abs() <= self.support_half_width)
    }

    pub fn validate(&self) -> Result<()> {
        let n3 = self.grid.len();
        for (name, v) in [("eps", &self.eps), ("mu", &self.mu), ("sigma", &self.sigma)] {
            if v.len() != n3 {
                return Err(Error::InvalidMedium(format!("{name}: expected {n3} samples, got {}", v.len())));
            }
        }
        for p in 0..n3 {
            let x = self.grid.point(p);
            let inside = self.in_support_box(x);
            let checks = [
                ("eps", self.eps[p], self.eps0),
                ("mu", self.mu[p], self.mu0),
                ("sigma", self.sigma[p], 0.0),
            ];
            for (name, v, base) in checks {
                if !v.is_finite() || v < base {
                    return Err(Error::InvalidMedium(format!("{name} = {v} below its lower bound {base} at {x:?}")));
                }
                if !inside && v != base {
                    return Err(Error::InvalidMedium(format!("{name} differs from background outside the sub-box at {x:?}")));
                }
            }
        }
        Ok(())
    }
}

/// Everything the operators need, computed once per medium.
///
/// a and b are low-passed to the 2/3 band and γ, μ are then redefined as exp(2a), exp(2b),
/// so the coefficient fields are exactly consistent with their logarithms.
#[derive(Clone, Debug)]
pub struct DerivedMedium {
    pub grid: Grid,
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub k: f64,
    pub support_half_width: f64,
    pub gamma: ScalarField,
    pub mu: ScalarField,
    pub a: ScalarField,
    pub b: ScalarField,
    pub da: FormField,
    pub db: FormField,
    pub gamma_sqrt: ScalarField,
    pub mu_sqrt: ScalarField,
    /// γ^{1/2}μ^{1/2}
    pub gamma_mu_sqrt: ScalarField,
    da_pts: Vec<GradedForm>,
    db_pts: Vec<GradedForm>,
    /// d(γ^{1/2}μ^{1/2}) by the chain rule, Γ(da + db).
    dgm_pts: Vec<GradedForm>,
}

/// k = ω(ε₀μ₀)^{1/2}.
pub fn wavenumber(omega: f64, eps0: f64, mu0: f64) -> f64 {
    omega * (eps0 * mu0).sqrt()
}

pub fn derive(m: &Medium) -> Result<DerivedMedium> {
    m.validate()?;
    let g = m.grid;
    let band = calculus::two_thirds_band(&g);
    let raw_a = ScalarField {
        grid: g,
        data: (0..g.len()).map(|p| 0.5 * Complex64::new(m.eps[p], m.sigma[p] / m.omega).ln()).collect(),
    };
    let raw_b = ScalarField { grid: g, data: m.mu.iter().map(|&v| Complex64::new(0.5 * v.ln(), 0.0)).collect() };
    let a = lowpass_scalar(&raw_a, band);
    // μ is real; drop the rounding-level imaginary part the FFT leaves behind
    let b = lowpass_scalar(&raw_b, band).map(|z| Complex64::new(z.re, 0.0));
    let gamma = a.map(|z| (2.0 * z).exp());
    let mu = b.map(|z| (2.0 * z).exp());
    // Gibbs ripple of the low-pass may dip a hair below the background; anything beyond that
    // means the medium is under-resolved.
    let slack = 1e-3;
    for p in 0..g.len() {
        if gamma.data[p].re < m.eps0 * (1.0 - slack) || mu.data[p].re < m.mu0 * (1.0 - slack) {
            return Err(Error::InvalidMedium(format!(
                "medium under-resolved on the grid: low-passed coefficient drops below background at {:?}",
                g.point(p)
            )));
        }
    }
    let da = gradient(&a);
    let db = gradient(&b);
    let gamma_sqrt = a.map(|z| z.exp());
    let mu_sqrt = b.map(|z| z.exp());
    let gamma_mu_sqrt = a.zip_map(&b, |x, y| (x + y).exp());
    let da_pts: Vec<GradedForm> = (0..g.len()).map(|p| da.get(p)).collect();
    let db_pts: Vec<GradedForm> = (0..g.len()).map(|p| db.get(p)).collect();
    let dgm_pts = (0..g.len()).map(|p| (da_pts[p] + db_pts[p]).scale(gamma_mu_sqrt.data[p])).collect();
    Ok(DerivedMedium {
        grid: g,
        omega: m.omega,
        eps0: m.eps0,
        mu0: m.mu0,
        k: wavenumber(m.omega, m.eps0, m.mu0),
        support_half_width: m.support_half_width,
        gamma,
        mu,
        a,
        b,
        da,
        db,
        gamma_sqrt,
        mu_sqrt,
        gamma_mu_sqrt,
        da_pts,
        db_pts,
        dgm_pts,
    })
}

/// x∧u¹ + x∨(u¹+u³) + y∧(u⁰+u²) − y∨u² + c·u. M uses (x, y) = (da, db), M' uses (db, da).
#[inline]
fn zeroth_order(x: &GradedForm, y: &GradedForm, c: Complex64, u: &GradedForm) -> GradedForm {
    let u1 = u.grade(1);
    let u2 = u.grade(2);
    x.wedge(&u1) + x.vee(&u.grades(&[1, 3])) + y.wedge(&u.grades(&[0, 2])) - y.vee(&u2) + u.scale(c)
}

impl DerivedMedium {
    pub fn is_background(&self) -> bool {
        let a0 = Complex64::new(0.5 * self.eps0.ln(), 0.0);
        let b0 = Complex64::new(0.5 * self.mu0.ln(), 0.0);
        self.a.data.iter().all(|z| (z - a0).norm() < 1e-14) && self.b.data.iter().all(|z| (z - b0).norm() < 1e-14)
    }

    #[inline]
    fn i_omega_gm(&self, p: usize) -> Complex64 {
        I * self.omega * self.gamma_mu_sqrt.data[p]
    }

    /// M v, the zeroth-order part of P.
    pub fn apply_m(&self, v: &FormField) -> FormField {
        v.map_points(|p, u| zeroth_order(&self.da_pts[p], &self.db_pts[p], self.i_omega_gm(p), &u))
    }

    /// M' w, the zeroth-order part of Pᵗ.
    pub fn apply_mt(&self, w: &FormField) -> FormField {
        w.map_points(|p, u| zeroth_order(&self.db_pts[p], &self.da_pts[p], self.i_omega_gm(p), &u))
    }

    /// Max relative mismatch between spectral d(γ^{1/2}μ^{1/2}) and the chain rule Γ(da + db).
    /// Zero in the continuum; on a grid it measures how well the medium is resolved.
    pub fn chain_rule_defect(&self) -> f64 {
        let spectral = gradient(&self.gamma_mu_sqrt);
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for p in 0..self.grid.len() {
            num = num.max((spectral.get(p) - self.dgm_pts[p]).norm());
            den = den.max(self.dgm_pts[p].norm());
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// γ^{1/2}μ^{1/2} gradient as used by the weak-form oracles.
    pub fn d_gamma_mu_sqrt(&self, p: usize) -> GradedForm {
        self.dgm_pts[p]
    }

    pub fn da_at(&self, p: usize) -> GradedForm {
        self.da_pts[p]
    }

    pub fn db_at(&self, p: usize) -> GradedForm {
        self.db_pts[p]
    }
}

/// P v = (d + δ)Σ(−1)^l v^l + da∧v¹ + da∨(v¹+v³) + db∧(v⁰+v²) − db∨v² + iωγ^{1/2}μ^{1/2}v.
pub fn apply_p(v: &FormField, dm: &DerivedMedium) -> FormField {
    apply_p_conj(v, dm, &ComplexCovector::zero())
}

/// Pᵗ w = (d + δ)Σ(−1)^{l+1} w^l + db∧w¹ + db∨(w¹+w³) + da∧(w⁰+w²) − da∨w² + iωγ^{1/2}μ^{1/2}w.
pub fn apply_pt(w: &FormField, dm: &DerivedMedium) -> FormField {
    apply_pt_conj(w, dm, &ComplexCovector::zero())
}

/// e_{−ζ} P e_{ζ}.
pub fn apply_p_conj(v: &FormField, dm: &DerivedMedium, zeta: &ComplexCovector) -> FormField {
    let mut out = dirac(v, zeta);
    out.add_assign(&dm.apply_m(v));
    out
}

/// e_{−ζ} Pᵗ e_{ζ}.
pub fn apply_pt_conj(w: &FormField, dm: &DerivedMedium, zeta: &ComplexCovector) -> FormField {
    let mut out = dm.apply_mt(w);
    out.axpy(Complex64::new(-1.0, 0.0), &dirac(w, zeta));
    out
}

/// Q w = P Pᵗ w − (dδ + δd)w + k²w.
pub fn apply_q(w: &FormField, dm: &DerivedMedium) -> FormField {
    apply_q_conj(w, dm, &ComplexCovector::zero())
}

/// e_{−ζ} Q e_{ζ}; equal to Q up to rounding because Q has order zero.
pub fn apply_q_conj(w: &FormField, dm: &DerivedMedium, zeta: &ComplexCovector) -> FormField {
    let mtw = dm.apply_mt(w);
    let mut out = dirac(&mtw, zeta);
    out.axpy(Complex64::new(-1.0, 0.0), &dm.apply_m(&dirac(w, zeta)));
    out.add_assign(&dm.apply_m(&mtw));
    out.axpy(Complex64::new(dm.k * dm.k, 0.0), w);
    out
}

/// Q̃ w = Pᵗ P w − (dδ + δd)w + k²w.
pub fn apply_qt(w: &FormField, dm: &DerivedMedium) -> FormField {
    let mw = dm.apply_m(w);
    let mut out = dirac(&mw, &ComplexCovector::zero()).neg();
    out.add_assign(&dm.apply_mt(&dirac(w, &ComplexCovector::zero())));
    out.add_assign(&dm.apply_mt(&mw));
    out.axpy(Complex64::new(dm.k * dm.k, 0.0), w);
    out
}

/// q̃: Q̃ restricted to grade-{0,3} fields, projected back onto grades {0,3}.
pub fn apply_qtilde(w03: &FormField, dm: &DerivedMedium) -> Result<FormField> {
    for c in 1..7 {
        if !w03.component_is_zero(c) {
            return Err(Error::InvalidArgument("q-tilde takes grade-{0,3} fields only".into()));
        }
    }
    Ok(apply_qt(w03, dm).grades(&[0, 3]))
}

/// Grade 1 and 2 of v rescaled to u¹ = γ^{−1/2}v¹, u² = μ^{−1/2}v².
pub fn to_maxwell(v: &FormField, dm: &DerivedMedium) -> FormField {
    v.map_points(|p, u| u.grade(1).scale(1.0 / dm.gamma_sqrt.data[p]) + u.grade(2).scale(1.0 / dm.mu_sqrt.data[p]))
}

/// (δu² + iωγu¹) + (−du¹ + iωμu²).
pub fn maxwell_residual(u: &FormField, dm: &DerivedMedium) -> FormField {
    let u1 = u.grades(&[1]);
    let u2 = u.grades(&[2]);
    let mut out = calculus::coderiv(&u2);
    out.axpy(Complex64::new(-1.0, 0.0), &calculus::ext_deriv(&u1));
    let w = dm.omega;
    out.add_assign(&u1.map_points(|p, x| x.scale(I * w * dm.gamma.data[p])));
    out.add_assign(&u2.map_points(|p, x| x.scale(I * w * dm.mu.data[p])));
    out.grades(&[1, 2])
}

fn pointwise_scalar(w: &FormField, phi: &FormField, f: impl Fn(&GradedForm, &GradedForm) -> Complex64) -> ScalarField {
    let g = w.grid;
    ScalarField { grid: g, data: (0..g.len()).map(|p| f(&w.get(p), &phi.get(p))).collect() }
}

fn pair_one_forms(x: impl Fn(usize) -> GradedForm, f: &FormField) -> Complex64 {
    let g = f.grid;
    (0..g.len()).map(|p| x(p).inner(&f.get(p))).sum::<Complex64>() * g.cell_volume()
}

/// Coefficient roles that distinguish the Q and Q̃ weak forms.
struct WeakRoles {
    /// Coefficient pairing with grade-{0,2} products in the quadratic term.
    even_sq: fn(&DerivedMedium, usize) -> GradedForm,
    odd_sq: fn(&DerivedMedium, usize) -> GradedForm,
}

fn common_zeroth(w: &FormField, phi: &FormField, dm: &DerivedMedium) -> Complex64 {
    let g = w.grid;
    let bg = dm.eps0 * dm.mu0;
    let w2 = dm.omega * dm.omega;
    (0..g.len())
        .map(|p| {
            let gm = dm.gamma_mu_sqrt.data[p];
            -w2 * (gm * gm - bg) * w.get(p).inner(&phi.get(p))
        })
        .sum::<Complex64>()
        * g.cell_volume()
}

fn quadratic_terms(w: &FormField, phi: &FormField, dm: &DerivedMedium, roles: &WeakRoles) -> Complex64 {
    let g = w.grid;
    (0..g.len())
        .map(|p| {
            let (u, v) = (w.get(p), phi.get(p));
            let e = (roles.even_sq)(dm, p);
            let o = (roles.odd_sq)(dm, p);
            e.inner(&e) * u.grades(&[0, 2]).inner(&v.grades(&[0, 2]))
                + o.inner(&o) * u.grades(&[1, 3]).inner(&v.grades(&[1, 3]))
        })
        .sum::<Complex64>()
        * g.cell_volume()
}

fn hodge_grade2_as_one_form(f: &FormField) -> FormField {
    f.map_points(|_, u| u.grade(2).hodge())
}

/// Six-term weak form of ⟨Qw, φ⟩, evaluated by quadrature with spectral d and D*.
pub fn weak_q_pairing(w: &FormField, phi: &FormField, dm: &DerivedMedium) -> Complex64 {
    let g = w.grid;
    let two_i_omega = 2.0 * I * dm.omega;
    let mut total = common_zeroth(w, phi, dm);
    total += (0..g.len())
        .map(|p| {
            let dg = dm.d_gamma_mu_sqrt(p);
            let u = w.get(p);
            let t = dg.vee(&u.grades(&[1, 3])) + dg.wedge(&u.grades(&[0, 2]));
            t.scale(two_i_omega).inner(&phi.get(p))
        })
        .sum::<Complex64>()
        * g.cell_volume();
    total += quadratic_terms(w, phi, dm, &WeakRoles { even_sq: |d, p| d.da_at(p), odd_sq: |d, p| d.db_at(p) });
    let s_a = pointwise_scalar(w, phi, |u, v| (u.grade(2) - u.grade(0)).inner(&v.grades(&[0, 2])));
    let s_b = pointwise_scalar(w, phi, |u, v| (u.grade(1) - u.grade(3)).inner(&v.grades(&[1, 3])));
    total += pair_one_forms(|p| dm.da_at(p), &gradient(&s_a));
    total += pair_one_forms(|p| dm.db_at(p), &gradient(&s_b));
    let t1 = sym_coderiv(&SymTensorField::sym_product(w, phi));
    let t2 = sym_coderiv(&SymTensorField::sym_product(&hodge_grade2_as_one_form(w), &hodge_grade2_as_one_form(phi)));
    total += pair_one_forms(|p| dm.db_at(p), &t1);
    total += pair_one_forms(|p| dm.da_at(p), &t2);
    total
}

/// Weak form of ⟨Q̃w, φ⟩.
pub fn weak_qt_pairing(w: &FormField, phi: &FormField, dm: &DerivedMedium) -> Complex64 {
    let g = w.grid;
    let two_i_omega = 2.0 * I * dm.omega;
    let mut total = common_zeroth(w, phi, dm);
    total += (0..g.len())
        .map(|p| {
            let dg = dm.d_gamma_mu_sqrt(p);
            let u = w.get(p);
            let t = dg.wedge(&u.grade(1)) - dg.vee(&u.grade(2));
            t.scale(two_i_omega).inner(&phi.get(p))
        })
        .sum::<Complex64>()
        * g.cell_volume();
    total += quadratic_terms(w, phi, dm, &WeakRoles { even_sq: |d, p| d.db_at(p), odd_sq: |d, p| d.da_at(p) });
    let s_b = pointwise_scalar(w, phi, |u, v| (u.grade(0) - u.grade(2)).inner(&v.grades(&[0, 2])));
    let s_a = pointwise_scalar(w, phi, |u, v| (u.grade(3) - u.grade(1)).inner(&v.grades(&[1, 3])));
    total += pair_one_forms(|p| dm.db_at(p), &gradient(&s_b));
    total += pair_one_forms(|p| dm.da_at(p), &gradient(&s_a));
    let t1 = sym_coderiv(&SymTensorField::sym_product(w, phi));
    let t2 = sym_coderiv(&SymTensorField::sym_product(&hodge_grade2_as_one_form(w), &hodge_grade2_as_one_form(phi)));
    total -= pair_one_forms(|p| dm.da_at(p), &t1);
    total -= pair_one_forms(|p| dm.db_at(p), &t2);
    total
}

/// Weak form of ⟨q̃ v, φ⟩ for grade-{0,3} v and φ.
pub fn weak_qtilde_pairing(v: &FormField, phi: &FormField, dm: &DerivedMedium) -> Complex64 {
    let g = v.grid;
    let mut total = common_zeroth(v, phi, dm);
    total += (0..g.len())
        .map(|p| {
            let (u, f) = (v.get(p), phi.get(p));
            let (da, db) = (dm.da_at(p), dm.db_at(p));
            db.inner(&db) * u.c[0] * f.c[0] + da.inner(&da) * u.c[7] * f.c[7]
        })
        .sum::<Complex64>()
        * g.cell_volume();
    let s0 = pointwise_scalar(v, phi, |u, f| u.c[0] * f.c[0]);
    let s3 = pointwise_scalar(v, phi, |u, f| u.c[7] * f.c[7]);
    total += pair_one_forms(|p| dm.db_at(p), &gradient(&s0));
    total += pair_one_forms(|p| dm.da_at(p), &gradient(&s3));
    total
}

/// Helmholtz part ∫⟨δw,δφ⟩ + ⟨dw,dφ⟩ − k²⟨w,φ⟩.
pub fn helmholtz_pairing(w: &FormField, phi: &FormField, k: f64) -> Complex64 {
    let (dw, dp) = (calculus::ext_deriv(w), calculus::ext_deriv(phi));
    let (sw, sp) = (calculus::coderiv(w), calculus::coderiv(phi));
    sw.integrate_inner(&sp) + dw.integrate_inner(&dp) - k * k * w.integrate_inner(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_profile() {
        let b = BumpSpec { center: [0.0; 3], radius: 2.0, amplitude: 0.5, exponent: 2.0 };
        assert_eq!(b.value([0.0; 3]), 0.5);
        assert_eq!(b.value([2.0, 0.0, 0.0]), 0.0);
        assert!((b.value([1.0, 0.0, 0.0]) - 0.5 * 0.5625).abs() < 1e-15);
    }

    #[test]
    fn background_derivation() {
        let g = Grid::new(8, 6.0).unwrap();
        let m = Medium::background(g, 2.0, 1.5, 3.0).unwrap();
        let dm = derive(&m).unwrap();
        assert!((dm.k - 2.0 * (4.5f64).sqrt()).abs() < 1e-14);
        assert!(dm.da.max_norm() < 1e-14 && dm.db.max_norm() < 1e-14);
        assert!((dm.a.data[3] - Complex64::new(0.5 * 1.5f64.ln(), 0.0)).norm() < 1e-14);
        assert!(dm.is_background());
    }

    #[test]
    fn rejects_bad_media() {
        let g = Grid::new(8, 8.0).unwrap();
        let mut spec = MediumSpec::background(1.0, 1.0, 1.0);
        spec.sigma.push(BumpSpec { center: [0.0; 3], radius: 1.0, amplitude: -1.0, exponent: 4.0 });
        assert!(spec.sample(g).is_err());
        let mut spec = MediumSpec::background(1.0, 1.0, 1.0);
        spec.eps.push(BumpSpec { center: [1.5, 0.0, 0.0], radius: 1.0, amplitude: 1.0, exponent: 4.0 });
        assert!(spec.sample(g).is_err());
        assert!(MediumSpec::background(-1.0, 1.0, 1.0).sample(g).is_err());
    }

    #[test]
    fn conductivity_enters_imaginary_part() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut spec = MediumSpec::background(2.0, 1.0, 1.0);
        spec.support_half_width = Some(3.5);
        spec.sigma.push(BumpSpec { center: [0.0; 3], radius: 3.0, amplitude: 0.2, exponent: 6.0 });
        let dm = derive(&spec.sample(g).unwrap()).unwrap();
        let centre = g.index([8, 8, 8]);
        assert!((dm.gamma.data[centre].im - 0.1).abs() < 2e-3);
        for p in 0..g.len() {
            assert!(((2.0 * dm.a.data[p]).exp() - dm.gamma.data[p]).norm() < 1e-12);
        }
    }
}

/// Reference configurations used by the acceptance harness and the example configs.
pub mod presets {
    use super::{BumpSpec, MediumSpec};
    use std::f64::consts::PI;

    /// Box side of the reference grid.
    pub const REFERENCE_SIDE: f64 = 2.0 * PI;
    pub const REFERENCE_N: usize = 32;

    fn bump(center: [f64; 3], radius: f64, amplitude: f64) -> BumpSpec {
        BumpSpec { center, radius, amplitude, exponent: 6.0 }
    }

    /// Smooth two-bump medium: permittivity and permeability bumps plus a weak conductivity.
    pub fn reference_medium() -> MediumSpec {
        MediumSpec {
            omega: 1.0,
            eps0: 1.0,
            mu0: 1.0,
            eps: vec![bump([0.3, 0.0, 0.0], 2.3, 0.5)],
            mu: vec![bump([-0.3, 0.2, 0.0], 2.3, 0.4)],
            sigma: vec![bump([0.0, 0.0, 0.2], 2.2, 0.3)],
            support_half_width: Some(0.45 * REFERENCE_SIDE),
        }
    }

    /// Second medium of the reference pair.
    pub fn reference_medium_alt() -> MediumSpec {
        MediumSpec {
            omega: 1.0,
            eps0: 1.0,
            mu0: 1.0,
            eps: vec![bump([-0.2, 0.1, 0.3], 2.3, 0.3)],
            mu: vec![bump([0.2, -0.3, 0.1], 2.2, 0.6)],
            sigma: vec![bump([0.1, 0.2, 0.0], 2.3, 0.2)],
            support_half_width: Some(0.45 * REFERENCE_SIDE),
        }
    }
}
