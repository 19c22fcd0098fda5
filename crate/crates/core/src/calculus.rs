//! Spectral exterior calculus on periodic form fields.
//!
//! Every operator here is a Fourier multiplier: d̂u = iξ∧û, δ̂u = i(−1)^l ξ∨û, and the
//! conjugated versions replace iξ by iξ + ζ.

use num_complex::Complex64;

use crate::algebra::GradedForm;
use crate::bourgain::ComplexCovector;
use crate::field::{FormField, Grid, ScalarField, SpectralField, SymTensorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Applies a frequency-wise symbol to a form field.
pub fn apply_multiplier(f: &FormField, sym: impl Fn([f64; 3], &GradedForm) -> GradedForm) -> FormField {
    f.forward().map_freq(|_, xi, u| sym(xi, &u)).inverse()
}

/// The covector iξ + ζ as a graded form.
#[inline]
fn shifted_covector(xi: [f64; 3], zeta: &ComplexCovector) -> GradedForm {
    GradedForm::one_form(std::array::from_fn(|j| I * xi[j] + zeta.z[j]))
}

/// Symbol of d_ζ at ξ.
#[inline]
pub fn d_symbol(xi: [f64; 3], zeta: &ComplexCovector, u: &GradedForm) -> GradedForm {
    shifted_covector(xi, zeta).wedge(u)
}

/// Symbol of δ_ζ at ξ.
#[inline]
pub fn delta_symbol(xi: [f64; 3], zeta: &ComplexCovector, u: &GradedForm) -> GradedForm {
    shifted_covector(xi, zeta).vee(&u.grade_involution())
}

/// Symbol of T_ζ = (d_ζ + δ_ζ)∘Σ(−1)^l at ξ.
#[inline]
pub fn dirac_symbol(xi: [f64; 3], zeta: &ComplexCovector, u: &GradedForm) -> GradedForm {
    let c = shifted_covector(xi, zeta);
    let v = u.grade_involution();
    c.wedge(&v) + c.vee(&v.grade_involution())
}

/// Exterior derivative d.
pub fn ext_deriv(f: &FormField) -> FormField {
    conj_ext_deriv(f, &ComplexCovector::zero())
}

/// Codifferential δ.
pub fn coderiv(f: &FormField) -> FormField {
    conj_coderiv(f, &ComplexCovector::zero())
}

/// d_ζ = d + ζ∧.
pub fn conj_ext_deriv(f: &FormField, zeta: &ComplexCovector) -> FormField {
    apply_multiplier(f, |xi, u| d_symbol(xi, zeta, u))
}

/// δ_ζ = δ + (−1)^l ζ∨ on grade l.
pub fn conj_coderiv(f: &FormField, zeta: &ComplexCovector) -> FormField {
    apply_multiplier(f, |xi, u| delta_symbol(xi, zeta, u))
}

/// T_ζ v = (d_ζ + δ_ζ) Σ(−1)^l v^l. T'_ζ = −T_ζ, and T_ζ T'_ζ = Δ_ζ.
pub fn dirac(f: &FormField, zeta: &ComplexCovector) -> FormField {
    apply_multiplier(f, |xi, u| dirac_symbol(xi, zeta, u))
}

/// Scalar symbol |ξ|² − 2i⟨ζ,ξ⟩ − ⟨ζ,ζ⟩ of the conjugated Hodge Laplacian.
#[inline]
pub fn conj_laplacian_symbol(xi: [f64; 3], zeta: &ComplexCovector) -> Complex64 {
    let xx: f64 = xi.iter().map(|x| x * x).sum();
    Complex64::new(xx, 0.0) - 2.0 * I * zeta.dot_real(xi) - zeta.dot(zeta)
}

/// Δ_ζ = e_{−ζ}(dδ + δd)e_ζ.
pub fn conj_laplacian(f: &FormField, zeta: &ComplexCovector) -> FormField {
    apply_multiplier(f, |xi, u| u.scale(conj_laplacian_symbol(xi, zeta)))
}

/// Hodge Laplacian dδ + δd.
pub fn hodge_laplacian(f: &FormField) -> FormField {
    conj_laplacian(f, &ComplexCovector::zero())
}

/// d of a scalar field, as a grade-1 form field.
pub fn gradient(s: &ScalarField) -> FormField {
    ext_deriv(&s.to_form())
}

/// Scalar Laplacian Σ∂²_j (note the sign: δd = −Σ∂²_j on functions).
pub fn scalar_laplacian(s: &ScalarField) -> ScalarField {
    let g = s.grid;
    let mut spec = s.spectrum();
    for (p, z) in spec.iter_mut().enumerate() {
        let xi = g.xi(p);
        *z *= -(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    }
    ScalarField::from_spectrum(g, spec)
}

/// D*t = −Σ_k Σ_j ∂_j(t_jk + t_kj) dx^k.
pub fn sym_coderiv(t: &SymTensorField) -> FormField {
    let g = t.grid;
    let specs: Vec<Vec<Complex64>> =
        (0..6).map(|c| ScalarField { grid: g, data: t.data[c * g.len()..(c + 1) * g.len()].to_vec() }.spectrum()).collect();
    let mut out = FormField::zeros(g);
    for k in 0..3 {
        let mut acc = vec![Complex64::new(0.0, 0.0); g.len()];
        for (p, a) in acc.iter_mut().enumerate() {
            let xi = g.xi(p);
            for (j, x) in xi.iter().enumerate() {
                *a += -2.0 * I * x * specs[crate::algebra::sym_slot(j, k)][p];
            }
        }
        let f = ScalarField::from_spectrum(g, acc);
        out.component_mut(1 + k).copy_from_slice(&f.data);
    }
    out
}

/// (L², H⁻¹) norms with the H⁻¹ weight (1 + |ξ|²)^{−1}.
pub fn sobolev_norms(f: &FormField) -> (f64, f64) {
    let s = f.forward();
    let g = f.grid;
    let l2 = s.weighted_norm_sqr(|_| 1.0).sqrt();
    let hm1 = s
        .weighted_norm_sqr(|p| {
            let xi = g.xi(p);
            1.0 / (1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])
        })
        .sqrt();
    (l2, hm1)
}

/// Gaussian low-pass multiplier exp(−|hξ|²/2).
pub fn mollifier_multiplier(xi: [f64; 3], h: f64) -> f64 {
    let r2 = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) * h * h;
    (-0.5 * r2).exp()
}

pub fn mollify(f: &FormField, h: f64) -> FormField {
    apply_multiplier(f, |xi, u| *u * mollifier_multiplier(xi, h))
}

/// Keeps only wavenumbers with every |k_j| ≤ band; the Nyquist row is always dropped.
pub fn lowpass_scalar(s: &ScalarField, band: usize) -> ScalarField {
    let g = s.grid;
    let band = band.min(g.n / 2 - 1);
    let mut spec = s.spectrum();
    for (p, z) in spec.iter_mut().enumerate() {
        if !g.in_band(p, band) {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    ScalarField::from_spectrum(g, spec)
}

/// Two-thirds de-aliasing band for a grid.
pub fn two_thirds_band(g: &Grid) -> usize {
    g.n / 3
}

/// Spectral field restricted to a band, mainly for building test data.
pub fn restrict_band(s: &SpectralField, band: usize) -> SpectralField {
    let g = s.grid;
    s.map_freq(|p, _, u| if g.in_band(p, band) { u } else { GradedForm::zero() })
}
