//! CGO geometry and amplitudes, the Neumann-series remainder solver, and the decay and
//! operator-norm studies.
//!
//! All unknowns live in conjugated periodic variables: w = e_ζ(A + R) with A constant and R
//! periodic on the grid, solving (Δ_ζ − k²)R + Q R = −Q A.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::GradedForm;
use crate::bourgain::{check_characteristic, ClampReport, ClampSettings, ComplexCovector, ConjugatedSymbol};
use crate::calculus::mollify;
use crate::error::{Error, Result};
use crate::field::{FormField, Grid, SpectralField};
use crate::media::{apply_pt_conj, apply_q, DerivedMedium};
use crate::rng;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ORTHO_TOL: f64 = 1e-12;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// The pair ζ₁, ζ₂ with ⟨ζ_j,ζ_j⟩ = −k² and ζ₁ + ζ₂ = iρ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CGOGeometry {
    /// ρ in units of the lattice spacing 2π/L.
    pub rho_index: [i64; 3],
    pub rho: [f64; 3],
    pub eta1: [f64; 3],
    pub eta2: [f64; 3],
    pub s: f64,
    pub k: f64,
    pub zeta1: ComplexCovector,
    pub zeta2: ComplexCovector,
}

impl CGOGeometry {
    pub fn new(grid: &Grid, rho_index: [i64; 3], eta1: [f64; 3], eta2: [f64; 3], s: f64, k: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 1.0) {
            return Err(Error::InvalidGeometry(format!("s must be >= 1, got {s}")));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidGeometry(format!("k must be nonnegative, got {k}")));
        }
        let h = grid.dual_spacing();
        let rho = rho_index.map(|m| h * m as f64);
        let rn = norm(rho).max(1.0);
        let checks = [
            ((norm(eta1) - 1.0).abs(), "|eta1| = 1"),
            ((norm(eta2) - 1.0).abs(), "|eta2| = 1"),
            (dot(eta1, eta2).abs(), "<eta1, eta2> = 0"),
            (dot(eta1, rho).abs() / rn, "<eta1, rho> = 0"),
            (dot(eta2, rho).abs() / rn, "<eta2, rho> = 0"),
        ];
        for (defect, what) in checks {
            if defect > ORTHO_TOL {
                return Err(Error::InvalidGeometry(format!("frame violates {what} (defect {defect:.2e})")));
            }
        }
        let r2 = dot(rho, rho);
        let x = (s * s + 0.25 * r2).sqrt();
        let y = (s * s + k * k).sqrt();
        let zeta1 = ComplexCovector::from_parts(
            std::array::from_fn(|j| -x * eta1[j]),
            std::array::from_fn(|j| 0.5 * rho[j] - y * eta2[j]),
        );
        let zeta2 = ComplexCovector::from_parts(
            std::array::from_fn(|j| x * eta1[j]),
            std::array::from_fn(|j| 0.5 * rho[j] + y * eta2[j]),
        );
        Ok(Self { rho_index, rho, eta1, eta2, s, k, zeta1, zeta2 })
    }

    /// Geometry from a real ρ, which must lie on the lattice (2π/L)ℤ³.
    pub fn from_real_rho(grid: &Grid, rho: [f64; 3], eta1: [f64; 3], eta2: [f64; 3], s: f64, k: f64) -> Result<Self> {
        let h = grid.dual_spacing();
        let idx = rho.map(|r| (r / h).round());
        if (0..3).any(|j| (idx[j] * h - rho[j]).abs() > 1e-9 * h.max(rho[j].abs())) {
            return Err(Error::InvalidGeometry(format!("rho {rho:?} is not on the frequency lattice")));
        }
        Self::new(grid, idx.map(|v| v as i64), eta1, eta2, s, k)
    }

    /// Same frame and ρ with a different s.
    pub fn with_s(&self, grid: &Grid, s: f64) -> Result<Self> {
        Self::new(grid, self.rho_index, self.eta1, self.eta2, s, self.k)
    }

    pub fn rho_norm(&self) -> f64 {
        norm(self.rho)
    }
}

/// Orthonormal pair (η₁, η₂) spanning ρ^⊥, rotated by `angle` within that plane.
pub fn frame(rho: [f64; 3], angle: f64) -> ([f64; 3], [f64; 3]) {
    let r = norm(rho);
    let axis = if r == 0.0 { [1.0, 0.0, 0.0] } else { rho.map(|v| v / r) };
    // least-aligned coordinate direction seeds the basis
    let j = (0..3).min_by(|&a, &b| axis[a].abs().total_cmp(&axis[b].abs())).unwrap_or(0);
    let mut seed = [0.0; 3];
    seed[j] = 1.0;
    let e1 = {
        let c = cross(axis, seed);
        let n = norm(c);
        c.map(|v| v / n)
    };
    let e2 = cross(axis, e1);
    let (sn, cs) = angle.sin_cos();
    let eta1 = std::array::from_fn(|i| cs * e1[i] + sn * e2[i]);
    let eta2 = std::array::from_fn(|i| -sn * e1[i] + cs * e2[i]);
    (eta1, eta2)
}

/// Polarization of the CGO amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// α = η₁, β = 0.
    E,
    /// α = 0, β = |ρ|^{−1} η₂∧ρ.
    H,
}

impl Polarization {
    pub fn label(&self) -> &'static str {
        match self {
            Polarization::E => "E",
            Polarization::H => "H",
        }
    }

    /// (α, β) for a geometry.
    pub fn alpha_beta(&self, g: &CGOGeometry) -> Result<(GradedForm, GradedForm)> {
        match self {
            Polarization::E => Ok((GradedForm::real_one_form(g.eta1), GradedForm::zero())),
            Polarization::H => {
                let r = g.rho_norm();
                if r == 0.0 {
                    return Err(Error::InvalidGeometry("H-mode polarization needs rho != 0".into()));
                }
                let beta = GradedForm::real_one_form(g.eta2).wedge(&GradedForm::real_one_form(g.rho)) * (1.0 / r);
                Ok((GradedForm::zero(), beta))
            }
        }
    }
}

/// A = √2/|ζ₁| (ζ₁∨α + ikα + ikβ + ζ₁∧β).
pub fn amplitude_a(g: &CGOGeometry, pol: Polarization) -> Result<GradedForm> {
    let (alpha, beta) = pol.alpha_beta(g)?;
    let z = g.zeta1.to_form();
    let ik = I * g.k;
    let sum = z.vee(&alpha) + alpha.scale(ik) + beta.scale(ik) + z.wedge(&beta);
    Ok(sum * (2f64.sqrt() / g.zeta1.norm()))
}

/// B = −√2/|ζ₂| (ζ₂∨(α+β) + ζ₂∧(−α+β) + ik(α+β)).
pub fn amplitude_b(g: &CGOGeometry, pol: Polarization) -> Result<GradedForm> {
    let (alpha, beta) = pol.alpha_beta(g)?;
    let z = g.zeta2.to_form();
    let ab = alpha + beta;
    let sum = z.vee(&ab) + z.wedge(&(beta - alpha)) + ab.scale(I * g.k);
    Ok(sum * (-(2f64.sqrt()) / g.zeta2.norm()))
}

/// Large-s limit −(η₁+iη₂)∨α − (η₁+iη₂)∧β of A.
pub fn limit_a(g: &CGOGeometry, pol: Polarization) -> Result<GradedForm> {
    let (alpha, beta) = pol.alpha_beta(g)?;
    let e = eta_complex(g);
    Ok(-(e.vee(&alpha)) - e.wedge(&beta))
}

/// Large-s limit −(η₁+iη₂)∨(α+β) − (η₁+iη₂)∧(−α+β) of B.
pub fn limit_b(g: &CGOGeometry, pol: Polarization) -> Result<GradedForm> {
    let (alpha, beta) = pol.alpha_beta(g)?;
    let e = eta_complex(g);
    Ok(-(e.vee(&(alpha + beta))) - e.wedge(&(beta - alpha)))
}

fn eta_complex(g: &CGOGeometry) -> GradedForm {
    GradedForm::one_form(std::array::from_fn(|j| Complex64::new(g.eta1[j], g.eta2[j])))
}

/// −ζ∨A¹ + ikA⁰ − ζ∧A² + ikA³; vanishes for an admissible amplitude.
pub fn incidence_residual(zeta: &ComplexCovector, k: f64, a: &GradedForm) -> GradedForm {
    let z = zeta.to_form();
    let ik = I * k;
    -(z.vee(&a.grade(1))) + a.grade(0).scale(ik) - z.wedge(&a.grade(2)) + a.grade(3).scale(ik)
}

/// Neumann solver controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative residual target: stop when ‖res‖_{X^{−1/2}} < tol·(‖QA‖_{X^{−1/2}} + 1).
    pub tol: f64,
    pub max_iter: usize,
    pub clamp: ClampSettings,
}

impl SolverSettings {
    pub fn default_for(grid: &Grid) -> Self {
        Self { tol: 1e-10, max_iter: 200, clamp: ClampSettings::default_for(grid) }
    }
}

/// Solver diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// ‖(Δ_ζ − k²)R + Q(A + R)‖_{X^{−1/2}} with the clamped symbol.
    pub residual: f64,
    /// residual / (‖QA‖_{X^{−1/2}} + 1)
    pub relative_residual: f64,
    pub remainder_norm: f64,
    pub qa_norm: f64,
    /// Largest of the last three ratios ‖ΔR_{n+1}‖/‖ΔR_n‖ in X^{1/2}.
    pub contraction: f64,
    pub clamp: ClampReport,
}

#[derive(Clone, Debug)]
pub struct CGOSolution {
    pub zeta: ComplexCovector,
    pub amplitude: GradedForm,
    pub remainder: FormField,
    pub diagnostics: SolveDiagnostics,
}

impl CGOSolution {
    /// A + R as a periodic field.
    pub fn total(&self) -> FormField {
        let mut f = self.remainder.clone();
        f.add_assign(&FormField::constant(self.remainder.grid, self.amplitude));
        f
    }

    /// e^{ζ·x}(A + R)(x) at a grid point (not periodic; for export only).
    pub fn physical_value(&self, p: usize) -> GradedForm {
        let x = self.remainder.grid.point(p);
        let phase: Complex64 = (0..3).map(|j| self.zeta.z[j] * x[j]).sum();
        (self.amplitude + self.remainder.get(p)).scale(phase.exp())
    }
}

fn neg_resolve(sym: &ConjugatedSymbol, qf: &SpectralField) -> SpectralField {
    let mut r = sym.resolve_spectral(qf);
    for z in &mut r.data {
        *z = -*z;
    }
    r
}

/// Runs R ← −(Δ_ζ − k²)^{−1} Q(A + R) from R = 0.
pub fn solve_cgo(dm: &DerivedMedium, zeta: &ComplexCovector, a: &GradedForm, settings: &SolverSettings) -> Result<CGOSolution> {
    check_characteristic(zeta, dm.k)?;
    let g = dm.grid;
    let sym = ConjugatedSymbol::new(g, *zeta, settings.clamp);
    if sym.report.exceeds(settings.clamp.threshold) {
        return Err(Error::ResonantGrid { fraction: sym.report.fraction(), threshold: settings.clamp.threshold });
    }
    let a_field = FormField::constant(g, *a);
    let qa = apply_q(&a_field, dm).forward();
    let qa_norm = sym.norm_spectral(&qa, -0.5);
    let scale = qa_norm + 1.0;
    let mut diag = SolveDiagnostics {
        iterations: 1,
        residual: 0.0,
        relative_residual: 0.0,
        remainder_norm: 0.0,
        qa_norm,
        contraction: 0.0,
        clamp: sym.report,
    };
    if qa_norm == 0.0 {
        return Ok(CGOSolution { zeta: *zeta, amplitude: *a, remainder: FormField::zeros(g), diagnostics: diag });
    }

    let mut r_hat = neg_resolve(&sym, &qa);
    let mut r = r_hat.inverse();
    let mut last_delta = sym.norm_spectral(&r_hat, 0.5);
    let mut ratios: Vec<f64> = Vec::new();
    let mut stalled = 0;
    for it in 1..=settings.max_iter {
        // Q(A + R_n) = QA + Q R_n; the residual of R_n is p_c R̂_n + FFT(Q(A + R_n))
        let mut q_total = apply_q(&r, dm).forward();
        for (z, w) in q_total.data.iter_mut().zip(&qa.data) {
            *z += w;
        }
        let applied = sym.apply_spectral(&r_hat);
        let mut res = q_total.clone();
        for (z, w) in res.data.iter_mut().zip(&applied.data) {
            *z += w;
        }
        let residual = sym.norm_spectral(&res, -0.5);
        diag.iterations = it;
        diag.residual = residual;
        diag.relative_residual = residual / scale;
        diag.remainder_norm = sym.norm_spectral(&r_hat, 0.5);
        diag.contraction = ratios.iter().rev().take(3).copied().fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::Divergence { iterations: it, contraction: f64::INFINITY });
        }
        if residual < settings.tol * scale {
            return Ok(CGOSolution { zeta: *zeta, amplitude: *a, remainder: r, diagnostics: diag });
        }
        let next = neg_resolve(&sym, &q_total);
        let mut delta = next.clone();
        for (z, w) in delta.data.iter_mut().zip(&r_hat.data) {
            *z -= w;
        }
        let dn = sym.norm_spectral(&delta, 0.5);
        let ratio = if last_delta > 0.0 { dn / last_delta } else { 0.0 };
        ratios.push(ratio);
        stalled = if ratio >= 0.95 { stalled + 1 } else { 0 };
        if stalled >= 3 {
            diag.contraction = ratios.iter().rev().take(3).copied().fold(0.0, f64::max);
            return Err(Error::Divergence { iterations: it, contraction: diag.contraction });
        }
        last_delta = dn;
        r_hat = next;
        r = r_hat.inverse();
    }
    Err(Error::NotConverged { iterations: settings.max_iter, residual: diag.residual })
}

/// Which of the two CGO families to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// ζ₁ with amplitude A.
    W1,
    /// ζ₂ with amplitude B.
    V2,
}

/// Builds the amplitude for a family and solves; on a resonant grid retries once with s
/// nudged by an incommensurate relative epsilon.
pub fn solve_family(
    dm: &DerivedMedium,
    geom: &CGOGeometry,
    pol: Polarization,
    family: Family,
    settings: &SolverSettings,
) -> Result<(CGOGeometry, CGOSolution)> {
    let attempt = |g: &CGOGeometry| -> Result<CGOSolution> {
        let (zeta, amp) = match family {
            Family::W1 => (g.zeta1, amplitude_a(g, pol)?),
            Family::V2 => (g.zeta2, amplitude_b(g, pol)?),
        };
        solve_cgo(dm, &zeta, &amp, settings)
    };
    match attempt(geom) {
        Err(Error::ResonantGrid { .. }) => {
            let nudged = geom.with_s(&dm.grid, geom.s * (1.0 + 1e-7 * 2f64.sqrt()))?;
            let sol = attempt(&nudged)?;
            Ok((nudged, sol))
        }
        other => other.map(|sol| (*geom, sol)),
    }
}

/// ‖grade-{0,3} part of v₁‖_{L²}/‖v₁‖_{L²} with v₁ = e_{−ζ}Pᵗe_{ζ}(A + R).
pub fn check_grade03(dm: &DerivedMedium, sol: &CGOSolution) -> f64 {
    let v = apply_pt_conj(&sol.total(), dm, &sol.zeta);
    let total = v.l2_norm();
    if total == 0.0 {
        return 0.0;
    }
    v.grades(&[0, 3]).l2_norm() / total
}

/// One row of the decay study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub lambda: f64,
    pub sample: usize,
    pub s: f64,
    pub angle: f64,
    pub iterations: usize,
    pub residual: f64,
    pub r_norm: f64,
    pub qa_norm: f64,
    pub clamped_fraction: f64,
    pub contraction: f64,
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub lambda: f64,
    pub samples: usize,
    pub failures: usize,
    /// Average of ‖R‖²_{X^{1/2}} over successful samples.
    pub mean_r2: f64,
    pub stderr_r2: f64,
    /// Average of ‖QA‖²_{X^{−1/2}}.
    pub mean_qa2: f64,
}

/// Quasi-Monte-Carlo average of ‖R‖² over (s, η₁) ∈ [λ, 2λ] × S¹ for each λ.
///
/// Angles follow a golden-ratio sequence with a seeded offset; s is stratified over
/// `n_samples` strata with a seeded jitter inside each stratum.
pub fn decay_study(
    dm: &DerivedMedium,
    rho_index: [i64; 3],
    pol: Polarization,
    lambdas: &[f64],
    n_samples: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<(Vec<DecaySample>, Vec<DecaySummary>)> {
    if n_samples < 8 {
        return Err(Error::InvalidArgument(format!("decay study needs at least 8 samples, got {n_samples}")));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas.iter().any(|l| !(*l >= 1.0)) {
        return Err(Error::InvalidArgument("lambda list must be increasing and >= 1".into()));
    }
    let g = dm.grid;
    let h = g.dual_spacing();
    let rho = rho_index.map(|m| h * m as f64);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let offset: f64 = rng::stream(seed, u64::MAX).gen();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (li, &lambda) in lambdas.iter().enumerate() {
        let jobs: Vec<usize> = (0..n_samples).collect();
        let results: Vec<Result<DecaySample>> = jobs
            .par_iter()
            .map(|&i| {
                let mut r = rng::stream(seed, (li * n_samples + i) as u64);
                let u: f64 = r.gen();
                let s = lambda * (1.0 + (i as f64 + u) / n_samples as f64);
                let angle = 2.0 * PI * (offset + golden * i as f64).fract();
                let (eta1, eta2) = frame(rho, angle);
                let geom = CGOGeometry::new(&g, rho_index, eta1, eta2, s, dm.k)?;
                let mut row = DecaySample {
                    lambda,
                    sample: i,
                    s,
                    angle,
                    iterations: 0,
                    residual: f64::NAN,
                    r_norm: f64::NAN,
                    qa_norm: f64::NAN,
                    clamped_fraction: f64::NAN,
                    contraction: f64::NAN,
                    failed: true,
                };
                if let Ok((_, sol)) = solve_family(dm, &geom, pol, Family::W1, settings) {
                    let d = sol.diagnostics;
                    row.iterations = d.iterations;
                    row.residual = d.residual;
                    row.r_norm = d.remainder_norm;
                    row.qa_norm = d.qa_norm;
                    row.clamped_fraction = d.clamp.fraction();
                    row.contraction = d.contraction;
                    row.failed = false;
                }
                Ok(row)
            })
            .collect();
        let batch: Vec<DecaySample> = results.into_iter().collect::<Result<_>>()?;
        let ok: Vec<&DecaySample> = batch.iter().filter(|r| !r.failed).collect();
        let failures = batch.len() - ok.len();
        if failures * 5 > batch.len() {
            return Err(Error::StudyAborted { failed: failures, total: batch.len() });
        }
        let m = ok.len() as f64;
        let r2: Vec<f64> = ok.iter().map(|r| r.r_norm * r.r_norm).collect();
        let mean_r2 = r2.iter().sum::<f64>() / m;
        let var = if ok.len() > 1 { r2.iter().map(|v| (v - mean_r2).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
        let mean_qa2 = ok.iter().map(|r| r.qa_norm * r.qa_norm).sum::<f64>() / m;
        summaries.push(DecaySummary { lambda, samples: batch.len(), failures, mean_r2, stderr_r2: (var / m).sqrt(), mean_qa2 });
        rows.extend(batch);
    }
    Ok((rows, summaries))
}

/// Randomized lower bound for ‖Q‖_{X^{1/2}→X^{−1/2}} plus the mollifier split diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNormEstimate {
    pub zeta_norm: f64,
    pub estimate: f64,
    /// h = |ζ|^{−1/2}
    pub h: f64,
    /// |ζ|^{−1}h^{−1}
    pub smooth_term: f64,
    /// max(‖da − φ_h∗da‖_∞, ‖db − φ_h∗db‖_∞)
    pub rough_term: f64,
}

pub fn q_norm_estimate(
    dm: &DerivedMedium,
    zeta: &ComplexCovector,
    trials: usize,
    seed: u64,
    clamp: ClampSettings,
) -> Result<QNormEstimate> {
    if trials < 16 {
        return Err(Error::InvalidArgument(format!("q-norm estimate needs at least 16 trials, got {trials}")));
    }
    let g = dm.grid;
    let sym = ConjugatedSymbol::new(g, *zeta, clamp);
    let jobs: Vec<usize> = (0..trials).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&t| {
            let mut r = rng::stream(seed, t as u64);
            // even trials: white in X^{1/2} over the whole lattice; odd trials: low band only
            let band = if t % 2 == 0 { g.n / 2 } else { 4 };
            let mut spec = SpectralField::zeros(g);
            for p in 0..g.len() {
                if band < g.n / 2 && !g.in_band(p, band) {
                    continue;
                }
                let w = sym.weight(p, 0.5).sqrt();
                spec.set(p, &rng::graded_form(&mut r).scale(Complex64::new(1.0 / w, 0.0)));
            }
            let nrm = sym.norm_spectral(&spec, 0.5);
            let u = spec.inverse().scale(Complex64::new(1.0 / nrm, 0.0));
            sym.norm(&apply_q(&u, dm), -0.5)
        })
        .collect();
    let estimate = values.into_iter().fold(0.0, f64::max);
    let zn = zeta.norm();
    let h = 1.0 / zn.sqrt();
    let rough = |f: &FormField| mollify(f, h).sub(f).max_norm();
    Ok(QNormEstimate {
        zeta_norm: zn,
        estimate,
        h,
        smooth_term: 1.0 / (zn * h),
        rough_term: rough(&dm.da).max(rough(&dm.db)),
    })
}
