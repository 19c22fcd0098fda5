//! Pairing experiments for two media and the unique-continuation contraction check.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bourgain::{ClampSettings, ComplexCovector, ConjugatedSymbol};
use crate::calculus::{gradient, scalar_laplacian};
use crate::cgo::{self, CGOGeometry, Polarization, SolverSettings};
use crate::error::{Error, Result};
use crate::field::{FormField, Grid, ScalarField, SpectralField};
use crate::media::{apply_q, derive, DerivedMedium, Medium};
use crate::rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Two media on one grid that coincide outside the central sub-box.
#[derive(Clone, Debug)]
pub struct MediumPair {
    pub dm1: DerivedMedium,
    pub dm2: DerivedMedium,
}

impl MediumPair {
    /// Checks the raw samples agree outside the sub-box, then derives both media.
    pub fn new(m1: &Medium, m2: &Medium) -> Result<Self> {
        if m1.grid != m2.grid {
            return Err(Error::GridMismatch("media of a pair must share the grid".into()));
        }
        if m1.omega != m2.omega || m1.eps0 != m2.eps0 || m1.mu0 != m2.mu0 {
            return Err(Error::InvalidMedium("media of a pair must share omega, eps0 and mu0".into()));
        }
        let g = m1.grid;
        for p in 0..g.len() {
            let x = g.point(p);
            if m1.in_support_box(x) && m2.in_support_box(x) {
                continue;
            }
            if m1.eps[p] != m2.eps[p] || m1.mu[p] != m2.mu[p] || m1.sigma[p] != m2.sigma[p] {
                return Err(Error::InvalidMedium(format!("media differ outside the sub-box at {x:?}")));
            }
        }
        Ok(Self { dm1: derive(m1)?, dm2: derive(m2)? })
    }

    pub fn grid(&self) -> Grid {
        self.dm1.grid
    }

    pub fn k(&self) -> f64 {
        self.dm1.k
    }

    pub fn swapped(&self) -> Self {
        Self { dm1: self.dm2.clone(), dm2: self.dm1.clone() }
    }
}

/// Pairing versus its large-s limit at one s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringOutput {
    pub s: f64,
    pub rho_index: [i64; 3],
    pub polarization: Polarization,
    pub pairing: Complex64,
    pub target_a: Complex64,
    pub target_b: Complex64,
    /// Large-s limit of the pairing: −target_a for E-mode, −target_b for H-mode.
    pub limit: Complex64,
    /// |pairing − limit|
    pub error: f64,
    pub iterations_w1: usize,
    pub iterations_v2: usize,
}

/// ∫ e_{iρ}⟨(Q₂ − Q₁)(A + R), B + S⟩ for already solved CGOs.
pub fn pairing_from_solutions(mp: &MediumPair, rho: [f64; 3], w1: &cgo::CGOSolution, v2: &cgo::CGOSolution) -> Complex64 {
    let g = mp.grid();
    let total1 = w1.total();
    let diff = apply_q(&total1, &mp.dm2).sub(&apply_q(&total1, &mp.dm1));
    let total2 = v2.total();
    let phase = plane_wave(g, rho);
    let cell = g.cell_volume();
    (0..g.len()).map(|p| phase.data[p] * diff.get(p).inner(&total2.get(p))).sum::<Complex64>() * cell
}

/// e_{iρ} sampled on the grid.
pub fn plane_wave(g: Grid, rho: [f64; 3]) -> ScalarField {
    ScalarField::from_fn(g, |x| Complex64::from_polar(1.0, rho[0] * x[0] + rho[1] * x[1] + rho[2] * x[2]))
}

/// Solves both CGO families at `geom` and evaluates the pairing. A resonant grid in either
/// solve nudges s once for both, keeping ζ₁ + ζ₂ = iρ.
pub fn pairing(
    mp: &MediumPair,
    geom: &CGOGeometry,
    pol: Polarization,
    settings: &SolverSettings,
) -> Result<(CGOGeometry, Complex64, cgo::CGOSolution, cgo::CGOSolution)> {
    let run = |g: &CGOGeometry| -> Result<(Complex64, cgo::CGOSolution, cgo::CGOSolution)> {
        let w1 = cgo::solve_cgo(&mp.dm1, &g.zeta1, &cgo::amplitude_a(g, pol)?, settings)?;
        let v2 = cgo::solve_cgo(&mp.dm2, &g.zeta2, &cgo::amplitude_b(g, pol)?, settings)?;
        Ok((pairing_from_solutions(mp, g.rho, &w1, &v2), w1, v2))
    };
    match run(geom) {
        Err(Error::ResonantGrid { .. }) => {
            let nudged = geom.with_s(&mp.grid(), geom.s * (1.0 + 1e-7 * 2f64.sqrt()))?;
            let (v, a, b) = run(&nudged)?;
            Ok((nudged, v, a, b))
        }
        other => other.map(|(v, a, b)| (*geom, v, a, b)),
    }
}

/// δd(f₂ − f₁) − ⟨d(f₁ + f₂), d(f₂ − f₁)⟩ + ω²(γ₂μ₂ − γ₁μ₁) for f = a (or b).
fn relation_field(f1: &ScalarField, f2: &ScalarField, mp: &MediumPair) -> ScalarField {
    let diff = f2.zip_map(f1, |x, y| x - y);
    let sum = f2.zip_map(f1, |x, y| x + y);
    let lap = scalar_laplacian(&diff);
    let (gd, gs) = (gradient(&diff), gradient(&sum));
    let w2 = mp.dm1.omega * mp.dm1.omega;
    let g = mp.grid();
    ScalarField {
        grid: g,
        data: (0..g.len())
            .map(|p| {
                let gm1 = mp.dm1.gamma_mu_sqrt.data[p];
                let gm2 = mp.dm2.gamma_mu_sqrt.data[p];
                -lap.data[p] - gs.get(p).inner(&gd.get(p)) + w2 * (gm2 * gm2 - gm1 * gm1)
            })
            .collect(),
    }
}

/// Residual fields (r_a, r_b) of the two scattering relations; both vanish for identical media.
pub fn recovery_residual(mp: &MediumPair) -> (ScalarField, ScalarField) {
    (relation_field(&mp.dm1.a, &mp.dm2.a, mp), relation_field(&mp.dm1.b, &mp.dm2.b, mp))
}

/// ∫ f e_{iρ} from the DFT of f (ρ in lattice units).
fn fourier_coefficient(f: &ScalarField, rho_index: [i64; 3]) -> Complex64 {
    let g = f.grid;
    let spec = f.spectrum();
    // Σ_x f(x) e^{iρ·x} with x = −L/2 + j·L/n is the DFT at −ρ times e^{−iρ·(L/2)(1,1,1)}
    let p = g.index(rho_index.map(|m| g.slot(-m)));
    let h = g.dual_spacing();
    let shift: f64 = rho_index.iter().map(|&m| h * m as f64).sum::<f64>() * (-0.5 * g.side);
    spec[p] * Complex64::from_polar(1.0, shift) * g.cell_volume()
}

/// ∫⟨d(a₂−a₁), de_{iρ}⟩ − ∫⟨d(a₁+a₂), d(a₂−a₁)⟩e_{iρ} + ∫ω²(γ₂μ₂ − γ₁μ₁)e_{iρ}.
pub fn target_a(mp: &MediumPair, rho_index: [i64; 3]) -> Complex64 {
    fourier_coefficient(&recovery_residual(mp).0, rho_index)
}

/// Same with b in place of a.
pub fn target_b(mp: &MediumPair, rho_index: [i64; 3]) -> Complex64 {
    fourier_coefficient(&recovery_residual(mp).1, rho_index)
}

/// Direct quadrature of the three target integrals, used to cross-check the spectral evaluation.
pub fn target_quadrature(mp: &MediumPair, rho_index: [i64; 3], use_b: bool) -> Complex64 {
    let g = mp.grid();
    let h = g.dual_spacing();
    let rho = rho_index.map(|m| h * m as f64);
    let (f1, f2) = if use_b { (&mp.dm1.b, &mp.dm2.b) } else { (&mp.dm1.a, &mp.dm2.a) };
    let gd = gradient(&f2.zip_map(f1, |x, y| x - y));
    let gs = gradient(&f2.zip_map(f1, |x, y| x + y));
    let e = plane_wave(g, rho);
    let rho_form = crate::algebra::GradedForm::real_one_form(rho);
    let w2 = mp.dm1.omega * mp.dm1.omega;
    (0..g.len())
        .map(|p| {
            let gm1 = mp.dm1.gamma_mu_sqrt.data[p];
            let gm2 = mp.dm2.gamma_mu_sqrt.data[p];
            let de = rho_form.scale(I * e.data[p]);
            gd.get(p).inner(&de) - gs.get(p).inner(&gd.get(p)) * e.data[p] + w2 * (gm2 * gm2 - gm1 * gm1) * e.data[p]
        })
        .sum::<Complex64>()
        * g.cell_volume()
}

/// Pairing and its limit for each s in `s_list`, with the frame fixed.
pub fn convergence_experiment(
    mp: &MediumPair,
    rho_index: [i64; 3],
    angle: f64,
    pol: Polarization,
    s_list: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<ScatteringOutput>> {
    if s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("s list must be increasing".into()));
    }
    let g = mp.grid();
    let h = g.dual_spacing();
    let rho = rho_index.map(|m| h * m as f64);
    let (eta1, eta2) = cgo::frame(rho, angle);
    let ta = target_a(mp, rho_index);
    let tb = target_b(mp, rho_index);
    let limit = match pol {
        Polarization::E => -ta,
        Polarization::H => -tb,
    };
    s_list
        .par_iter()
        .map(|&s| {
            let geom = CGOGeometry::new(&g, rho_index, eta1, eta2, s, mp.k())?;
            let (used, value, w1, v2) = pairing(mp, &geom, pol, settings)?;
            Ok(ScatteringOutput {
                s: used.s,
                rho_index,
                polarization: pol,
                pairing: value,
                target_a: ta,
                target_b: tb,
                limit,
                error: (value - limit).norm(),
                iterations_w1: w1.diagnostics.iterations,
                iterations_v2: v2.diagnostics.iterations,
            })
        })
        .collect()
}

/// Coefficients of the coupled system −Δf + Vf + af + bg = 0, −Δg + Wg + cg + df = 0.
#[derive(Clone, Debug)]
pub struct UcpCoefficients {
    pub v: ScalarField,
    pub w: ScalarField,
    pub a: ScalarField,
    pub b: ScalarField,
    pub c: ScalarField,
    pub d: ScalarField,
}

impl UcpCoefficients {
    pub fn zeros(g: Grid) -> Self {
        let z = ScalarField::zeros(g);
        Self { v: z.clone(), w: z.clone(), a: z.clone(), b: z.clone(), c: z.clone(), d: z }
    }

    pub fn grid(&self) -> Grid {
        self.v.grid
    }

    /// Builds the coefficients from a medium pair; Ω is the central sub-box.
    ///
    /// b and d carry a plus sign: with it the system residual at (f, g) equals
    /// 2Γ₁Γ₂/(Γ₁+Γ₂)·r_a (and the μ analogue times r_b), Γ = γ^{1/2}.
    pub fn from_pair(mp: &MediumPair) -> Self {
        let g = mp.grid();
        let (d1, d2) = (&mp.dm1, &mp.dm2);
        let sg = d1.gamma_sqrt.zip_map(&d2.gamma_sqrt, |x, y| x + y);
        let sm = d1.mu_sqrt.zip_map(&d2.mu_sqrt, |x, y| x + y);
        // V = −δd(Σγ^{1/2})/Σγ^{1/2} = Δ(Σγ^{1/2})/Σγ^{1/2}
        let v = scalar_laplacian(&sg).zip_map(&sg, |x, y| x / y);
        let w = scalar_laplacian(&sm).zip_map(&sm, |x, y| x / y);
        let hw = d1.support_half_width;
        let w2 = d1.omega * d1.omega;
        let mut a = ScalarField::zeros(g);
        let mut b = ScalarField::zeros(g);
        let mut c = ScalarField::zeros(g);
        let mut d = ScalarField::zeros(g);
        for p in 0..g.len() {
            if !g.point(p).iter().all(|x| x.abs() <= hw) {
                continue;
            }
            let (g1, g2) = (d1.gamma.data[p], d2.gamma.data[p]);
            let (m1, m2) = (d1.mu.data[p], d2.mu.data[p]);
            let (g1s, g2s) = (d1.gamma_sqrt.data[p], d2.gamma_sqrt.data[p]);
            let (m1s, m2s) = (d1.mu_sqrt.data[p], d2.mu_sqrt.data[p]);
            a.data[p] = w2 * g1s * g2s * (m1 + m2);
            b.data[p] = w2 * g1s * g2s * (g1 + g2) * (m1s + m2s) / (g1s + g2s);
            c.data[p] = w2 * m1s * m2s * (g1 + g2);
            d.data[p] = w2 * m1s * m2s * (m1 + m2) * (g1s + g2s) / (m1s + m2s);
        }
        Self { v, w, a, b, c, d }
    }

    /// Residual of the coupled system at f = γ₂^{1/2} − γ₁^{1/2}, g = μ₂^{1/2} − μ₁^{1/2}; it
    /// vanishes exactly when both scattering relations hold.
    pub fn system_residual(&self, mp: &MediumPair) -> (ScalarField, ScalarField) {
        let f = mp.dm2.gamma_sqrt.zip_map(&mp.dm1.gamma_sqrt, |x, y| x - y);
        let h = mp.dm2.mu_sqrt.zip_map(&mp.dm1.mu_sqrt, |x, y| x - y);
        let (lf, lh) = (scalar_laplacian(&f), scalar_laplacian(&h));
        let n3 = self.grid().len();
        let r1 = (0..n3)
            .map(|p| -lf.data[p] + (self.v.data[p] + self.a.data[p]) * f.data[p] + self.b.data[p] * h.data[p])
            .collect();
        let r2 = (0..n3)
            .map(|p| -lh.data[p] + (self.w.data[p] + self.c.data[p]) * h.data[p] + self.d.data[p] * f.data[p])
            .collect();
        (ScalarField { grid: self.grid(), data: r1 }, ScalarField { grid: self.grid(), data: r2 })
    }

    /// Pointwise 2×2 matrix [[V + a, b], [d, W + c]] acting on (w⁰, ∗w³).
    #[inline]
    fn matrix(&self, p: usize) -> [[Complex64; 2]; 2] {
        [
            [self.v.data[p] + self.a.data[p], self.b.data[p]],
            [self.d.data[p], self.w.data[p] + self.c.data[p]],
        ]
    }

    /// Q_sys on a grade-{0,3} field (grade 0 carries u, grade 3 carries ∗v).
    pub fn apply(&self, w: &FormField) -> FormField {
        self.apply_matrix(w, false)
    }

    /// Pointwise conjugate transpose of Q_sys (its L² adjoint).
    pub fn apply_adjoint(&self, w: &FormField) -> FormField {
        self.apply_matrix(w, true)
    }

    fn apply_matrix(&self, w: &FormField, adjoint: bool) -> FormField {
        let g = w.grid;
        let n3 = g.len();
        let mut out = FormField::zeros(g);
        for p in 0..n3 {
            let m = self.matrix(p);
            let (u, v) = (w.data[p], w.data[7 * n3 + p]);
            let (r0, r3) = if adjoint {
                (m[0][0].conj() * u + m[1][0].conj() * v, m[0][1].conj() * u + m[1][1].conj() * v)
            } else {
                (m[0][0] * u + m[0][1] * v, m[1][0] * u + m[1][1] * v)
            };
            out.data[p] = r0;
            out.data[7 * n3 + p] = r3;
        }
        out
    }
}

/// ζ = (|ζ|/√2)(η₁ + iη₂), so ⟨ζ, ζ⟩ = 0.
pub fn null_covector(norm: f64, eta1: [f64; 3], eta2: [f64; 3]) -> ComplexCovector {
    let c = norm / 2f64.sqrt();
    ComplexCovector::from_parts(eta1.map(|x| c * x), eta2.map(|x| c * x))
}

/// (1, √2, √5/2) normalized. Its normal plane meets the lattice only at 0, so no nonzero
/// frequency is orthogonal to both directions of a frame built on it.
pub const GENERIC_AXIS: [f64; 3] = [0.485_071_250_072_665_94, 0.685_994_340_570_035_4, 0.542_326_144_546_640_4];

/// Null covector of norm `norm` whose real and imaginary directions span the plane normal to
/// [`GENERIC_AXIS`], rotated by `angle`.
pub fn generic_null_covector(norm: f64, angle: f64) -> ComplexCovector {
    let (eta1, eta2) = cgo::frame(GENERIC_AXIS, angle);
    null_covector(norm, eta1, eta2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcpReport {
    pub zeta_norm: f64,
    /// Power-iteration estimate of ‖(Δ_ζ)^{−1}Q_sys‖ on X^{1/2}_ζ.
    pub estimate: f64,
    pub contraction: bool,
    pub inconclusive: bool,
    /// X^{1/2} norms reached by the fixed-point iteration from each random start.
    pub fixed_point_norms: Vec<f64>,
    pub fixed_point_iterations: usize,
    pub clamped: usize,
}

fn random_03_field<R: Rng>(r: &mut R, sym: &ConjugatedSymbol) -> SpectralField {
    let g = sym.grid;
    let mut s = SpectralField::zeros(g);
    let n3 = g.len();
    for p in 0..n3 {
        let w = sym.weight(p, 0.5).sqrt();
        s.data[p] = rng::complex(r) / w;
        s.data[7 * n3 + p] = rng::complex(r) / w;
    }
    let nrm = sym.norm_spectral(&s, 0.5);
    for z in &mut s.data {
        *z /= nrm;
    }
    s
}

/// Estimates the X^{1/2}_ζ norm of K = (Δ_ζ)^{−1}Q_sys and runs the fixed-point iteration
/// w ← −K w from random starts.
pub fn ucp_contraction_check(
    coeffs: &UcpCoefficients,
    zeta: &ComplexCovector,
    trials: usize,
    seed: u64,
    clamp: ClampSettings,
) -> Result<UcpReport> {
    crate::bourgain::check_characteristic(zeta, 0.0)?;
    let g = coeffs.grid();
    let sym = ConjugatedSymbol::new(g, *zeta, clamp);
    let k_op = |s: &SpectralField| -> SpectralField { sym.resolve_spectral(&coeffs.apply(&s.inverse()).forward()) };
    // adjoint in X^{1/2}: K* = W^{−1} Q_sysᴴ Gᴴ W with W = |p_c| the X^{1/2} weight
    let k_adj = |s: &SpectralField| -> SpectralField {
        let n3 = g.len();
        let mut t = s.clone();
        for c in 0..8 {
            for p in 0..n3 {
                let pc = sym.clamped[p];
                t.data[c * n3 + p] *= sym.magnitude[p] / pc.conj();
            }
        }
        let mut u = coeffs.apply_adjoint(&t.inverse()).forward();
        for c in 0..8 {
            for p in 0..n3 {
                u.data[c * n3 + p] /= sym.magnitude[p];
            }
        }
        u
    };

    let mut estimate: f64 = 0.0;
    for t in 0..trials.max(1) {
        let mut r = rng::stream(seed, t as u64);
        let mut x = random_03_field(&mut r, &sym);
        let mut lambda = 0.0;
        for _ in 0..30 {
            let y = k_adj(&k_op(&x));
            let ny = sym.norm_spectral(&y, 0.5);
            if ny == 0.0 {
                lambda = 0.0;
                break;
            }
            let next = ny.sqrt();
            let converged = (next - lambda).abs() <= 1e-6 * next;
            lambda = next;
            x = SpectralField { grid: g, data: y.data.iter().map(|z| z / ny).collect() };
            if converged {
                break;
            }
        }
        estimate = estimate.max(lambda);
    }

    let starts = 10;
    let max_iter = 200;
    let mut norms = Vec::with_capacity(starts);
    let mut used = 0;
    for st in 0..starts {
        let mut r = rng::stream(seed ^ 0x5eed_0f_f1ed, st as u64);
        let mut x = random_03_field(&mut r, &sym);
        let mut nrm: f64 = 1.0;
        let mut it = 0;
        while it < max_iter && (1e-12..1e6).contains(&nrm) {
            let y = k_op(&x);
            x = SpectralField { grid: g, data: y.data.iter().map(|z| -z).collect() };
            nrm = sym.norm_spectral(&x, 0.5);
            it += 1;
        }
        used = used.max(it);
        norms.push(nrm);
    }
    Ok(UcpReport {
        zeta_norm: zeta.norm(),
        estimate,
        contraction: estimate < 0.9,
        inconclusive: (0.9..=1.1).contains(&estimate),
        fixed_point_norms: norms,
        fixed_point_iterations: used,
        clamped: sym.report.clamped,
    })
}
