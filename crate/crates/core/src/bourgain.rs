//! The conjugated symbol p_ζ(ξ) = |ξ|² − 2i⟨ζ,ξ⟩, the weighted norms X^b_ζ and the resolvent
//! of Δ_ζ − k².
//!
//! On a finite lattice p_ζ vanishes at ξ = 0 (and, for the CGO pair, at ξ = −ρ) and may come
//! close to zero elsewhere. Every frequency with |p_ζ| below the configured floor is clamped:
//! its magnitude is replaced by the average of |p_ζ| over the surrounding lattice cell (never
//! less than the floor), phase preserved. Clamping to the bare floor would amplify those modes
//! by ~1/floor and wreck the Neumann series.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::GradedForm;
use crate::error::{Error, Result};
use crate::field::{FormField, Grid, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Constant complex covector ζ = Σ ζ_j dx^j.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexCovector {
    pub z: [Complex64; 3],
}

impl ComplexCovector {
    pub fn new(z: [Complex64; 3]) -> Self {
        Self { z }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// re + i·im
    pub fn from_parts(re: [f64; 3], im: [f64; 3]) -> Self {
        Self { z: std::array::from_fn(|j| Complex64::new(re[j], im[j])) }
    }

    /// Bilinear ⟨ζ, η⟩ (no conjugation).
    pub fn dot(&self, other: &ComplexCovector) -> Complex64 {
        (0..3).map(|j| self.z[j] * other.z[j]).sum()
    }

    pub fn dot_real(&self, xi: [f64; 3]) -> Complex64 {
        (0..3).map(|j| self.z[j] * xi[j]).sum()
    }

    /// |ζ| = (Σ|ζ_j|²)^{1/2}.
    pub fn norm(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_form(&self) -> GradedForm {
        GradedForm::one_form(self.z)
    }

    pub fn add(&self, o: &ComplexCovector) -> Self {
        Self { z: std::array::from_fn(|j| self.z[j] + o.z[j]) }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { z: self.z.map(|c| c * s) }
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// p_ζ(ξ) = |ξ|² − 2i⟨ζ, ξ⟩.
#[inline]
pub fn p_zeta(zeta: &ComplexCovector, xi: [f64; 3]) -> Complex64 {
    let xx = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    Complex64::new(xx, 0.0) - 2.0 * I * zeta.dot_real(xi)
}

/// Clamp floor for |p_ζ| and the clamped-fraction threshold that flags a resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClampSettings {
    pub floor: f64,
    pub threshold: f64,
}

impl ClampSettings {
    /// floor 1e−8·(2π/L)², threshold 1e−3.
    pub fn default_for(grid: &Grid) -> Self {
        Self { floor: 1e-8 * grid.dual_spacing().powi(2), threshold: 1e-3 }
    }
}

/// Which frequencies were clamped.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ClampReport {
    /// Nonzero frequencies with |p_ζ| below the floor.
    pub clamped: usize,
    /// Number of nonzero frequencies.
    pub total: usize,
    /// Magnitude used for the ξ = 0 mode (always clamped).
    pub zero_mode: f64,
}

impl ClampReport {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.clamped as f64 / self.total as f64
        }
    }

    pub fn exceeds(&self, threshold: f64) -> bool {
        self.fraction() > threshold
    }
}

/// Cell average of |p_ζ| over ξ₀ + [−h/2, h/2]³, h = 2π/L (midpoint rule, 8 points per axis).
pub fn cell_mean_magnitude(zeta: &ComplexCovector, grid: &Grid, xi0: [f64; 3]) -> f64 {
    let h = grid.dual_spacing();
    let m = 8;
    let node = |i: usize| h * ((i as f64 + 0.5) / m as f64 - 0.5);
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                acc += p_zeta(zeta, [xi0[0] + node(a), xi0[1] + node(b), xi0[2] + node(c)]).norm();
            }
        }
    }
    acc / (m * m * m) as f64
}

/// Clamp magnitude of the zero mode.
pub fn zero_mode_magnitude(zeta: &ComplexCovector, grid: &Grid) -> f64 {
    cell_mean_magnitude(zeta, grid, [0.0; 3])
}

/// p_ζ tabulated on a grid together with its clamped version.
#[derive(Clone, Debug)]
pub struct ConjugatedSymbol {
    pub grid: Grid,
    pub zeta: ComplexCovector,
    pub settings: ClampSettings,
    /// Clamped symbol used by the resolvent.
    pub clamped: Vec<Complex64>,
    /// |clamped|, the X^{1/2} weight squared.
    pub magnitude: Vec<f64>,
    pub report: ClampReport,
}

impl ConjugatedSymbol {
    pub fn new(grid: Grid, zeta: ComplexCovector, settings: ClampSettings) -> Self {
        let n3 = grid.len();
        let mut clamped = Vec::with_capacity(n3);
        let mut count = 0;
        let mut zero_mode = 0.0;
        for p in 0..n3 {
            let xi = grid.xi(p);
            let v = p_zeta(&zeta, xi);
            let r = v.norm();
            if r >= settings.floor {
                clamped.push(v);
                continue;
            }
            let m = cell_mean_magnitude(&zeta, &grid, xi).max(settings.floor);
            let c = if r > 0.0 { v * (m / r) } else { Complex64::new(m, 0.0) };
            clamped.push(c);
            if p == 0 {
                zero_mode = m;
            } else {
                count += 1;
            }
        }
        let magnitude = clamped.iter().map(|c| c.norm()).collect();
        Self { grid, zeta, settings, clamped, magnitude, report: ClampReport { clamped: count, total: n3 - 1, zero_mode } }
    }

    /// Weight |p_ζ|^{2b} (clamped).
    #[inline]
    pub fn weight(&self, p: usize, b: f64) -> f64 {
        if b == 0.5 {
            self.magnitude[p]
        } else if b == -0.5 {
            1.0 / self.magnitude[p]
        } else {
            self.magnitude[p].powf(2.0 * b)
        }
    }

    pub fn norm(&self, f: &FormField, b: f64) -> f64 {
        self.norm_spectral(&f.forward(), b)
    }

    pub fn norm_spectral(&self, s: &SpectralField, b: f64) -> f64 {
        s.weighted_norm_sqr(|p| self.weight(p, b)).sqrt()
    }

    /// Divides each coefficient by the clamped symbol.
    pub fn resolve_spectral(&self, s: &SpectralField) -> SpectralField {
        let mut out = s.clone();
        let n3 = self.grid.len();
        for c in 0..8 {
            for (z, p) in out.data[c * n3..(c + 1) * n3].iter_mut().zip(&self.clamped) {
                *z /= p;
            }
        }
        out
    }

    /// Multiplies each coefficient by the clamped symbol (the inverse of the resolvent).
    pub fn apply_spectral(&self, s: &SpectralField) -> SpectralField {
        let mut out = s.clone();
        let n3 = self.grid.len();
        for c in 0..8 {
            for (z, p) in out.data[c * n3..(c + 1) * n3].iter_mut().zip(&self.clamped) {
                *z *= p;
            }
        }
        out
    }

    pub fn resolve(&self, f: &FormField) -> FormField {
        self.resolve_spectral(&f.forward()).inverse()
    }

    /// Operator norm X^{−1/2} → X^{1/2} of the clamped resolvent: max_ξ w(ξ)^{1/2}|p_c(ξ)|^{−1}w(ξ)^{1/2}.
    pub fn resolvent_operator_norm(&self) -> f64 {
        self.clamped.iter().zip(&self.magnitude).map(|(p, w)| w.sqrt() * w.sqrt() / p.norm()).fold(0.0, f64::max)
    }
}

/// Weighted norm specification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BourgainWeight {
    pub zeta: ComplexCovector,
    pub b: f64,
    pub floor: f64,
}

impl BourgainWeight {
    pub fn new(zeta: ComplexCovector, b: f64, floor: f64) -> Result<Self> {
        if b != 0.5 && b != -0.5 {
            return Err(Error::InvalidArgument(format!("Bourgain exponent must be +1/2 or -1/2, got {b}")));
        }
        if !(floor > 0.0) {
            return Err(Error::InvalidArgument(format!("clamp floor must be positive, got {floor}")));
        }
        Ok(Self { zeta, b, floor })
    }
}

/// ‖f‖ in X^b_ζ with clamped weights.
pub fn bourgain_norm(f: &FormField, w: &BourgainWeight) -> f64 {
    let sym = ConjugatedSymbol::new(f.grid, w.zeta, ClampSettings { floor: w.floor, threshold: 1.0 });
    sym.norm(f, w.b)
}

/// Checks ⟨ζ,ζ⟩ = −k² to 1e−10 relative.
pub fn check_characteristic(zeta: &ComplexCovector, k: f64) -> Result<()> {
    let defect = (zeta.dot(zeta) + k * k).norm();
    let scale = (k * k).max(zeta.norm().powi(2)).max(1.0);
    if defect > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!("<zeta,zeta> + k^2 = {defect:.3e}, expected 0")));
    }
    Ok(())
}

/// Solves (Δ_ζ − k²)u = f spectrally, clamping near-zeros of p_ζ.
pub fn resolvent(f: &FormField, zeta: &ComplexCovector, k: f64, settings: ClampSettings) -> Result<(FormField, ClampReport)> {
    check_characteristic(zeta, k)?;
    let sym = ConjugatedSymbol::new(f.grid, *zeta, settings);
    Ok((sym.resolve(f), sym.report))
}
