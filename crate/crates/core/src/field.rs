//! Periodic grids and fields of graded forms, in physical and frequency representation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{sym_slot, GradedForm, SymTensor2};
use crate::error::{Error, Result};
use crate::fft;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform periodic grid on the box [−L/2, L/2)³ with n points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub side: f64,
}

impl Grid {
    pub fn new(n: usize, side: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 8, got {n}")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidGrid(format!("side length must be positive, got {side}")));
        }
        Ok(Self { n, side })
    }

    /// Number of grid points n³.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Quadrature weight (L/n)³.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(3)
    }

    /// Lattice spacing of the frequency grid, 2π/L.
    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / self.side
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n + i[1]) * self.n + i[2]
    }

    #[inline]
    pub fn multi_index(&self, p: usize) -> [usize; 3] {
        let n = self.n;
        [p / (n * n), (p / n) % n, p % n]
    }

    /// Signed wavenumber of a DFT slot, in [−n/2, n/2).
    #[inline]
    pub fn signed(&self, m: usize) -> i64 {
        let h = self.n / 2;
        if m < h {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// DFT slot of a signed wavenumber.
    #[inline]
    pub fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn wavenumber(&self, p: usize) -> [i64; 3] {
        self.multi_index(p).map(|m| self.signed(m))
    }

    /// Frequency ξ = (2π/L)·k of a DFT slot.
    #[inline]
    pub fn xi(&self, p: usize) -> [f64; 3] {
        let h = self.dual_spacing();
        self.wavenumber(p).map(|k| h * k as f64)
    }

    /// Physical coordinates of a grid point.
    #[inline]
    pub fn point(&self, p: usize) -> [f64; 3] {
        let dx = self.spacing();
        let half = 0.5 * self.side;
        self.multi_index(p).map(|i| -half + dx * i as f64)
    }

    /// True when no wavenumber component exceeds `band` in magnitude (the Nyquist row counts as n/2).
    pub fn in_band(&self, p: usize, band: usize) -> bool {
        self.wavenumber(p).iter().all(|k| k.unsigned_abs() as usize <= band)
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Complex scalar field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![ZERO; grid.len()] }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        Self { grid, data: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        Self { grid, data: (0..grid.len()).map(|p| f(grid.point(p))).collect() }
    }

    pub fn from_real(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn integrate(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Unnormalized DFT coefficients.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut d = self.data.clone();
        fft::forward(&mut d, self.grid.n);
        d
    }

    pub fn from_spectrum(grid: Grid, mut spec: Vec<Complex64>) -> Self {
        fft::inverse(&mut spec, grid.n);
        Self { grid, data: spec }
    }

    /// Embeds the scalar as the grade-0 part of a form field.
    pub fn to_form(&self) -> FormField {
        let mut f = FormField::zeros(self.grid);
        f.component_mut(0).copy_from_slice(&self.data);
        f
    }
}

/// Field of graded forms stored component-major: `data[c·n³ + p]` is blade c at point p.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl FormField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![ZERO; 8 * grid.len()] }
    }

    pub fn constant(grid: Grid, u: GradedForm) -> Self {
        let mut f = Self::zeros(grid);
        let n3 = grid.len();
        for c in 0..8 {
            f.data[c * n3..(c + 1) * n3].fill(u.c[c]);
        }
        f
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> GradedForm) -> Self {
        let mut out = Self::zeros(grid);
        for p in 0..grid.len() {
            out.set(p, &f(grid.point(p)));
        }
        out
    }

    /// Builds a field from raw component-major data; checks the length.
    pub fn from_data(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 8 * grid.len() {
            return Err(Error::GridMismatch(format!("expected {} values, got {}", 8 * grid.len(), data.len())));
        }
        Ok(Self { grid, data })
    }

    #[inline]
    pub fn get(&self, p: usize) -> GradedForm {
        let n3 = self.grid.len();
        GradedForm { c: std::array::from_fn(|c| self.data[c * n3 + p]) }
    }

    #[inline]
    pub fn set(&mut self, p: usize, u: &GradedForm) {
        let n3 = self.grid.len();
        for c in 0..8 {
            self.data[c * n3 + p] = u.c[c];
        }
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n3 = self.grid.len();
        &self.data[c * n3..(c + 1) * n3]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n3 = self.grid.len();
        &mut self.data[c * n3..(c + 1) * n3]
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField { grid: self.grid, data: self.component(c).to_vec() }
    }

    /// Applies a pointwise map.
    pub fn map_points(&self, f: impl Fn(usize, GradedForm) -> GradedForm) -> Self {
        let mut out = Self::zeros(self.grid);
        for p in 0..self.grid.len() {
            out.set(p, &f(p, self.get(p)));
        }
        out
    }

    pub fn zip_points(&self, other: &FormField, f: impl Fn(usize, GradedForm, GradedForm) -> GradedForm) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut out = Self::zeros(self.grid);
        for p in 0..self.grid.len() {
            out.set(p, &f(p, self.get(p), other.get(p)));
        }
        out
    }

    pub fn try_add(&self, other: &FormField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.add(other))
    }

    pub fn add(&self, other: &FormField) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &FormField) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn add_assign(&mut self, other: &FormField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// self += z·other
    pub fn axpy(&mut self, z: Complex64, other: &FormField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += z * b;
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|a| a * z).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|a| -a).collect() }
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        assert_eq!(self.grid, s.grid, "grid mismatch");
        let n3 = self.grid.len();
        let mut out = self.clone();
        for c in 0..8 {
            for (a, b) in out.data[c * n3..(c + 1) * n3].iter_mut().zip(&s.data) {
                *a *= b;
            }
        }
        out
    }

    /// Projection onto the listed grades.
    pub fn grades(&self, ls: &[usize]) -> Self {
        let n3 = self.grid.len();
        let mut out = Self::zeros(self.grid);
        for &l in ls {
            for c in crate::algebra::GRADE_RANGES[l].clone() {
                out.data[c * n3..(c + 1) * n3].copy_from_slice(self.component(c));
            }
        }
        out
    }

    /// Multiplies grade l by (−1)^l.
    pub fn grade_involution(&self) -> Self {
        let n3 = self.grid.len();
        let mut out = self.clone();
        for c in 0..8 {
            if crate::algebra::GRADE_OF[c] % 2 == 1 {
                for a in &mut out.data[c * n3..(c + 1) * n3] {
                    *a = -*a;
                }
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|a| a.conj()).collect() }
    }

    /// Bilinear quadrature ∫⟨u, v⟩.
    pub fn integrate_inner(&self, other: &FormField) -> Complex64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<Complex64>() * self.grid.cell_volume()
    }

    /// Hermitian quadrature ∫⟨u, v̄⟩.
    pub fn integrate_hermitian(&self, other: &FormField) -> Complex64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.grid.cell_volume()
    }

    /// Discrete L² norm with quadrature weight (L/n)³.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// max over grid points of the pointwise form norm.
    pub fn max_norm(&self) -> f64 {
        let n3 = self.grid.len();
        (0..n3)
            .map(|p| (0..8).map(|c| self.data[c * n3 + p].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True when the component c is identically zero.
    pub fn component_is_zero(&self, c: usize) -> bool {
        self.component(c).iter().all(|z| *z == ZERO)
    }

    pub fn forward(&self) -> SpectralField {
        SpectralField::forward(self)
    }
}

/// DFT coefficients Σ_x u(x)e^{−iξ·x} of a [`FormField`], same layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![ZERO; 8 * grid.len()] }
    }

    pub fn forward(f: &FormField) -> Self {
        let n3 = f.grid.len();
        let mut data = f.data.clone();
        for c in 0..8 {
            if f.component_is_zero(c) {
                continue;
            }
            fft::forward(&mut data[c * n3..(c + 1) * n3], f.grid.n);
        }
        Self { grid: f.grid, data }
    }

    pub fn inverse(&self) -> FormField {
        let n3 = self.grid.len();
        let mut data = self.data.clone();
        for c in 0..8 {
            let comp = &mut data[c * n3..(c + 1) * n3];
            if comp.iter().all(|z| *z == ZERO) {
                continue;
            }
            fft::inverse(comp, self.grid.n);
        }
        FormField { grid: self.grid, data }
    }

    #[inline]
    pub fn get(&self, p: usize) -> GradedForm {
        let n3 = self.grid.len();
        GradedForm { c: std::array::from_fn(|c| self.data[c * n3 + p]) }
    }

    #[inline]
    pub fn set(&mut self, p: usize, u: &GradedForm) {
        let n3 = self.grid.len();
        for c in 0..8 {
            self.data[c * n3 + p] = u.c[c];
        }
    }

    /// Applies a frequency-wise map `(ξ, û(ξ)) ↦ v̂(ξ)`.
    pub fn map_freq(&self, f: impl Fn(usize, [f64; 3], GradedForm) -> GradedForm) -> Self {
        let mut out = Self::zeros(self.grid);
        for p in 0..self.grid.len() {
            out.set(p, &f(p, self.grid.xi(p), self.get(p)));
        }
        out
    }

    /// Σ_ξ weight(ξ)·|û(ξ)|² scaled so that weight ≡ 1 reproduces the squared L² norm.
    pub fn weighted_norm_sqr(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let n3 = self.grid.len();
        let mut acc = 0.0;
        for p in 0..n3 {
            let w = weight(p);
            let s: f64 = (0..8).map(|c| self.data[c * n3 + p].norm_sqr()).sum();
            acc += w * s;
        }
        acc * self.grid.cell_volume() / n3 as f64
    }
}

/// Field of symmetric 2-tensors, component-major with 6 components.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl SymTensorField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![ZERO; 6 * grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> SymTensor2) -> Self {
        let mut out = Self::zeros(grid);
        for p in 0..grid.len() {
            out.set(p, &f(grid.point(p)));
        }
        out
    }

    /// Pointwise u ⊙ v of the grade-1 parts of two form fields.
    pub fn sym_product(u: &FormField, v: &FormField) -> Self {
        assert_eq!(u.grid, v.grid, "grid mismatch");
        let mut out = Self::zeros(u.grid);
        for p in 0..u.grid.len() {
            out.set(p, &SymTensor2::from_vectors(u.get(p).vector(), v.get(p).vector()));
        }
        out
    }

    pub fn get(&self, p: usize) -> SymTensor2 {
        let n3 = self.grid.len();
        SymTensor2 { c: std::array::from_fn(|c| self.data[c * n3 + p]) }
    }

    pub fn set(&mut self, p: usize, t: &SymTensor2) {
        let n3 = self.grid.len();
        for c in 0..6 {
            self.data[c * n3 + p] = t.c[c];
        }
    }

    /// Component (j, k), 0-based, as a scalar field.
    pub fn entry(&self, j: usize, k: usize) -> ScalarField {
        let n3 = self.grid.len();
        let c = sym_slot(j, k);
        ScalarField { grid: self.grid, data: self.data[c * n3..(c + 1) * n3].to_vec() }
    }
}
