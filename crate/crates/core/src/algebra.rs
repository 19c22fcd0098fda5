//! Pointwise graded exterior algebra of Λ^l ℝ³, l = 0..3.
//!
//! A [`GradedForm`] stores the 8 blade coefficients densely in grade order
//! `[1, dx1, dx2, dx3, dx12, dx13, dx23, dx123]`. Products are evaluated from
//! sign tables built once per process ([`AlgebraTables`]).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::LazyLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient dimension. Fixed.
pub const DIM: usize = 3;

/// Bitmask of each stored blade (bit j set means dx^{j+1} is a factor), in storage order.
pub const BLADE_MASKS: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Storage index of the blade with a given bitmask.
pub const MASK_TO_INDEX: [usize; 8] = [0, 1, 2, 4, 3, 5, 6, 7];

/// Storage index ranges of each grade.
pub const GRADE_RANGES: [std::ops::Range<usize>; 4] = [0..1, 1..4, 4..7, 7..8];

/// Grade of each storage slot.
pub const GRADE_OF: [usize; 8] = [0, 1, 1, 1, 2, 2, 2, 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Basis blade dx^{α₁}∧…∧dx^{α_l} with α strictly increasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Blade {
    mask: u8,
}

impl Blade {
    /// Builds a blade from 1-based coordinate indices, which must be strictly increasing.
    pub fn new(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u8;
        let mut last = 0usize;
        for &i in indices {
            if i == 0 || i > DIM || i <= last {
                return Err(Error::Algebra(format!(
                    "blade indices must be strictly increasing within 1..=3, got {indices:?}"
                )));
            }
            mask |= 1 << (i - 1);
            last = i;
        }
        Ok(Self { mask })
    }

    pub fn from_index(idx: usize) -> Self {
        Self { mask: BLADE_MASKS[idx] }
    }

    pub fn all() -> [Blade; 8] {
        std::array::from_fn(Blade::from_index)
    }

    pub fn scalar() -> Self {
        Self { mask: 0 }
    }

    pub fn volume() -> Self {
        Self { mask: 0b111 }
    }

    pub fn mask(self) -> u8 {
        self.mask
    }

    pub fn index(self) -> usize {
        MASK_TO_INDEX[self.mask as usize]
    }

    pub fn grade(self) -> usize {
        self.mask.count_ones() as usize
    }

    /// 1-based coordinate indices in increasing order.
    pub fn index_set(self) -> Vec<usize> {
        (0..DIM).filter(|j| self.mask & (1 << j) != 0).map(|j| j + 1).collect()
    }
}

/// One entry of a product table: target storage slot and sign (0 when the product vanishes).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub slot: u8,
    pub sign: i8,
}

impl TableEntry {
    const VANISH: TableEntry = TableEntry { slot: 0, sign: 0 };
}

/// Precomputed 8×8 product tables and the Hodge table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraTables {
    pub wedge: [[TableEntry; 8]; 8],
    /// `vee[i][j]` is blade_i ∨ blade_j.
    pub vee: [[TableEntry; 8]; 8],
    pub hodge: [TableEntry; 8],
}

/// Sign of concatenating two disjoint increasing index sets into increasing order.
fn merge_sign(a: u8, b: u8) -> i8 {
    let mut inversions = 0;
    for i in 0..DIM {
        if a & (1 << i) == 0 {
            continue;
        }
        for j in 0..i {
            if b & (1 << j) != 0 {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl AlgebraTables {
    pub fn build() -> Self {
        let mut wedge = [[TableEntry::VANISH; 8]; 8];
        for (i, row) in wedge.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let (a, b) = (BLADE_MASKS[i], BLADE_MASKS[j]);
                if a & b == 0 {
                    *e = TableEntry { slot: MASK_TO_INDEX[(a | b) as usize] as u8, sign: merge_sign(a, b) };
                }
            }
        }
        let mut hodge = [TableEntry::VANISH; 8];
        for (i, e) in hodge.iter_mut().enumerate() {
            let a = BLADE_MASKS[i];
            let c = 0b111 ^ a;
            // sign chosen so that blade ∧ ∗blade = dx1∧dx2∧dx3
            *e = TableEntry { slot: MASK_TO_INDEX[c as usize] as u8, sign: merge_sign(a, c) };
        }
        let mut vee = [[TableEntry::VANISH; 8]; 8];
        for (i, row) in vee.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let (m, l) = (GRADE_OF[i], GRADE_OF[j]);
                if m > l {
                    continue;
                }
                let hj = hodge[j];
                let w = wedge[i][hj.slot as usize];
                if w.sign == 0 {
                    continue;
                }
                let hw = hodge[w.slot as usize];
                let exp = (DIM + m - l) * (l - m);
                let s = if exp % 2 == 0 { 1 } else { -1 };
                *e = TableEntry { slot: hw.slot, sign: s * hj.sign * w.sign * hw.sign };
            }
        }
        Self { wedge, vee, hodge }
    }

    /// Copy with one vee entry sign flipped; used to exercise the identity suite's failure path.
    pub fn with_injected_fault() -> Self {
        let mut t = Self::build();
        t.vee[1][4].sign = -t.vee[1][4].sign;
        t
    }

    #[inline]
    fn product(table: &[[TableEntry; 8]; 8], u: &GradedForm, v: &GradedForm) -> GradedForm {
        let mut out = [ZERO; 8];
        for i in 0..8 {
            let ui = u.c[i];
            if ui == ZERO {
                continue;
            }
            for j in 0..8 {
                let e = table[i][j];
                if e.sign == 0 {
                    continue;
                }
                let p = ui * v.c[j];
                if e.sign > 0 {
                    out[e.slot as usize] += p;
                } else {
                    out[e.slot as usize] -= p;
                }
            }
        }
        GradedForm { c: out }
    }

    pub fn wedge(&self, u: &GradedForm, v: &GradedForm) -> GradedForm {
        Self::product(&self.wedge, u, v)
    }

    pub fn vee(&self, v: &GradedForm, u: &GradedForm) -> GradedForm {
        Self::product(&self.vee, v, u)
    }

    pub fn hodge(&self, u: &GradedForm) -> GradedForm {
        let mut out = [ZERO; 8];
        for i in 0..8 {
            let e = self.hodge[i];
            out[e.slot as usize] = u.c[i] * f64::from(e.sign);
        }
        GradedForm { c: out }
    }
}

static TABLES: LazyLock<AlgebraTables> = LazyLock::new(AlgebraTables::build);

/// Process-wide sign tables.
pub fn tables() -> &'static AlgebraTables {
    &TABLES
}

/// Point value of a graded form on ℝ³.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct GradedForm {
    pub c: [Complex64; 8],
}

impl GradedForm {
    pub const fn zero() -> Self {
        Self { c: [ZERO; 8] }
    }

    pub fn scalar(z: Complex64) -> Self {
        let mut f = Self::zero();
        f.c[0] = z;
        f
    }

    pub fn volume(z: Complex64) -> Self {
        let mut f = Self::zero();
        f.c[7] = z;
        f
    }

    pub fn blade(b: Blade, z: Complex64) -> Self {
        let mut f = Self::zero();
        f.c[b.index()] = z;
        f
    }

    /// 1-form Σ z_j dx^j.
    pub fn one_form(z: [Complex64; 3]) -> Self {
        let mut f = Self::zero();
        f.c[1..4].copy_from_slice(&z);
        f
    }

    /// Real 1-form Σ x_j dx^j.
    pub fn real_one_form(x: [f64; 3]) -> Self {
        Self::one_form(x.map(|v| Complex64::new(v, 0.0)))
    }

    /// 2-form with coefficients on (dx12, dx13, dx23).
    pub fn two_form(z: [Complex64; 3]) -> Self {
        let mut f = Self::zero();
        f.c[4..7].copy_from_slice(&z);
        f
    }

    pub fn coeff(&self, b: Blade) -> Complex64 {
        self.c[b.index()]
    }

    /// Projection onto grade l.
    pub fn grade(&self, l: usize) -> Self {
        let mut f = Self::zero();
        let r = GRADE_RANGES[l].clone();
        f.c[r.clone()].copy_from_slice(&self.c[r]);
        f
    }

    /// Sum of the projections onto the listed grades.
    pub fn grades(&self, ls: &[usize]) -> Self {
        let mut f = Self::zero();
        for &l in ls {
            let r = GRADE_RANGES[l].clone();
            f.c[r.clone()].copy_from_slice(&self.c[r]);
        }
        f
    }

    /// Coefficients of the 1-form part.
    pub fn vector(&self) -> [Complex64; 3] {
        [self.c[1], self.c[2], self.c[3]]
    }

    /// True when every coefficient outside grade l is exactly zero.
    pub fn is_pure_grade(&self, l: usize) -> bool {
        (0..8).all(|i| GRADE_OF[i] == l || self.c[i] == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Multiplies grade l by (−1)^l.
    pub fn grade_involution(&self) -> Self {
        let mut f = *self;
        for i in 0..8 {
            if GRADE_OF[i] % 2 == 1 {
                f.c[i] = -f.c[i];
            }
        }
        f
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self { c: self.c.map(|x| x * z) }
    }

    pub fn conj(&self) -> Self {
        Self { c: self.c.map(|x| x.conj()) }
    }

    pub fn wedge(&self, v: &GradedForm) -> GradedForm {
        tables().wedge(self, v)
    }

    /// `self ∨ u`.
    pub fn vee(&self, u: &GradedForm) -> GradedForm {
        tables().vee(self, u)
    }

    pub fn hodge(&self) -> GradedForm {
        tables().hodge(self)
    }

    /// Bilinear inner product (no conjugation).
    pub fn inner(&self, v: &GradedForm) -> Complex64 {
        self.c.iter().zip(v.c.iter()).map(|(a, b)| a * b).sum()
    }

    /// |u|² = ⟨u, ū⟩.
    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Add for GradedForm {
    type Output = GradedForm;
    fn add(mut self, rhs: GradedForm) -> GradedForm {
        self += rhs;
        self
    }
}

impl AddAssign for GradedForm {
    fn add_assign(&mut self, rhs: GradedForm) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl Sub for GradedForm {
    type Output = GradedForm;
    fn sub(mut self, rhs: GradedForm) -> GradedForm {
        self -= rhs;
        self
    }
}

impl SubAssign for GradedForm {
    fn sub_assign(&mut self, rhs: GradedForm) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
    }
}

impl Neg for GradedForm {
    type Output = GradedForm;
    fn neg(self) -> GradedForm {
        Self { c: self.c.map(|x| -x) }
    }
}

impl Mul<Complex64> for GradedForm {
    type Output = GradedForm;
    fn mul(self, z: Complex64) -> GradedForm {
        self.scale(z)
    }
}

impl Mul<f64> for GradedForm {
    type Output = GradedForm;
    fn mul(self, x: f64) -> GradedForm {
        Self { c: self.c.map(|v| v * x) }
    }
}

/// Position of (j, k), 0-based with j ≤ k, in [`SymTensor2`] storage.
pub const fn sym_slot(j: usize, k: usize) -> usize {
    let (a, b) = if j <= k { (j, k) } else { (k, j) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Symmetric 2-tensor; entries (1,1),(1,2),(1,3),(2,2),(2,3),(3,3).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub c: [Complex64; 6],
}

impl SymTensor2 {
    /// Entry (j, k), 1-based, either order.
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.c[sym_slot(j - 1, k - 1)]
    }

    /// u ⊙ v from the coefficient vectors of two 1-forms.
    pub fn from_vectors(u: [Complex64; 3], v: [Complex64; 3]) -> Self {
        let mut c = [ZERO; 6];
        for j in 0..3 {
            for k in j..3 {
                c[sym_slot(j, k)] = 0.5 * (u[j] * v[k] + u[k] * v[j]);
            }
        }
        Self { c }
    }
}

/// u ⊙ v for pure 1-forms.
pub fn sym_product(u: &GradedForm, v: &GradedForm) -> Result<SymTensor2> {
    if !u.is_pure_grade(1) || !v.is_pure_grade(1) {
        return Err(Error::Algebra("sym_product requires pure grade-1 inputs".into()));
    }
    Ok(SymTensor2::from_vectors(u.vector(), v.vector()))
}

/// Free functions mirroring the methods, for call sites that read better in prefix form.
pub fn wedge(u: &GradedForm, v: &GradedForm) -> GradedForm {
    u.wedge(v)
}

pub fn vee(v: &GradedForm, u: &GradedForm) -> GradedForm {
    v.vee(u)
}

pub fn hodge(u: &GradedForm) -> GradedForm {
    u.hodge()
}

pub fn inner(u: &GradedForm, v: &GradedForm) -> Complex64 {
    u.inner(v)
}
