//! Spectral toolkit for complex geometrical optics (CGO) solutions of the
//! time-harmonic Maxwell system written in graded differential forms.
//!
//! Layers, bottom up:
//! - [`algebra`]: pointwise exterior algebra on ℝ³ (wedge, vee, Hodge star).
//! - [`field`], [`fft`], [`calculus`]: periodic grid fields with spectral d, δ.
//! - [`bourgain`]: the conjugated symbol p_ζ, weighted norms and the resolvent.
//! - [`media`]: medium coefficients, the first-order operators P, Pᵗ and the potentials Q, Q̃.
//! - [`cgo`]: CGO geometry, amplitudes and the Neumann-series solver.
//! - [`uniqueness`]: pairing experiments and the unique-continuation contraction check.
//! - [`checks`]: identity suites shared by the CLI and the acceptance harness.

pub mod algebra;
pub mod bourgain;
pub mod calculus;
pub mod cgo;
pub mod checks;
pub mod error;
pub mod fft;
pub mod field;
pub mod io;
pub mod media;
pub mod rng;
pub mod uniqueness;

pub use algebra::{Blade, GradedForm, SymTensor2};
pub use bourgain::{BourgainWeight, ClampReport, ClampSettings, ComplexCovector};
pub use cgo::{CGOGeometry, CGOSolution, Polarization, SolverSettings};
pub use error::{Error, Result};
pub use field::{FormField, Grid, ScalarField, SpectralField, SymTensorField};
pub use media::{BumpSpec, DerivedMedium, Medium, MediumSpec};
pub use num_complex::Complex64;
pub use uniqueness::{MediumPair, ScatteringOutput};
