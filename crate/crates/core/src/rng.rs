//! Seeded randomness. Every consumer derives its own stream from (seed, stream id) so parallel
//! work is reproducible regardless of scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::GradedForm;
use crate::field::{FormField, Grid, SpectralField};

/// Generator for stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn graded_form<R: Rng>(rng: &mut R) -> GradedForm {
    GradedForm { c: std::array::from_fn(|_| complex(rng)) }
}

/// Random form with only the listed grades populated.
pub fn graded_form_in<R: Rng>(rng: &mut R, grades: &[usize]) -> GradedForm {
    graded_form(rng).grades(grades)
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.map(|x| x / r);
        }
    }
}

/// Complex field whose spectrum is random on |k_j| ≤ band and zero elsewhere.
pub fn bandlimited_field<R: Rng>(rng: &mut R, grid: Grid, band: usize, grades: &[usize]) -> FormField {
    let mut s = SpectralField::zeros(grid);
    let scale = grid.len() as f64;
    for p in 0..grid.len() {
        if grid.in_band(p, band) {
            s.set(p, &graded_form_in(rng, grades).scale(Complex64::new(scale, 0.0)));
        }
    }
    s.inverse()
}
