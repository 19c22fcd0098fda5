//! Shared fixtures for the kernel benchmarks.

use hodge_cgo::cgo::{self, CGOGeometry};
use hodge_cgo::media::{self, presets};
use hodge_cgo::{rng, DerivedMedium, FormField, Grid};

/// Reference medium derived on an n³ grid of the reference box.
pub fn reference_medium(n: usize) -> DerivedMedium {
    let g = Grid::new(n, presets::REFERENCE_SIDE).expect("grid");
    media::derive(&presets::reference_medium().sample(g).expect("sample")).expect("derive")
}

/// Seeded band-limited field on all grades.
pub fn random_field(g: Grid, seed: u64) -> FormField {
    rng::bandlimited_field(&mut rng::stream(seed, 0), g, 4, &[0, 1, 2, 3])
}

/// Geometry with ρ = (1,1,1) in lattice units.
pub fn geometry(g: &Grid, s: f64, k: f64) -> CGOGeometry {
    let h = g.dual_spacing();
    let (e1, e2) = cgo::frame([h, h, h], 0.3);
    CGOGeometry::new(g, [1, 1, 1], e1, e2, s, k).expect("geometry")
}
