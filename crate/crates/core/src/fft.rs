//! Three-dimensional FFT on n³ row-major arrays built from cached 1-D rustfft plans.
//!
//! Index (i₀, i₁, i₂) lives at `(i₀·n + i₁)·n + i₂`; axis 0 is x¹.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: LazyLock<Mutex<HashMap<usize, Arc<Plans>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn plans(n: usize) -> Arc<Plans> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
        })
        .clone()
}

/// Unnormalized forward transform Σ_x f(x) e^{−iξ·x}, in place.
pub fn forward(data: &mut [Complex64], n: usize) {
    let p = plans(n);
    transform(data, n, p.forward.as_ref());
}

/// Inverse transform including the 1/n³ factor, in place.
pub fn inverse(data: &mut [Complex64], n: usize) {
    let p = plans(n);
    transform(data, n, p.inverse.as_ref());
    let s = 1.0 / (n * n * n) as f64;
    for z in data.iter_mut() {
        *z *= s;
    }
}

fn transform(data: &mut [Complex64], n: usize, fft: &dyn Fft<f64>) {
    let total = n * n * n;
    assert_eq!(data.len(), total, "fft buffer length must be n^3");
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // axis 2 is contiguous
    fft.process_with_scratch(data, &mut scratch);

    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    // axis 1: gather each (i0, i2) line
    for i0 in 0..n {
        for i2 in 0..n {
            let dst = (i0 * n + i2) * n;
            for i1 in 0..n {
                lines[dst + i1] = data[(i0 * n + i1) * n + i2];
            }
        }
    }
    fft.process_with_scratch(&mut lines, &mut scratch);
    for i0 in 0..n {
        for i2 in 0..n {
            let src = (i0 * n + i2) * n;
            for i1 in 0..n {
                data[(i0 * n + i1) * n + i2] = lines[src + i1];
            }
        }
    }
    // axis 0: gather each (i1, i2) line
    let plane = n * n;
    for j in 0..plane {
        let dst = j * n;
        for i0 in 0..n {
            lines[dst + i0] = data[i0 * plane + j];
        }
    }
    fft.process_with_scratch(&mut lines, &mut scratch);
    for j in 0..plane {
        let src = j * n;
        for i0 in 0..n {
            data[i0 * plane + j] = lines[src + i0];
        }
    }
}
