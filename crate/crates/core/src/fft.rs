//! Thin wrappers over `rustfft` for the one- and two-dimensional grids.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// In-place unnormalized transform of a row-major `n`-dimensional block with `points`
/// nodes per axis.
pub(crate) fn transform(data: &mut [Complex64], points: usize, dim: usize, direction: FftDirection) {
    let fft = plan(points, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    if dim == 2 {
        transpose_square(data, points);
        fft.process_with_scratch(data, &mut scratch);
        transpose_square(data, points);
    }
}

pub(crate) fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Applies a Fourier multiplier `m(ξ)` given on the grid's frequency layout.
pub(crate) fn apply_multiplier(data: &mut [Complex64], multiplier: &[Complex64], points: usize, dim: usize) {
    transform(data, points, dim, FftDirection::Forward);
    let scale = 1.0 / data.len() as f64;
    for (v, m) in data.iter_mut().zip(multiplier) {
        *v *= m * scale;
    }
    transform(data, points, dim, FftDirection::Inverse);
}
