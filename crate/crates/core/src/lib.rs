//! Numerical toolkit for the repulsive Hamiltonian `H₀ = −Δ − τ²x²` and its
//! perturbations `H = H₀ + V`.
//!
//! * [`mehler`]: exact free propagation through the Mehler kernel and dispersive
//!   decay diagnostics.
//! * [`solver`]: Strang splitting for `H`, the Duhamel residual, and a
//!   co-dilating variant for long time windows.
//! * [`pairs`]: exact classification of Strichartz exponent pairs.
//! * [`spectral`]: discretized `H`, weighted resolvent norms, and the Kato
//!   smoothing integral.

pub mod error;
pub mod exponent;
pub mod format;
pub mod grid;
pub mod lens;
pub mod mehler;
pub mod norms;
pub mod pairs;
pub mod potential;
pub mod solver;
pub mod spectral;
pub mod stats;
pub mod wave;

mod fft;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use grid::Grid;
pub use norms::{lr_norm, strichartz_norm, MixedNorm, NormSeries};
pub use potential::{eval_potential, HamiltonianSpec, PotentialSpec};
pub use wave::{make_gaussian, WaveFunction};
