//! Exact free propagator `e^{-iσH₀}` through the closed-form Mehler kernel
//!
//! ```text
//! (e^{-iσH₀}ψ)(x) = (τ / (2πi sinh 2τσ))^{n/2} ∫ exp(iτ((x²+y²)cosh 2τσ − 2x·y) / (2 sinh 2τσ)) ψ(y) dy
//! ```
//!
//! and the decay diagnostics built on it.
//!
//! The kernel is separable, so every axis gets the same one-dimensional treatment:
//! a chirp on the input, a chirp convolution (Bluestein) for the `x·y` coupling,
//! and a chirp on the output. The result is the rectangle-rule value of the
//! integral at every node of the input grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::fft;
use crate::grid::Grid;
use crate::norms::{lr_norm, NormSeries};
use crate::potential::HamiltonianSpec;
use crate::stats::linear_fit;
use crate::wave::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorParams {
    tau: f64,
    sigma: f64,
}

impl PropagatorParams {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(invalid(format!("tau must be finite and nonzero, got {tau}")));
        }
        if !sigma.is_finite() {
            return Err(invalid(format!("sigma must be finite, got {sigma}")));
        }
        Ok(PropagatorParams { tau, sigma })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn sinh(&self) -> f64 {
        (2.0 * self.tau * self.sigma).sinh()
    }

    fn cosh(&self) -> f64 {
        (2.0 * self.tau * self.sigma).cosh()
    }
}

/// Outcome of the chirp-sampling test for one axis of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingCheck {
    /// `|τ| L (cosh 2τσ + 1) / |sinh 2τσ|`, the largest kernel frequency on the grid.
    pub max_frequency: f64,
    pub nyquist: f64,
    /// Smallest admissible power of two for the same half-width.
    pub min_points: usize,
}

impl SamplingCheck {
    pub fn satisfied(&self) -> bool {
        self.max_frequency < self.nyquist
    }
}

pub fn sampling_check(grid: &Grid, params: &PropagatorParams) -> SamplingCheck {
    let l = grid.half_width();
    let nyquist = grid.nyquist();
    if params.sigma == 0.0 {
        return SamplingCheck {
            max_frequency: 0.0,
            nyquist,
            min_points: 8,
        };
    }
    let max_frequency = params.tau.abs() * l * (params.cosh() + 1.0) / params.sinh().abs();
    // π N / (2L) > f  ⇔  N > 2 L f / π
    let bound = 2.0 * l * max_frequency / PI;
    let mut min_points = 8usize;
    while (min_points as f64) <= bound {
        min_points *= 2;
    }
    SamplingCheck {
        max_frequency,
        nyquist,
        min_points,
    }
}

/// `(|τ| / (2π |sinh 2τσ|))^{n/2}`, the modulus of the kernel.
pub fn kernel_bound(dim: usize, params: &PropagatorParams) -> f64 {
    (params.tau.abs() / (2.0 * PI * params.sinh().abs())).powf(0.5 * dim as f64)
}

/// `e^{-iσH₀} u` evaluated on the grid of `u`.
pub fn propagate_exact(u: &WaveFunction, params: &PropagatorParams) -> Result<WaveFunction> {
    if params.sigma == 0.0 {
        return Ok(u.clone());
    }
    let grid = u.grid();
    let check = sampling_check(grid, params);
    if !check.satisfied() {
        return Err(Error::RefinementRequired {
            points: grid.points_per_axis(),
            min_points: check.min_points,
            max_frequency: check.max_frequency,
            nyquist: check.nyquist,
        });
    }
    let n = grid.points_per_axis();
    let chirp = AxisChirp::new(grid, params);
    let mut data = u.values().to_vec();
    let mut work = chirp.workspace();
    for line in data.chunks_mut(n) {
        chirp.apply(line, &mut work);
    }
    if grid.dim() == 2 {
        fft::transpose_square(&mut data, n);
        for line in data.chunks_mut(n) {
            chirp.apply(line, &mut work);
        }
        fft::transpose_square(&mut data, n);
    }
    WaveFunction::new(grid.clone(), data).map_err(|_| Error::Numeric("propagated state is not finite".into()))
}

/// One-dimensional factor of the kernel on an `N`-point axis.
///
/// With `α = τ cosh/(2 sinh)`, `β = τ/sinh`, `γ = βΔx²` and `x_k = −L + kΔx`,
/// `x_k y_j = L² − LΔx(k+j) + Δx² kj` and `kj = (k² + j² − (k−j)²)/2`, so the sum
/// over `j` becomes a convolution with `e^{iγm²/2}`.
struct AxisChirp {
    n: usize,
    m: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
}

struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl AxisChirp {
    fn new(grid: &Grid, params: &PropagatorParams) -> Self {
        let n = grid.points_per_axis();
        let l = grid.half_width();
        let dx = grid.spacing();
        let (s, c) = (params.sinh(), params.cosh());
        let tau = params.tau;
        let alpha = tau * c / (2.0 * s);
        let beta = tau / s;
        let gamma = beta * dx * dx;

        // (τ/(2πi sinh))^{1/2}: modulus times e^{-iπ/4 sign(τ sinh)}, sign(τ sinh) = sign σ
        let modulus = (tau.abs() / (2.0 * PI * s.abs())).sqrt();
        let branch = -0.25 * PI * params.sigma.signum();
        let amplitude = Complex64::from_polar(modulus * dx, branch);

        let nodes = grid.axis_nodes();
        let pre = nodes
            .iter()
            .enumerate()
            .map(|(j, y)| {
                let jf = j as f64;
                Complex64::from_polar(1.0, beta * l * dx * jf - 0.5 * gamma * jf * jf + alpha * y * y)
            })
            .collect();
        let post = nodes
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let kf = k as f64;
                let phase = -beta * l * l + alpha * x * x + beta * l * dx * kf - 0.5 * gamma * kf * kf;
                amplitude * Complex64::from_polar(1.0, phase)
            })
            .collect();

        let m = (2 * n - 1).next_power_of_two();
        let mut kernel = vec![Complex64::default(); m];
        for j in 0..n {
            let jf = j as f64;
            let v = Complex64::from_polar(1.0, 0.5 * gamma * jf * jf);
            kernel[j] = v;
            if j > 0 {
                kernel[m - j] = v;
            }
        }
        let fwd = fft::plan(m, FftDirection::Forward);
        fwd.process(&mut kernel);
        let scale = 1.0 / m as f64;
        for v in kernel.iter_mut() {
            *v *= scale;
        }
        AxisChirp {
            n,
            m,
            pre,
            post,
            kernel_hat: kernel,
        }
    }

    fn workspace(&self) -> Workspace {
        let fwd = fft::plan(self.m, FftDirection::Forward);
        let inv = fft::plan(self.m, FftDirection::Inverse);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Workspace {
            buf: vec![Complex64::default(); self.m],
            scratch: vec![Complex64::default(); len],
        }
    }

    fn apply(&self, line: &mut [Complex64], work: &mut Workspace) {
        let buf = &mut work.buf;
        buf.iter_mut().for_each(|v| *v = Complex64::default());
        for j in 0..self.n {
            buf[j] = line[j] * self.pre[j];
        }
        fft::plan(self.m, FftDirection::Forward).process_with_scratch(buf, &mut work.scratch);
        for (v, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *v *= k;
        }
        fft::plan(self.m, FftDirection::Inverse).process_with_scratch(buf, &mut work.scratch);
        for k in 0..self.n {
            line[k] = buf[k] * self.post[k];
        }
    }
}

/// Least-squares fit of `log ‖e^{-itH₀} f‖_{L^∞}` against `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub window: (f64, f64),
    /// `−slope`, the fitted exponential decay rate.
    pub fitted_rate: f64,
    pub intercept: f64,
    /// `n|τ|`, the rate carried by the kernel modulus `|sinh 2τt|^{-n/2}`.
    pub reference_rate: f64,
    /// `n|τ|/2`, the rate of the weaker `|sinh τt|^{-n/2}` form.
    pub bound_rate: f64,
    pub r_squared: f64,
    pub samples: NormSeries,
}

pub fn decay_fit(f: &WaveFunction, hamiltonian: &HamiltonianSpec, times: &[f64]) -> Result<DecayFit> {
    hamiltonian.require_free()?;
    if times.len() < 2 {
        return Err(invalid("decay fit needs at least two times"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("decay-fit times must be strictly increasing"));
    }
    let tau = hamiltonian.tau();
    if (2.0 * tau * times[0]).sinh().abs() < 1.0 {
        return Err(invalid(format!(
            "t_min = {} is too small: need |sinh(2 tau t_min)| >= 1",
            times[0]
        )));
    }
    let mut sup = Vec::with_capacity(times.len());
    for &t in times {
        let u = propagate_exact(f, &PropagatorParams::new(tau, t)?)?;
        sup.push(lr_norm(&u, Exponent::Infinite)?);
    }
    let logs: Vec<f64> = sup.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(times, &logs).ok_or_else(|| Error::Numeric("degenerate decay fit".into()))?;
    let n = f.grid().dim() as f64;
    Ok(DecayFit {
        window: (times[0], times[times.len() - 1]),
        fitted_rate: -fit.slope,
        intercept: fit.intercept,
        reference_rate: n * tau.abs(),
        bound_rate: 0.5 * n * tau.abs(),
        r_squared: fit.r_squared,
        samples: NormSeries::new(times.to_vec(), sup, Exponent::Infinite)?,
    })
}

/// `σ ↦ ‖⟨x⟩^{-ρ} e^{-iσH₀} ⟨x⟩^{-ρ} φ‖_{L²}` with its time integral and the fit
/// against the envelope `K |sinh 2τσ|^{-n/Q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDecay {
    pub series: NormSeries,
    pub tau: f64,
    /// `n/Q`.
    pub envelope_exponent: f64,
    pub integral: f64,
    /// Relative growth of the integral over the second half of the window.
    pub saturation: Option<f64>,
    /// Least-squares `K` of the envelope in log space.
    pub envelope_constant: f64,
    /// `max_σ value(σ) / (K |sinh 2τσ|^{-n/Q})`.
    pub max_envelope_ratio: f64,
}

impl WeightedDecay {
    /// Regression slope of `log value` against `log |sinh 2τσ|` on `[lo, hi]`.
    pub fn sinh_slope(&self, lo: f64, hi: f64) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .series
            .times()
            .iter()
            .zip(self.series.norms())
            .filter(|(s, _)| **s >= lo && **s <= hi)
            .map(|(s, v)| ((2.0 * self.tau * s).sinh().abs().ln(), v.ln()))
            .unzip();
        linear_fit(&xs, &ys).map(|f| f.slope)
    }
}

pub fn weighted_decay_integrand(
    rho: f64,
    q_exponent: f64,
    hamiltonian: &HamiltonianSpec,
    phi: &WaveFunction,
    sigmas: &[f64],
) -> Result<WeightedDecay> {
    hamiltonian.require_free()?;
    let n = phi.grid().dim() as f64;
    if !(rho > 0.0) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    if !(q_exponent >= 2.0) {
        return Err(invalid(format!("Q must be at least 2, got {q_exponent}")));
    }
    if rho * q_exponent <= n {
        return Err(invalid(format!(
            "hypothesis rho*Q > n violated: rho*Q = {} <= {n}",
            rho * q_exponent
        )));
    }
    if q_exponent <= n {
        return Err(invalid(format!("hypothesis Q > n violated: Q = {q_exponent} <= {n}")));
    }
    if sigmas.len() < 2 || sigmas[0] <= 0.0 || sigmas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid(
            "sigmas must be positive and strictly increasing (at least two)",
        ));
    }
    let tau = hamiltonian.tau();
    let weight: Vec<f64> = phi
        .grid()
        .radius_squared()
        .into_iter()
        .map(|r2| (1.0 + r2).powf(-0.5 * rho))
        .collect();
    let weighted_input = phi.map(|i, v| v * weight[i]);
    let mut values = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        let u = propagate_exact(&weighted_input, &PropagatorParams::new(tau, s)?)?;
        values.push(u.map(|i, v| v * weight[i]).l2_norm());
    }
    let series = NormSeries::new(sigmas.to_vec(), values, Exponent::Finite(2.0))?;
    let time_norm = series.mixed_norm(Exponent::Finite(1.0))?;

    let exponent = n / q_exponent;
    let envelope = |s: f64| (2.0 * tau * s).sinh().abs().powf(-exponent);
    let log_k = series
        .times()
        .iter()
        .zip(series.norms())
        .map(|(s, v)| v.ln() - envelope(*s).ln())
        .sum::<f64>()
        / series.len() as f64;
    let k = log_k.exp();
    let max_ratio = series
        .times()
        .iter()
        .zip(series.norms())
        .map(|(s, v)| v / (k * envelope(*s)))
        .fold(0.0, f64::max);
    Ok(WeightedDecay {
        series,
        tau,
        envelope_exponent: exponent,
        integral: time_norm.value,
        saturation: time_norm.increment,
        envelope_constant: k,
        max_envelope_ratio: max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::make_gaussian;

    #[test]
    fn zero_time_is_identity() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let f = make_gaussian(&g, &[0.5], 2.0, &[1.0]).unwrap();
        let out = propagate_exact(&f, &PropagatorParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn coarse_grid_reports_refinement() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let f = make_gaussian(&g, &[0.0], 1.0, &[0.0]).unwrap();
        let p = PropagatorParams::new(1.0, 0.25).unwrap();
        match propagate_exact(&f, &p) {
            Err(Error::RefinementRequired { min_points, .. }) => {
                assert_eq!(min_points, 256);
                let fine = Grid::new(1, 8.0, min_points).unwrap();
                let f = make_gaussian(&fine, &[0.0], 1.0, &[0.0]).unwrap();
                assert!(propagate_exact(&f, &p).is_ok());
            }
            other => panic!("expected refinement error, got {other:?}"),
        }
    }

    #[test]
    fn unitary_on_resolved_states() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        let f = make_gaussian(&g, &[0.3], 1.5, &[0.5]).unwrap();
        for sigma in [0.25, -0.5, 1.0] {
            let u = propagate_exact(&f, &PropagatorParams::new(1.0, sigma).unwrap()).unwrap();
            // the tail that leaves [-L, L) is negligible only for short times
            if sigma.abs() <= 0.5 {
                assert!((u.l2_norm() - f.l2_norm()).abs() / f.l2_norm() < 1e-8, "sigma {sigma}");
            }
        }
    }

    #[test]
    fn weighted_decay_checks_hypotheses() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        let f = make_gaussian(&g, &[0.0], 1.0, &[0.0]).unwrap();
        let h = HamiltonianSpec::free(1.0).unwrap();
        let err = weighted_decay_integrand(0.4, 2.0, &h, &f, &[1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("rho*Q > n"), "{err}");
        let err = weighted_decay_integrand(1.0, 1.0, &h, &f, &[1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("Q"), "{err}");
    }

    #[test]
    fn decay_fit_rejects_unordered_times() {
        let g = Grid::new(1, 8.0, 128).unwrap();
        let f = make_gaussian(&g, &[0.0], 1.0, &[0.0]).unwrap();
        let h = HamiltonianSpec::free(1.0).unwrap();
        assert!(decay_fit(&f, &h, &[4.0, 3.0]).is_err());
        assert!(decay_fit(&f, &h, &[0.1, 3.0]).is_err());
    }
}
