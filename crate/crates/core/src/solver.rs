//! Strang splitting for `H = −Δ − τ²x² + V` and the Duhamel residual.
//!
//! The quadratic term lives in the multiplicative sub-flow, so one step is
//!
//! ```text
//! e^{i(dt/2)(τ²x² − V)} · F⁻¹ e^{-i dt |ξ|²} F · e^{i(dt/2)(τ²x² − V)}.
//! ```
//!
//! Mass escapes outward exponentially under `H₀`, so every step checks the
//! fraction of mass in the outer shell of the periodic box. For windows longer
//! than the box allows, [`evolve_dilated`] runs the same splitting in the lens
//! frame of [`crate::lens`].

use std::f64::consts::FRAC_PI_4;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::fft;
use crate::format::fmt_f64;
use crate::grid::Grid;
use crate::lens::{DilatedState, LensFrame};
use crate::mehler::{propagate_exact, PropagatorParams};
use crate::norms::lr_norm;
use crate::potential::{eval_potential, HamiltonianSpec, PotentialSpec};
use crate::wave::WaveFunction;

/// Largest tolerated fraction of `|u|²` in the outer 10% shell.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPlan {
    hamiltonian: HamiltonianSpec,
    dt: f64,
    steps: usize,
    record_every: usize,
}

impl EvolutionPlan {
    /// `dt` may be negative, which runs the flow backward in time.
    pub fn new(hamiltonian: HamiltonianSpec, dt: f64, steps: usize, record_every: usize) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(invalid(format!("dt must be finite and nonzero, got {dt}")));
        }
        if steps == 0 {
            return Err(invalid("steps must be at least 1"));
        }
        if record_every == 0 {
            return Err(invalid("record_every must be at least 1"));
        }
        Ok(EvolutionPlan {
            hamiltonian,
            dt,
            steps,
            record_every,
        })
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        &self.hamiltonian
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn record_every(&self) -> usize {
        self.record_every
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    /// Step indices at which a sample is emitted: 0, multiples of `record_every`, and the last step.
    pub fn record_steps(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..=self.steps).step_by(self.record_every).collect();
        if *out.last().unwrap() != self.steps {
            out.push(self.steps);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: WaveFunction,
    pub boundary_mass: f64,
}

/// Precomputed factors of one Strang step on a fixed grid.
struct Stepper {
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    points: usize,
    dim: usize,
}

impl Stepper {
    fn new(grid: &Grid, plan: &EvolutionPlan) -> Result<Self> {
        let tau = plan.hamiltonian.tau();
        let v = eval_potential(plan.hamiltonian.potential(), grid)?;
        let w: Vec<f64> = grid
            .radius_squared()
            .into_iter()
            .zip(&v)
            .map(|(r2, v)| -tau * tau * r2 + v)
            .collect();
        let max_w = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let dt = plan.dt;
        if dt.abs() * max_w > FRAC_PI_4 {
            return Err(Error::StepSize {
                dt: dt.abs(),
                max_dt: FRAC_PI_4 / max_w,
            });
        }
        let half_potential = w.iter().map(|w| Complex64::from_polar(1.0, -0.5 * dt * w)).collect();
        let kinetic = grid
            .frequency_squared()
            .into_iter()
            .map(|k2| Complex64::from_polar(1.0, -dt * k2))
            .collect();
        Ok(Stepper {
            half_potential,
            kinetic,
            points: grid.points_per_axis(),
            dim: grid.dim(),
        })
    }

    fn step(&self, data: &mut [Complex64]) {
        for (v, p) in data.iter_mut().zip(&self.half_potential) {
            *v *= p;
        }
        fft::apply_multiplier(data, &self.kinetic, self.points, self.dim);
        for (v, p) in data.iter_mut().zip(&self.half_potential) {
            *v *= p;
        }
    }
}

/// One Strang step of length `plan.dt()`.
pub fn strang_step(u: &WaveFunction, plan: &EvolutionPlan) -> Result<WaveFunction> {
    let stepper = Stepper::new(u.grid(), plan)?;
    let mut data = u.values().to_vec();
    stepper.step(&mut data);
    WaveFunction::new(u.grid().clone(), data).map_err(|_| Error::Numeric("non-finite state after step".into()))
}

/// Samples of `e^{-itH} f` at the plan's recording steps.
pub fn evolve(f: &WaveFunction, plan: &EvolutionPlan) -> Result<Vec<Sample>> {
    let grid = f.grid();
    let stepper = Stepper::new(grid, plan)?;
    let record = plan.record_steps();
    let mut next = 0;
    let mut data = f.values().to_vec();
    let mut out = Vec::with_capacity(record.len());
    for k in 0..=plan.steps {
        if k > 0 {
            stepper.step(&mut data);
        }
        let time = plan.dt * k as f64;
        let state = WaveFunction::from_parts_unchecked(grid.clone(), data.clone());
        let boundary_mass = state.boundary_mass();
        if !boundary_mass.is_finite() {
            return Err(Error::Numeric(format!("non-finite state at t = {time}")));
        }
        if boundary_mass > BOUNDARY_MASS_LIMIT {
            return Err(Error::DomainTooSmall {
                time,
                boundary_mass,
                limit: BOUNDARY_MASS_LIMIT,
            });
        }
        if record[next] == k {
            out.push(Sample {
                time,
                state,
                boundary_mass,
            });
            next += 1;
        }
    }
    Ok(out)
}

/// Writes `t,l2,linf,boundary_mass` for each sample.
pub fn write_samples_csv<W: Write>(samples: &[Sample], mut out: W) -> io::Result<()> {
    writeln!(out, "t,l2,linf,boundary_mass")?;
    for s in samples {
        let linf = lr_norm(&s.state, Exponent::Infinite).unwrap_or(f64::NAN);
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(s.time),
            fmt_f64(s.state.l2_norm()),
            fmt_f64(linf),
            fmt_f64(s.boundary_mass)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuhamelReport {
    pub time: f64,
    pub quad_points: usize,
    pub residual: f64,
}

/// Relative l² gap between `e^{-itH} f` and
/// `e^{-itH₀} f − i ∫₀^t e^{-i(t−s)H₀} V e^{-isH} f ds`, with the integral taken by
/// the trapezoid rule on `quad_points` equal panels.
pub fn duhamel_residual(f: &WaveFunction, plan: &EvolutionPlan, quad_points: usize) -> Result<DuhamelReport> {
    if quad_points < 8 {
        return Err(invalid(format!("quad_points must be at least 8, got {quad_points}")));
    }
    if !plan.steps.is_multiple_of(quad_points) {
        return Err(invalid(format!(
            "steps ({}) must be a multiple of quad_points ({quad_points})",
            plan.steps
        )));
    }
    let stride = plan.steps / quad_points;
    let by_stride = evolve(
        f,
        &EvolutionPlan::new(plan.hamiltonian.clone(), plan.dt, plan.steps, stride)?,
    )?;
    let t = plan.final_time();
    let tau = plan.hamiltonian.tau();
    let v = eval_potential(plan.hamiltonian.potential(), f.grid())?;
    let lhs = &by_stride.last().unwrap().state;

    let mut rhs: Vec<Complex64> = propagate_exact(f, &PropagatorParams::new(tau, t)?)?.into_values();
    if !plan.hamiltonian.potential().is_zero() {
        let h = t / quad_points as f64;
        let mut integral = vec![Complex64::default(); rhs.len()];
        for (k, sample) in by_stride.iter().enumerate() {
            let weight = if k == 0 || k == quad_points { 0.5 * h } else { h };
            let source = sample.state.map(|i, u| u * v[i]);
            let pushed = propagate_exact(&source, &PropagatorParams::new(tau, t - sample.time)?)?;
            for (acc, p) in integral.iter_mut().zip(pushed.values()) {
                *acc += p * weight;
            }
        }
        let minus_i = Complex64::new(0.0, -1.0);
        for (r, i) in rhs.iter_mut().zip(integral) {
            *r += minus_i * i;
        }
    }
    let rhs = WaveFunction::new(f.grid().clone(), rhs)
        .map_err(|_| Error::Numeric("non-finite Duhamel right-hand side".into()))?;
    Ok(DuhamelReport {
        time: t,
        quad_points,
        residual: rhs.relative_distance(lhs)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilatedSample {
    pub time: f64,
    pub state: DilatedState,
    pub boundary_mass: f64,
}

/// Strang splitting of `i∂_t v = C(t)^{-2}(−Δ) v + V(C(t) y) v` for the lens-frame
/// profile `v`, starting from `v(0) = f`.
///
/// The kinetic factor is exact: it advances the free time by `s(t+dt) − s(t)`.
/// The potential is sampled at the midpoint dilation. With `V ≠ 0` the profile
/// grid must resolve `V(C y)`, which is enforced as `Δy · C_max ≤ 1`.
pub fn evolve_dilated(f: &WaveFunction, plan: &EvolutionPlan) -> Result<Vec<DilatedSample>> {
    let ham = &plan.hamiltonian;
    let potential = ham.potential();
    if matches!(potential, PotentialSpec::Tabulated { .. }) {
        return Err(invalid(
            "the lens-frame solver needs an analytic potential; tabulated tables cannot be dilated",
        ));
    }
    let tau = ham.tau();
    let grid = f.grid();
    let c_max = LensFrame::new(tau, plan.final_time())?.scale();
    if !potential.is_zero() && grid.spacing() * c_max > 1.0 {
        return Err(invalid(format!(
            "profile grid too coarse for the dilated potential: dy * cosh(2 tau T) = {} > 1",
            grid.spacing() * c_max
        )));
    }
    let r2 = grid.radius_squared();
    let k2 = grid.frequency_squared();
    let record = plan.record_steps();
    let mut next = 0;
    let mut data = f.values().to_vec();
    let mut out = Vec::with_capacity(record.len());
    let dt = plan.dt;
    let mut half = vec![Complex64::new(1.0, 0.0); data.len()];
    let mut kinetic = vec![Complex64::default(); data.len()];
    for k in 0..=plan.steps {
        if k > 0 {
            let t0 = dt * (k - 1) as f64;
            let t1 = dt * k as f64;
            let mid = LensFrame::new(tau, 0.5 * (t0 + t1))?.scale();
            let ds = LensFrame::new(tau, t1)?.free_time() - LensFrame::new(tau, t0)?.free_time();
            if !potential.is_zero() {
                for (h, r2) in half.iter_mut().zip(&r2) {
                    let v = potential.value_at_radius_sq(mid * mid * r2).unwrap_or(0.0);
                    *h = Complex64::from_polar(1.0, -0.5 * dt * v);
                }
                for (u, h) in data.iter_mut().zip(&half) {
                    *u *= h;
                }
            }
            for (m, k2) in kinetic.iter_mut().zip(&k2) {
                *m = Complex64::from_polar(1.0, -ds * k2);
            }
            fft::apply_multiplier(&mut data, &kinetic, grid.points_per_axis(), grid.dim());
            if !potential.is_zero() {
                for (u, h) in data.iter_mut().zip(&half) {
                    *u *= h;
                }
            }
        }
        let time = dt * k as f64;
        let profile = WaveFunction::from_parts_unchecked(grid.clone(), data.clone());
        let boundary_mass = profile.boundary_mass();
        if !boundary_mass.is_finite() {
            return Err(Error::Numeric(format!("non-finite profile at t = {time}")));
        }
        if boundary_mass > BOUNDARY_MASS_LIMIT {
            return Err(Error::DomainTooSmall {
                time,
                boundary_mass,
                limit: BOUNDARY_MASS_LIMIT,
            });
        }
        if record[next] == k {
            out.push(DilatedSample {
                time,
                state: DilatedState::new(LensFrame::new(tau, time)?, profile),
                boundary_mass,
            });
            next += 1;
        }
    }
    Ok(out)
}
