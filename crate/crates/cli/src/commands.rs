//! One function per command. Each composes core operations and returns its
//! artifacts in memory; nothing is written here.

use std::io::Write;

use rayon::prelude::*;
use serde_json::Value;

use repulsive_core::format::fmt_f64;
use repulsive_core::mehler::{decay_fit, propagate_exact, weighted_decay_integrand, PropagatorParams};
use repulsive_core::pairs::{sample_region, write_region_csv};
use repulsive_core::solver::{duhamel_residual, evolve, evolve_dilated, write_samples_csv, EvolutionPlan};
use repulsive_core::spectral::{
    assemble, high_energy_queries, lap_queries, smoothing_integral, weighted_resolvent_norm_with, DiscreteHamiltonian,
    HighEnergyScan, ProbeConfig, ResolventQuery, ScanResult,
};
use repulsive_core::{make_gaussian, Exponent, Grid, HamiltonianSpec, NormSeries, PotentialSpec, WaveFunction};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{num, nums, object, Artifact};

type Outcome = Result<Vec<Artifact>, CliError>;

pub fn execute(config: &RunConfig) -> Outcome {
    match config.command {
        Command::Propagate => propagate(config),
        Command::DecayFit => decay(config),
        Command::Strichartz => strichartz(config),
        Command::Region => region(config),
        Command::ResolventScan => resolvent_scan(config),
        Command::HighEnergy => high_energy(config),
        Command::Smoothing => smoothing(config),
        Command::Duhamel => duhamel(config),
        Command::WeightedDecay => weighted_decay(config),
    }
}

fn usize_param(c: &RunConfig, key: &str) -> Result<usize, CliError> {
    usize::try_from(c.int(key)).map_err(|_| CliError::invalid(key, "value does not fit in memory sizes"))
}

fn u32_param(c: &RunConfig, key: &str) -> Result<u32, CliError> {
    u32::try_from(c.int(key)).map_err(|_| CliError::invalid(key, "value is too large"))
}

fn dim(c: &RunConfig) -> Result<usize, CliError> {
    match c.int("n") {
        1 => Ok(1),
        2 => Ok(2),
        n => Err(CliError::invalid(
            "n",
            format!("this command supports n = 1 or 2, got {n}"),
        )),
    }
}

fn grid(c: &RunConfig, dim: usize) -> Result<Grid, CliError> {
    Ok(Grid::new(dim, c.float("half_width"), usize_param(c, "points")?)?)
}

fn gaussian(c: &RunConfig, grid: &Grid) -> Result<WaveFunction, CliError> {
    let n = grid.dim();
    Ok(make_gaussian(
        grid,
        &vec![c.float("center"); n],
        c.float("width"),
        &vec![c.float("momentum"); n],
    )?)
}

fn hamiltonian(c: &RunConfig) -> Result<HamiltonianSpec, CliError> {
    let amplitude = c.float("amplitude");
    let potential = if amplitude == 0.0 {
        PotentialSpec::Zero
    } else {
        PotentialSpec::power_decay(amplitude, c.float("decay"))?
    };
    Ok(HamiltonianSpec::new(c.float("tau"), potential)?)
}

fn plan(c: &RunConfig, spec: HamiltonianSpec, record_every: usize) -> Result<EvolutionPlan, CliError> {
    Ok(EvolutionPlan::new(
        spec,
        c.float("dt"),
        usize_param(c, "steps")?,
        record_every,
    )?)
}

/// `min, min + step, …` up to `max`.
fn range(c: &RunConfig, min: &str, max: &str, step: &str) -> Result<Vec<f64>, CliError> {
    let (lo, hi, h) = (c.float(min), c.float(max), c.float(step));
    if !(h > 0.0) {
        return Err(CliError::invalid(step, "must be positive"));
    }
    if hi < lo {
        return Err(CliError::invalid(max, format!("must be at least {min}")));
    }
    let count = ((hi - lo) / h * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=count).map(|k| lo + h * k as f64).collect())
}

fn csv(rows: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    rows(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn series_csv(header: &str, s: &NormSeries) -> Vec<u8> {
    csv(|out| {
        writeln!(out, "{header}")?;
        for (t, v) in s.times().iter().zip(s.norms()) {
            writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
        }
        Ok(())
    })
}

fn state_csv(u: &WaveFunction) -> Vec<u8> {
    let g = u.grid();
    csv(|out| {
        if g.dim() == 1 {
            writeln!(out, "x,re,im")?;
        } else {
            writeln!(out, "x,y,re,im")?;
        }
        for (k, v) in u.values().iter().enumerate() {
            let x = g.coords(k);
            if g.dim() == 1 {
                write!(out, "{},", fmt_f64(x[0]))?;
            } else {
                write!(out, "{},{},", fmt_f64(x[0]), fmt_f64(x[1]))?;
            }
            writeln!(out, "{},{}", fmt_f64(v.re), fmt_f64(v.im))?;
        }
        Ok(())
    })
}

fn exponent_json(e: Exponent) -> Value {
    match e {
        Exponent::Infinite => Value::String("inf".into()),
        Exponent::Finite(p) => num(p),
    }
}

fn propagate(c: &RunConfig) -> Outcome {
    let g = grid(c, dim(c)?)?;
    let f = gaussian(c, &g)?;
    let time = c.float("time");
    let spec = hamiltonian(c)?;
    let mut artifacts = Vec::new();
    let u = match c.choice("method") {
        "exact" => {
            if !spec.potential().is_zero() {
                return Err(CliError::invalid("amplitude", "method = exact needs amplitude = 0"));
            }
            propagate_exact(&f, &PropagatorParams::new(spec.tau(), time)?)?
        }
        _ => {
            let dt = c.float("dt");
            let steps = (time / dt).round();
            if !(steps >= 1.0) || (steps * dt - time).abs() > 1e-9 * time.abs() {
                return Err(CliError::invalid(
                    "dt",
                    format!("time = {time} is not a positive multiple of dt = {dt}"),
                ));
            }
            let plan = EvolutionPlan::new(spec, dt, steps as usize, usize_param(c, "record_every")?)?;
            let mut samples = evolve(&f, &plan)?;
            artifacts.push(Artifact::new(
                "propagate_samples.csv",
                csv(|out| write_samples_csv(&samples, out)),
            ));
            samples.pop().expect("evolve records the last step").state
        }
    };
    let summary = object([
        ("time", num(time)),
        ("l2_initial", num(f.l2_norm())),
        ("l2_final", num(u.l2_norm())),
        ("linf_final", num(repulsive_core::lr_norm(&u, Exponent::Infinite)?)),
        ("boundary_mass", num(u.boundary_mass())),
    ]);
    artifacts.push(Artifact::new("propagate.csv", state_csv(&u)));
    artifacts.push(Artifact::json("propagate.json", &summary));
    Ok(artifacts)
}

fn decay(c: &RunConfig) -> Outcome {
    let g = grid(c, dim(c)?)?;
    let f = make_gaussian(&g, &vec![0.0; g.dim()], c.float("width"), &vec![0.0; g.dim()])?;
    let times = range(c, "t_min", "t_max", "t_step")?;
    let fit = decay_fit(&f, &HamiltonianSpec::free(c.float("tau"))?, &times)?;
    let summary = object([
        ("rate", num(fit.fitted_rate)),
        ("fitted_rate", num(fit.fitted_rate)),
        ("intercept", num(fit.intercept)),
        ("r_squared", num(fit.r_squared)),
        ("reference_rate", num(fit.reference_rate)),
        ("bound_rate", num(fit.bound_rate)),
        ("window", nums(&[fit.window.0, fit.window.1])),
    ]);
    Ok(vec![
        Artifact::new("decay-fit.csv", series_csv("sigma,value", &fit.samples)),
        Artifact::json("decay-fit.json", &summary),
    ])
}

fn strichartz(c: &RunConfig) -> Outcome {
    let g = grid(c, 1)?;
    let f = gaussian(c, &g)?;
    let plan = plan(c, hamiltonian(c)?, usize_param(c, "record_every")?)?;
    let (q, r) = (c.exponent("q"), c.exponent("r"));
    let samples = evolve_dilated(&f, &plan)?;
    let times = samples.iter().map(|s| s.time).collect();
    let norms = samples
        .iter()
        .map(|s| s.state.lr_norm(r))
        .collect::<repulsive_core::Result<Vec<_>>>()?;
    let series = NormSeries::new(times, norms, r)?;
    let m = series.mixed_norm(q)?;
    let summary = object([
        ("q", exponent_json(q)),
        ("r", exponent_json(r)),
        ("window", num(plan.final_time())),
        ("value", num(m.value)),
        ("increment", m.increment.map_or(Value::Null, num)),
    ]);
    Ok(vec![
        Artifact::new("strichartz.csv", csv(|out| series.write_csv(out))),
        Artifact::json("strichartz.json", &summary),
    ])
}

fn region(c: &RunConfig) -> Outcome {
    let n = u32_param(c, "n")?;
    let points = sample_region(n, u32_param(c, "resolution")?)?;
    let count =
        |p: &dyn Fn(&repulsive_core::pairs::Verdict) -> bool| points.iter().filter(|x| p(&x.verdict)).count() as u64;
    let summary = object([
        ("n", Value::from(n)),
        ("points", Value::from(points.len() as u64)),
        ("admissible", Value::from(count(&|v| v.admissible))),
        ("on_boundary", Value::from(count(&|v| v.on_boundary))),
        ("endpoints", Value::from(count(&|v| v.is_endpoint))),
    ]);
    Ok(vec![
        Artifact::new("region.csv", csv(|out| write_region_csv(&points, out))),
        Artifact::json("region.json", &summary),
    ])
}

fn probe_config(c: &RunConfig) -> Result<ProbeConfig, CliError> {
    Ok(ProbeConfig {
        nu_max: c.float("nu_max"),
        min_certificate: c.float("min_certificate"),
        spacing_window: usize_param(c, "spacing_window")?,
        tolerance: c.float("tolerance"),
        max_iterations: usize_param(c, "max_iterations")?,
        seed: c.seed,
    })
}

/// Evaluates the queries on the worker pool; results keep the query order.
fn scan(h: &DiscreteHamiltonian, queries: Vec<ResolventQuery>, cfg: &ProbeConfig) -> Result<ScanResult, CliError> {
    let results = queries
        .par_iter()
        .map(|q| weighted_resolvent_norm_with(h, q, cfg))
        .collect::<repulsive_core::Result<Vec<_>>>()?;
    let norms = results.iter().map(|r| r.norm).collect();
    let certificates = results.iter().map(|r| r.certificate).collect();
    Ok(ScanResult::new(queries, norms, certificates)?)
}

fn resolvent_scan(c: &RunConfig) -> Outcome {
    let spec = hamiltonian(c)?;
    if spec.potential().is_zero() {
        return Err(CliError::invalid(
            "amplitude",
            "the |V|^(1/2) weight vanishes for amplitude = 0",
        ));
    }
    let h = assemble(&grid(c, 1)?, &spec)?;
    let lambdas = range(c, "lambda_min", "lambda_max", "lambda_step")?;
    let result = scan(&h, lap_queries(&lambdas, c.float("nu"))?, &probe_config(c)?)?;
    let (arg, sup) =
        result.norms().iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, n)| if *n > best.1 { (i, *n) } else { best },
        );
    let min_cert = result.certificates().iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = object([
        ("sup", num(sup)),
        ("argmax_lambda", num(result.queries()[arg].lambda)),
        ("min_certificate_observed", num(min_cert)),
        ("queries", Value::from(result.queries().len() as u64)),
    ]);
    Ok(vec![
        Artifact::new("resolvent-scan.csv", csv(|out| result.write_csv(out))),
        Artifact::json("resolvent-scan.json", &summary),
    ])
}

fn high_energy(c: &RunConfig) -> Outcome {
    let h = DiscreteHamiltonian::new(&grid(c, 1)?, c.float("tau"), PotentialSpec::Zero)?;
    let (thetas, rho, power) = (c.list("thetas"), c.float("rho"), c.float("power"));
    let queries = high_energy_queries(thetas, c.list("lambdas"), c.float("nu"), rho)?;
    let result = scan(&h, queries, &probe_config(c)?)?;
    let he = HighEnergyScan::from_result(result, thetas, rho)?;
    let spreads: Vec<f64> = (0..thetas.len()).map(|i| he.product_spread(i, power)).collect();
    let summary = object([
        ("thetas", nums(thetas)),
        ("rho", num(rho)),
        ("power", num(power)),
        ("slopes", nums(&he.slopes)),
        ("spreads", nums(&spreads)),
    ]);
    Ok(vec![
        Artifact::new("high-energy.csv", csv(|out| he.result.write_csv(out))),
        Artifact::json("high-energy.json", &summary),
    ])
}

fn smoothing(c: &RunConfig) -> Outcome {
    let f = gaussian(c, &grid(c, 1)?)?;
    let spec = hamiltonian(c)?;
    let r = smoothing_integral(&f, &spec, &plan(c, spec.clone(), usize_param(c, "record_every")?)?)?;
    let summary = object([
        ("T", num(r.window)),
        ("value", num(r.value)),
        ("saturation", num(r.saturation)),
        ("norm_f_sq", num(r.norm_f_sq)),
        ("potential_window", num(r.potential_window)),
        ("continuation_bound", num(r.continuation_bound)),
    ]);
    Ok(vec![Artifact::json("smoothing.json", &summary)])
}

fn duhamel(c: &RunConfig) -> Outcome {
    let f = gaussian(c, &grid(c, 1)?)?;
    let steps = usize_param(c, "steps")?;
    let r = duhamel_residual(
        &f,
        &plan(c, hamiltonian(c)?, steps.max(1))?,
        usize_param(c, "quad_points")?,
    )?;
    let summary = object([
        ("t", num(r.time)),
        ("quad_points", Value::from(r.quad_points as u64)),
        ("residual", num(r.residual)),
    ]);
    Ok(vec![Artifact::json("duhamel.json", &summary)])
}

fn weighted_decay(c: &RunConfig) -> Outcome {
    let g = grid(c, 1)?;
    let f = make_gaussian(&g, &[0.0], c.float("width"), &[0.0])?;
    let sigmas = range(c, "sigma_min", "sigma_max", "sigma_step")?;
    let w = weighted_decay_integrand(
        c.float("rho"),
        c.float("q_exponent"),
        &HamiltonianSpec::free(c.float("tau"))?,
        &f,
        &sigmas,
    )?;
    let slope = w.sinh_slope(c.float("slope_min"), c.float("slope_max"));
    let summary = object([
        ("integral", num(w.integral)),
        ("saturation", w.saturation.map_or(Value::Null, num)),
        ("slope", slope.map_or(Value::Null, num)),
        ("envelope_exponent", num(w.envelope_exponent)),
        ("envelope_constant", num(w.envelope_constant)),
        ("max_envelope_ratio", num(w.max_envelope_ratio)),
    ]);
    Ok(vec![
        Artifact::new("weighted-decay.csv", series_csv("sigma,value", &w.series)),
        Artifact::json("weighted-decay.json", &summary),
    ])
}
