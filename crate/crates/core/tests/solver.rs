use repulsive_core::mehler::{propagate_exact, PropagatorParams};
use repulsive_core::solver::{duhamel_residual, evolve, evolve_dilated, strang_step, EvolutionPlan};
use repulsive_core::{make_gaussian, Exponent, Grid, HamiltonianSpec, NormSeries, PotentialSpec, WaveFunction};

fn gaussian(l: f64, n: usize) -> WaveFunction {
    make_gaussian(&Grid::new(1, l, n).unwrap(), &[0.0], 1.0, &[0.0]).unwrap()
}

fn free() -> HamiltonianSpec {
    HamiltonianSpec::free(1.0).unwrap()
}

fn bracket() -> HamiltonianSpec {
    HamiltonianSpec::new(1.0, PotentialSpec::power_decay(1.0, 1.0).unwrap()).unwrap()
}

fn exact(f: &WaveFunction, t: f64) -> WaveFunction {
    propagate_exact(f, &PropagatorParams::new(1.0, t).unwrap()).unwrap()
}

#[test]
fn one_step_error_is_third_order() {
    let f = make_gaussian(&Grid::new(1, 4.0, 1024).unwrap(), &[0.0], 4.0, &[0.0]).unwrap();
    let err = |dt: f64| {
        let u = strang_step(&f, &EvolutionPlan::new(free(), dt, 1, 1).unwrap()).unwrap();
        u.relative_distance(&exact(&f, dt)).unwrap()
    };
    let ratio = err(0.04) / err(0.02);
    assert!((ratio - 8.0).abs() < 1.0, "{ratio}");
}

#[test]
fn unit_time_matches_mehler() {
    let f = gaussian(28.0, 2048);
    let dt = 1.0 / 4096.0;
    let samples = evolve(&f, &EvolutionPlan::new(free(), dt, 4096, 1024).unwrap()).unwrap();
    assert_eq!(samples.len(), 5);
    for s in &samples[1..] {
        let err = s.state.relative_distance(&exact(&f, s.time)).unwrap();
        assert!(err <= 1e-6, "t = {}: {err}", s.time);
        assert!(s.boundary_mass < 1e-6);
    }
    assert_eq!(samples.last().unwrap().time, 1.0);
}

#[test]
fn unit_time_error_at_coarse_step_is_splitting_error() {
    // at dt = 2^-10 the error is dominated by the second-order splitting term
    let f = gaussian(28.0, 2048);
    let reference = exact(&f, 1.0);
    let err = |k: i32| {
        let dt = 2f64.powi(-k);
        let plan = EvolutionPlan::new(free(), dt, 1 << k, 1 << k).unwrap();
        evolve(&f, &plan)
            .unwrap()
            .pop()
            .unwrap()
            .state
            .relative_distance(&reference)
            .unwrap()
    };
    let (coarse, fine) = (err(10), err(11));
    assert!((coarse / fine - 4.0).abs() < 0.4, "{coarse} {fine}");
}

#[test]
fn global_error_is_second_order() {
    let f = gaussian(7.0, 256);
    let t = 0.25;
    let reference = exact(&f, t);
    let errors: Vec<f64> = (6..=10)
        .map(|k| {
            let dt = 2f64.powi(-k);
            let steps = (t / dt).round() as usize;
            let u = evolve(&f, &EvolutionPlan::new(free(), dt, steps, steps).unwrap()).unwrap();
            u.last().unwrap().state.relative_distance(&reference).unwrap()
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((ratio - 4.0).abs() <= 0.6, "{errors:?}");
    }
}

#[test]
fn norm_is_conserved_with_potential() {
    let f = gaussian(28.0, 2048);
    let samples = evolve(&f, &EvolutionPlan::new(bracket(), 1.0 / 1024.0, 1024, 16).unwrap()).unwrap();
    let n0 = f.l2_norm();
    for s in &samples {
        assert!((s.state.l2_norm() - n0).abs() / n0 <= 1e-9);
    }
}

#[test]
fn forward_then_backward_is_identity() {
    let f = make_gaussian(&Grid::new(1, 16.0, 512).unwrap(), &[0.5], 1.0, &[1.0]).unwrap();
    let fwd = evolve(&f, &EvolutionPlan::new(bracket(), 1.0 / 512.0, 256, 256).unwrap()).unwrap();
    let mid = &fwd.last().unwrap().state;
    let back = evolve(mid, &EvolutionPlan::new(bracket(), -1.0 / 512.0, 256, 256).unwrap()).unwrap();
    let err = back.last().unwrap().state.relative_distance(&f).unwrap();
    assert!(err <= 1e-8, "{err}");
}

fn duhamel_plan(h: HamiltonianSpec) -> EvolutionPlan {
    EvolutionPlan::new(h, 1.0 / 4096.0, 4096, 4096).unwrap()
}

#[test]
fn duhamel_free_flow() {
    let f = gaussian(28.0, 65536);
    let r = duhamel_residual(&f, &duhamel_plan(free()), 16).unwrap();
    assert!(r.residual <= 1e-6, "{}", r.residual);
}

#[test]
fn duhamel_with_potential() {
    let f = gaussian(28.0, 65536);
    let plan = duhamel_plan(bracket());
    let r16 = duhamel_residual(&f, &plan, 16).unwrap().residual;
    let r32 = duhamel_residual(&f, &plan, 32).unwrap().residual;
    let r128 = duhamel_residual(&f, &plan, 128).unwrap();
    let ratio = r16 / r32;
    assert!((ratio - 4.0).abs() <= 0.8, "{r16} {r32}");
    assert!(r128.residual <= 1e-4, "{}", r128.residual);
    assert_eq!(r128.quad_points, 128);
    assert_eq!(r128.time, 1.0);
}

#[test]
fn duhamel_rejects_bad_quadrature() {
    let f = gaussian(8.0, 256);
    let plan = EvolutionPlan::new(bracket(), 0.01, 100, 100).unwrap();
    assert!(duhamel_residual(&f, &plan, 4).is_err());
    assert!(duhamel_residual(&f, &plan, 16).is_err());
}

fn strichartz_increment(h: HamiltonianSpec, q: Exponent, r: Exponent) -> f64 {
    let f = gaussian(8.0, 1 << 15);
    let plan = EvolutionPlan::new(h, 1.0 / 256.0, 1024, 8).unwrap();
    let samples = evolve_dilated(&f, &plan).unwrap();
    let times = samples.iter().map(|s| s.time).collect();
    let norms = samples.iter().map(|s| s.state.lr_norm(r).unwrap()).collect();
    let m = NormSeries::new(times, norms, r).unwrap().mixed_norm(q).unwrap();
    m.increment.unwrap()
}

#[test]
fn strichartz_window_saturates() {
    for h in [free(), bracket()] {
        let a = strichartz_increment(h.clone(), Exponent::Finite(2.0), Exponent::Infinite);
        assert!(a < 0.02, "(2, inf): {a}");
        let b = strichartz_increment(h, Exponent::Infinite, Exponent::Finite(2.0));
        assert!(b.abs() < 0.02, "(inf, 2): {b}");
    }
}

#[test]
fn dilated_norm_drift_over_long_window() {
    let f = gaussian(8.0, 1 << 15);
    let plan = EvolutionPlan::new(bracket(), 1.0 / 256.0, 1024, 64).unwrap();
    let n0 = f.l2_norm();
    for s in evolve_dilated(&f, &plan).unwrap() {
        let n = s.state.lr_norm(Exponent::Finite(2.0)).unwrap();
        assert!((n - n0).abs() / n0 <= 1e-9, "t = {}", s.time);
    }
}

#[test]
fn dilated_matches_fixed_grid_at_short_times() {
    let f = gaussian(16.0, 2048);
    let plan = EvolutionPlan::new(bracket(), 1.0 / 1024.0, 512, 512).unwrap();
    let fixed = evolve(&f, &plan).unwrap().pop().unwrap().state;
    let dilated = evolve_dilated(&f, &plan).unwrap().pop().unwrap().state;
    // compare the sup norms and the mass near the origin, both grid independent
    let a = repulsive_core::lr_norm(&fixed, Exponent::Infinite).unwrap();
    let b = dilated.lr_norm(Exponent::Infinite).unwrap();
    assert!((a - b).abs() / a < 1e-5, "{a} {b}");
}
