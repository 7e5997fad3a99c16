//! The discretized Hamiltonian on a Dirichlet box and the resolvent diagnostics
//! built on it: weighted resolvent norms, limiting-absorption and high-energy
//! scans, the Birman–Schwinger identity, and the Kato smoothing integral.
//!
//! Matrices are `n = 1` only. `h` is the tridiagonal matrix with diagonal
//! `2/Δx² − τ²x_j² + V(x_j)` and off-diagonal `−1/Δx²`; the Dirichlet ends sit
//! one node outside the grid on each side.

use std::fmt;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::format::fmt_f64;
use crate::grid::Grid;
use crate::lens::{free_flow, DilatedState, LensFrame};
use crate::potential::{eval_potential, HamiltonianSpec, PotentialSpec};
use crate::solver::{evolve_dilated, EvolutionPlan, BOUNDARY_MASS_LIMIT};
use crate::stats::{linear_fit, trapezoid};
use crate::wave::WaveFunction;

/// Largest supported matrix size.
pub const MAX_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian {
    grid: Grid,
    tau: f64,
    potential: PotentialSpec,
    potential_values: Vec<f64>,
    diagonal: Vec<f64>,
    off_diagonal: f64,
}

/// Assembles `h` for `H = −Δ − τ²x² + V` on a one-dimensional grid.
pub fn assemble(grid: &Grid, spec: &HamiltonianSpec) -> Result<DiscreteHamiltonian> {
    DiscreteHamiltonian::new(grid, spec.tau(), spec.potential().clone())
}

impl DiscreteHamiltonian {
    /// Like [`assemble`] but accepts any finite `τ`, including `0`.
    pub fn new(grid: &Grid, tau: f64, potential: PotentialSpec) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::UnsupportedDimension(grid.dim()));
        }
        if grid.points_per_axis() > MAX_POINTS {
            return Err(invalid(format!(
                "matrix size {} exceeds the supported maximum {MAX_POINTS}",
                grid.points_per_axis()
            )));
        }
        if !tau.is_finite() {
            return Err(invalid("tau must be finite"));
        }
        let v = eval_potential(&potential, grid)?;
        let dx = grid.spacing();
        let diagonal = grid
            .axis_nodes()
            .iter()
            .zip(&v)
            .map(|(x, v)| 2.0 / (dx * dx) - tau * tau * x * x + v)
            .collect();
        Ok(DiscreteHamiltonian {
            grid: grid.clone(),
            tau,
            potential,
            potential_values: v,
            diagonal,
            off_diagonal: -1.0 / (dx * dx),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential_values
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off_diagonal
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// The same operator with `V` removed.
    pub fn without_potential(&self) -> DiscreteHamiltonian {
        DiscreteHamiltonian::new(&self.grid, self.tau, PotentialSpec::Zero).expect("already validated")
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i]
            } else if i.abs_diff(j) == 1 {
                self.off_diagonal
            } else {
                0.0
            }
        })
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let e2 = self.off_diagonal * self.off_diagonal;
        let mut count = 0;
        let mut q = 1.0;
        for (j, d) in self.diagonal.iter().enumerate() {
            q = if j == 0 { d - x } else { d - x - e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off_diagonal.abs();
        let lo = self.diagonal.iter().fold(f64::INFINITY, |m, d| m.min(d - r));
        let hi = self.diagonal.iter().fold(f64::NEG_INFINITY, |m, d| m.max(d + r));
        (lo, hi)
    }

    /// The `k`-th eigenvalue (from 0, ascending) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(invalid(format!("eigenvalue index {k} out of range")));
        }
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Median gap between consecutive eigenvalues among the `window` closest
    /// indices on each side of `lambda`.
    pub fn local_spacing(&self, lambda: f64, window: usize) -> Result<f64> {
        let k = self.count_below(lambda);
        let lo = k.saturating_sub(window.max(1));
        let hi = (k + window.max(1)).min(self.len());
        if hi < lo + 2 {
            return Err(invalid(format!("too few eigenvalues near {lambda}")));
        }
        let eig = (lo..hi).map(|i| self.eigenvalue(i)).collect::<Result<Vec<_>>>()?;
        let mut gaps: Vec<f64> = eig.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.total_cmp(b));
        let m = gaps.len();
        Ok(if m % 2 == 1 {
            gaps[m / 2]
        } else {
            0.5 * (gaps[m / 2 - 1] + gaps[m / 2])
        })
    }

    /// `(h − z)^{-1}` as a reusable tridiagonal factorization.
    fn shifted(&self, z: Complex64) -> ShiftedFactor {
        let e = self.off_diagonal;
        let mut pivots = Vec::with_capacity(self.len());
        for (j, d) in self.diagonal.iter().enumerate() {
            let p = if j == 0 { d - z } else { d - z - e * e / pivots[j - 1] };
            pivots.push(p);
        }
        ShiftedFactor { pivots, off: e }
    }
}

/// `LDLᵀ` pivots of the complex symmetric matrix `h − z`. With `Im z ≠ 0` every
/// pivot has `|Im p| ≥ |Im z|`, so no pivoting is needed.
struct ShiftedFactor {
    pivots: Vec<Complex64>,
    off: f64,
}

impl ShiftedFactor {
    fn solve(&self, b: &mut [Complex64], conjugate: bool) {
        let n = b.len();
        let p = |j: usize| {
            if conjugate {
                self.pivots[j].conj()
            } else {
                self.pivots[j]
            }
        };
        for j in 1..n {
            let prev = b[j - 1];
            b[j] -= prev * self.off / p(j - 1);
        }
        b[n - 1] /= p(n - 1);
        for j in (0..n - 1).rev() {
            let next = b[j + 1];
            b[j] = (b[j] - next * self.off) / p(j);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightKind {
    /// `⟨x⟩^{-s}` with `s` the query's weight exponent.
    Bracket,
    /// `|V|^{1/2}`; the weight exponent is ignored.
    Potential,
}

/// Addresses `‖W (h − λ ∓ iν)^{-1} W‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventQuery {
    pub lambda: f64,
    pub nu: f64,
    pub sign: Sign,
    pub weight_exponent: f64,
    pub weight_kind: WeightKind,
}

impl ResolventQuery {
    pub fn new(lambda: f64, nu: f64, sign: Sign, weight_exponent: f64, weight_kind: WeightKind) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(invalid("lambda must be finite"));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(invalid(format!("nu must be positive, got {nu}")));
        }
        if !(weight_exponent.is_finite() && weight_exponent >= 0.0) {
            return Err(invalid(format!(
                "weight exponent must be nonnegative, got {weight_exponent}"
            )));
        }
        Ok(ResolventQuery {
            lambda,
            nu,
            sign,
            weight_exponent,
            weight_kind,
        })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.lambda, self.sign.value() * self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// `ν₀`: queries need `0 < ν ≤ ν₀`.
    pub nu_max: f64,
    /// Smallest accepted ratio `ν / (median local level spacing)`.
    pub min_certificate: f64,
    /// Eigenvalues taken on each side of `λ` for the spacing median.
    pub spacing_window: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            nu_max: 1.0,
            min_certificate: 0.2,
            spacing_window: 8,
            tolerance: 1e-6,
            max_iterations: 500,
            seed: 0x5eed,
        }
    }
}

/// Norm estimate plus the `ν`-to-spacing certificate of one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventNorm {
    pub norm: f64,
    pub certificate: f64,
    pub iterations: usize,
}

fn weights(h: &DiscreteHamiltonian, q: &ResolventQuery) -> Vec<f64> {
    match q.weight_kind {
        WeightKind::Bracket => h
            .grid
            .axis_nodes()
            .iter()
            .map(|x| (1.0 + x * x).powf(-0.5 * q.weight_exponent))
            .collect(),
        WeightKind::Potential => h.potential_values.iter().map(|v| v.abs().sqrt()).collect(),
    }
}

pub fn weighted_resolvent_norm(h: &DiscreteHamiltonian, query: &ResolventQuery) -> Result<f64> {
    weighted_resolvent_norm_with(h, query, &ProbeConfig::default()).map(|r| r.norm)
}

/// Power iteration on `B*B` with `B = W(h − z)^{-1}W` and `B* = W(h − z̄)^{-1}W`.
pub fn weighted_resolvent_norm_with(
    h: &DiscreteHamiltonian,
    query: &ResolventQuery,
    config: &ProbeConfig,
) -> Result<ResolventNorm> {
    if query.nu > config.nu_max {
        return Err(invalid(format!("nu = {} exceeds nu_0 = {}", query.nu, config.nu_max)));
    }
    let spacing = h.local_spacing(query.lambda, config.spacing_window)?;
    let certificate = query.nu / spacing;
    if certificate < config.min_certificate {
        return Err(Error::Resolution {
            lambda: query.lambda,
            ratio: certificate,
            required: config.min_certificate,
        });
    }
    let w = weights(h, query);
    let factor = h.shifted(query.z());
    let apply = |x: &[Complex64], conjugate: bool| -> Vec<Complex64> {
        let mut y: Vec<Complex64> = x.iter().zip(&w).map(|(x, w)| x * w).collect();
        factor.solve(&mut y, conjugate);
        y.iter_mut().zip(&w).for_each(|(y, w)| *y *= w);
        y
    };
    let norm_of = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x: Vec<Complex64> = (0..h.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let n0 = norm_of(&x);
    x.iter_mut().for_each(|v| *v /= n0);

    let mut estimate = 0.0;
    for it in 1..=config.max_iterations {
        let bx = apply(&x, false);
        let next = norm_of(&bx);
        if !next.is_finite() {
            return Err(Error::Numeric(format!(
                "resolvent solve broke down at lambda = {}",
                query.lambda
            )));
        }
        if next == 0.0 {
            return Ok(ResolventNorm {
                norm: 0.0,
                certificate,
                iterations: it,
            });
        }
        if it > 1 && (next - estimate).abs() <= config.tolerance * next {
            return Ok(ResolventNorm {
                norm: next,
                certificate,
                iterations: it,
            });
        }
        estimate = next;
        let mut y = apply(&bx, true);
        let ny = norm_of(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
    }
    Err(Error::Numeric(format!(
        "power iteration did not reach tolerance {} in {} iterations at lambda = {}",
        config.tolerance, config.max_iterations, query.lambda
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    queries: Vec<ResolventQuery>,
    norms: Vec<f64>,
    certificates: Vec<f64>,
}

impl ScanResult {
    pub fn new(queries: Vec<ResolventQuery>, norms: Vec<f64>, certificates: Vec<f64>) -> Result<Self> {
        if queries.len() != norms.len() || norms.len() != certificates.len() {
            return Err(invalid("scan columns differ in length"));
        }
        if norms.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(Error::Numeric("scan produced a non-finite norm".into()));
        }
        Ok(ScanResult {
            queries,
            norms,
            certificates,
        })
    }

    pub fn queries(&self) -> &[ResolventQuery] {
        &self.queries
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn certificates(&self) -> &[f64] {
        &self.certificates
    }

    pub fn sup(&self) -> f64 {
        self.norms.iter().cloned().fold(0.0, f64::max)
    }

    /// CSV with header `lambda,nu,theta,sign,norm,certificate`; `theta` is the
    /// weight exponent actually applied.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "lambda,nu,theta,sign,norm,certificate")?;
        for ((q, n), c) in self.queries.iter().zip(&self.norms).zip(&self.certificates) {
            let theta = match q.weight_kind {
                WeightKind::Bracket => q.weight_exponent,
                WeightKind::Potential => 0.5,
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(q.lambda),
                fmt_f64(q.nu),
                fmt_f64(theta),
                q.sign,
                fmt_f64(*n),
                fmt_f64(*c)
            )?;
        }
        Ok(())
    }
}

/// Evaluates the queries in order.
pub fn run_queries(h: &DiscreteHamiltonian, queries: Vec<ResolventQuery>, config: &ProbeConfig) -> Result<ScanResult> {
    let mut norms = Vec::with_capacity(queries.len());
    let mut certs = Vec::with_capacity(queries.len());
    for q in &queries {
        let r = weighted_resolvent_norm_with(h, q, config)?;
        norms.push(r.norm);
        certs.push(r.certificate);
    }
    ScanResult::new(queries, norms, certs)
}

/// `|V|^{1/2}`-weighted queries at every `λ`, both signs.
pub fn lap_queries(lambdas: &[f64], nu: f64) -> Result<Vec<ResolventQuery>> {
    let mut out = Vec::with_capacity(2 * lambdas.len());
    for &l in lambdas {
        for sign in [Sign::Plus, Sign::Minus] {
            out.push(ResolventQuery::new(l, nu, sign, 0.5, WeightKind::Potential)?);
        }
    }
    Ok(out)
}

/// Limiting-absorption scan of `‖|V|^{1/2}(h − λ ∓ iν)^{-1}|V|^{1/2}‖`.
pub fn lap_scan(h: &DiscreteHamiltonian, lambdas: &[f64], nu: f64, config: &ProbeConfig) -> Result<ScanResult> {
    if h.potential.is_zero() {
        return Err(invalid("the |V|^(1/2) weight vanishes for V = 0"));
    }
    run_queries(h, lap_queries(lambdas, nu)?, config)
}

/// `⟨x⟩^{-(θ+ρ)}`-weighted queries, `+` sign, ordered by `θ` then `λ`.
pub fn high_energy_queries(thetas: &[f64], lambdas: &[f64], nu: f64, rho: f64) -> Result<Vec<ResolventQuery>> {
    if lambdas.is_empty() || lambdas[0] <= 0.0 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("lambdas must be positive and strictly increasing"));
    }
    if thetas.iter().any(|t| !(*t >= 0.0 && *t <= 2.0)) {
        return Err(invalid("thetas must lie in [0, 2]"));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be nonnegative, got {rho}")));
    }
    let mut out = Vec::with_capacity(thetas.len() * lambdas.len());
    for &t in thetas {
        for &l in lambdas {
            out.push(ResolventQuery::new(l, nu, Sign::Plus, t + rho, WeightKind::Bracket)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighEnergyScan {
    pub result: ScanResult,
    pub thetas: Vec<f64>,
    pub rho: f64,
    /// Log-log regression slope of the norm against `λ`, one per `θ`.
    pub slopes: Vec<f64>,
}

impl HighEnergyScan {
    pub fn from_result(result: ScanResult, thetas: &[f64], rho: f64) -> Result<Self> {
        let per = result.queries.len() / thetas.len().max(1);
        if per * thetas.len() != result.queries.len() || per < 2 {
            return Err(invalid("scan does not have the theta-major layout"));
        }
        let slopes = (0..thetas.len())
            .map(|i| {
                let qs = &result.queries[i * per..(i + 1) * per];
                let ns = &result.norms[i * per..(i + 1) * per];
                let xs: Vec<f64> = qs.iter().map(|q| q.lambda.ln()).collect();
                let ys: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
                linear_fit(&xs, &ys)
                    .map(|f| f.slope)
                    .ok_or_else(|| Error::Numeric("degenerate high-energy fit".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HighEnergyScan {
            result,
            thetas: thetas.to_vec(),
            rho,
            slopes,
        })
    }

    /// `max/min` of `norm(λ)·λ^{power}` for the `i`-th `θ`.
    pub fn product_spread(&self, i: usize, power: f64) -> f64 {
        let per = self.result.queries.len() / self.thetas.len();
        let prods: Vec<f64> = (i * per..(i + 1) * per)
            .map(|k| self.result.norms[k] * self.result.queries[k].lambda.powf(power))
            .collect();
        let max = prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = prods.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Free-resolvent (`V` removed) scan with weight `⟨x⟩^{-(θ+ρ)}`.
pub fn high_energy_scan(
    h: &DiscreteHamiltonian,
    thetas: &[f64],
    lambdas: &[f64],
    nu: f64,
    rho: f64,
    config: &ProbeConfig,
) -> Result<HighEnergyScan> {
    let free = h.without_potential();
    let result = run_queries(&free, high_energy_queries(thetas, lambdas, nu, rho)?, config)?;
    HighEnergyScan::from_result(result, thetas, rho)
}

/// Largest accepted condition number of `1 + K`.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirmanSchwingerReport {
    /// `‖D − (−K(1+K)^{-1}K)‖ / ‖D‖` with `D = ρ₁R ρ₂ − ρ₁R₀ρ₂`.
    pub discrepancy: f64,
    /// The same gap with the opposite sign in front of `K(1+K)^{-1}K`.
    pub opposite_sign_discrepancy: f64,
    /// Condition number of `1 + K`.
    pub condition: f64,
}

/// Dense check of `ρ₁(H − z)^{-1}ρ₂ − ρ₁(H₀ − z)^{-1}ρ₂ = −K(1 + K)^{-1}K`,
/// `K = ρ₁(H₀ − z)^{-1}ρ₂`, `ρ₁ = |V|^{1/2} sign V`, `ρ₂ = |V|^{1/2}`.
pub fn birman_schwinger_check(
    grid: &Grid,
    spec: &HamiltonianSpec,
    query: &ResolventQuery,
) -> Result<BirmanSchwingerReport> {
    let h = assemble(grid, spec)?;
    let n = h.len();
    let v = h.potential_values();
    if v.iter().all(|v| *v == 0.0) {
        return Ok(BirmanSchwingerReport {
            discrepancy: 0.0,
            opposite_sign_discrepancy: 0.0,
            condition: 1.0,
        });
    }
    let rho2: Vec<f64> = v.iter().map(|v| v.abs().sqrt()).collect();
    let rho1: Vec<f64> = v
        .iter()
        .zip(&rho2)
        .map(|(v, r)| {
            if *v > 0.0 {
                *r
            } else if *v < 0.0 {
                -r
            } else {
                0.0
            }
        })
        .collect();
    let z = query.z();
    let shifted = |m: &DiscreteHamiltonian| -> DMatrix<Complex64> {
        let d = m.dense();
        DMatrix::from_fn(n, n, |i, j| {
            let base = Complex64::new(d[(i, j)], 0.0);
            if i == j {
                base - z
            } else {
                base
            }
        })
    };
    let invert = |m: DMatrix<Complex64>| -> Result<DMatrix<Complex64>> {
        m.try_inverse()
            .ok_or_else(|| Error::Numeric("singular shifted matrix".into()))
    };
    let r = invert(shifted(&h))?;
    let r0 = invert(shifted(&h.without_potential()))?;
    let sandwich = |m: &DMatrix<Complex64>| DMatrix::from_fn(n, n, |i, j| m[(i, j)] * rho1[i] * rho2[j]);
    let k = sandwich(&r0);
    let lhs = sandwich(&r) - &k;

    let one_plus_k = DMatrix::<Complex64>::identity(n, n) + &k;
    let sv = one_plus_k.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::Conditioning { condition });
    }
    let inv = invert(one_plus_k)?;
    let quad = &k * inv * &k;
    let norm2 = |m: &DMatrix<Complex64>| m.clone().singular_values().max();
    let scale = norm2(&lhs);
    Ok(BirmanSchwingerReport {
        discrepancy: norm2(&(&lhs + &quad)) / scale,
        opposite_sign_discrepancy: norm2(&(&lhs - &quad)) / scale,
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingReport {
    /// Half-width `T` of the window `[−T, T]`.
    pub window: f64,
    /// `∫_{−T}^{T} ‖|V|^{1/2} e^{-itH} f‖² dt` by the trapezoid rule.
    pub value: f64,
    /// `(value − value on [−T/2, T/2]) / value`.
    pub saturation: f64,
    pub norm_f_sq: f64,
    /// `V` acts in the evolution for `|t| ≤ potential_window`; beyond it the flow is free.
    pub potential_window: f64,
    /// Upper bound on the change of `value` caused by the free continuation.
    pub continuation_bound: f64,
}

impl SmoothingReport {
    /// `value / (‖f‖² γ₁)`.
    pub fn ratio(&self, gamma1: f64) -> f64 {
        self.value / (self.norm_f_sq * gamma1)
    }
}

/// Kato smoothing integral over `[−T, T]`, `T = |dt|·steps`, computed in the lens
/// frame forward and backward from `f`.
///
/// The lens-frame profile resolves `V(Cy)` only while `Δy·cosh(2τt) ≤ 1`. Past
/// that time `t_V` the profile is continued by the exact free flow. By Duhamel,
/// the continued state differs from the true one by at most
/// `ε(t) = ∫_{t_V}^{t} ‖V u(s)‖ ds`, so each integrand value moves by at most
/// `2 (sup|V|)^{1/2} ε ‖|V|^{1/2}u‖ + sup|V| ε²`; the time integral of this is
/// reported as `continuation_bound`.
pub fn smoothing_integral(f: &WaveFunction, spec: &HamiltonianSpec, plan: &EvolutionPlan) -> Result<SmoothingReport> {
    if f.grid().dim() != 1 {
        return Err(Error::UnsupportedDimension(f.grid().dim()));
    }
    if !spec.potential().is_verified_class() {
        return Err(invalid(
            "the smoothing integral needs a potential of the verified decay class",
        ));
    }
    let norm_f_sq = f.norm_sq();
    let dt = plan.dt().abs();
    let steps = plan.steps();
    let every = plan.record_every();
    let window = dt * steps as f64;
    if spec.potential().is_zero() {
        return Ok(SmoothingReport {
            window,
            value: 0.0,
            saturation: 0.0,
            norm_f_sq,
            potential_window: window,
            continuation_bound: 0.0,
        });
    }
    let tau = spec.tau();
    let dy = f.grid().spacing();
    if dy > 1.0 {
        return Err(invalid(format!("profile spacing {dy} cannot resolve V")));
    }
    let resolved_steps = if dy * LensFrame::new(tau, window)?.scale() <= 1.0 {
        steps
    } else {
        let t_v = (1.0 / dy).acosh() / (2.0 * tau.abs());
        let k = (t_v / dt).floor() as usize;
        k - k % every
    };
    if resolved_steps == 0 {
        return Err(invalid(
            "record_every is too coarse for the resolved part of the window",
        ));
    }

    let pot = spec.potential();
    let sup_v = pot.sup_abs();
    let density = |r2: f64| pot.value_at_radius_sq(r2).unwrap_or(0.0).abs();
    let density_sq = |r2: f64| density(r2).powi(2);

    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut bound = 0.0;
    for direction in [-1.0, 1.0] {
        let states = branch(f, spec, direction * dt, steps, resolved_steps, every)?;
        let mut eps = 0.0;
        let mut prev: Option<(f64, f64, f64)> = None;
        for (k, (t, state)) in states.iter().enumerate() {
            let mass = state.weighted_mass(density);
            if direction > 0.0 || k > 0 {
                points.push((*t, mass));
            }
            if (t.abs() / dt).round() as usize <= resolved_steps {
                prev = Some((t.abs(), state.weighted_mass(density_sq).sqrt(), 0.0));
                continue;
            }
            let (t0, g0, d0) = prev.expect("continuation starts after a resolved sample");
            let g1 = state.weighted_mass(density_sq).sqrt();
            eps += 0.5 * (t.abs() - t0) * (g0 + g1);
            let d1 = 2.0 * sup_v.sqrt() * eps * mass.sqrt() + sup_v * eps * eps;
            bound += 0.5 * (t.abs() - t0) * (d0 + d1);
            prev = Some((t.abs(), g1, d1));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (ts, ys): (Vec<f64>, Vec<f64>) = points.iter().cloned().unzip();
    let value = trapezoid(&ts, &ys);
    let (hts, hys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .cloned()
        .filter(|(t, _)| t.abs() <= 0.5 * window * (1.0 + 1e-12))
        .unzip();
    let head = trapezoid(&hts, &hys);
    Ok(SmoothingReport {
        window,
        value,
        saturation: (value - head) / value,
        norm_f_sq,
        potential_window: dt * resolved_steps as f64,
        continuation_bound: bound,
    })
}

/// Lens-frame states at the recording steps of one time direction: with `V` up to
/// `resolved` steps, free afterwards.
fn branch(
    f: &WaveFunction,
    spec: &HamiltonianSpec,
    dt: f64,
    steps: usize,
    resolved: usize,
    every: usize,
) -> Result<Vec<(f64, DilatedState)>> {
    let tau = spec.tau();
    let mut out: Vec<(f64, DilatedState)> = evolve_dilated(f, &EvolutionPlan::new(spec.clone(), dt, resolved, every)?)?
        .into_iter()
        .map(|s| (s.time, s.state))
        .collect();
    if resolved == steps {
        return Ok(out);
    }
    let (t_v, last) = out
        .last()
        .map(|(t, s)| (*t, s.profile().clone()))
        .expect("at least one sample");
    let s_v = LensFrame::new(tau, t_v)?.free_time();
    let full = EvolutionPlan::new(spec.clone(), dt, steps, every)?;
    for k in full.record_steps().into_iter().filter(|k| *k > resolved) {
        let t = dt * k as f64;
        let frame = LensFrame::new(tau, t)?;
        let profile = free_flow(&last, frame.free_time() - s_v);
        let boundary_mass = profile.boundary_mass();
        if boundary_mass > BOUNDARY_MASS_LIMIT {
            return Err(Error::DomainTooSmall {
                time: t,
                boundary_mass,
                limit: BOUNDARY_MASS_LIMIT,
            });
        }
        out.push((t, DilatedState::new(frame, profile)));
    }
    Ok(out)
}
