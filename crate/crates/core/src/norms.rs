//! Spatial `L^r` norms and their `L^q` accumulation in time.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::exponent::Exponent;
use crate::format::fmt_f64;
use crate::stats::trapezoid;
use crate::wave::WaveFunction;

/// Rectangle-rule `‖u‖_{L^r}`: `(Δx^n Σ|u_j|^r)^{1/r}`, or `max|u_j|` for `r = ∞`.
pub fn lr_norm(u: &WaveFunction, r: Exponent) -> Result<f64> {
    lr_norm_of(u.values(), u.grid().cell_volume(), r)
}

pub(crate) fn lr_norm_of(values: &[Complex64], cell_volume: f64, r: Exponent) -> Result<f64> {
    r.validate()?;
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    match r {
        Exponent::Infinite => Ok(max),
        Exponent::Finite(p) => {
            if max == 0.0 {
                return Ok(0.0);
            }
            // scale by the max so large p neither overflows nor underflows
            let sum: f64 = values.iter().map(|v| (v.norm() / max).powf(p)).sum();
            Ok(max * (cell_volume * sum).powf(1.0 / p))
        }
    }
}

/// Time samples of a spatial norm `t ↦ ‖u(t)‖_{L^r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    times: Vec<f64>,
    norms: Vec<f64>,
    r: Exponent,
}

/// A mixed-norm value together with its window-saturation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedNorm {
    pub value: f64,
    /// `(value − value_half)/value`, where `value_half` uses only the first half of the
    /// time window. `None` when the half window holds too few samples.
    pub increment: Option<f64>,
}

impl NormSeries {
    pub fn new(times: Vec<f64>, norms: Vec<f64>, r: Exponent) -> Result<Self> {
        r.validate()?;
        if times.len() != norms.len() {
            return Err(invalid("times and norms differ in length"));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("sample times must be finite and strictly increasing"));
        }
        if norms.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(invalid("norms must be finite and nonnegative"));
        }
        Ok(NormSeries { times, norms, r })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn r(&self) -> Exponent {
        self.r
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `‖·‖_{L^q}` in time of the recorded norms: trapezoid rule for finite `q`,
    /// sample maximum for `q = ∞`.
    pub fn mixed_norm(&self, q: Exponent) -> Result<MixedNorm> {
        q.validate()?;
        if self.is_empty() {
            return Err(invalid("empty norm series"));
        }
        if !q.is_infinite() && self.len() < 2 {
            return Err(invalid("a finite time exponent needs at least two samples"));
        }
        let value = window_norm(&self.times, &self.norms, q);
        let t0 = self.times[0];
        let mid = t0 + 0.5 * (self.times[self.len() - 1] - t0);
        let half = self.times.iter().take_while(|t| **t <= mid * (1.0 + 1e-12)).count();
        let enough = if q.is_infinite() { half >= 1 } else { half >= 2 };
        let increment = (enough && half < self.len()).then(|| {
            let head = window_norm(&self.times[..half], &self.norms[..half], q);
            if value == 0.0 {
                0.0
            } else {
                (value - head) / value
            }
        });
        Ok(MixedNorm { value, increment })
    }

    /// CSV with header `t,norm,r`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,norm,r")?;
        let r = match self.r {
            Exponent::Infinite => "inf".to_string(),
            Exponent::Finite(p) => fmt_f64(p),
        };
        for (t, n) in self.times.iter().zip(&self.norms) {
            writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*n), r)?;
        }
        Ok(())
    }
}

fn window_norm(times: &[f64], norms: &[f64], q: Exponent) -> f64 {
    match q {
        Exponent::Infinite => norms.iter().cloned().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let powered: Vec<f64> = norms.iter().map(|n| n.powf(p)).collect();
            trapezoid(times, &powered).powf(1.0 / p)
        }
    }
}

/// `‖u‖_{L^q_t L^r_x}` over the supplied samples.
pub fn strichartz_norm(series: &[(f64, WaveFunction)], q: Exponent, r: Exponent) -> Result<MixedNorm> {
    norm_series(series, r)?.mixed_norm(q)
}

/// Spatial `L^r` norms of a time series of states.
pub fn norm_series(series: &[(f64, WaveFunction)], r: Exponent) -> Result<NormSeries> {
    let times = series.iter().map(|(t, _)| *t).collect();
    let norms = series.iter().map(|(_, u)| lr_norm(u, r)).collect::<Result<Vec<_>>>()?;
    NormSeries::new(times, norms, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::wave::make_gaussian;

    fn constant(grid: &Grid) -> WaveFunction {
        WaveFunction::new(grid.clone(), vec![Complex64::new(1.0, 0.0); grid.len()]).unwrap()
    }

    #[test]
    fn constant_l1_is_box_length() {
        let g = Grid::new(1, 3.0, 64).unwrap();
        let n = lr_norm(&constant(&g), Exponent::Finite(1.0)).unwrap();
        assert!((n - 6.0).abs() < 1e-13);
    }

    #[test]
    fn sup_norm_ignores_spacing() {
        for l in [1.0, 10.0] {
            let g = Grid::new(1, l, 16).unwrap();
            let mut v = vec![Complex64::new(0.5, 0.0); 16];
            v[7] = Complex64::new(0.0, -3.0);
            let u = WaveFunction::new(g, v).unwrap();
            assert_eq!(lr_norm(&u, Exponent::Infinite).unwrap(), 3.0);
        }
    }

    #[test]
    fn exponent_below_one_is_rejected() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        assert!(lr_norm(&constant(&g), Exponent::Finite(0.5)).is_err());
    }

    #[test]
    fn gaussian_l2_matches_exact_integral() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        let u = make_gaussian(&g, &[0.0], 1.0, &[0.0]).unwrap();
        let exact = std::f64::consts::PI.powf(0.25);
        let n = lr_norm(&u, Exponent::Finite(2.0)).unwrap();
        assert!((n - exact).abs() / exact < 1e-8);
    }

    #[test]
    fn single_sample_with_finite_q_is_an_error() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let series = vec![(0.0, constant(&g))];
        assert!(strichartz_norm(&series, Exponent::Finite(2.0), Exponent::Infinite).is_err());
        assert!(strichartz_norm(&series, Exponent::Infinite, Exponent::Finite(2.0)).is_ok());
    }

    #[test]
    fn series_rejects_unordered_times() {
        assert!(NormSeries::new(vec![0.0, 0.0], vec![1.0, 1.0], Exponent::Infinite).is_err());
        assert!(NormSeries::new(vec![0.0, 1.0], vec![1.0, -1.0], Exponent::Infinite).is_err());
    }

    #[test]
    fn increment_compares_against_first_half() {
        let times: Vec<f64> = (0..=4).map(f64::from).collect();
        let s = NormSeries::new(times, vec![1.0, 1.0, 1.0, 0.0, 0.0], Exponent::Finite(2.0)).unwrap();
        let m = s.mixed_norm(Exponent::Finite(1.0)).unwrap();
        // full: 2.5, first half [0,2]: 2
        assert!((m.value - 2.5).abs() < 1e-14);
        assert!((m.increment.unwrap() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn csv_has_expected_header() {
        let s = NormSeries::new(vec![0.0, 0.5], vec![1.0, 2.0], Exponent::Infinite).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,norm,r"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0,inf"));
    }
}
