use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::Grid;

/// Complex amplitudes sampled on a [`Grid`], the state `u(t, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "expected {} samples for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid(format!("non-finite amplitude at node {i}")));
        }
        Ok(WaveFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        WaveFunction::new(grid, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        WaveFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `(Δx^n Σ|u_j|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn scaled(&self, factor: Complex64) -> WaveFunction {
        self.map(|_, v| v * factor)
    }

    /// Pointwise map with access to the node index.
    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> WaveFunction {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        WaveFunction::from_parts_unchecked(self.grid.clone(), values)
    }

    /// Relative l² distance `‖self − other‖ / ‖other‖` on a shared grid.
    pub fn relative_distance(&self, other: &WaveFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(invalid("states live on different grids"));
        }
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let base: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        Ok((diff / base).sqrt())
    }

    /// Fraction of `|u|²` carried by the outer 10% shell of the box.
    pub fn boundary_mass(&self) -> f64 {
        let shell = self.grid.boundary_shell();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 = self
            .values
            .iter()
            .zip(shell)
            .filter(|(_, s)| *s)
            .map(|(v, _)| v.norm_sqr())
            .sum();
        outer / total
    }
}

/// `exp(-a|x - c|²/2 + i p·x)` sampled on `grid` (not normalized).
pub fn make_gaussian(grid: &Grid, center: &[f64], width: f64, momentum: &[f64]) -> Result<WaveFunction> {
    let n = grid.dim();
    if center.len() != n || momentum.len() != n {
        return Err(invalid(format!(
            "center and momentum must have length {n}, got {} and {}",
            center.len(),
            momentum.len()
        )));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(invalid(format!("width must be positive, got {width}")));
    }
    WaveFunction::from_fn(grid.clone(), |x| {
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for k in 0..n {
            r2 += (x[k] - center[k]).powi(2);
            phase += momentum[k] * x[k];
        }
        Complex64::from_polar((-0.5 * width * r2).exp(), phase)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn centered_gaussian_is_one_at_origin() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        let u = make_gaussian(&g, &[0.0], 1.0, &[0.0]).unwrap();
        let mid = u.values()[128];
        assert_eq!(mid, Complex64::new(1.0, 0.0));
        for j in 1..128 {
            assert_eq!(u.values()[128 + j], u.values()[128 - j]);
            assert!(u.values()[128 + j].im == 0.0 && u.values()[128 + j].re > 0.0);
        }
    }

    #[test]
    fn gaussian_norm_matches_integral() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        let u = make_gaussian(&g, &[0.0], 1.0, &[0.0]).unwrap();
        let exact = PI.powf(0.25);
        assert!((u.l2_norm() - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn wrong_momentum_length_is_rejected() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        assert!(make_gaussian(&g, &[0.0], 1.0, &[0.0, 1.0]).is_err());
        assert!(make_gaussian(&g, &[0.0], -1.0, &[0.0]).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(WaveFunction::new(g, v).is_err());
    }
}
