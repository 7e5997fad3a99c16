use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Uniform periodic grid covering `[-L, L)^n`, `n ∈ {1, 2}`, with `N` nodes per axis.
///
/// Node `j` sits at `x_j = -L + j Δx` with `Δx = 2L/N`. Multi-dimensional data is
/// stored row-major with axis 0 varying slowest. The frequency lattice follows the
/// usual DFT ordering `ξ_k = 2πk/(NΔx)` for `k < N/2` and `2π(k-N)/(NΔx)` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(format!("half-width must be positive, got {half_width}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(invalid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        Ok(Grid {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// Total number of nodes, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// `Δx^n`, the rectangle-rule weight of a node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `π/Δx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points).map(|j| -self.half_width + j as f64 * dx).collect()
    }

    pub fn axis_frequencies(&self) -> Vec<f64> {
        let n = self.points;
        let scale = 2.0 * PI / (n as f64 * self.spacing());
        (0..n)
            .map(|k| {
                let k = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                k * scale
            })
            .collect()
    }

    /// Coordinates of the node with row-major index `flat`; unused axes are zero.
    pub fn coords(&self, flat: usize) -> [f64; 2] {
        let dx = self.spacing();
        let at = |j: usize| -self.half_width + j as f64 * dx;
        match self.dim {
            1 => [at(flat), 0.0],
            _ => [at(flat / self.points), at(flat % self.points)],
        }
    }

    /// `|x|²` at every node.
    pub fn radius_squared(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let c = self.coords(i);
                c[0] * c[0] + c[1] * c[1]
            })
            .collect()
    }

    /// `|ξ|²` at every node of the frequency lattice, same layout as the data.
    pub fn frequency_squared(&self) -> Vec<f64> {
        let xi = self.axis_frequencies();
        match self.dim {
            1 => xi.iter().map(|k| k * k).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.len());
                for a in &xi {
                    for b in &xi {
                        out.push(a * a + b * b);
                    }
                }
                out
            }
        }
    }

    /// Mask of nodes in the outer 10% shell: `max_i |x_i| >= 0.9 L`.
    pub fn boundary_shell(&self) -> Vec<bool> {
        let edge = 0.9 * self.half_width;
        (0..self.len())
            .map(|i| {
                let c = self.coords(i);
                c[0].abs().max(c[1].abs()) >= edge
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(1, 1.0, 4).is_err());
        assert!(Grid::new(1, 1.0, 12).is_err());
        assert!(Grid::new(1, 0.0, 16).is_err());
        assert!(matches!(Grid::new(3, 1.0, 16), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn spacing_times_points_is_exact() {
        let g = Grid::new(1, 3.7, 256).unwrap();
        assert_eq!(g.spacing() * 256.0, 2.0 * 3.7);
        let nodes = g.axis_nodes();
        assert_eq!(nodes[0], -3.7);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn frequencies_span_the_nyquist_band() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let xi = g.axis_frequencies();
        assert_eq!(xi[0], 0.0);
        let min = xi.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min + g.nyquist()).abs() < 1e-12);
        assert!(max < g.nyquist());
    }

    #[test]
    fn two_dimensional_layout_is_row_major() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        assert_eq!(g.len(), 64);
        let c = g.coords(8 + 3);
        assert_eq!(c[0], -1.0 + g.spacing());
        assert_eq!(c[1], -1.0 + 3.0 * g.spacing());
    }
}
