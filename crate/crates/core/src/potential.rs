use crate::error::{invalid, Result};
use crate::grid::Grid;

/// The perturbation `V` of `H = H₀ + V`.
///
/// `PowerDecay` is `c⟨x⟩^{-δ}` with `⟨x⟩ = (1 + |x|²)^{1/2}`; `Tabulated` holds
/// node values for one specific grid and carries no derivative bounds, so it is
/// reported as outside the verified decay class.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    PowerDecay { amplitude: f64, decay: f64 },
    Tabulated { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn power_decay(amplitude: f64, decay: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(invalid(format!("amplitude must be finite, got {amplitude}")));
        }
        if !(decay.is_finite() && decay > 0.0) {
            return Err(invalid(format!("decay exponent must be positive, got {decay}")));
        }
        Ok(PotentialSpec::PowerDecay { amplitude, decay })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated potential contains non-finite values"));
        }
        Ok(PotentialSpec::Tabulated { values })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::PowerDecay { amplitude, .. } => *amplitude == 0.0,
            PotentialSpec::Tabulated { values } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// Whether the decay-class derivative bounds hold by construction.
    pub fn is_verified_class(&self) -> bool {
        !matches!(self, PotentialSpec::Tabulated { .. })
    }

    /// `V` at a point with `|x|² = r2`, when the potential has a closed form.
    pub fn value_at_radius_sq(&self, r2: f64) -> Option<f64> {
        match *self {
            PotentialSpec::Zero => Some(0.0),
            PotentialSpec::PowerDecay { amplitude, decay } => Some(amplitude * (1.0 + r2).powf(-0.5 * decay)),
            PotentialSpec::Tabulated { .. } => None,
        }
    }

    /// Upper bound for `sup |V|`.
    pub fn sup_abs(&self) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::PowerDecay { amplitude, .. } => amplitude.abs(),
            PotentialSpec::Tabulated { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Samples `V` on the grid nodes.
pub fn eval_potential(spec: &PotentialSpec, grid: &Grid) -> Result<Vec<f64>> {
    match spec {
        PotentialSpec::Tabulated { values } => {
            if values.len() != grid.len() {
                return Err(invalid(format!(
                    "tabulated potential has {} values, grid has {} nodes",
                    values.len(),
                    grid.len()
                )));
            }
            Ok(values.clone())
        }
        other => Ok(grid
            .radius_squared()
            .into_iter()
            .map(|r2| other.value_at_radius_sq(r2).unwrap_or(0.0))
            .collect()),
    }
}

/// `H = −Δ − τ²x² + V`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    tau: f64,
    potential: PotentialSpec,
}

impl HamiltonianSpec {
    pub fn new(tau: f64, potential: PotentialSpec) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(invalid(format!("tau must be finite and nonzero, got {tau}")));
        }
        Ok(HamiltonianSpec { tau, potential })
    }

    pub fn free(tau: f64) -> Result<Self> {
        HamiltonianSpec::new(tau, PotentialSpec::Zero)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn without_potential(&self) -> HamiltonianSpec {
        HamiltonianSpec {
            tau: self.tau,
            potential: PotentialSpec::Zero,
        }
    }

    pub(crate) fn require_free(&self) -> Result<()> {
        if self.potential.is_zero() {
            Ok(())
        } else {
            Err(invalid("this operation needs the free repulsive Hamiltonian (V = 0)"))
        }
    }
}
