//! Lebesgue exponents on the extended half-line `[1, ∞]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// An exponent `r ∈ [1, ∞]` with `∞` carried as its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// Validated finite exponent; rejects `r < 1` and non-finite input.
    pub fn finite(r: f64) -> Result<Self> {
        let e = Exponent::Finite(r);
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Exponent::Finite(r) if !r.is_finite() || r < 1.0 => {
                Err(invalid(format!("exponent must lie in [1, inf], got {r}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `1/r`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> f64 {
        match *self {
            Exponent::Finite(r) => 1.0 / r,
            Exponent::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            _ => {
                let r: f64 = t.parse().map_err(|_| invalid(format!("not an exponent: {s:?}")))?;
                Exponent::finite(r)
            }
        }
    }
}
