//! Exact classification of Strichartz exponent pairs `(q, r)`.
//!
//! Repulsive-admissible: `q ≥ 2`, `r ≥ 2`, `1/q + n/(2r) ≥ n/4`.
//! κ-admissible (`κ ≥ n/2`): `q ≥ 2`, `r ≥ 2`, `1/q + κ/r = κ/2` and
//! `r ≤ 2κq/(κq − 2)` when `κq > 2`.
//!
//! All comparisons are done on reciprocals in exact rational arithmetic, with
//! `1/∞ = 0`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::format::fmt_f64;

/// A point of `[1, ∞]` with exact rational finite part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(BigRational),
    Infinite,
}

impl ExtRational {
    pub fn integer(v: i64) -> Self {
        ExtRational::Finite(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        Ok(ExtRational::Finite(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    /// Exact binary value of a finite float; `+∞` maps to [`ExtRational::Infinite`].
    pub fn from_f64(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            return Ok(ExtRational::Infinite);
        }
        BigRational::from_float(v)
            .map(ExtRational::Finite)
            .ok_or_else(|| invalid(format!("{v} is not a valid exponent")))
    }

    /// `1/x`, with `1/∞ = 0`. `None` for zero.
    pub fn reciprocal(&self) -> Option<BigRational> {
        match self {
            ExtRational::Infinite => Some(BigRational::zero()),
            ExtRational::Finite(v) if v.is_zero() => None,
            ExtRational::Finite(v) => Some(v.recip()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Infinite => f64::INFINITY,
            ExtRational::Finite(v) => v.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Infinite => write!(f, "inf"),
            ExtRational::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Accepts `inf`, integers, `a/b` and plain decimals such as `1.5` (read exactly).
impl FromStr for ExtRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || invalid(format!("cannot read {s:?} as an exponent"));
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(ExtRational::Infinite),
            _ => {}
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            return Ok(ExtRational::Finite(BigRational::new(num, den)));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.chars().any(|c| !c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        Ok(ExtRational::Finite(BigRational::new(digits, scale)))
    }
}

/// An exponent pair `(q, r)` with both components in `[1, ∞]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pair {
    q: ExtRational,
    r: ExtRational,
}

impl Pair {
    pub fn new(q: ExtRational, r: ExtRational) -> Result<Self> {
        for (name, v) in [("q", &q), ("r", &r)] {
            if let ExtRational::Finite(x) = v {
                if *x < BigRational::one() {
                    return Err(invalid(format!("{name} must lie in [1, inf], got {x}")));
                }
            }
        }
        Ok(Pair { q, r })
    }

    /// Builds the pair from reciprocals in `[0, 1]`; `0` means infinity.
    pub fn from_reciprocals(inv_q: BigRational, inv_r: BigRational) -> Result<Self> {
        let lift = |v: BigRational| {
            if v.is_zero() {
                Ok(ExtRational::Infinite)
            } else if v.is_negative() {
                Err(invalid(format!("reciprocal {v} is negative")))
            } else {
                Ok(ExtRational::Finite(v.recip()))
            }
        };
        Pair::new(lift(inv_q)?, lift(inv_r)?)
    }

    pub fn parse(q: &str, r: &str) -> Result<Self> {
        Pair::new(q.parse()?, r.parse()?)
    }

    pub fn q(&self) -> &ExtRational {
        &self.q
    }

    pub fn r(&self) -> &ExtRational {
        &self.r
    }

    pub fn inv_q(&self) -> BigRational {
        self.q.reciprocal().expect("q >= 1")
    }

    pub fn inv_r(&self) -> BigRational {
        self.r.reciprocal().expect("r >= 1")
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    QAtLeastTwo,
    RAtLeastTwo,
    /// `1/q + n/(2r) ≥ n/4`.
    SumInequality,
    /// `1/q + κ/r = κ/2`.
    KappaEquality,
    /// `r ≤ 2κq/(κq − 2)`.
    KappaUpperBound,
}

impl Constraint {
    pub fn name(&self) -> &'static str {
        match self {
            Constraint::QAtLeastTwo => "q >= 2",
            Constraint::RAtLeastTwo => "r >= 2",
            Constraint::SumInequality => "1/q + n/(2r) >= n/4",
            Constraint::KappaEquality => "1/q + kappa/r = kappa/2",
            Constraint::KappaUpperBound => "r <= 2 kappa q/(kappa q - 2)",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub admissible: bool,
    /// Equality in `1/q + n/(2r) = n/4`.
    pub on_boundary: bool,
    /// `n ≥ 3` and `(q, r) = (2, 2n/(n − 2))`.
    pub is_endpoint: bool,
    pub violated: Vec<Constraint>,
    /// Set by [`classify_kappa`] when `κq ≤ 2`, where the upper bound on `r` is
    /// undefined and only the equality is checked.
    pub kappa_degenerate: bool,
}

fn int(v: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

/// Range checks shared by both classifiers, plus the boundary and endpoint flags.
fn base_verdict(pair: &Pair, n: u32) -> (Vec<Constraint>, bool, bool) {
    let (iq, ir) = (pair.inv_q(), pair.inv_r());
    let mut violated = Vec::new();
    if iq > half() {
        violated.push(Constraint::QAtLeastTwo);
    }
    if ir > half() {
        violated.push(Constraint::RAtLeastTwo);
    }
    let nn = int(n);
    let lhs = &iq + &nn * &ir / int(2);
    let rhs = &nn / int(4);
    let on_boundary = lhs == rhs;
    let is_endpoint = n >= 3 && iq == half() && ir == (&nn - int(2)) / (int(2) * &nn);
    (violated, on_boundary, is_endpoint)
}

pub fn classify_repulsive(pair: &Pair, n: u32) -> Result<Verdict> {
    if n == 0 {
        return Err(invalid("dimension n must be at least 1"));
    }
    let (mut violated, on_boundary, is_endpoint) = base_verdict(pair, n);
    let nn = int(n);
    if pair.inv_q() + &nn * pair.inv_r() / int(2) < &nn / int(4) {
        violated.push(Constraint::SumInequality);
    }
    Ok(Verdict {
        admissible: violated.is_empty(),
        on_boundary,
        is_endpoint,
        violated,
        kappa_degenerate: false,
    })
}

pub fn classify_kappa(pair: &Pair, kappa: &BigRational, n: u32) -> Result<Verdict> {
    if n == 0 {
        return Err(invalid("dimension n must be at least 1"));
    }
    if *kappa < int(n) / int(2) {
        return Err(invalid(format!("kappa must be at least n/2 = {}/2, got {kappa}", n)));
    }
    let (mut violated, on_boundary, is_endpoint) = base_verdict(pair, n);
    let (iq, ir) = (pair.inv_q(), pair.inv_r());
    if &iq + kappa * &ir != kappa / int(2) {
        violated.push(Constraint::KappaEquality);
    }
    // r ≤ 2κq/(κq − 2) ⇔ 1/r ≥ 1/2 − 1/(κq), meaningful when κq > 2
    let kappa_degenerate = match &pair.q {
        ExtRational::Infinite => false,
        ExtRational::Finite(q) => kappa * q <= int(2),
    };
    if !kappa_degenerate && ir < half() - &iq / kappa {
        violated.push(Constraint::KappaUpperBound);
    }
    let verdict = Verdict {
        admissible: violated.is_empty(),
        on_boundary,
        is_endpoint,
        violated,
        kappa_degenerate,
    };
    if verdict.admissible && !classify_repulsive(pair, n)?.admissible {
        return Err(Error::Internal(format!(
            "pair {pair} is kappa-admissible for kappa = {kappa} but not repulsive-admissible"
        )));
    }
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub inv_q: BigRational,
    pub inv_r: BigRational,
    pub verdict: Verdict,
}

/// Classifies the lattice `(i/(2R), j/(2R))`, `0 ≤ i, j ≤ R`, of the square
/// `[0, 1/2]²`. For `n ≥ 3` the endpoint `(1/2, (n−2)/(2n))` is added when it is
/// not a lattice node. Points are sorted by `(1/q, 1/r)`.
pub fn sample_region(n: u32, resolution: u32) -> Result<Vec<RegionPoint>> {
    if resolution < 2 {
        return Err(invalid(format!("resolution must be at least 2, got {resolution}")));
    }
    let den = BigInt::from(2 * resolution as u64);
    let mut coords: Vec<(BigRational, BigRational)> =
        Vec::with_capacity(((resolution + 1) * (resolution + 1)) as usize);
    for i in 0..=resolution {
        for j in 0..=resolution {
            coords.push((
                BigRational::new(BigInt::from(i), den.clone()),
                BigRational::new(BigInt::from(j), den.clone()),
            ));
        }
    }
    if n >= 3 {
        let endpoint = (half(), (int(n) - int(2)) / (int(2) * int(n)));
        if !coords.contains(&endpoint) {
            coords.push(endpoint);
            coords.sort();
        }
    }
    coords
        .into_iter()
        .map(|(iq, ir)| {
            let pair = Pair::from_reciprocals(iq.clone(), ir.clone())?;
            Ok(RegionPoint {
                inv_q: iq,
                inv_r: ir,
                verdict: classify_repulsive(&pair, n)?,
            })
        })
        .collect()
}

/// CSV with header `inv_q,inv_r,admissible,on_boundary,is_endpoint`.
pub fn write_region_csv<W: Write>(points: &[RegionPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "inv_q,inv_r,admissible,on_boundary,is_endpoint")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(p.inv_q.to_f64().unwrap_or(f64::NAN)),
            fmt_f64(p.inv_r.to_f64().unwrap_or(f64::NAN)),
            p.verdict.admissible,
            p.verdict.on_boundary,
            p.verdict.is_endpoint
        )?;
    }
    Ok(())
}
