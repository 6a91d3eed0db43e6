//! Closed-form prevision bounds for conjunctions and quasi conjunction.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{in_unit_interval, serde_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("{0} is outside [0, 1]")]
    OutOfRange(Rational),
    #[error("at least one prevision is required")]
    Empty,
    #[error("incoherent input: {lower} = {lower_value} exceeds {upper} = {upper_value}")]
    Incoherent {
        lower: &'static str,
        lower_value: Rational,
        upper: &'static str,
        upper_value: Rational,
    },
}

/// `lower <= upper` whenever the inputs are coherent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundPair {
    #[serde(with = "serde_rational")]
    pub lower: Rational,
    #[serde(with = "serde_rational")]
    pub upper: Rational,
}

impl BoundPair {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        BoundPair { lower, upper }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }
}

impl fmt::Display for BoundPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

fn check(xs: &[&Rational]) -> Result<(), BoundsError> {
    match xs.iter().find(|x| !in_unit_interval(x)) {
        Some(x) => Err(BoundsError::OutOfRange((*x).clone())),
        None => Ok(()),
    }
}

fn clamp0(x: Rational) -> Rational {
    if x < Rational::zero() {
        Rational::zero()
    } else {
        x
    }
}

/// `[max{x1 + x2 - 1, 0}, min{x1, x2}]`.
pub fn frechet2(x1: &Rational, x2: &Rational) -> Result<BoundPair, BoundsError> {
    check(&[x1, x2])?;
    Ok(BoundPair::new(
        clamp0(x1 + x2 - Rational::one()),
        x1.min(x2).clone(),
    ))
}

/// `[max{Σ x_i - n + 1, 0}, min x_i]`.
pub fn frechet_n(xs: &[Rational]) -> Result<BoundPair, BoundsError> {
    if xs.is_empty() {
        return Err(BoundsError::Empty);
    }
    check(&xs.iter().collect::<Vec<_>>())?;
    let n = Rational::from_integer(xs.len().into());
    let sum: Rational = xs.iter().sum();
    let upper = xs.iter().min().cloned().expect("nonempty");
    Ok(BoundPair::new(clamp0(sum - n + Rational::one()), upper))
}

/// Bounds for a conjunction split into two blocks with previsions `xa`, `xb`.
pub fn frechet_split(xa: &Rational, xb: &Rational) -> Result<BoundPair, BoundsError> {
    frechet2(xa, xb)
}

/// Bounds for the quasi conjunction of two conditional events.
pub fn qc_bounds(x1: &Rational, x2: &Rational) -> Result<BoundPair, BoundsError> {
    check(&[x1, x2])?;
    let one = Rational::one();
    let lower = clamp0(x1 + x2 - &one);
    let product = x1 * x2;
    let upper = if product.is_one() {
        one
    } else {
        (x1 + x2 - &product - &product) / (one - product)
    };
    Ok(BoundPair::new(lower, upper))
}

/// Bounds on `x123` given the singles and pairs of three logically
/// independent conditional events.
pub fn bounds_n3(
    x1: &Rational,
    x2: &Rational,
    x3: &Rational,
    x12: &Rational,
    x13: &Rational,
    x23: &Rational,
) -> Result<BoundPair, BoundsError> {
    check(&[x1, x2, x3, x12, x13, x23])?;
    let zero = Rational::zero();
    let lowers: [(&'static str, Rational); 4] = [
        ("0", zero),
        ("x12 + x13 - x1", x12 + x13 - x1),
        ("x12 + x23 - x2", x12 + x23 - x2),
        ("x13 + x23 - x3", x13 + x23 - x3),
    ];
    let uppers: [(&'static str, Rational); 4] = [
        ("x12", x12.clone()),
        ("x13", x13.clone()),
        ("x23", x23.clone()),
        (
            "1 - x1 - x2 - x3 + x12 + x13 + x23",
            Rational::one() - x1 - x2 - x3 + x12 + x13 + x23,
        ),
    ];
    // eliminating x123 from the eight constituent inequalities leaves
    // exactly these sixteen pairwise comparisons
    for (ln, lv) in &lowers {
        for (un, uv) in &uppers {
            if lv > uv {
                return Err(BoundsError::Incoherent {
                    lower: ln,
                    lower_value: lv.clone(),
                    upper: un,
                    upper_value: uv.clone(),
                });
            }
        }
    }
    let lower = lowers.iter().map(|(_, v)| v).max().cloned().expect("nonempty");
    let upper = uppers.iter().map(|(_, v)| v).min().cloned().expect("nonempty");
    Ok(BoundPair::new(lower, upper))
}
