//! Affine expressions over prevision symbols with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::index_set::{IndexSet, SignedSubset};
use crate::rational::Rational;

/// Names a prevision. `Conj(S)` is `x_S`, `Disj(S)` is `y_S`, `Signed(s)`
/// is the prevision of a conditional constituent, `Quasi(S)` is `z_S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrevisionSymbol {
    Conj(IndexSet),
    Disj(IndexSet),
    Signed(SignedSubset),
    Quasi(IndexSet),
    Named(String),
}

impl PrevisionSymbol {
    pub fn x(indices: impl IntoIterator<Item = usize>) -> Self {
        PrevisionSymbol::Conj(IndexSet::from_indices(indices))
    }
}

impl fmt::Display for PrevisionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrevisionSymbol::Conj(s) => write!(f, "x{s}"),
            PrevisionSymbol::Disj(s) => write!(f, "y{s}"),
            PrevisionSymbol::Signed(s) => write!(f, "x{s}"),
            PrevisionSymbol::Quasi(s) => write!(f, "z{s}"),
            PrevisionSymbol::Named(n) => f.write_str(n),
        }
    }
}

impl Serialize for PrevisionSymbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Numeric values for prevision symbols.
pub type Assessment = BTreeMap<PrevisionSymbol, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no value assessed for `{0}`")]
pub struct MissingSymbol(pub PrevisionSymbol);

/// `constant + Σ coeff·symbol`, never storing a zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AffineValue {
    constant: Rational,
    terms: BTreeMap<PrevisionSymbol, Rational>,
}

impl AffineValue {
    pub fn zero() -> Self {
        AffineValue::default()
    }

    pub fn one() -> Self {
        AffineValue::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        AffineValue {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn symbol(s: PrevisionSymbol) -> Self {
        AffineValue::term(s, Rational::one())
    }

    pub fn term(s: PrevisionSymbol, coeff: Rational) -> Self {
        let mut v = AffineValue::zero();
        v.add_term(s, coeff);
        v
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PrevisionSymbol, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &PrevisionSymbol) -> Rational {
        self.terms.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &PrevisionSymbol> {
        self.terms.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        self.terms.is_empty().then_some(&self.constant)
    }

    /// `Some(s)` when the value is exactly one symbol with coefficient one.
    pub fn as_symbol(&self) -> Option<&PrevisionSymbol> {
        if !self.constant.is_zero() || self.terms.len() != 1 {
            return None;
        }
        let (s, c) = self.terms.iter().next()?;
        c.is_one().then_some(s)
    }

    pub fn add_term(&mut self, s: PrevisionSymbol, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(s.clone()).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn scale(&self, k: &Rational) -> AffineValue {
        if k.is_zero() {
            return AffineValue::zero();
        }
        AffineValue {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * k)).collect(),
        }
    }

    /// Replaces `sym` by `by` everywhere.
    pub fn substitute(&self, sym: &PrevisionSymbol, by: &AffineValue) -> AffineValue {
        match self.terms.get(sym) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.terms.remove(sym);
                rest + by.scale(c)
            }
        }
    }

    /// Replaces every symbol found in `map`, in one pass.
    pub fn substitute_all(&self, map: &BTreeMap<PrevisionSymbol, AffineValue>) -> AffineValue {
        let mut out = AffineValue::constant(self.constant.clone());
        for (s, c) in &self.terms {
            match map.get(s) {
                Some(v) => out += v.scale(c),
                None => out.add_term(s.clone(), c.clone()),
            }
        }
        out
    }

    /// Substitutes the symbols that `values` knows, leaving the rest.
    pub fn partial_eval(&self, values: &Assessment) -> AffineValue {
        let mut out = AffineValue::constant(self.constant.clone());
        for (s, c) in &self.terms {
            match values.get(s) {
                Some(v) => out.constant += c * v,
                None => out.add_term(s.clone(), c.clone()),
            }
        }
        out
    }

    pub fn eval(&self, values: &Assessment) -> Result<Rational, MissingSymbol> {
        let mut acc = self.constant.clone();
        for (s, c) in &self.terms {
            let v = values.get(s).ok_or_else(|| MissingSymbol(s.clone()))?;
            acc += c * v;
        }
        Ok(acc)
    }
}

impl From<Rational> for AffineValue {
    fn from(c: Rational) -> Self {
        AffineValue::constant(c)
    }
}

impl From<PrevisionSymbol> for AffineValue {
    fn from(s: PrevisionSymbol) -> Self {
        AffineValue::symbol(s)
    }
}

impl AddAssign<&AffineValue> for AffineValue {
    fn add_assign(&mut self, rhs: &AffineValue) {
        self.constant += &rhs.constant;
        for (s, c) in &rhs.terms {
            self.add_term(s.clone(), c.clone());
        }
    }
}

impl AddAssign for AffineValue {
    fn add_assign(&mut self, rhs: AffineValue) {
        *self += &rhs;
    }
}

impl SubAssign<&AffineValue> for AffineValue {
    fn sub_assign(&mut self, rhs: &AffineValue) {
        self.constant -= &rhs.constant;
        for (s, c) in &rhs.terms {
            self.add_term(s.clone(), -c);
        }
    }
}

impl SubAssign for AffineValue {
    fn sub_assign(&mut self, rhs: AffineValue) {
        *self -= &rhs;
    }
}

impl Add for AffineValue {
    type Output = AffineValue;
    fn add(mut self, rhs: AffineValue) -> AffineValue {
        self += &rhs;
        self
    }
}

impl Add<&AffineValue> for &AffineValue {
    type Output = AffineValue;
    fn add(self, rhs: &AffineValue) -> AffineValue {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for AffineValue {
    type Output = AffineValue;
    fn sub(mut self, rhs: AffineValue) -> AffineValue {
        self -= &rhs;
        self
    }
}

impl Sub<&AffineValue> for &AffineValue {
    type Output = AffineValue;
    fn sub(self, rhs: &AffineValue) -> AffineValue {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for AffineValue {
    type Output = AffineValue;
    fn neg(self) -> AffineValue {
        self.scale(&-Rational::one())
    }
}

impl Neg for &AffineValue {
    type Output = AffineValue;
    fn neg(self) -> AffineValue {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for AffineValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.constant.is_zero() || self.terms.is_empty() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (s, c) in &self.terms {
            let negative = c.is_negative();
            let magnitude = c.abs();
            match (first, negative) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if magnitude.is_one() {
                write!(f, "{s}")?;
            } else {
                write!(f, "{magnitude}*{s}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl Serialize for AffineValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
