//! Compound conditionals as conditional random quantities.
//!
//! Every object here is a value table over the constituents of one shared
//! [`Ambient`]: rows `C1..Cm` inside `H1 v ... v Hn`, then `C0` when it is
//! possible. Values are affine in the plain conjunction previsions `x_S`.
//!
//! Outside its conditioning event a quantity takes its own prevision as
//! value. When a conjunction equals a single value `v` on its whole
//! conditioning event, or coincides there with a conjunction of fewer
//! members, its prevision is forced to that of the simpler object and is
//! stored as such instead of as a fresh symbol.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::affine::{AffineValue, Assessment, MissingSymbol, PrevisionSymbol};
use crate::event_algebra::{
    enumerate_constituents, events_independent, ConditionalEvent, Constituent, EventError, EventExpr,
    Sign, Universe,
};
use crate::index_set::{IndexSet, SignedSubset, MAX_INDEX};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompoundError {
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("a family may hold at most {MAX_INDEX} conditional events, got {0}")]
    FamilyTooLarge(usize),
    #[error("the index set must not be empty")]
    EmptySubset,
    #[error("index {index} is outside a family of {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("cannot combine quantities built over different families")]
    AmbientMismatch,
    #[error("a linear combination needs at least one term")]
    EmptyCombination,
    #[error("{events} events were given but {probs} probabilities")]
    LengthMismatch { events: usize, probs: usize },
    #[error("events #{0} and #{1} of the partition are compatible")]
    NotIncompatible(usize, usize),
    #[error("probability {0} is outside [0, 1]")]
    OutOfRange(Rational),
    #[error("the chain probabilities put mass on an impossible outcome")]
    ImpossibleOutcome,
}

#[derive(Debug, Clone)]
struct ConjTable {
    conditioning: Vec<bool>,
    values: Vec<AffineValue>,
    prevision: AffineValue,
}

/// A family of conditional events together with its constituents.
#[derive(Debug)]
pub struct Ambient {
    universe: Universe,
    family: Vec<ConditionalEvent>,
    rows: Vec<Constituent>,
    has_c0: bool,
    cache: Mutex<BTreeMap<IndexSet, ConjTable>>,
}

impl Ambient {
    pub fn new(universe: Universe, family: Vec<ConditionalEvent>) -> Result<Arc<Self>, CompoundError> {
        if family.len() > MAX_INDEX {
            return Err(CompoundError::FamilyTooLarge(family.len()));
        }
        let set = enumerate_constituents(&family, &universe)?;
        let has_c0 = set.c0.is_some();
        let rows: Vec<Constituent> = set.all().cloned().collect();
        Ok(Arc::new(Ambient {
            universe,
            family,
            rows,
            has_c0,
            cache: Mutex::new(BTreeMap::new()),
        }))
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn family(&self) -> &[ConditionalEvent] {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.family.len()
    }

    pub fn full(&self) -> IndexSet {
        IndexSet::full(self.n())
    }

    /// `C1..Cm` followed by `C0` when present.
    pub fn rows(&self) -> &[Constituent] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn c0_row(&self) -> Option<usize> {
        self.has_c0.then(|| self.rows.len() - 1)
    }

    pub fn sign(&self, row: usize, i: usize) -> Sign {
        self.rows[row].signs[i]
    }

    /// True when all `E_i`, `H_i` of the family are logically independent.
    pub fn basic_events_independent(&self) -> Result<bool, EventError> {
        let events: Vec<EventExpr> = self
            .family
            .iter()
            .flat_map(|ce| [ce.consequent.clone(), ce.antecedent.clone()])
            .collect();
        events_independent(&events, &self.universe)
    }

    fn check_subset(&self, s: IndexSet) -> Result<(), CompoundError> {
        if s.is_empty() {
            return Err(CompoundError::EmptySubset);
        }
        match s.iter().find(|&i| i >= self.n()) {
            Some(index) => Err(CompoundError::IndexOutOfRange {
                index,
                size: self.n(),
            }),
            None => Ok(()),
        }
    }

    fn antecedent_expr(&self, s: IndexSet) -> EventExpr {
        EventExpr::any(s.iter().map(|i| self.family[i].antecedent.clone()))
    }

    /// The prevision of the conjunction over `s`, after forced values are
    /// folded in. The empty set gives the constant 1.
    pub fn conjunction_prevision(&self, s: IndexSet) -> AffineValue {
        if s.is_empty() {
            return AffineValue::one();
        }
        self.conj_table(s).prevision
    }

    fn conj_table(&self, s: IndexSet) -> ConjTable {
        if let Some(t) = self.cache.lock().expect("cache poisoned").get(&s) {
            return t.clone();
        }
        let maximal: Vec<IndexSet> = s.iter().map(|i| s.without(i)).filter(|t| !t.is_empty()).collect();
        let subtables: Vec<(IndexSet, ConjTable)> =
            maximal.iter().map(|&t| (t, self.conj_table(t))).collect();
        let mut conditioning = Vec::with_capacity(self.rows.len());
        let mut values: Vec<Option<AffineValue>> = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let signs: Vec<Sign> = s.iter().map(|i| row.signs[i]).collect();
            let inside = signs.iter().any(|&g| g != Sign::Void);
            conditioning.push(inside);
            if !inside {
                values.push(None);
            } else if signs.contains(&Sign::False) {
                values.push(Some(AffineValue::zero()));
            } else {
                let void = IndexSet::from_indices(s.iter().filter(|&i| row.signs[i] == Sign::Void));
                values.push(Some(if void.is_empty() {
                    AffineValue::one()
                } else {
                    self.conjunction_prevision(void)
                }));
            }
        }
        let prevision = forced_prevision(&conditioning, &values, &subtables)
            .unwrap_or_else(|| AffineValue::symbol(PrevisionSymbol::Conj(s)));
        let table = ConjTable {
            values: values
                .into_iter()
                .map(|v| v.unwrap_or_else(|| prevision.clone()))
                .collect(),
            conditioning,
            prevision,
        };
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(s, table.clone());
        table
    }
}

/// The prevision implied by the table alone, if any: the common value on
/// the conditioning rows, or the prevision of a coinciding sub-conjunction.
fn forced_prevision(
    conditioning: &[bool],
    values: &[Option<AffineValue>],
    subtables: &[(IndexSet, ConjTable)],
) -> Option<AffineValue> {
    let mut inside = values.iter().zip(conditioning).filter(|(_, &c)| c).map(|(v, _)| v.as_ref());
    let first = inside.next().flatten()?;
    if inside.all(|v| v == Some(first)) {
        return Some(first.clone());
    }
    subtables.iter().find_map(|(_, t)| {
        let coincide = values
            .iter()
            .zip(conditioning)
            .enumerate()
            .filter(|(_, (_, &c))| c)
            .all(|(r, (v, _))| v.as_ref() == Some(&t.values[r]));
        coincide.then(|| t.prevision.clone())
    })
}

/// A conditional random quantity `X | H` over an ambient partition.
#[derive(Debug, Clone)]
pub struct ConditionalRQ {
    ambient: Arc<Ambient>,
    conditioning: Vec<bool>,
    conditioning_expr: EventExpr,
    values: Vec<AffineValue>,
    prevision: AffineValue,
    label: String,
}

impl ConditionalRQ {
    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    /// Per row, whether the row lies inside the conditioning event.
    pub fn conditioning(&self) -> &[bool] {
        &self.conditioning
    }

    pub fn conditioning_expr(&self) -> &EventExpr {
        &self.conditioning_expr
    }

    pub fn values(&self) -> &[AffineValue] {
        &self.values
    }

    pub fn value(&self, row: usize) -> &AffineValue {
        &self.values[row]
    }

    pub fn prevision(&self) -> &AffineValue {
        &self.prevision
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The constant quantity `c`, with an impossible conditioning event.
    pub fn constant(ambient: &Arc<Ambient>, c: Rational) -> Self {
        let v = AffineValue::constant(c.clone());
        ConditionalRQ {
            ambient: Arc::clone(ambient),
            conditioning: vec![false; ambient.row_count()],
            conditioning_expr: EventExpr::False,
            values: vec![v.clone(); ambient.row_count()],
            prevision: v,
            label: c.to_string(),
        }
    }

    /// Substitutes known numeric previsions everywhere.
    pub fn substitute(&self, m: &Assessment) -> ConditionalRQ {
        ConditionalRQ {
            values: self.values.iter().map(|v| v.partial_eval(m)).collect(),
            prevision: self.prevision.partial_eval(m),
            ..self.clone()
        }
    }

    /// Numeric values on every row.
    pub fn evaluate(&self, m: &Assessment) -> Result<Vec<Rational>, MissingSymbol> {
        self.values.iter().map(|v| v.eval(m)).collect()
    }

    /// Same values on every row and the same prevision.
    pub fn table_eq(&self, other: &ConditionalRQ) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient)
            && self.values == other.values
            && self.prevision == other.prevision
    }

    /// Same values wherever either conditioning event is true. By the
    /// equality principle for conditional random quantities this forces
    /// equal previsions, hence equality everywhere.
    pub fn coincides(&self, other: &ConditionalRQ) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient)
            && (0..self.values.len())
                .filter(|&r| self.conditioning[r] || other.conditioning[r])
                .all(|r| self.values[r] == other.values[r])
    }

    /// Identically `c` on the conditioning event (or, if that is empty, as a constant).
    pub fn is_identically(&self, c: &Rational) -> bool {
        let target = AffineValue::constant(c.clone());
        if self.conditioning.iter().any(|&b| b) {
            self.values
                .iter()
                .zip(&self.conditioning)
                .filter(|(_, &b)| b)
                .all(|(v, _)| *v == target)
        } else {
            self.prevision == target
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_identically(&Rational::zero())
    }

    pub fn scaled(&self, k: &Rational) -> ConditionalRQ {
        ConditionalRQ {
            values: self.values.iter().map(|v| v.scale(k)).collect(),
            prevision: self.prevision.scale(k),
            label: format!("{k}*{}", self.label),
            ..self.clone()
        }
    }

    pub fn plus(&self, other: &ConditionalRQ) -> Result<ConditionalRQ, CompoundError> {
        linear_combination(&[(Rational::one(), self), (Rational::one(), other)])
    }

    pub fn minus(&self, other: &ConditionalRQ) -> Result<ConditionalRQ, CompoundError> {
        linear_combination(&[(Rational::one(), self), (-Rational::one(), other)])
    }
}

impl fmt::Display for ConditionalRQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} | {}", self.label, self.conditioning_expr)?;
        for (row, v) in self.ambient.rows.iter().zip(&self.values) {
            writeln!(f, "  C{} {} {}", row.id, row.sign_string(), v)?;
        }
        write!(f, "  prevision {}", self.prevision)
    }
}

/// Serializable snapshot of a value table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub constituent: usize,
    pub signs: String,
    pub value: AffineValue,
}

impl ConditionalRQ {
    pub fn table_rows(&self) -> Vec<TableRow> {
        self.ambient
            .rows
            .iter()
            .zip(&self.values)
            .map(|(row, v)| TableRow {
                constituent: row.id,
                signs: row.sign_string(),
                value: v.clone(),
            })
            .collect()
    }
}

fn subset_label(prefix: &str, s: IndexSet) -> String {
    format!("{prefix}{s}")
}

/// `E_i | H_i` as a quantity: 1, 0, or its prevision `x_i` when void.
pub fn indicator(ambient: &Arc<Ambient>, i: usize) -> Result<ConditionalRQ, CompoundError> {
    conjunction(ambient, IndexSet::singleton(i))
}

/// The conjunction of the family members in `s`.
pub fn conjunction(ambient: &Arc<Ambient>, s: IndexSet) -> Result<ConditionalRQ, CompoundError> {
    ambient.check_subset(s)?;
    let t = ambient.conj_table(s);
    Ok(ConditionalRQ {
        ambient: Arc::clone(ambient),
        conditioning: t.conditioning,
        conditioning_expr: ambient.antecedent_expr(s),
        values: t.values,
        prevision: t.prevision,
        label: subset_label("C", s),
    })
}

/// The disjunction prevision `y_S`, expressed through conjunction previsions.
pub fn disjunction_prevision(ambient: &Ambient, s: IndexSet) -> AffineValue {
    let mut y = AffineValue::zero();
    for t in s.subsets().filter(|t| !t.is_empty()) {
        let p = ambient.conjunction_prevision(t);
        if t.len() % 2 == 1 {
            y += p;
        } else {
            y -= p;
        }
    }
    y
}

/// The disjunction of the family members in `s`, built case by case:
/// 1 if some member is true, 0 if all are false, otherwise the disjunction
/// prevision of the void members.
pub fn disjunction(ambient: &Arc<Ambient>, s: IndexSet) -> Result<ConditionalRQ, CompoundError> {
    ambient.check_subset(s)?;
    let prevision = disjunction_prevision(ambient, s);
    let mut conditioning = Vec::with_capacity(ambient.row_count());
    let mut values = Vec::with_capacity(ambient.row_count());
    for row in &ambient.rows {
        let signs: Vec<Sign> = s.iter().map(|i| row.signs[i]).collect();
        let inside = signs.iter().any(|&g| g != Sign::Void);
        conditioning.push(inside);
        values.push(if !inside {
            prevision.clone()
        } else if signs.contains(&Sign::True) {
            AffineValue::one()
        } else {
            let void = IndexSet::from_indices(s.iter().filter(|&i| row.signs[i] == Sign::Void));
            if void.is_empty() {
                AffineValue::zero()
            } else {
                disjunction_prevision(ambient, void)
            }
        });
    }
    Ok(ConditionalRQ {
        ambient: Arc::clone(ambient),
        conditioning,
        conditioning_expr: ambient.antecedent_expr(s),
        values,
        prevision,
        label: subset_label("D", s),
    })
}

/// `1 - X`.
pub fn negation(x: &ConditionalRQ) -> ConditionalRQ {
    let one = AffineValue::one();
    ConditionalRQ {
        values: x.values.iter().map(|v| &one - v).collect(),
        prevision: &one - &x.prevision,
        label: format!("~{}", x.label),
        ..x.clone()
    }
}

/// `Σ k_i X_i`: conditioning is the disjunction of the items' conditioning
/// events, values and previsions add.
pub fn linear_combination(items: &[(Rational, &ConditionalRQ)]) -> Result<ConditionalRQ, CompoundError> {
    let (_, first) = items.first().ok_or(CompoundError::EmptyCombination)?;
    let ambient = Arc::clone(&first.ambient);
    if items.iter().any(|(_, x)| !Arc::ptr_eq(&x.ambient, &ambient)) {
        return Err(CompoundError::AmbientMismatch);
    }
    let rows = ambient.row_count();
    let mut values = vec![AffineValue::zero(); rows];
    let mut conditioning = vec![false; rows];
    let mut prevision = AffineValue::zero();
    let mut exprs: Vec<EventExpr> = Vec::new();
    let mut label = String::new();
    for (k, x) in items {
        for r in 0..rows {
            conditioning[r] |= x.conditioning[r];
        }
        if x.conditioning_expr != EventExpr::False && !exprs.contains(&x.conditioning_expr) {
            exprs.push(x.conditioning_expr.clone());
        }
        if k.is_zero() {
            continue;
        }
        for r in 0..rows {
            values[r] += x.values[r].scale(k);
        }
        prevision += x.prevision.scale(k);
        let sign = if k.is_negative() { "-" } else if label.is_empty() { "" } else { "+" };
        let magnitude = k.abs();
        if magnitude.is_one() {
            label.push_str(&format!("{sign}{}", x.label));
        } else {
            label.push_str(&format!("{sign}{magnitude}*{}", x.label));
        }
    }
    Ok(ConditionalRQ {
        ambient,
        conditioning,
        conditioning_expr: EventExpr::any(exprs),
        values,
        prevision,
        label: if label.is_empty() { "0".into() } else { label },
    })
}

/// The prevision of a conditional constituent through the alternating sum
/// `Σ_{J ⊆ N} (-1)^|J| x_{P ∪ J}` with `x_∅ = 1`.
pub fn signed_prevision(ambient: &Ambient, s: SignedSubset) -> AffineValue {
    let mut acc = AffineValue::zero();
    for j in s.negatives.subsets() {
        let p = ambient.conjunction_prevision(s.positives.union(j));
        if j.len() % 2 == 0 {
            acc += p;
        } else {
            acc -= p;
        }
    }
    acc
}

fn check_signed(ambient: &Ambient, s: SignedSubset) -> Result<(), CompoundError> {
    match s.scope().iter().find(|&i| i >= ambient.n()) {
        Some(index) => Err(CompoundError::IndexOutOfRange {
            index,
            size: ambient.n(),
        }),
        None => Ok(()),
    }
}

fn conjunction_or_one(ambient: &Arc<Ambient>, s: IndexSet) -> Result<ConditionalRQ, CompoundError> {
    if s.is_empty() {
        Ok(ConditionalRQ::constant(ambient, Rational::one()))
    } else {
        conjunction(ambient, s)
    }
}

/// The conjunction of `E_i|H_i` for kept indices and `!E_j|H_j` for negated
/// ones, as the alternating sum of plain conjunctions.
pub fn signed_conjunction(ambient: &Arc<Ambient>, s: SignedSubset) -> Result<ConditionalRQ, CompoundError> {
    check_signed(ambient, s)?;
    let mut parts = Vec::new();
    for j in s.negatives.subsets() {
        let sign = if j.len() % 2 == 0 { Rational::one() } else { -Rational::one() };
        parts.push((sign, conjunction_or_one(ambient, s.positives.union(j))?));
    }
    let refs: Vec<(Rational, &ConditionalRQ)> = parts.iter().map(|(k, x)| (k.clone(), x)).collect();
    Ok(linear_combination(&refs)?.with_label(format!("C{s}")))
}

/// The same object built case by case from the definition of conjunction,
/// applied to the family with the negated consequents swapped in.
pub fn signed_conjunction_direct(
    ambient: &Arc<Ambient>,
    s: SignedSubset,
) -> Result<ConditionalRQ, CompoundError> {
    check_signed(ambient, s)?;
    let scope = s.scope();
    if scope.is_empty() {
        return Ok(ConditionalRQ::constant(ambient, Rational::one()));
    }
    let prevision = signed_prevision(ambient, s);
    let mut conditioning = Vec::with_capacity(ambient.row_count());
    let mut values = Vec::with_capacity(ambient.row_count());
    for row in &ambient.rows {
        let signs: Vec<Sign> = scope
            .iter()
            .map(|i| match (row.signs[i], s.negatives.contains(i)) {
                (Sign::True, true) => Sign::False,
                (Sign::False, true) => Sign::True,
                (g, _) => g,
            })
            .collect();
        let inside = signs.iter().any(|&g| g != Sign::Void);
        conditioning.push(inside);
        values.push(if !inside {
            prevision.clone()
        } else if signs.contains(&Sign::False) {
            AffineValue::zero()
        } else {
            let void = IndexSet::from_indices(scope.iter().filter(|&i| row.signs[i] == Sign::Void));
            if void.is_empty() {
                AffineValue::one()
            } else {
                signed_prevision(ambient, s.restrict(void))
            }
        });
    }
    Ok(ConditionalRQ {
        ambient: Arc::clone(ambient),
        conditioning,
        conditioning_expr: ambient.antecedent_expr(scope),
        values,
        prevision,
        label: format!("C{s}"),
    })
}

/// All conditional constituents over the whole family, dropping those that
/// vanish identically.
pub fn conditional_constituents(
    ambient: &Arc<Ambient>,
) -> Result<Vec<(SignedSubset, ConditionalRQ)>, CompoundError> {
    let mut out = Vec::new();
    for s in SignedSubset::all_over(ambient.full()) {
        let c = signed_conjunction(ambient, s)?;
        if !c.is_zero() {
            out.push((s, c));
        }
    }
    Ok(out)
}

/// `Σ_h (-1)^(h+1) Σ_{|T|=h, T ⊆ S} C_T`.
pub fn inclusion_exclusion(ambient: &Arc<Ambient>, s: IndexSet) -> Result<ConditionalRQ, CompoundError> {
    ambient.check_subset(s)?;
    let mut parts = Vec::new();
    for t in s.subsets().filter(|t| !t.is_empty()) {
        let sign = if t.len() % 2 == 1 { Rational::one() } else { -Rational::one() };
        parts.push((sign, conjunction(ambient, t)?));
    }
    let refs: Vec<(Rational, &ConditionalRQ)> = parts.iter().map(|(k, x)| (k.clone(), x)).collect();
    Ok(linear_combination(&refs)?.with_label(subset_label("D", s)))
}

/// The quasi conjunction `[∧(!H_i v E_iH_i)] | (∨ H_i)` over `s`, a
/// conditional event with prevision `z_S`.
pub fn quasi_conjunction(ambient: &Arc<Ambient>, s: IndexSet) -> Result<ConditionalRQ, CompoundError> {
    ambient.check_subset(s)?;
    let mut conditioning = Vec::with_capacity(ambient.row_count());
    let mut values: Vec<Option<AffineValue>> = Vec::with_capacity(ambient.row_count());
    for row in &ambient.rows {
        let signs: Vec<Sign> = s.iter().map(|i| row.signs[i]).collect();
        let inside = signs.iter().any(|&g| g != Sign::Void);
        conditioning.push(inside);
        values.push(inside.then(|| {
            if signs.contains(&Sign::False) {
                AffineValue::zero()
            } else {
                AffineValue::one()
            }
        }));
    }
    let prevision = forced_prevision(&conditioning, &values, &[])
        .unwrap_or_else(|| AffineValue::symbol(PrevisionSymbol::Quasi(s)));
    Ok(ConditionalRQ {
        ambient: Arc::clone(ambient),
        conditioning,
        conditioning_expr: ambient.antecedent_expr(s),
        values: values
            .into_iter()
            .map(|v| v.unwrap_or_else(|| prevision.clone()))
            .collect(),
        prevision,
        label: subset_label("Q", s),
    })
}

/// A formal linear combination of conjunctions, `Σ k_S C_S` with `C_∅ = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConjunctionPoly(BTreeMap<IndexSet, Rational>);

impl ConjunctionPoly {
    pub fn one() -> Self {
        ConjunctionPoly::term(IndexSet::EMPTY, Rational::one())
    }

    pub fn term(s: IndexSet, k: Rational) -> Self {
        let mut p = ConjunctionPoly::default();
        p.add_term(s, k);
        p
    }

    /// `1 - C_i`.
    pub fn negated_event(i: usize) -> Self {
        let mut p = ConjunctionPoly::one();
        p.add_term(IndexSet::singleton(i), -Rational::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &Rational)> {
        self.0.iter()
    }

    pub fn coefficient(&self, s: IndexSet) -> Rational {
        self.0.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, s: IndexSet, k: Rational) {
        let slot = self.0.entry(s).or_insert_with(Rational::zero);
        *slot += k;
        if slot.is_zero() {
            self.0.remove(&s);
        }
    }

    /// Conjunction distributed over the sums: `C_S ∧ C_T = C_{S ∪ T}`.
    pub fn and(&self, other: &ConjunctionPoly) -> ConjunctionPoly {
        let mut out = ConjunctionPoly::default();
        for (s, a) in &self.0 {
            for (t, b) in &other.0 {
                out.add_term(s.union(*t), a * b);
            }
        }
        out
    }

    pub fn to_crq(&self, ambient: &Arc<Ambient>) -> Result<ConditionalRQ, CompoundError> {
        if self.0.is_empty() {
            return Ok(ConditionalRQ::constant(ambient, Rational::zero()));
        }
        let mut parts = Vec::new();
        for (s, k) in &self.0 {
            parts.push((k.clone(), conjunction_or_one(ambient, *s)?));
        }
        let refs: Vec<(Rational, &ConditionalRQ)> = parts.iter().map(|(k, x)| (k.clone(), x)).collect();
        linear_combination(&refs)
    }
}

/// `C_P ∧ ∧_{j ∈ N} (1 - C_j)`, expanded by distributivity.
pub fn distributed_signed(s: SignedSubset) -> ConjunctionPoly {
    s.negatives.iter().fold(
        ConjunctionPoly::term(s.positives, Rational::one()),
        |acc, j| acc.and(&ConjunctionPoly::negated_event(j)),
    )
}

/// For pairwise incompatible `H_1..H_n` and `x_1 = P(H_1)`,
/// `x_j = P(H_j | !H_1 ⋯ !H_{j-1})`, builds
/// `(H_1|Ω) ∧ (H_2|!H_1) ∧ ⋯ ∧ (H_n|!H_1⋯!H_{n-1})` with every prevision
/// evaluated, and returns it with its prevision.
///
/// Sub-conjunction previsions are computed as expectations under the
/// conditional distribution given `!H_1⋯!H_{j-1}` that the `x_j` determine.
pub fn atoms_chain(
    universe: Universe,
    partition: &[EventExpr],
    probs: &[Rational],
) -> Result<(ConditionalRQ, Rational), CompoundError> {
    if partition.len() != probs.len() {
        return Err(CompoundError::LengthMismatch {
            events: partition.len(),
            probs: probs.len(),
        });
    }
    if partition.is_empty() {
        return Err(CompoundError::EmptySubset);
    }
    if let Some(p) = probs.iter().find(|p| p.is_negative() || **p > Rational::one()) {
        return Err(CompoundError::OutOfRange(p.clone()));
    }
    for i in 0..partition.len() {
        for j in i + 1..partition.len() {
            if universe.is_satisfiable(&partition[i].clone().and(partition[j].clone()))? {
                return Err(CompoundError::NotIncompatible(i + 1, j + 1));
            }
        }
    }
    let n = partition.len();
    let family: Vec<ConditionalEvent> = (0..n)
        .map(|j| {
            let given = EventExpr::all(partition[..j].iter().map(|h| h.clone().negate()));
            ConditionalEvent::new(partition[j].clone(), given)
        })
        .collect();
    let ambient = Ambient::new(universe, family)?;
    // which partition member a row realizes, None for "none of them"
    let outcome: Vec<Option<usize>> = ambient
        .rows()
        .iter()
        .map(|row| row.signs.iter().position(|&g| g == Sign::True))
        .collect();
    let row_of = |o: Option<usize>| outcome.iter().position(|&x| x == o);
    let one = Rational::one();

    let mut m = Assessment::new();
    for (k, p) in probs.iter().enumerate() {
        m.insert(PrevisionSymbol::Conj(IndexSet::singleton(k)), p.clone());
    }
    let mut previsions: Vec<Rational> = vec![Rational::zero(); n];
    for j in (0..n).rev() {
        // conditional distribution over outcomes given !H_1 ⋯ !H_{j-1}
        let mut weights: Vec<(Option<usize>, Rational)> = Vec::new();
        let mut survive = one.clone();
        for (k, p) in probs.iter().enumerate().skip(j) {
            weights.push((Some(k), &survive * p));
            survive *= &one - p;
        }
        weights.push((None, survive));
        let scope = IndexSet::from_indices(j..n);
        let crq = conjunction(&ambient, scope)?.substitute(&m);
        let mut expectation = Rational::zero();
        for (o, w) in weights {
            if w.is_zero() {
                continue;
            }
            let r = row_of(o).ok_or(CompoundError::ImpossibleOutcome)?;
            let v = crq.values[r]
                .as_constant()
                .expect("all previsions below this level are known")
                .clone();
            expectation += w * v;
        }
        if let Some(c) = crq.prevision.as_constant() {
            if *c != expectation {
                return Err(CompoundError::ImpossibleOutcome);
            }
        }
        m.insert(PrevisionSymbol::Conj(scope), expectation.clone());
        previsions[j] = expectation;
    }
    let chain = conjunction(&ambient, ambient.full())?.substitute(&m);
    Ok((chain.with_label("chain"), previsions[0].clone()))
}
