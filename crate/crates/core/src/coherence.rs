//! Coherence of prevision assessments on conditional random quantities.
//!
//! The general checker solves the linear system `Σ` (the assessment lies in
//! the convex hull of the points `Q_h`) and recurses on the indices whose
//! conditioning event gets zero mass in every solution. Under logical
//! independence of the basic events, an assessment on all conjunctions is
//! coherent exactly when every conditional-constituent prevision is
//! nonnegative; [`check_coherence_fast`] decides that directly.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::affine::{Assessment, MissingSymbol, PrevisionSymbol};
use crate::compound::{conjunction, Ambient, CompoundError, ConditionalRQ};
use crate::event_algebra::EventError;
use crate::index_set::{IndexSet, SignedSubset, MAX_INDEX};
use crate::lp::{lp_solve, LpError, LpProblem, LpResult, Relation, Sense};
use crate::rational::{serde_rational, serde_rational_vec, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoherenceError {
    #[error(transparent)]
    Missing(#[from] MissingSymbol),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Compound(#[from] CompoundError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("nothing to check: the assessment is empty")]
    Empty,
    #[error("at most {MAX_INDEX} quantities can be assessed together, got {0}")]
    TooMany(usize),
    #[error("quantities come from different families")]
    AmbientMismatch,
    #[error("the basic events are not logically independent; use the general checker")]
    NotIndependent,
    #[error("the vector must have {expected} entries, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("the vector is not in the simplex: entries must be nonnegative and sum to 1")]
    NotInSimplex,
    #[error("the assessment is not coherent")]
    Incoherent(Box<Verdict>),
    #[error("target values depend on previsions that are not assessed: {0}")]
    UnresolvedTarget(String),
}

/// A quantity together with its assessed prevision.
#[derive(Debug, Clone)]
pub struct Assessed {
    pub crq: ConditionalRQ,
    pub prevision: Rational,
}

impl Assessed {
    pub fn new(crq: ConditionalRQ, prevision: Rational) -> Self {
        Assessed { crq, prevision }
    }
}

/// One assessed conjunction per plain `x_S` entry of `m`, in canonical order.
pub fn assess_conjunctions(ambient: &Arc<Ambient>, m: &Assessment) -> Result<Vec<Assessed>, CoherenceError> {
    let mut out = Vec::new();
    for s in IndexSet::nonempty_subsets(ambient.n()) {
        if let Some(v) = m.get(&PrevisionSymbol::Conj(s)) {
            out.push(Assessed::new(conjunction(ambient, s)?, v.clone()));
        }
    }
    Ok(out)
}

/// The full-family assessment `x_S` for every nonempty `S ⊆ {1..n}`.
pub fn conjunction_assessment(n: usize, values: &[Rational]) -> Result<Assessment, CoherenceError> {
    let subsets = IndexSet::nonempty_subsets(n);
    if subsets.len() != values.len() {
        return Err(CoherenceError::WrongLength {
            expected: subsets.len(),
            found: values.len(),
        });
    }
    Ok(subsets
        .into_iter()
        .map(PrevisionSymbol::Conj)
        .zip(values.iter().cloned())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointQ {
    /// Row in the ambient table.
    #[serde(skip)]
    pub row: usize,
    pub constituent: usize,
    #[serde(with = "serde_rational_vec")]
    pub coords: Vec<Rational>,
}

/// Points `Q_h` for every constituent inside the disjunction of the
/// conditioning events of `items` restricted to `indices`. Coordinate `i`
/// is the value of item `i` there, or its prevision where it is void.
pub fn build_points(
    items: &[Assessed],
    indices: IndexSet,
    m: &Assessment,
) -> Result<Vec<PointQ>, CoherenceError> {
    let ambient = common_ambient(items)?;
    let mut points = Vec::new();
    for (row, c) in ambient.rows().iter().enumerate() {
        if !indices.iter().any(|i| items[i].crq.conditioning()[row]) {
            continue;
        }
        let coords = indices
            .iter()
            .map(|i| coordinate(&items[i], row, m))
            .collect::<Result<Vec<_>, _>>()?;
        points.push(PointQ {
            row,
            constituent: c.id,
            coords,
        });
    }
    Ok(points)
}

fn coordinate(item: &Assessed, row: usize, m: &Assessment) -> Result<Rational, MissingSymbol> {
    if item.crq.conditioning()[row] {
        item.crq.value(row).eval(m)
    } else {
        Ok(item.prevision.clone())
    }
}

fn common_ambient(items: &[Assessed]) -> Result<Arc<Ambient>, CoherenceError> {
    let first = items.first().ok_or(CoherenceError::Empty)?;
    let ambient = Arc::clone(first.crq.ambient());
    if items.iter().any(|a| !Arc::ptr_eq(a.crq.ambient(), &ambient)) {
        return Err(CoherenceError::AmbientMismatch);
    }
    if items.len() > MAX_INDEX {
        return Err(CoherenceError::TooMany(items.len()));
    }
    Ok(ambient)
}

fn sigma_problem(points: &[PointQ], mu: &[Rational]) -> LpProblem {
    let mut p = LpProblem::new(points.len());
    for (k, target) in mu.iter().enumerate() {
        p.constrain(
            points.iter().map(|q| q.coords[k].clone()).collect(),
            Relation::Eq,
            target.clone(),
        );
    }
    p.constrain(vec![Rational::one(); points.len()], Relation::Eq, Rational::one());
    p
}

/// Feasibility of `Σ λ_h Q_h = μ`, `Σ λ_h = 1`, `λ ≥ 0`.
pub fn solve_sigma(points: &[PointQ], mu: &[Rational]) -> Result<LpResult, CoherenceError> {
    Ok(lp_solve(&sigma_problem(points, mu))?)
}

/// Indices (among `indices`) whose conditioning event receives zero mass in
/// every solution of `Σ`: one maximization per index.
pub fn compute_i0(
    items: &[Assessed],
    indices: IndexSet,
    points: &[PointQ],
    mu: &[Rational],
    solution: &[Rational],
) -> Result<IndexSet, CoherenceError> {
    let base = sigma_problem(points, mu);
    let mut i0 = IndexSet::EMPTY;
    for i in indices.iter() {
        let inside: Vec<Rational> = points
            .iter()
            .map(|q| {
                if items[i].crq.conditioning()[q.row] {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let here: Rational = inside.iter().zip(solution).map(|(a, l)| a * l).sum();
        if here.is_positive() {
            continue;
        }
        let p = base.clone().with_objective(inside, Sense::Maximize);
        match lp_solve(&p)? {
            LpResult::Optimal { value, .. } if value.is_zero() => i0 = i0.with(i),
            _ => {}
        }
    }
    Ok(i0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub level: usize,
    pub indices: IndexSet,
    pub constituents: Vec<usize>,
    #[serde(with = "serde_rational_vec")]
    pub lambda: Vec<Rational>,
    pub i0: IndexSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Solutions of `Σ` at each level of the recursion.
    Recursion { levels: Vec<Level> },
    /// Conditional-constituent previsions, the solution of `Σ_B`.
    Simplex { weights: Vec<SignedWeight> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedWeight {
    pub constituent: SignedSubset,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    /// `Σ` has no solution for this subfamily.
    Unsolvable { level: usize, indices: IndexSet },
    /// A conditional-constituent prevision is negative.
    Violated {
        constituent: SignedSubset,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Unsolvable { level, indices } => {
                write!(f, "no solution at level {level} for quantities {{{indices}}}")
            }
            Failure::Violated { constituent, value } => {
                write!(f, "x{constituent} = {value} < 0")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub coherent: bool,
    pub witness: Witness,
    pub failure: Option<Failure>,
}

impl Verdict {
    /// Re-checks the witness by exact substitution.
    pub fn verify(&self, items: &[Assessed], m: &Assessment) -> Result<bool, CoherenceError> {
        match &self.witness {
            Witness::Recursion { levels } => {
                for level in levels {
                    if level.lambda.is_empty() {
                        continue;
                    }
                    let points = build_points(items, level.indices, m)?;
                    let mu: Vec<Rational> =
                        level.indices.iter().map(|i| items[i].prevision.clone()).collect();
                    if !sigma_problem(&points, &mu).is_satisfied_by(&level.lambda) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Witness::Simplex { weights } => {
                if !self.coherent {
                    return Ok(true);
                }
                let total: Rational = weights.iter().map(|w| w.value.clone()).sum();
                if !total.is_one() || weights.iter().any(|w| w.value.is_negative()) {
                    return Ok(false);
                }
                for (sym, x) in m {
                    if let PrevisionSymbol::Conj(s) = sym {
                        let sum: Rational = weights
                            .iter()
                            .filter(|w| s.is_subset(w.constituent.positives))
                            .map(|w| w.value.clone())
                            .sum();
                        if &sum != x {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }
}

/// The general checker: solve `Σ`, compute `I_0`, recurse while it is nonempty.
pub fn check_coherence(items: &[Assessed], m: &Assessment) -> Result<Verdict, CoherenceError> {
    common_ambient(items)?;
    let mut indices = IndexSet::full(items.len());
    let mut levels = Vec::new();
    loop {
        let level = levels.len();
        let points = build_points(items, indices, m)?;
        let mu: Vec<Rational> = indices.iter().map(|i| items[i].prevision.clone()).collect();
        let lambda = match solve_sigma(&points, &mu)? {
            LpResult::Optimal { x, .. } => x,
            _ => {
                return Ok(Verdict {
                    coherent: false,
                    witness: Witness::Recursion { levels },
                    failure: Some(Failure::Unsolvable { level, indices }),
                })
            }
        };
        let i0 = compute_i0(items, indices, &points, &mu, &lambda)?;
        assert!(
            i0 != indices,
            "the zero-mass set must shrink at every level"
        );
        levels.push(Level {
            level,
            indices,
            constituents: points.iter().map(|q| q.constituent).collect(),
            lambda,
            i0,
        });
        if i0.is_empty() {
            return Ok(Verdict {
                coherent: true,
                witness: Witness::Recursion { levels },
                failure: None,
            });
        }
        indices = i0;
    }
}

/// `x_{P ∪ ~N} = Σ_{J ⊆ N} (-1)^|J| x_{P ∪ J}` for every sign pattern over
/// `{1..n}`, with `x_∅ = 1`.
pub fn constituent_previsions(
    m: &Assessment,
    n: usize,
) -> Result<BTreeMap<SignedSubset, Rational>, MissingSymbol> {
    let lookup = |s: IndexSet| -> Result<Rational, MissingSymbol> {
        if s.is_empty() {
            return Ok(Rational::one());
        }
        let sym = PrevisionSymbol::Conj(s);
        m.get(&sym).cloned().ok_or(MissingSymbol(sym))
    };
    let mut out = BTreeMap::new();
    for s in SignedSubset::all_over(IndexSet::full(n)) {
        let mut acc = Rational::zero();
        for j in s.negatives.subsets() {
            let x = lookup(s.positives.union(j))?;
            if j.len() % 2 == 0 {
                acc += x;
            } else {
                acc -= x;
            }
        }
        out.insert(s, acc);
    }
    Ok(out)
}

/// Verdict from the nonnegativity of the conditional-constituent previsions,
/// without any check on the events.
pub fn fast_verdict(m: &Assessment, n: usize) -> Result<Verdict, CoherenceError> {
    let signed = constituent_previsions(m, n)?;
    let failure = signed
        .iter()
        .find(|(_, v)| v.is_negative())
        .map(|(s, v)| Failure::Violated {
            constituent: *s,
            value: v.clone(),
        });
    Ok(Verdict {
        coherent: failure.is_none(),
        witness: Witness::Simplex {
            weights: signed
                .into_iter()
                .map(|(constituent, value)| SignedWeight { constituent, value })
                .collect(),
        },
        failure,
    })
}

/// Fast path for an assessment on all conjunctions of the family; refuses
/// when the basic events are not logically independent.
pub fn check_coherence_fast(ambient: &Ambient, m: &Assessment) -> Result<Verdict, CoherenceError> {
    if !ambient.basic_events_independent()? {
        return Err(CoherenceError::NotIndependent);
    }
    fast_verdict(m, ambient.n())
}

/// The assessment on conjunctions induced by a point of the simplex, indexed
/// like [`SignedSubset::all_over`]: `x_S = Σ_{P ⊇ S} v_P`.
pub fn assessment_from_simplex(
    v: &[Rational],
    n: usize,
) -> Result<(Assessment, BTreeMap<SignedSubset, Rational>), CoherenceError> {
    let patterns = SignedSubset::all_over(IndexSet::full(n));
    if v.len() != patterns.len() {
        return Err(CoherenceError::WrongLength {
            expected: patterns.len(),
            found: v.len(),
        });
    }
    let total: Rational = v.iter().cloned().sum();
    if !total.is_one() || v.iter().any(|x| x.is_negative()) {
        return Err(CoherenceError::NotInSimplex);
    }
    let mut m = Assessment::new();
    for s in IndexSet::nonempty_subsets(n) {
        let x: Rational = patterns
            .iter()
            .zip(v)
            .filter(|(p, _)| s.is_subset(p.positives))
            .map(|(_, w)| w.clone())
            .sum();
        m.insert(PrevisionSymbol::Conj(s), x);
    }
    Ok((m, patterns.into_iter().zip(v.iter().cloned()).collect()))
}

/// For a coherent assessment on all conjunctions, checks that every point
/// `Q_h` is itself a coherent assessment on the same family.
pub fn verify_qh_coherence(
    ambient: &Arc<Ambient>,
    m: &Assessment,
) -> Result<Vec<(usize, Verdict)>, CoherenceError> {
    if !ambient.basic_events_independent()? {
        return Err(CoherenceError::NotIndependent);
    }
    let n = ambient.n();
    let crqs = IndexSet::nonempty_subsets(n)
        .into_iter()
        .map(|s| Ok((s, conjunction(ambient, s)?)))
        .collect::<Result<Vec<_>, CompoundError>>()?;
    let mut out = Vec::new();
    for (row, c) in ambient.rows().iter().enumerate() {
        if c.is_all_void() {
            continue;
        }
        let mut q = Assessment::new();
        for (s, crq) in &crqs {
            q.insert(PrevisionSymbol::Conj(*s), crq.value(row).eval(m)?);
        }
        out.push((c.id, fast_verdict(&q, n)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMethod {
    /// Optimization over the simplex of conditional-constituent previsions.
    Simplex,
    /// Optimization over the solutions of `Σ`, descending through zero-mass
    /// levels when the target's conditioning event gets no mass.
    Hull,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionBounds {
    #[serde(with = "serde_rational")]
    pub lower: Rational,
    #[serde(with = "serde_rational")]
    pub upper: Rational,
    pub method: BoundsMethod,
    pub lower_certified: bool,
    pub upper_certified: bool,
    pub midpoint_certified: bool,
}

impl ExtensionBounds {
    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    /// Every point of the interval is known to be a coherent extension.
    pub fn fully_certified(&self) -> bool {
        self.method == BoundsMethod::Simplex
    }
}

/// Lower and upper coherent previsions of `target` given the assessment.
pub fn extension_bounds(
    items: &[Assessed],
    m: &Assessment,
    target: &ConditionalRQ,
) -> Result<ExtensionBounds, CoherenceError> {
    let ambient = common_ambient(items)?;
    if !Arc::ptr_eq(&ambient, target.ambient()) {
        return Err(CoherenceError::AmbientMismatch);
    }
    let plain = |x: &ConditionalRQ| match x.prevision().as_symbol() {
        Some(PrevisionSymbol::Conj(s)) => Some(*s),
        _ => None,
    };
    let targets: Option<Vec<IndexSet>> = items.iter().map(|a| plain(&a.crq)).collect();
    if let (Some(known), Some(t)) = (targets, plain(target)) {
        if ambient.basic_events_independent()? {
            let mu: Vec<Rational> = items.iter().map(|a| a.prevision.clone()).collect();
            return simplex_bounds(ambient.n(), &known, &mu, t);
        }
    }
    hull_bounds(items, m, target)
}

fn simplex_bounds(
    n: usize,
    known: &[IndexSet],
    mu: &[Rational],
    target: IndexSet,
) -> Result<ExtensionBounds, CoherenceError> {
    let patterns = SignedSubset::all_over(IndexSet::full(n));
    let column = |s: IndexSet| -> Vec<Rational> {
        patterns
            .iter()
            .map(|p| {
                if s.is_subset(p.positives) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    let mut p = LpProblem::new(patterns.len());
    for (s, x) in known.iter().zip(mu) {
        p.constrain(column(*s), Relation::Eq, x.clone());
    }
    p.constrain(vec![Rational::one(); patterns.len()], Relation::Eq, Rational::one());
    let optimum = |sense| -> Result<Option<Rational>, CoherenceError> {
        match lp_solve(&p.clone().with_objective(column(target), sense))? {
            LpResult::Optimal { value, .. } => Ok(Some(value)),
            _ => Ok(None),
        }
    };
    let (Some(lower), Some(upper)) = (optimum(Sense::Minimize)?, optimum(Sense::Maximize)?) else {
        let failure = Failure::Unsolvable {
            level: 0,
            indices: IndexSet::full(known.len()),
        };
        return Err(CoherenceError::Incoherent(Box::new(Verdict {
            coherent: false,
            witness: Witness::Recursion { levels: Vec::new() },
            failure: Some(failure),
        })));
    };
    Ok(ExtensionBounds {
        lower,
        upper,
        method: BoundsMethod::Simplex,
        lower_certified: true,
        upper_certified: true,
        midpoint_certified: true,
    })
}

fn hull_bounds(
    items: &[Assessed],
    m: &Assessment,
    target: &ConditionalRQ,
) -> Result<ExtensionBounds, CoherenceError> {
    let verdict = check_coherence(items, m)?;
    if !verdict.coherent {
        return Err(CoherenceError::Incoherent(Box::new(verdict)));
    }
    let ambient = Arc::clone(target.ambient());
    let target_value = |row: usize| -> Result<Rational, CoherenceError> {
        target
            .value(row)
            .eval(m)
            .map_err(|e| CoherenceError::UnresolvedTarget(e.0.to_string()))
    };
    let (lower, upper) = {
        let mut indices = IndexSet::full(items.len());
        loop {
            if indices.is_empty() {
                // the target alone: anything between its extreme values
                let values = (0..ambient.row_count())
                    .filter(|&r| target.conditioning()[r])
                    .map(target_value)
                    .collect::<Result<Vec<_>, _>>()?;
                let lo = values.iter().min().cloned().unwrap_or_else(Rational::zero);
                let hi = values.iter().max().cloned().unwrap_or_else(Rational::zero);
                break (lo, hi);
            }
            let rows: Vec<usize> = (0..ambient.row_count())
                .filter(|&r| {
                    target.conditioning()[r] || indices.iter().any(|i| items[i].crq.conditioning()[r])
                })
                .collect();
            if let Some(bounds) = fractional_bounds(items, indices, &rows, m, target, &target_value)? {
                break bounds;
            }
            let points = build_points(items, indices, m)?;
            let mu: Vec<Rational> = indices.iter().map(|i| items[i].prevision.clone()).collect();
            let LpResult::Optimal { x, .. } = solve_sigma(&points, &mu)? else {
                unreachable!("the assessment was found coherent");
            };
            indices = compute_i0(items, indices, &points, &mu, &x)?;
        }
    };
    let certify = |v: &Rational| -> Result<bool, CoherenceError> {
        let mut extended = items.to_vec();
        extended.push(Assessed::new(target.clone(), v.clone()));
        let mut m2 = m.clone();
        if let Some(sym) = target.prevision().as_symbol() {
            m2.insert(sym.clone(), v.clone());
        }
        Ok(check_coherence(&extended, &m2)?.coherent)
    };
    let mid = (&lower + &upper) / Rational::from_integer(2.into());
    Ok(ExtensionBounds {
        lower_certified: certify(&lower)?,
        upper_certified: certify(&upper)?,
        midpoint_certified: certify(&mid)?,
        lower,
        upper,
        method: BoundsMethod::Hull,
    })
}

/// `min`/`max` of `Σ_{H_t} λ_h t_h / Σ_{H_t} λ_h` over the solutions of `Σ`
/// for the given subfamily, by the Charnes-Cooper substitution `w = τλ`.
/// `None` when every solution puts zero mass on the target's conditioning event.
fn fractional_bounds(
    items: &[Assessed],
    indices: IndexSet,
    rows: &[usize],
    m: &Assessment,
    target: &ConditionalRQ,
    target_value: &dyn Fn(usize) -> Result<Rational, CoherenceError>,
) -> Result<Option<(Rational, Rational)>, CoherenceError> {
    let width = rows.len() + 1;
    let mut p = LpProblem::new(width);
    for i in indices.iter() {
        let mut coeffs = rows
            .iter()
            .map(|&r| coordinate(&items[i], r, m))
            .collect::<Result<Vec<_>, _>>()?;
        coeffs.push(-items[i].prevision.clone());
        p.constrain(coeffs, Relation::Eq, Rational::zero());
    }
    let mut total = vec![Rational::one(); rows.len()];
    total.push(-Rational::one());
    p.constrain(total, Relation::Eq, Rational::zero());
    let mut inside: Vec<Rational> = rows
        .iter()
        .map(|&r| {
            if target.conditioning()[r] {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    inside.push(Rational::zero());
    p.constrain(inside, Relation::Eq, Rational::one());
    let mut objective = rows
        .iter()
        .map(|&r| {
            if target.conditioning()[r] {
                target_value(r)
            } else {
                Ok(Rational::zero())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    objective.push(Rational::zero());
    let lo = lp_solve(&p.clone().with_objective(objective.clone(), Sense::Minimize))?;
    let hi = lp_solve(&p.with_objective(objective, Sense::Maximize))?;
    match (lo, hi) {
        (LpResult::Optimal { value: a, .. }, LpResult::Optimal { value: b, .. }) => Ok(Some((a, b))),
        _ => Ok(None),
    }
}
