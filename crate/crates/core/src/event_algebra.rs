//! Boolean events over named atoms, logical constraints, and the
//! constituents generated by a family of conditional events.
//!
//! Satisfiability is decided by enumerating every truth assignment over
//! the declared atoms that satisfies the constraints. This keeps every
//! answer exact and is fast enough for a dozen or so atoms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{BitAnd, BitOr, Not};

use serde::Serialize;
use thiserror::Error;

/// Upper bound on the number of declared atoms (worlds are enumerated).
pub const MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("atom `{0}` declared twice")]
    DuplicateAtom(String),
    #[error("too many atoms ({0}); at most {MAX_ATOMS} are supported")]
    TooManyAtoms(usize),
    #[error("the constraints are unsatisfiable")]
    UnsatisfiableConstraints,
    #[error("antecedent of conditional #{index} ({event}) is impossible under the constraints")]
    ImpossibleAntecedent { index: usize, event: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventExpr {
    True,
    False,
    Atom(String),
    Not(Box<EventExpr>),
    And(Box<EventExpr>, Box<EventExpr>),
    Or(Box<EventExpr>, Box<EventExpr>),
}

impl EventExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        EventExpr::Atom(name.into())
    }

    pub fn and(self, other: EventExpr) -> Self {
        EventExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: EventExpr) -> Self {
        EventExpr::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        EventExpr::Not(Box::new(self))
    }

    /// Conjunction of all items, `True` when empty.
    pub fn all(items: impl IntoIterator<Item = EventExpr>) -> Self {
        items
            .into_iter()
            .reduce(EventExpr::and)
            .unwrap_or(EventExpr::True)
    }

    /// Disjunction of all items, `False` when empty.
    pub fn any(items: impl IntoIterator<Item = EventExpr>) -> Self {
        items
            .into_iter()
            .reduce(EventExpr::or)
            .unwrap_or(EventExpr::False)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            EventExpr::True | EventExpr::False => {}
            EventExpr::Atom(name) => {
                out.insert(name.clone());
            }
            EventExpr::Not(e) => e.collect_atoms(out),
            EventExpr::And(a, b) | EventExpr::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            EventExpr::Or(..) => 1,
            EventExpr::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_child(&self, child: &EventExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < self.precedence() {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventExpr::True => f.write_str("true"),
            EventExpr::False => f.write_str("false"),
            EventExpr::Atom(name) => f.write_str(name),
            EventExpr::Not(e) => {
                f.write_str("!")?;
                self.fmt_child(e, f)
            }
            EventExpr::And(a, b) => {
                self.fmt_child(a, f)?;
                f.write_str(" & ")?;
                // right operands of equal precedence are parenthesised so the
                // left-associative parser rebuilds the same tree
                if b.precedence() <= self.precedence() {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            EventExpr::Or(a, b) => {
                self.fmt_child(a, f)?;
                f.write_str(" v ")?;
                if b.precedence() <= self.precedence() {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl BitAnd for EventExpr {
    type Output = EventExpr;
    fn bitand(self, rhs: EventExpr) -> EventExpr {
        self.and(rhs)
    }
}

impl BitOr for EventExpr {
    type Output = EventExpr;
    fn bitor(self, rhs: EventExpr) -> EventExpr {
        self.or(rhs)
    }
}

impl Not for EventExpr {
    type Output = EventExpr;
    fn not(self) -> EventExpr {
        self.negate()
    }
}

/// Evaluates `expr` under a truth assignment keyed by atom name.
pub fn evaluate(expr: &EventExpr, assignment: &BTreeMap<String, bool>) -> Result<bool, EventError> {
    Ok(match expr {
        EventExpr::True => true,
        EventExpr::False => false,
        EventExpr::Atom(name) => *assignment
            .get(name)
            .ok_or_else(|| EventError::UnknownAtom(name.clone()))?,
        EventExpr::Not(e) => !evaluate(e, assignment)?,
        EventExpr::And(a, b) => evaluate(a, assignment)? & evaluate(b, assignment)?,
        EventExpr::Or(a, b) => evaluate(a, assignment)? | evaluate(b, assignment)?,
    })
}

/// Expressions asserted to be identically true, e.g. `!(H & K)` for `HK = ∅`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet(pub Vec<EventExpr>);

impl ConstraintSet {
    pub fn new() -> Self {
        ConstraintSet(Vec::new())
    }

    pub fn with(mut self, e: EventExpr) -> Self {
        self.0.push(e);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = &EventExpr> {
        self.0.iter()
    }
}

/// An expression with atom names resolved to bit positions.
#[derive(Debug, Clone)]
pub enum Compiled {
    Const(bool),
    Atom(u32),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub fn eval(&self, world: u64) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Atom(i) => world >> i & 1 == 1,
            Compiled::Not(e) => !e.eval(world),
            Compiled::And(a, b) => a.eval(world) && b.eval(world),
            Compiled::Or(a, b) => a.eval(world) || b.eval(world),
        }
    }
}

/// Declared atoms plus constraints, with the satisfying worlds precomputed.
/// A world is a bitmask: bit `i` is the truth value of atom `i`.
#[derive(Debug, Clone)]
pub struct Universe {
    atoms: Vec<String>,
    index: HashMap<String, u32>,
    constraints: ConstraintSet,
    worlds: Vec<u64>,
}

impl Universe {
    pub fn new<S: Into<String>>(
        atoms: impl IntoIterator<Item = S>,
        constraints: ConstraintSet,
    ) -> Result<Self, EventError> {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.len() > MAX_ATOMS {
            return Err(EventError::TooManyAtoms(atoms.len()));
        }
        let mut index = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            if index.insert(a.clone(), i as u32).is_some() {
                return Err(EventError::DuplicateAtom(a.clone()));
            }
        }
        let mut universe = Universe {
            atoms,
            index,
            constraints: ConstraintSet::new(),
            worlds: Vec::new(),
        };
        let compiled = constraints
            .iter()
            .map(|c| universe.compile(c))
            .collect::<Result<Vec<_>, _>>()?;
        universe.worlds = (0..1u64 << universe.atoms.len())
            .filter(|&w| compiled.iter().all(|c| c.eval(w)))
            .collect();
        if universe.worlds.is_empty() {
            return Err(EventError::UnsatisfiableConstraints);
        }
        universe.constraints = constraints;
        Ok(universe)
    }

    /// A universe whose atoms are exactly those mentioned by `exprs`, unconstrained.
    pub fn free_over<'a>(exprs: impl IntoIterator<Item = &'a EventExpr>) -> Result<Self, EventError> {
        let mut names = BTreeSet::new();
        for e in exprs {
            names.extend(e.atoms());
        }
        Universe::new(names, ConstraintSet::new())
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    /// Worlds satisfying every constraint, in increasing bitmask order.
    pub fn worlds(&self) -> &[u64] {
        &self.worlds
    }

    pub fn compile(&self, expr: &EventExpr) -> Result<Compiled, EventError> {
        Ok(match expr {
            EventExpr::True => Compiled::Const(true),
            EventExpr::False => Compiled::Const(false),
            EventExpr::Atom(name) => Compiled::Atom(
                *self
                    .index
                    .get(name)
                    .ok_or_else(|| EventError::UnknownAtom(name.clone()))?,
            ),
            EventExpr::Not(e) => Compiled::Not(Box::new(self.compile(e)?)),
            EventExpr::And(a, b) => Compiled::And(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            EventExpr::Or(a, b) => Compiled::Or(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
        })
    }

    pub fn is_satisfiable(&self, expr: &EventExpr) -> Result<bool, EventError> {
        let c = self.compile(expr)?;
        Ok(self.worlds.iter().any(|&w| c.eval(w)))
    }

    /// True when `expr` holds in every admissible world.
    pub fn is_valid(&self, expr: &EventExpr) -> Result<bool, EventError> {
        let c = self.compile(expr)?;
        Ok(self.worlds.iter().all(|&w| c.eval(w)))
    }

    pub fn assignment(&self, world: u64) -> BTreeMap<String, bool> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), world >> i & 1 == 1))
            .collect()
    }
}

/// `e1 ⊆ e2` under the universe's constraints.
pub fn implies(e1: &EventExpr, e2: &EventExpr, universe: &Universe) -> Result<bool, EventError> {
    Ok(!universe.is_satisfiable(&e1.clone().and(e2.clone().negate()))?)
}

/// Goodman–Nguyen inclusion: `E1H1 ⊆ E2H2` and `!E2 H2 ⊆ !E1 H1`.
pub fn gn_includes(
    c1: &ConditionalEvent,
    c2: &ConditionalEvent,
    universe: &Universe,
) -> Result<bool, EventError> {
    Ok(implies(&c1.true_event(), &c2.true_event(), universe)?
        && implies(&c2.false_event(), &c1.false_event(), universe)?)
}

/// True iff every truth combination of `atoms` is compatible with the constraints.
pub fn check_logical_independence<S: AsRef<str>>(
    atoms: &[S],
    constraints: &ConstraintSet,
) -> Result<bool, EventError> {
    let mut names: BTreeSet<String> = atoms.iter().map(|a| a.as_ref().to_string()).collect();
    for c in constraints.iter() {
        names.extend(c.atoms());
    }
    let universe = Universe::new(names, constraints.clone())?;
    let listed: Vec<EventExpr> = atoms.iter().map(|a| EventExpr::atom(a.as_ref())).collect();
    events_independent(&listed, &universe)
}

/// True iff the events (arbitrary expressions) realize all `2^k` truth combinations.
pub fn events_independent(events: &[EventExpr], universe: &Universe) -> Result<bool, EventError> {
    let compiled = events
        .iter()
        .map(|e| universe.compile(e))
        .collect::<Result<Vec<_>, _>>()?;
    if compiled.len() >= 64 {
        return Ok(false);
    }
    let seen: BTreeSet<u64> = universe
        .worlds()
        .iter()
        .map(|&w| {
            compiled
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, c)| acc | (c.eval(w) as u64) << i)
        })
        .collect();
    Ok(seen.len() as u64 == 1u64 << compiled.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalEvent {
    pub consequent: EventExpr,
    pub antecedent: EventExpr,
}

impl ConditionalEvent {
    pub fn new(consequent: EventExpr, antecedent: EventExpr) -> Self {
        ConditionalEvent {
            consequent,
            antecedent,
        }
    }

    /// `E H`
    pub fn true_event(&self) -> EventExpr {
        self.consequent.clone().and(self.antecedent.clone())
    }

    /// `!E H`
    pub fn false_event(&self) -> EventExpr {
        self.consequent.clone().negate().and(self.antecedent.clone())
    }

    /// `!H`
    pub fn void_event(&self) -> EventExpr {
        self.antecedent.clone().negate()
    }

    /// `!E | H`
    pub fn negated(&self) -> Self {
        ConditionalEvent::new(self.consequent.clone().negate(), self.antecedent.clone())
    }

    /// The quasi conjunction `[(!H1 v E1H1) & (!H2 v E2H2)] | (H1 v H2)`.
    pub fn quasi_conjunction(&self, other: &ConditionalEvent) -> ConditionalEvent {
        let consequent = self
            .void_event()
            .or(self.true_event())
            .and(other.void_event().or(other.true_event()));
        ConditionalEvent::new(consequent, self.antecedent.clone().or(other.antecedent.clone()))
    }
}

impl fmt::Display for ConditionalEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &EventExpr| match e {
            EventExpr::Or(..) => format!("({e})"),
            _ => e.to_string(),
        };
        write!(f, "{} | {}", wrap(&self.consequent), wrap(&self.antecedent))
    }
}

/// State of one conditional event on a constituent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    /// `E H` is true.
    True,
    /// `!E H` is true.
    False,
    /// `!H` is true.
    Void,
}

impl Sign {
    pub fn letter(self) -> char {
        match self {
            Sign::True => 'T',
            Sign::False => 'F',
            Sign::Void => 'V',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constituent {
    /// 1..m for the cells inside `H1 v ... v Hn`, 0 for the all-void cell.
    pub id: usize,
    pub signs: Vec<Sign>,
    /// One admissible world realizing this cell.
    pub witness: u64,
}

impl Constituent {
    pub fn is_all_void(&self) -> bool {
        self.signs.iter().all(|&s| s == Sign::Void)
    }

    pub fn sign(&self, i: usize) -> Sign {
        self.signs[i]
    }

    pub fn sign_string(&self) -> String {
        self.signs.iter().map(|s| s.letter()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ConstituentSet {
    /// `C1..Cm`, lexicographic in sign vectors with T < F < V.
    pub constituents: Vec<Constituent>,
    pub c0: Option<Constituent>,
}

impl ConstituentSet {
    pub fn len(&self) -> usize {
        self.constituents.len() + usize::from(self.c0.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `C1..Cm` followed by `C0` when present.
    pub fn all(&self) -> impl Iterator<Item = &Constituent> {
        self.constituents.iter().chain(self.c0.iter())
    }
}

fn signs_of(world: u64, compiled: &[(Compiled, Compiled)]) -> Vec<Sign> {
    compiled
        .iter()
        .map(|(e, h)| match (h.eval(world), e.eval(world)) {
            (false, _) => Sign::Void,
            (true, true) => Sign::True,
            (true, false) => Sign::False,
        })
        .collect()
}

/// Cells of the partition generated by `family`, one per realizable sign vector.
pub fn enumerate_constituents(
    family: &[ConditionalEvent],
    universe: &Universe,
) -> Result<ConstituentSet, EventError> {
    let mut compiled = Vec::with_capacity(family.len());
    for (index, ce) in family.iter().enumerate() {
        let h = universe.compile(&ce.antecedent)?;
        if !universe.worlds().iter().any(|&w| h.eval(w)) {
            return Err(EventError::ImpossibleAntecedent {
                index: index + 1,
                event: ce.to_string(),
            });
        }
        compiled.push((universe.compile(&ce.consequent)?, h));
    }
    let mut cells: BTreeMap<Vec<Sign>, u64> = BTreeMap::new();
    for &w in universe.worlds() {
        cells.entry(signs_of(w, &compiled)).or_insert(w);
    }
    let mut constituents = Vec::with_capacity(cells.len());
    let mut c0 = None;
    for (signs, witness) in cells {
        if signs.iter().all(|&s| s == Sign::Void) {
            c0 = Some(Constituent {
                id: 0,
                signs,
                witness,
            });
        } else {
            constituents.push(Constituent {
                id: constituents.len() + 1,
                signs,
                witness,
            });
        }
    }
    Ok(ConstituentSet { constituents, c0 })
}

/// The constituent containing `world`, if the world is admissible.
pub fn locate(
    world: u64,
    family: &[ConditionalEvent],
    universe: &Universe,
    set: &ConstituentSet,
) -> Result<Option<usize>, EventError> {
    let compiled = family
        .iter()
        .map(|ce| Ok((universe.compile(&ce.consequent)?, universe.compile(&ce.antecedent)?)))
        .collect::<Result<Vec<_>, EventError>>()?;
    let signs = signs_of(world, &compiled);
    Ok(set.all().find(|c| c.signs == signs).map(|c| c.id))
}
