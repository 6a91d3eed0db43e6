//! Conjunctions and disjunctions of conditional events, represented as
//! conditional random quantities with exact rational values, together
//! with an exact coherence checker for prevision assessments on them.
//!
//! The usual flow is: declare atoms and constraints in a [`Universe`],
//! build an [`Ambient`] from a family of [`ConditionalEvent`]s, construct
//! compound objects with the functions in [`compound`], and check an
//! assessment with [`coherence::check_coherence`].

pub mod affine;
pub mod bounds;
pub mod cli;
pub mod coherence;
pub mod compound;
pub mod dsl;
pub mod event_algebra;
pub mod index_set;
pub mod lp;
pub mod rational;

pub use affine::{AffineValue, Assessment, PrevisionSymbol};
pub use compound::{Ambient, ConditionalRQ};
pub use event_algebra::{ConditionalEvent, ConstraintSet, EventExpr, Sign, Universe};
pub use index_set::{IndexSet, SignedSubset};
pub use rational::Rational;
