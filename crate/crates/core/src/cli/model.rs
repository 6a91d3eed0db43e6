//! Turns a parsed problem file into quantities and assessments.

use std::sync::Arc;

use crate::affine::{Assessment, PrevisionSymbol};
use crate::coherence::{
    check_coherence, extension_bounds, fast_verdict, Assessed, CoherenceError, ExtensionBounds, Verdict,
};
use crate::compound::{
    conjunction, disjunction, quasi_conjunction, signed_conjunction, Ambient, ConditionalRQ,
};
use crate::dsl::{ProblemFile, Target};
use crate::event_algebra::{ConstraintSet, Universe};
use crate::index_set::{IndexSet, SignedSubset};
use crate::rational::Rational;

use super::CliError;

/// A problem file with its family built and its assessments attached.
pub struct Model {
    pub file: ProblemFile,
    pub ambient: Arc<Ambient>,
    pub assessment: Assessment,
    pub items: Vec<(Target, Assessed)>,
}

/// Which checker a coherence query used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fast,
    General,
}

impl Model {
    pub fn build(file: ProblemFile) -> Result<Model, CliError> {
        let universe = Universe::new(file.atoms.clone(), ConstraintSet(file.constraints.clone()))?;
        let family = file.conditionals.iter().map(|(_, ce)| ce.clone()).collect();
        let ambient = Ambient::new(universe, family)?;
        let mut model = Model {
            file,
            ambient,
            assessment: Assessment::new(),
            items: Vec::new(),
        };
        let mut seen: Vec<(PrevisionSymbol, Rational)> = Vec::new();
        for (target, value) in model.file.assessments.clone() {
            let key = model.key(&target);
            if let Some((_, v)) = seen.iter().find(|(k, _)| *k == key) {
                if *v != value {
                    return Err(CliError::Input(format!("P({target}) is assessed twice with different values")));
                }
                continue;
            }
            seen.push((key.clone(), value.clone()));
            if matches!(key, PrevisionSymbol::Conj(_) | PrevisionSymbol::Quasi(_)) {
                model.assessment.insert(key, value.clone());
            }
            let crq = model.resolve(&target)?;
            model.items.push((target, Assessed::new(crq, value)));
        }
        Ok(model)
    }

    pub fn index_of(&self, name: &str) -> usize {
        self.file
            .conditionals
            .iter()
            .position(|(n, _)| n == name)
            .expect("names are checked by the parser")
    }

    fn indices(&self, names: &[String]) -> IndexSet {
        IndexSet::from_indices(names.iter().map(|n| self.index_of(n)))
    }

    /// The prevision symbol naming `target`.
    pub fn key(&self, target: &Target) -> PrevisionSymbol {
        match target {
            Target::Conjunction(lits) => {
                let pos = IndexSet::from_indices(lits.iter().filter(|l| !l.negated).map(|l| self.index_of(&l.name)));
                let neg = IndexSet::from_indices(lits.iter().filter(|l| l.negated).map(|l| self.index_of(&l.name)));
                if neg.is_empty() {
                    PrevisionSymbol::Conj(pos)
                } else {
                    PrevisionSymbol::Signed(SignedSubset::new(pos, neg))
                }
            }
            Target::Disjunction(ns) => PrevisionSymbol::Disj(self.indices(ns)),
            Target::Quasi(ns) => PrevisionSymbol::Quasi(self.indices(ns)),
        }
    }

    pub fn resolve(&self, target: &Target) -> Result<ConditionalRQ, CliError> {
        let crq = match self.key(target) {
            PrevisionSymbol::Conj(s) => conjunction(&self.ambient, s)?,
            PrevisionSymbol::Signed(s) => signed_conjunction(&self.ambient, s)?,
            PrevisionSymbol::Disj(s) => disjunction(&self.ambient, s)?,
            PrevisionSymbol::Quasi(s) => quasi_conjunction(&self.ambient, s)?,
            PrevisionSymbol::Named(_) => unreachable!("targets never resolve to named symbols"),
        };
        Ok(crq.with_label(target.to_string()))
    }

    fn assessed(&self) -> Vec<Assessed> {
        self.items.iter().map(|(_, a)| a.clone()).collect()
    }

    /// True when the assessment covers exactly every conjunction of the
    /// family and the basic events are logically independent.
    pub fn fast_path_applies(&self) -> Result<bool, CliError> {
        let n = self.ambient.n();
        if n == 0 || self.items.len() != (1usize << n) - 1 {
            return Ok(false);
        }
        let all_plain = self
            .items
            .iter()
            .all(|(t, _)| matches!(self.key(t), PrevisionSymbol::Conj(_)));
        Ok(all_plain && self.ambient.basic_events_independent()?)
    }

    pub fn check(&self) -> Result<(Method, Verdict), CliError> {
        if self.items.is_empty() {
            return Err(CliError::Input("nothing is assessed".into()));
        }
        if self.fast_path_applies()? {
            return Ok((Method::Fast, fast_verdict(&self.assessment, self.ambient.n())?));
        }
        Ok((Method::General, check_coherence(&self.assessed(), &self.assessment)?))
    }

    pub fn bounds(&self, target: &Target) -> Result<ExtensionBounds, CliError> {
        if self.items.is_empty() {
            return Err(CliError::Input("nothing is assessed".into()));
        }
        let crq = self.resolve(target)?;
        match extension_bounds(&self.assessed(), &self.assessment, &crq) {
            Err(CoherenceError::Incoherent(v)) => Err(CliError::Incoherent(v)),
            other => Ok(other?),
        }
    }
}
