//! Small sets of conditional-event indices and their signed variants.
//!
//! Indices are zero-based internally and rendered one-based, so the set
//! `{0, 1}` prints as `12`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// Maximum family size addressable by an [`IndexSet`].
pub const MAX_INDEX: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u32) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_INDEX, "index {i} out of range");
        IndexSet(1 << i)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_INDEX, "family size {n} out of range");
        if n == MAX_INDEX {
            IndexSet(u32::MAX)
        } else {
            IndexSet((1u32 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter()
            .fold(IndexSet::EMPTY, |acc, i| acc.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        self.union(IndexSet::singleton(i))
    }

    pub fn without(self, i: usize) -> Self {
        self.difference(IndexSet::singleton(i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_INDEX && self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        IndexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_INDEX).filter(move |&i| bits & (1 << i) != 0)
    }

    /// All subsets of `self`, the empty set included, in increasing bit order.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let mask = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(IndexSet(cur))
        })
    }

    /// Nonempty subsets of `{0..n-1}` in canonical order (by size, then lexicographic).
    pub fn nonempty_subsets(n: usize) -> Vec<IndexSet> {
        let mut all: Vec<_> = IndexSet::full(n).subsets().filter(|s| !s.is_empty()).collect();
        all.sort();
        all
    }

    fn one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.one_based().cmp(&other.one_based()))
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_indices(f: &mut fmt::Formatter<'_>, parts: &[(usize, bool)]) -> fmt::Result {
    let wide = parts.iter().any(|&(i, _)| i >= 10);
    for (k, &(i, negated)) in parts.iter().enumerate() {
        if wide && k > 0 {
            f.write_str(",")?;
        }
        if negated {
            f.write_str("~")?;
        }
        write!(f, "{i}")?;
    }
    Ok(())
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<_> = self.one_based().into_iter().map(|i| (i, false)).collect();
        write_indices(f, &parts)
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSet({self})")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.one_based())
    }
}

/// A conjunction pattern: indices in `positives` keep their consequent,
/// indices in `negatives` have it negated. The union is the scope.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SignedSubset {
    pub positives: IndexSet,
    pub negatives: IndexSet,
}

impl SignedSubset {
    pub fn new(positives: IndexSet, negatives: IndexSet) -> Self {
        assert!(
            positives.is_disjoint(negatives),
            "an index cannot be both kept and negated"
        );
        SignedSubset {
            positives,
            negatives,
        }
    }

    /// The signed subset over `scope` whose kept indices are `positives`.
    pub fn within(scope: IndexSet, positives: IndexSet) -> Self {
        assert!(positives.is_subset(scope));
        SignedSubset::new(positives, scope.difference(positives))
    }

    pub fn scope(self) -> IndexSet {
        self.positives.union(self.negatives)
    }

    pub fn is_plain(self) -> bool {
        self.negatives.is_empty()
    }

    /// Adds index `i` to the scope, kept (`negated == false`) or negated.
    pub fn extend(self, i: usize, negated: bool) -> Self {
        if negated {
            SignedSubset::new(self.positives, self.negatives.with(i))
        } else {
            SignedSubset::new(self.positives.with(i), self.negatives)
        }
    }

    /// Restriction of the pattern to the indices in `sub`.
    pub fn restrict(self, sub: IndexSet) -> Self {
        SignedSubset::new(
            self.positives.intersection(sub),
            self.negatives.intersection(sub),
        )
    }

    /// All `2^|scope|` sign patterns over `scope`, ordered like sign vectors
    /// with "kept" before "negated" at each position.
    pub fn all_over(scope: IndexSet) -> Vec<SignedSubset> {
        let mut out: Vec<_> = scope
            .subsets()
            .map(|p| SignedSubset::within(scope, p))
            .collect();
        out.sort();
        out
    }
}

impl Ord for SignedSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |s: &SignedSubset| -> Vec<(usize, bool)> {
            s.scope().iter().map(|i| (i, s.negatives.contains(i))).collect()
        };
        self.scope()
            .cmp(&other.scope())
            .then_with(|| key(self).cmp(&key(other)))
    }
}

impl PartialOrd for SignedSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SignedSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scope().is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<_> = self
            .scope()
            .iter()
            .map(|i| (i + 1, self.negatives.contains(i)))
            .collect();
        write_indices(f, &parts)
    }
}

impl fmt::Debug for SignedSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedSubset({self})")
    }
}

impl Serialize for SignedSubset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
