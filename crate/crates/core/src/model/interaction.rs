use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SutModel;

/// A partial assignment of values to distinct factors, kept sorted by factor
/// index. The empty interaction is the unique 0-way interaction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Interaction {
    pairs: Vec<(usize, usize)>,
}

impl Interaction {
    /// The 0-way interaction, covered by every test.
    pub fn empty() -> Self {
        Interaction::default()
    }

    /// Builds the canonical form of `pairs`. Repeated identical pairs collapse;
    /// two different values for one factor are rejected.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::input(format!(
                "interaction assigns factor {} twice ({} and {})",
                w[0].0, w[0].1, w[1].1
            )));
        }
        Ok(Interaction { pairs })
    }

    /// Builds from pairs already sorted by distinct factor index.
    pub(crate) fn from_sorted(pairs: Vec<(usize, usize)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        Interaction { pairs }
    }

    /// The interaction of a full test restricted to `factors` (sorted).
    pub fn project(values: &[usize], factors: &[usize]) -> Self {
        Interaction::from_sorted(factors.iter().map(|&f| (f, values[f])).collect())
    }

    pub fn strength(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn factors(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn value_of(&self, factor: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&factor, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// `T ⊆ σ` for a full test `σ`.
    pub fn is_covered_by(&self, values: &[usize]) -> bool {
        self.pairs.iter().all(|&(f, v)| values[f] == v)
    }

    /// Like [`is_covered_by`](Self::is_covered_by) on a partial assignment;
    /// unassigned factors do not cover.
    pub fn is_covered_by_partial(&self, values: &[Option<usize>]) -> bool {
        self.pairs.iter().all(|&(f, v)| values[f] == Some(v))
    }

    pub fn is_subset_of(&self, other: &Interaction) -> bool {
        self.pairs.len() <= other.pairs.len()
            && self.pairs.iter().all(|&(f, v)| other.value_of(f) == Some(v))
    }

    pub fn is_strict_subset_of(&self, other: &Interaction) -> bool {
        self.pairs.len() < other.pairs.len() && self.is_subset_of(other)
    }

    /// Union of two interactions, or `None` when they disagree on a factor.
    pub fn merge(&self, other: &Interaction) -> Option<Interaction> {
        let mut pairs = Vec::with_capacity(self.pairs.len() + other.pairs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.pairs.len() && j < other.pairs.len() {
            let (a, b) = (self.pairs[i], other.pairs[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    pairs.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    pairs.push(b);
                    j += 1;
                }
                Ordering::Equal if a.1 == b.1 => {
                    pairs.push(a);
                    i += 1;
                    j += 1;
                }
                Ordering::Equal => return None,
            }
        }
        pairs.extend_from_slice(&self.pairs[i..]);
        pairs.extend_from_slice(&other.pairs[j..]);
        Some(Interaction { pairs })
    }

    /// Checks factor and value indices against `model`.
    pub fn check(&self, model: &SutModel) -> Result<()> {
        for &(f, v) in &self.pairs {
            let factor = model
                .factors()
                .get(f)
                .ok_or_else(|| Error::input(format!("factor index {f} out of range (k = {})", model.k())))?;
            if v >= factor.len() {
                return Err(Error::input(format!(
                    "value index {v} out of range for factor {} ({} values)",
                    factor.name(),
                    factor.len()
                )));
            }
        }
        Ok(())
    }

    /// Renders with factor and value names, e.g. `{F2=0, F3=0}`.
    pub fn display<'a>(&'a self, model: &'a SutModel) -> impl fmt::Display + 'a {
        Named { interaction: self, model }
    }
}

impl Ord for Interaction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pairs
            .len()
            .cmp(&other.pairs.len())
            .then_with(|| self.pairs.cmp(&other.pairs))
    }
}

impl PartialOrd for Interaction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Index form, 0-based: `{(1,0),(2,0)}`.
impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (fac, val)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({fac},{val})")?;
        }
        f.write_str("}")
    }
}

struct Named<'a> {
    interaction: &'a Interaction,
    model: &'a SutModel,
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, &(fac, val)) in self.interaction.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let factor = &self.model.factors()[fac];
            write!(f, "{}={}", factor.name(), factor.values()[val])?;
        }
        f.write_str("}")
    }
}

/// A set of interactions in canonical order. The empty set is distinct from
/// the set holding only the 0-way interaction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InteractionSet {
    members: Vec<Interaction>,
}

impl InteractionSet {
    pub fn empty() -> Self {
        InteractionSet::default()
    }

    pub fn new(members: impl IntoIterator<Item = Interaction>) -> Self {
        let mut members: Vec<_> = members.into_iter().collect();
        members.sort();
        members.dedup();
        InteractionSet { members }
    }

    pub fn singleton(member: Interaction) -> Self {
        InteractionSet { members: vec![member] }
    }

    pub fn members(&self) -> &[Interaction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, t: &Interaction) -> bool {
        self.members.binary_search(t).is_ok()
    }

    /// `σ` covers some member.
    pub fn is_hit_by(&self, values: &[usize]) -> bool {
        self.members.iter().any(|t| t.is_covered_by(values))
    }

    pub fn union(&self, other: &InteractionSet) -> InteractionSet {
        InteractionSet::new(self.members.iter().chain(&other.members).cloned())
    }

    pub fn display<'a>(&'a self, model: &'a SutModel) -> impl fmt::Display + 'a {
        NamedSet { set: self, model }
    }
}

impl Ord for InteractionSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members
            .len()
            .cmp(&other.members.len())
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for InteractionSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for InteractionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

struct NamedSet<'a> {
    set: &'a InteractionSet,
    model: &'a SutModel,
}

impl fmt::Display for NamedSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.set.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", t.display(self.model))?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn it(pairs: &[(usize, usize)]) -> Interaction {
        Interaction::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn rejects_conflicting_factor() {
        assert!(Interaction::new([(0, 1), (0, 2)]).is_err());
        assert_eq!(Interaction::new([(0, 1), (0, 1)]).unwrap().strength(), 1);
    }

    #[test]
    fn subset_relations() {
        let a = it(&[(1, 1)]);
        let b = it(&[(1, 1), (2, 0)]);
        assert!(a.is_strict_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(Interaction::empty().is_strict_subset_of(&a));
        assert!(!a.is_strict_subset_of(&a));
    }

    #[test]
    fn merge_detects_conflict() {
        assert_eq!(it(&[(0, 1)]).merge(&it(&[(2, 0)])), Some(it(&[(0, 1), (2, 0)])));
        assert_eq!(it(&[(0, 1)]).merge(&it(&[(0, 0)])), None);
    }

    #[test]
    fn empty_set_differs_from_set_of_empty_interaction() {
        assert_ne!(InteractionSet::empty(), InteractionSet::singleton(Interaction::empty()));
    }

    proptest! {
        #[test]
        fn canonical_form_ignores_input_order(mut pairs in proptest::collection::btree_map(0usize..8, 0usize..4, 0..6)
            .prop_map(|m| m.into_iter().collect::<Vec<_>>()), seed in any::<u64>()) {
            let a = Interaction::new(pairs.iter().copied()).unwrap();
            // deterministic shuffle
            let n = pairs.len();
            if n > 1 {
                for i in 0..n {
                    let j = (seed.rotate_left(i as u32) as usize) % n;
                    pairs.swap(i, j);
                }
            }
            let doubled: Vec<_> = pairs.iter().chain(pairs.iter()).copied().collect();
            let b = Interaction::new(doubled).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
