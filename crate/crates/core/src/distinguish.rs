//! Distinguishability of interaction sets, CLA parameter universes and the
//! partition of a universe into indistinguishability classes.
//!
//! Two sets of valid interactions are distinguishable iff some valid test
//! covers a member of one and no member of the other. Indistinguishability is
//! therefore equality of coverage over the set of all valid tests, an
//! equivalence relation. Classification exploits that: sets are first split
//! by their coverage over any array of valid tests (a cheap necessary
//! condition), then compared against one representative per class with
//! satisfiability probes.

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::array::{ColumnIndex, RowSet, TestArray};
use crate::enumerate::{all_interactions, binomial, enumerate_valid_tests, valid_interactions_with, Backend, Limits, Mode};
use crate::error::{Error, Result};
use crate::model::search::search_refs;
use crate::model::{Interaction, InteractionSet, SutModel};
use crate::par::{into_par_iter, par_iter};
#[allow(unused_imports)]
use crate::par::prelude::*;

/// Largest valid-test set kept as an exact distinguishability oracle.
pub const WITNESS_POOL_CAP: usize = 4096;

/// `(d,t)` with the bar flags: `bar_d` admits every set size `0..=d`,
/// `bar_t` every interaction strength `0..=t` (and requires independence).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClaParams {
    pub d: usize,
    pub t: usize,
    pub bar_d: bool,
    pub bar_t: bool,
}

impl ClaParams {
    pub const fn new(d: usize, t: usize) -> Self {
        ClaParams { d, t, bar_d: false, bar_t: false }
    }

    pub const fn with_flags(d: usize, t: usize, bar_d: bool, bar_t: bool) -> Self {
        ClaParams { d, t, bar_d, bar_t }
    }

    pub const fn bar_d(mut self) -> Self {
        self.bar_d = true;
        self
    }

    pub const fn bar_t(mut self) -> Self {
        self.bar_t = true;
        self
    }

    /// Admissible interaction-set sizes.
    pub fn sizes(&self) -> RangeInclusive<usize> {
        if self.bar_d {
            0..=self.d
        } else {
            self.d..=self.d
        }
    }

    pub fn mode(&self) -> Mode {
        if self.bar_t {
            Mode::UpTo
        } else {
            Mode::Exact
        }
    }
}

/// ASCII form, e.g. `(2bar,1)` or `(1,2bar)`.
impl fmt::Display for ClaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bar = |b: bool| if b { "bar" } else { "" };
        write!(f, "({}{},{}{})", self.d, bar(self.bar_d), self.t, bar(self.bar_t))
    }
}

/// `T ⊂ T'` holds for no two members.
pub fn independent(ts: &InteractionSet) -> bool {
    let m = ts.members();
    !m.iter().enumerate().any(|(i, a)| m[i + 1..].iter().any(|b| a.is_strict_subset_of(b) || b.is_strict_subset_of(a)))
}

/// Whether some valid test covers a member of exactly one of the two sets.
pub fn distinguishable(model: &SutModel, a: &InteractionSet, b: &InteractionSet) -> Result<bool> {
    for t in a.members().iter().chain(b.members()) {
        t.check(model)?;
    }
    let a: Vec<&Interaction> = a.members().iter().collect();
    let b: Vec<&Interaction> = b.members().iter().collect();
    Ok(probe_pair(model, &a, &b))
}

fn probe_pair(model: &SutModel, a: &[&Interaction], b: &[&Interaction]) -> bool {
    a.iter().any(|t| search_refs(model, t, b).is_some()) || b.iter().any(|t| search_refs(model, t, a).is_some())
}

/// Every interaction set admitted by a parameter choice. Members are indices
/// into a canonical interaction pool; sets come out in canonical order.
#[derive(Clone, Debug)]
pub struct Universe {
    params: ClaParams,
    interactions: Vec<Interaction>,
    sets: Vec<Vec<u32>>,
}

impl Universe {
    /// Sets of valid interactions (`VI_t` or `V̄I_t`).
    pub fn build(model: &SutModel, params: ClaParams, limits: &Limits) -> Result<Self> {
        let pool = valid_interactions_with(model, params.t, params.mode(), Backend::Auto, limits)?;
        Universe::from_pool(params, pool, limits)
    }

    /// Sets of syntactic interactions (`I_t` or `Ī_t`), validity ignored.
    pub fn build_syntactic(model: &SutModel, params: ClaParams, limits: &Limits) -> Result<Self> {
        if params.t > model.k() {
            return Err(Error::input(format!("strength {} exceeds the number of factors ({})", params.t, model.k())));
        }
        let strengths = match params.mode() {
            Mode::Exact => params.t..=params.t,
            Mode::UpTo => 0..=params.t,
        };
        let mut pool = Vec::new();
        for s in strengths {
            pool.extend(all_interactions(model, s)?);
        }
        Universe::from_pool(params, pool, limits)
    }

    fn from_pool(params: ClaParams, interactions: Vec<Interaction>, limits: &Limits) -> Result<Self> {
        let n = interactions.len();
        let raw: u128 = params.sizes().map(|s| binomial(n, s)).fold(0u128, |a, b| a.saturating_add(b));
        if raw > limits.max_universe as u128 {
            return Err(Error::cap(
                format!("{params} universe over {n} interactions ({raw} interaction sets)"),
                limits.max_universe,
            ));
        }
        let strict = |a: u32, b: u32| {
            let (x, y) = (&interactions[a as usize], &interactions[b as usize]);
            x.is_strict_subset_of(y) || y.is_strict_subset_of(x)
        };
        let mut sets = Vec::new();
        for s in params.sizes() {
            for combo in (0..n as u32).combinations(s) {
                if params.bar_t && s >= 2 && combo.iter().tuple_combinations().any(|(&a, &b)| strict(a, b)) {
                    continue;
                }
                sets.push(combo);
            }
        }
        Ok(Universe { params, interactions, sets })
    }

    pub fn params(&self) -> ClaParams {
        self.params
    }

    /// The interaction pool the sets draw from.
    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, i: usize) -> InteractionSet {
        InteractionSet::new(self.members(i).cloned())
    }

    pub fn members(&self, i: usize) -> impl Iterator<Item = &Interaction> + '_ {
        self.sets[i].iter().map(|&m| &self.interactions[m as usize])
    }

    /// Position of `set` in the universe, if admitted.
    pub fn position(&self, set: &InteractionSet) -> Option<usize> {
        let ids: Option<Vec<u32>> = set
            .members()
            .iter()
            .map(|t| self.interactions.binary_search(t).ok().map(|i| i as u32))
            .collect();
        let mut ids = ids?;
        ids.sort_unstable();
        self.sets.iter().position(|s| *s == ids)
    }

    /// `ρ(𝒯)` of every set over the indexed array.
    pub fn signatures(&self, index: &ColumnIndex) -> Vec<RowSet> {
        let per_interaction: Vec<RowSet> = par_iter!(self.interactions).map(|t| index.covering_rows(t)).collect();
        par_iter!(self.sets)
            .map(|s| {
                let mut rows = RowSet::new(index.rows());
                for &m in s {
                    rows.union_with(&per_interaction[m as usize]);
                }
                rows
            })
            .collect()
    }

    fn refs(&self, i: usize) -> Vec<&Interaction> {
        self.members(i).collect()
    }
}

/// Groups `members` by equal signature, preserving first-seen order.
pub(crate) fn group_by_signature(members: &[usize], signatures: &[RowSet]) -> Vec<Vec<usize>> {
    let mut slot: HashMap<&RowSet, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in members {
        let g = *slot.entry(&signatures[i]).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// Decides indistinguishability classes for a model.
///
/// When the valid tests fit [`WITNESS_POOL_CAP`], their coverage decides
/// every question exactly and no probes run. Otherwise an optional screening
/// array of valid tests splits candidates cheaply and probes settle the rest.
pub struct Distinguisher<'m> {
    model: &'m SutModel,
    screen: Option<ColumnIndex>,
    complete: bool,
}

impl<'m> Distinguisher<'m> {
    /// Uses the full valid-test set as witness pool when it is small enough,
    /// probes otherwise.
    pub fn new(model: &'m SutModel, limits: &Limits) -> Result<Self> {
        let cap = limits.max_tests.min(WITNESS_POOL_CAP);
        if model.total_tests() <= limits.max_tests as u128 {
            match enumerate_valid_tests(model, cap) {
                Ok(tests) => {
                    let array = TestArray::from_rows(model.k(), tests)?;
                    let index = ColumnIndex::new(&array, &model.domain_sizes());
                    return Ok(Distinguisher { model, screen: Some(index), complete: true });
                }
                Err(Error::CapExceeded { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Distinguisher::probes_only(model))
    }

    /// Pure satisfiability probes with no screen.
    pub fn probes_only(model: &'m SutModel) -> Self {
        Distinguisher { model, screen: None, complete: false }
    }

    /// Probes after splitting by coverage over `screen`, whose rows must all
    /// be valid.
    pub fn with_screen(model: &'m SutModel, screen: &TestArray) -> Self {
        Distinguisher { model, screen: Some(ColumnIndex::new(screen, &model.domain_sizes())), complete: false }
    }

    /// Whether answers come from the exhaustive witness pool.
    pub fn is_exact_pool(&self) -> bool {
        self.complete
    }

    /// Screen signatures for every set of `universe`, if a screen exists.
    pub fn screen(&self, universe: &Universe) -> Option<Vec<RowSet>> {
        self.screen.as_ref().map(|index| universe.signatures(index))
    }

    pub fn distinguishable(&self, universe: &Universe, a: usize, b: usize) -> bool {
        probe_pair(self.model, &universe.refs(a), &universe.refs(b))
    }

    /// Partitions `members` into indistinguishability classes. `screen` must
    /// come from [`Distinguisher::screen`] on the same universe. Classes keep
    /// the order of `members`.
    pub fn classify(&self, universe: &Universe, screen: Option<&[RowSet]>, members: &[usize]) -> Vec<Vec<usize>> {
        let groups = match screen {
            Some(sigs) => group_by_signature(members, sigs),
            None => vec![members.to_vec()],
        };
        if self.complete {
            return groups;
        }
        let mut classes = Vec::new();
        for group in groups {
            let mut local: Vec<Vec<usize>> = Vec::new();
            for i in group {
                match local.iter_mut().find(|c| !self.distinguishable(universe, c[0], i)) {
                    Some(c) => c.push(i),
                    None => local.push(vec![i]),
                }
            }
            classes.extend(local);
        }
        classes.sort_by_key(|c| c[0]);
        classes
    }
}

/// Number of unordered pairs split across different classes.
pub(crate) fn cross_pairs(classes: &[Vec<usize>]) -> u64 {
    let n: u64 = classes.iter().map(|c| c.len() as u64).sum();
    let same: u64 = classes.iter().map(|c| (c.len() as u64).pow(2)).sum();
    (n * n - same) / 2
}

/// Every unordered pair of distinct, indistinguishable sets in the universe
/// of `params`, in canonical order.
pub fn indistinguishable_pairs(
    model: &SutModel,
    params: ClaParams,
    limits: &Limits,
) -> Result<Vec<(InteractionSet, InteractionSet)>> {
    if params.d == 0 {
        return Err(Error::input("d must be at least 1"));
    }
    if params.t == 0 || params.t > model.k() {
        return Err(Error::input(format!("t must lie in 1..={}", model.k())));
    }
    let universe = Universe::build(model, params, limits)?;
    let exact = Distinguisher::new(model, limits)?;
    let fallback;
    let distinguisher = if exact.is_exact_pool() {
        &exact
    } else {
        // A covering array of valid tests makes a far better screen than none.
        let screen = crate::cca::generate_cca(model, params.t, 0, &crate::cca::CcaOptions::default(), limits)?;
        fallback = Distinguisher::with_screen(model, &screen);
        &fallback
    };
    let screen = distinguisher.screen(&universe);
    let all: Vec<usize> = (0..universe.len()).collect();
    let groups = match &screen {
        Some(sigs) => group_by_signature(&all, sigs),
        None => vec![all],
    };
    let classes: Vec<Vec<Vec<usize>>> = into_par_iter!(groups)
        .filter(|g| g.len() > 1)
        .map(|g| distinguisher.classify(&universe, None, &g))
        .collect();
    let mut pairs = Vec::new();
    for class in classes.iter().flatten() {
        for (a, b) in class.iter().tuple_combinations() {
            pairs.push((universe.set(*a), universe.set(*b)));
        }
    }
    pairs.sort();
    Ok(pairs)
}
