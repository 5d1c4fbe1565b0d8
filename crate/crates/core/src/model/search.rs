use crate::error::Result;

use super::{Interaction, SutModel, Test};

/// Finds a valid test that covers `cover` and fully covers no member of
/// `avoid`, or `None` when no such test exists.
///
/// Factors are split into independent groups: two factors share a group when
/// a constraint or an avoided interaction mentions both. Each group is solved
/// by its own depth-first search over its factors in declaration order, values
/// ascending, cutting a branch as soon as the partial assignment falsifies the
/// constraints (three-valued evaluation) or completes an avoided interaction.
/// Solutions of independent groups combine freely, so the test found is the
/// lexicographically smallest one, and a dead end in one group never
/// re-enumerates the others.
pub fn find_valid_test(model: &SutModel, cover: &Interaction, avoid: &[Interaction]) -> Result<Option<Test>> {
    cover.check(model)?;
    for t in avoid {
        t.check(model)?;
    }
    Ok(search(model, cover, avoid))
}

pub(crate) fn search(model: &SutModel, cover: &Interaction, avoid: &[Interaction]) -> Option<Test> {
    let refs: Vec<&Interaction> = avoid.iter().collect();
    search_refs(model, cover, &refs)
}

pub(crate) fn search_refs(model: &SutModel, cover: &Interaction, avoid: &[&Interaction]) -> Option<Test> {
    if avoid.iter().any(|t| t.is_subset_of(cover)) {
        return None;
    }
    let mut assignment: Vec<Option<usize>> = vec![None; model.k()];
    for &(f, v) in cover.pairs() {
        assignment[f] = Some(v);
    }
    if model.eval_partial(&assignment) == Some(false) {
        return None;
    }
    // Only avoided interactions not already contradicted by the cover matter.
    let live: Vec<&Interaction> = avoid
        .iter()
        .copied()
        .filter(|t| t.pairs().iter().all(|&(f, v)| cover.value_of(f).is_none_or(|c| c == v)))
        .collect();
    let domains = model.domain_sizes();
    let groups = groups(model, &live);
    let mut state = Search { model, live: &live, domains: &domains, assignment };
    for group in groups {
        let free: Vec<usize> = group.into_iter().filter(|&f| state.assignment[f].is_none()).collect();
        if !state.dfs(&free) {
            return None;
        }
    }
    let values: Vec<usize> = state.assignment.into_iter().map(|v| v.expect("assigned")).collect();
    debug_assert!(model.is_valid(&values) && !live.iter().any(|t| t.is_covered_by(&values)));
    Some(Test::new(values))
}

/// Connected factor groups, each sorted, ordered by smallest factor.
fn groups(model: &SutModel, live: &[&Interaction]) -> Vec<Vec<usize>> {
    let k = model.k();
    let mut parent: Vec<usize> = (0..k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut join = |factors: &[usize]| {
        for w in factors.windows(2) {
            let (a, b) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
    };
    for c in model.constraints() {
        let mut factors = Vec::new();
        c.for_each_atom(&mut |f, _| factors.push(f));
        join(&factors);
    }
    for t in live {
        join(&t.factors().collect::<Vec<_>>());
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); k];
    for f in 0..k {
        let r = root(&mut parent, f);
        by_root[r].push(f);
    }
    by_root.into_iter().filter(|g| !g.is_empty()).collect()
}

struct Search<'a> {
    model: &'a SutModel,
    live: &'a [&'a Interaction],
    domains: &'a [usize],
    assignment: Vec<Option<usize>>,
}

impl Search<'_> {
    /// Assigns every factor of `free`, leaving them set on success.
    fn dfs(&mut self, free: &[usize]) -> bool {
        let Some((&factor, rest)) = free.split_first() else {
            return true;
        };
        for v in 0..self.domains[factor] {
            self.assignment[factor] = Some(v);
            if self.consistent(factor) && self.dfs(rest) {
                return true;
            }
        }
        self.assignment[factor] = None;
        false
    }

    fn consistent(&self, factor: usize) -> bool {
        if self.model.eval_partial(&self.assignment) == Some(false) {
            return false;
        }
        // Only avoided interactions touching the factor just assigned can
        // have become fully covered.
        !self
            .live
            .iter()
            .any(|t| t.value_of(factor).is_some() && t.is_covered_by_partial(&self.assignment))
    }
}
