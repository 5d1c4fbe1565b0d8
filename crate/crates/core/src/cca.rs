//! Greedy one-row-at-a-time constrained covering array generation.
//!
//! Each new row is the best of `candidates` randomized constructions. A
//! construction starts from an uncovered valid `t`-way interaction (the
//! nucleus) and fixes the remaining factors one at a time in random order,
//! picking the value that covers the most still-uncovered interactions among
//! those that keep the partial row extendable to a valid test. Every chosen
//! value is backed by a concrete valid witness test, so constructions never
//! dead-end.

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::TestArray;
use crate::enumerate::{valid_interactions_with, Backend, Limits, Mode};
use crate::error::{Error, Result};
use crate::model::search::search;
use crate::model::{Interaction, SutModel, Test};
use crate::par::into_par_iter;
#[allow(unused_imports)]
use crate::par::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CcaOptions {
    /// Candidate rows built per committed row.
    pub candidates: usize,
    /// Consecutive failed constructions tolerated before giving up.
    pub retries: usize,
}

impl Default for CcaOptions {
    fn default() -> Self {
        CcaOptions { candidates: 50, retries: 100 }
    }
}

/// Dense numbering of the syntactic `t`-way interactions: factor
/// combinations in lexicographic order, values in mixed radix within each.
pub(crate) struct InteractionIndex {
    domains: Vec<usize>,
    combos: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    /// Combinations containing each factor.
    by_factor: Vec<Vec<usize>>,
    total: usize,
}

impl InteractionIndex {
    pub(crate) fn new(domains: &[usize], t: usize) -> Self {
        let combos: Vec<Vec<usize>> = (0..domains.len()).combinations(t).collect();
        let mut offsets = Vec::with_capacity(combos.len());
        let mut total = 0;
        let mut by_factor = vec![Vec::new(); domains.len()];
        for (c, fs) in combos.iter().enumerate() {
            offsets.push(total);
            total += fs.iter().map(|&f| domains[f]).product::<usize>();
            for &f in fs {
                by_factor[f].push(c);
            }
        }
        InteractionIndex { domains: domains.to_vec(), combos, offsets, by_factor, total }
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    fn id_of(&self, combo: usize, values: impl Fn(usize) -> usize) -> usize {
        let mut local = 0;
        for &f in &self.combos[combo] {
            local = local * self.domains[f] + values(f);
        }
        self.offsets[combo] + local
    }

    pub(crate) fn id(&self, t: &Interaction) -> usize {
        let fs: Vec<usize> = t.factors().collect();
        let combo = self.combos.binary_search(&fs).expect("interaction strength matches the index");
        self.id_of(combo, |f| t.value_of(f).expect("factor present"))
    }

    /// Ids of every `t`-way interaction covered by a full test.
    pub(crate) fn ids_of_test<'a>(&'a self, test: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        (0..self.combos.len()).map(move |c| self.id_of(c, |f| test[f]))
    }
}

/// A `t`-CCA for `model`: every row valid, every valid `t`-way interaction
/// covered, no duplicate rows. Deterministic for fixed inputs.
pub fn generate_cca(model: &SutModel, t: usize, seed: u64, options: &CcaOptions, limits: &Limits) -> Result<TestArray> {
    if t == 0 || t > model.k() {
        return Err(Error::input(format!("strength {t} must lie in 1..={}", model.k())));
    }
    if options.candidates == 0 {
        return Err(Error::input("candidate count must be positive"));
    }
    if search(model, &Interaction::empty(), &[]).is_none() {
        return Err(Error::Unsatisfiable);
    }
    let index = InteractionIndex::new(&model.domain_sizes(), t);
    let mut uncovered = FixedBitSet::with_capacity(index.total());
    for vi in valid_interactions_with(model, t, Mode::Exact, Backend::Auto, limits)? {
        uncovered.insert(index.id(&vi));
    }
    let mut remaining = uncovered.count_ones(..);
    let mut rows: Vec<Test> = Vec::new();
    let mut failures = 0;
    while remaining > 0 {
        let row_no = rows.len() as u64;
        let built: Vec<Result<Option<(Test, usize)>>> = into_par_iter!((0..options.candidates))
            .map(|c| {
                let mut rng = rng_for(seed, row_no, c as u64);
                build_candidate(model, &index, &uncovered, remaining, &mut rng)
            })
            .collect();
        let mut candidates = Vec::with_capacity(built.len());
        for b in built {
            if let Some(c) = b? {
                candidates.push(c);
            }
        }
        if candidates.is_empty() {
            failures += options.candidates;
            if failures >= options.retries {
                return Err(Error::Inconsistent(format!(
                    "no candidate row could be completed after {failures} attempts"
                )));
            }
            continue;
        }
        failures = 0;
        let best = candidates.iter().map(|c| c.1).max().expect("non-empty");
        let tied: Vec<&(Test, usize)> = candidates.iter().filter(|c| c.1 == best).collect();
        let mut row_rng = rng_for(seed, row_no, u32::MAX as u64);
        let (row, gain) = tied[row_rng.gen_range(0..tied.len())].clone();
        debug_assert!(gain > 0);
        for id in index.ids_of_test(&row).collect::<Vec<_>>() {
            if uncovered.contains(id) {
                uncovered.set(id, false);
                remaining -= 1;
            }
        }
        rows.push(row);
    }
    TestArray::for_model(model, rows)
}

fn rng_for(seed: u64, row: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((row << 32) | slot);
    rng
}

/// One randomized greedy construction; `None` when the nucleus could not be
/// extended (the retry budget counts these).
fn build_candidate(
    model: &SutModel,
    index: &InteractionIndex,
    uncovered: &FixedBitSet,
    remaining: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(Test, usize)>> {
    let k = model.k();
    let pick = rng.gen_range(0..remaining);
    let nucleus_id = uncovered.ones().nth(pick).expect("remaining counts set bits");
    let combo = index.offsets.partition_point(|&o| o <= nucleus_id) - 1;
    let mut local = nucleus_id - index.offsets[combo];
    let mut assignment: Vec<Option<usize>> = vec![None; k];
    for &f in index.combos[combo].iter().rev() {
        assignment[f] = Some(local % index.domains[f]);
        local /= index.domains[f];
    }
    let nucleus = partial_interaction(&assignment);
    let Some(mut witness) = search(model, &nucleus, &[]) else {
        return Err(Error::Inconsistent(format!("valid interaction {nucleus} has no valid test")));
    };
    let mut order: Vec<usize> = (0..k).filter(|&f| assignment[f].is_none()).collect();
    order.shuffle(rng);
    for f in order {
        let mut scored: Vec<(usize, u64, usize)> = (0..index.domains[f])
            .map(|v| (gain_if(index, uncovered, &assignment, f, v), rng.gen::<u64>(), v))
            .collect();
        scored.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut chosen = None;
        for &(_, _, v) in &scored {
            assignment[f] = Some(v);
            if witness[f] == v {
                chosen = Some(v);
                break;
            }
            if model.eval_partial(&assignment) == Some(false) {
                continue;
            }
            if let Some(w) = search(model, &partial_interaction(&assignment), &[]) {
                witness = w;
                chosen = Some(v);
                break;
            }
        }
        if chosen.is_none() {
            return Ok(None);
        }
    }
    let row: Vec<usize> = assignment.into_iter().map(|v| v.expect("complete")).collect();
    debug_assert!(model.is_valid(&row));
    let gain = index.ids_of_test(&row).filter(|&id| uncovered.contains(id)).count();
    Ok(Some((Test::new(row), gain)))
}

/// Uncovered interactions completed by setting factor `f` to `v`.
fn gain_if(index: &InteractionIndex, uncovered: &FixedBitSet, assignment: &[Option<usize>], f: usize, v: usize) -> usize {
    index.by_factor[f]
        .iter()
        .filter(|&&c| index.combos[c].iter().all(|&g| g == f || assignment[g].is_some()))
        .filter(|&&c| {
            let id = index.id_of(c, |g| if g == f { v } else { assignment[g].expect("assigned") });
            uncovered.contains(id)
        })
        .count()
}

fn partial_interaction(assignment: &[Option<usize>]) -> Interaction {
    Interaction::new(assignment.iter().enumerate().filter_map(|(f, v)| v.map(|v| (f, v)))).expect("distinct factors")
}
