//! Row-deletion reduction of a `(t+1)`-CCA to a `(1̄,t̄)`-CLA.
//!
//! Rows are examined once each, in a seeded random order. A row is deleted
//! when, after removing it, every valid `t`-way interaction is still covered
//! and no interaction covered by the row ends up with the same covering rows
//! as a different interaction it was previously told apart from.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::array::{ColumnIndex, RowSet, TestArray};
use crate::cca::{generate_cca, CcaOptions};
use crate::distinguish::ClaParams;
use crate::enumerate::{interactions_in_array, Limits};
use crate::error::{Error, Result};
use crate::model::{Interaction, SutModel};
use crate::par::into_par_iter;
#[allow(unused_imports)]
use crate::par::prelude::*;
use crate::verify::{verify_cca, verify_cla, Report, Witness};

/// Each valid `t`-way interaction mapped to its covering rows, with a
/// reverse index from row-set fingerprint to the interactions holding it.
#[derive(Clone, Debug)]
pub struct CoverageMap {
    interactions: Vec<Interaction>,
    rows: Vec<RowSet>,
    /// Interactions each original row covers.
    by_row: Vec<Vec<u32>>,
    reverse: HashMap<u64, Vec<u32>>,
    live: RowSet,
}

/// Why a row was kept or deleted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Deleted,
    /// Deleting would leave this interaction uncovered.
    KeptUncovers { interaction: Interaction },
    /// Deleting would give these two interactions identical covering rows.
    KeptMerges { interaction: Interaction, other: Interaction },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowVerdict {
    pub row: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl CoverageMap {
    /// `T ↦ ρ_A(T)` for each `T` in `interactions`.
    pub fn build(array: &TestArray, interactions: Vec<Interaction>, domain_sizes: &[usize]) -> Self {
        let index = ColumnIndex::new(array, domain_sizes);
        let rows = interactions.iter().map(|t| index.covering_rows(t)).collect();
        CoverageMap::from_parts(array.len(), interactions, rows)
    }

    /// A map over explicit row sets; labels name the entries in verdicts.
    pub fn from_row_sets(n_rows: usize, entries: Vec<(Interaction, RowSet)>) -> Self {
        let (interactions, rows) = entries.into_iter().unzip();
        CoverageMap::from_parts(n_rows, interactions, rows)
    }

    fn from_parts(n_rows: usize, interactions: Vec<Interaction>, rows: Vec<RowSet>) -> Self {
        let mut by_row = vec![Vec::new(); n_rows];
        let mut reverse: HashMap<u64, Vec<u32>> = HashMap::new();
        for (i, set) in rows.iter().enumerate() {
            for r in set.iter() {
                by_row[r].push(i as u32);
            }
            reverse.entry(set.fingerprint()).or_default().push(i as u32);
        }
        CoverageMap { interactions, rows, by_row, reverse, live: RowSet::full(n_rows) }
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn rows_of(&self, i: usize) -> &RowSet {
        &self.rows[i]
    }

    /// Rows not deleted so far.
    pub fn live_rows(&self) -> &RowSet {
        &self.live
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    /// An interaction whose current row set equals `set`, if any.
    fn holder_of(&self, set: &RowSet) -> Option<u32> {
        self.reverse.get(&set.fingerprint())?.iter().copied().find(|&j| self.rows[j as usize] == *set)
    }

    /// Whether `row` may be deleted.
    ///
    /// Interactions not covered by the row keep their row sets, so only the
    /// row's own interactions are examined. For such a `T_a`, the reduced set
    /// `ρ(T_a) \ {row}` collides with `ρ'(T_b)` exactly when it equals the
    /// current set of some `T_b` that does not cover the row; interactions
    /// that also cover the row keep their (in)equality with `T_a`.
    pub fn verdict(&self, row: usize) -> Verdict {
        for &a in &self.by_row[row] {
            let mut reduced = self.rows[a as usize].clone();
            reduced.remove(row);
            if reduced.is_empty() {
                return Verdict::KeptUncovers { interaction: self.interactions[a as usize].clone() };
            }
            if let Some(b) = self.holder_of(&reduced) {
                return Verdict::KeptMerges {
                    interaction: self.interactions[a as usize].clone(),
                    other: self.interactions[b as usize].clone(),
                };
            }
        }
        Verdict::Deleted
    }

    /// Removes `row` from every row set and the reverse index.
    pub fn delete_row(&mut self, row: usize) {
        let covered = std::mem::take(&mut self.by_row[row]);
        for &a in &covered {
            let set = &mut self.rows[a as usize];
            let old = set.fingerprint();
            if let Some(ids) = self.reverse.get_mut(&old) {
                ids.retain(|&j| j != a);
                if ids.is_empty() {
                    self.reverse.remove(&old);
                }
            }
            set.remove(row);
            self.reverse.entry(set.fingerprint()).or_default().push(a);
        }
        self.live.remove(row);
    }
}

/// Runs the deletion loop over `order`, mutating `map`; returns one verdict
/// per visited row.
pub fn reduce_map(map: &mut CoverageMap, order: &[usize]) -> Vec<RowVerdict> {
    order
        .iter()
        .map(|&row| {
            let verdict = map.verdict(row);
            if verdict == Verdict::Deleted {
                map.delete_row(row);
            }
            RowVerdict { row, verdict }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Independent random orders tried; the smallest result wins.
    pub runs: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { runs: 10 }
    }
}

/// Record of one reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub seed: u64,
    pub t: usize,
    pub input_rows: usize,
    pub output_rows: usize,
    /// Output size of every run, in run order.
    pub run_sizes: Vec<usize>,
    /// Index of the run kept (the first of the smallest).
    pub chosen_run: usize,
    /// Visit order of the kept run, as input row indices.
    pub order: Vec<usize>,
    /// Deleted input rows in deletion order.
    pub deleted: Vec<usize>,
    pub verdicts: Vec<RowVerdict>,
}

impl ReductionReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "reduction: {} -> {} rows (t = {}, seed = {})", self.input_rows, self.output_rows, self.t, self.seed).unwrap();
        let sizes: Vec<String> = self.run_sizes.iter().map(usize::to_string).collect();
        writeln!(out, "runs: {} (sizes {}; kept run {})", self.run_sizes.len(), sizes.join(" "), self.chosen_run).unwrap();
        let deleted: Vec<String> = self.deleted.iter().map(usize::to_string).collect();
        writeln!(out, "deleted rows: {}", if deleted.is_empty() { "none".to_string() } else { deleted.join(" ") }).unwrap();
        out
    }
}

fn run_order(n: usize, seed: u64, run: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Reduces a `(t+1)`-CCA to a `(1̄,t̄)`-CLA made of a subset of its rows
/// (kept in input order).
pub fn reduce_to_cla(
    model: &SutModel,
    cca: &TestArray,
    t: usize,
    seed: u64,
    options: &ReduceOptions,
    limits: &Limits,
) -> Result<(TestArray, ReductionReport)> {
    if t == 0 || t >= model.k() {
        return Err(Error::input(format!("strength {t} must lie in 1..{} so that a {}-CCA exists", model.k(), t + 1)));
    }
    if options.runs == 0 {
        return Err(Error::input("at least one run is required"));
    }
    let pre = verify_cca(model, cca, t + 1, limits)?;
    if let Some(w) = pre.witnesses.first() {
        return Err(match w {
            Witness::Uncovered { interaction } => {
                Error::NotCoveringArray { strength: t + 1, interaction: interaction.display(model).to_string() }
            }
            other => Error::input(format!("input is not a {}-CCA: {}", t + 1, other.describe(model))),
        });
    }
    // A (t+1)-CCA covers every valid t-way interaction and nothing invalid.
    let vi = interactions_in_array(cca, t)?;
    let map = CoverageMap::build(cca, vi, &model.domain_sizes());
    let runs: Vec<(Vec<usize>, Vec<RowVerdict>, usize)> = into_par_iter!((0..options.runs))
        .map(|run| {
            let order = run_order(cca.len(), seed, run);
            let mut m = map.clone();
            let verdicts = reduce_map(&mut m, &order);
            let size = m.live_rows().len();
            (order, verdicts, size)
        })
        .collect();
    let run_sizes: Vec<usize> = runs.iter().map(|r| r.2).collect();
    let chosen_run = (0..runs.len()).min_by_key(|&r| (run_sizes[r], r)).expect("runs > 0");
    let (order, verdicts, output_rows) = runs.into_iter().nth(chosen_run).expect("chosen run exists");
    let deleted: Vec<usize> = verdicts.iter().filter(|v| v.verdict == Verdict::Deleted).map(|v| v.row).collect();
    let keep: Vec<usize> = (0..cca.len()).filter(|r| !deleted.contains(r)).collect();
    let output = cca.select(keep);
    let report = ReductionReport {
        seed,
        t,
        input_rows: cca.len(),
        output_rows,
        run_sizes,
        chosen_run,
        order,
        deleted,
        verdicts,
    };
    Ok((output, report))
}

/// Generated `(t+1)`-CCA, its reduction, and the in-process `(1̄,t̄)`
/// re-verification of the result.
#[derive(Clone, Debug)]
pub struct ClaGeneration {
    pub cca: TestArray,
    pub cla: TestArray,
    pub report: ReductionReport,
    pub verification: Report,
}

/// Generates a `(t+1)`-CCA, reduces it and re-verifies the output as a
/// `(1̄,t̄)`-CLA; a failed re-verification is an error.
pub fn generate_cla(
    model: &SutModel,
    t: usize,
    seed: u64,
    cca_options: &CcaOptions,
    options: &ReduceOptions,
    limits: &Limits,
) -> Result<ClaGeneration> {
    if t == 0 || t >= model.k() {
        return Err(Error::input(format!("strength {t} must lie in 1..{}", model.k())));
    }
    let cca = generate_cca(model, t + 1, seed, cca_options, limits)?;
    let (cla, report) = reduce_to_cla(model, &cca, t, seed, options, limits)?;
    let verification = verify_cla(model, &cla, ClaParams::new(1, t).bar_d().bar_t(), limits)?;
    if !verification.passed() {
        return Err(Error::Inconsistent(format!("reduced array failed re-verification: {verification}")));
    }
    Ok(ClaGeneration { cca, cla, report, verification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    /// The worked example: rows numbered 1..=5 (index 0 unused).
    fn toy() -> CoverageMap {
        let set = |rows: &[usize]| RowSet::from_indices(6, rows.iter().copied());
        let label = |i: usize| Interaction::new([(i, 0)]).unwrap();
        let mut map = CoverageMap::from_row_sets(
            6,
            vec![(label(0), set(&[1, 2, 3])), (label(1), set(&[1, 2, 4])), (label(2), set(&[4, 5]))],
        );
        map.delete_row(0);
        map
    }

    fn deleted(verdicts: &[RowVerdict]) -> Vec<usize> {
        verdicts.iter().filter(|v| v.verdict == Verdict::Deleted).map(|v| v.row).collect()
    }

    #[test]
    fn toy_forward_order() {
        let mut map = toy();
        assert_eq!(deleted(&reduce_map(&mut map, &[1, 2, 3, 4, 5])), vec![1, 2]);
        assert_eq!(map.rows_of(0), &RowSet::from_indices(6, [3]));
        assert_eq!(map.rows_of(1), &RowSet::from_indices(6, [4]));
        assert_eq!(map.rows_of(2), &RowSet::from_indices(6, [4, 5]));
    }

    #[test]
    fn toy_reverse_order() {
        let mut map = toy();
        assert_eq!(deleted(&reduce_map(&mut map, &[5, 4, 3, 2, 1])), vec![5, 3, 2]);
    }

    #[test]
    fn coverage_map_examples() {
        let a = fixtures::cca_2();
        let t = Interaction::new([(0, 0), (1, 0)]).unwrap();
        let map = CoverageMap::build(&a, vec![t], &[3, 3, 3, 2, 2]);
        assert_eq!(map.rows_of(0), &RowSet::from_indices(11, [0, 1]));
        assert!(map.interactions().iter().all(|t| !t.is_empty()));
        let empty = CoverageMap::build(&TestArray::new(5), vec![], &[3, 3, 3, 2, 2]);
        assert!(empty.is_empty());
    }

    #[test]
    fn exhaustive_input_reduces_to_a_cla() {
        let m = fixtures::phone();
        let l = Limits::default();
        let all = TestArray::from_rows(5, crate::enumerate::enumerate_valid_tests(&m, 100).unwrap()).unwrap();
        let (out, report) = reduce_to_cla(&m, &all, 1, 5, &ReduceOptions::default(), &l).unwrap();
        assert!(out.len() <= 31);
        assert_eq!(report.output_rows, out.len());
        assert!(verify_cla(&m, &out, ClaParams::new(1, 1).bar_d().bar_t(), &l).unwrap().passed());
    }

    #[test]
    fn rejects_non_covering_input() {
        let m = fixtures::phone();
        let err = reduce_to_cla(&m, &fixtures::cla_1_1(), 1, 0, &ReduceOptions::default(), &Limits::default()).unwrap_err();
        assert!(matches!(err, Error::NotCoveringArray { strength: 2, .. }), "{err}");
    }

    #[test]
    fn reduction_is_deterministic() {
        let m = fixtures::phone();
        let l = Limits::default();
        let a = generate_cla(&m, 1, 11, &CcaOptions::default(), &ReduceOptions::default(), &l).unwrap();
        let b = generate_cla(&m, 1, 11, &CcaOptions::default(), &ReduceOptions::default(), &l).unwrap();
        assert_eq!(a.cla, b.cla);
        assert_eq!(a.report, b.report);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn incremental_map_matches_rebuild(seed in any::<u64>()) {
            let m = crate::corpus::random_model(seed, &crate::corpus::CorpusShape::default());
            let l = Limits::default();
            let t = 1;
            let cca = generate_cca(&m, 2, seed, &CcaOptions { candidates: 8, retries: 100 }, &l).unwrap();
            let vi = interactions_in_array(&cca, t).unwrap();
            let mut map = CoverageMap::build(&cca, vi.clone(), &m.domain_sizes());
            for row in run_order(cca.len(), seed, 0) {
                if map.verdict(row) == Verdict::Deleted {
                    map.delete_row(row);
                    let kept: Vec<usize> = map.live_rows().iter().collect();
                    let sub = cca.select(kept.iter().copied());
                    let index = ColumnIndex::new(&sub, &m.domain_sizes());
                    for (i, t) in vi.iter().enumerate() {
                        let mapped: Vec<usize> = index.covering_rows(t).iter().map(|r| kept[r]).collect();
                        prop_assert_eq!(map.rows_of(i).iter().collect::<Vec<_>>(), mapped);
                    }
                }
            }
        }

        #[test]
        fn singleton_condition_matches_distinguishability(seed in any::<u64>()) {
            // On a (t+1)-CCA, distinct row sets coincide with distinguishable singletons.
            let m = crate::corpus::random_model(seed, &crate::corpus::CorpusShape::default());
            let l = Limits::default();
            let cca = generate_cca(&m, 2, seed, &CcaOptions { candidates: 8, retries: 100 }, &l).unwrap();
            let vi = interactions_in_array(&cca, 1).unwrap();
            let map = CoverageMap::build(&cca, vi.clone(), &m.domain_sizes());
            for a in 0..vi.len() {
                for b in a + 1..vi.len() {
                    let d = crate::distinguish::distinguishable(
                        &m,
                        &crate::InteractionSet::singleton(vi[a].clone()),
                        &crate::InteractionSet::singleton(vi[b].clone()),
                    ).unwrap();
                    prop_assert_eq!(d, map.rows_of(a) != map.rows_of(b));
                }
            }
        }

        #[test]
        fn output_reverifies_and_is_idempotent(seed in any::<u64>()) {
            let m = crate::corpus::random_model(seed, &crate::corpus::CorpusShape::default());
            let l = Limits::default();
            let t = 1;
            let g = generate_cla(&m, t, seed, &CcaOptions { candidates: 8, retries: 100 }, &ReduceOptions { runs: 3 }, &l).unwrap();
            prop_assert!(g.cla.len() <= g.cca.len());
            prop_assert!(g.cla.rows().iter().all(|r| g.cca.rows().contains(r)));
            // Reducing the output again keeps the CLA property.
            let vi = interactions_in_array(&g.cla, t).unwrap();
            let mut map = CoverageMap::build(&g.cla, vi, &m.domain_sizes());
            reduce_map(&mut map, &run_order(g.cla.len(), seed, 1));
            let again = g.cla.select(map.live_rows().iter());
            prop_assert!(verify_cla(&m, &again, ClaParams::new(1, t).bar_d().bar_t(), &l).unwrap().passed());
        }
    }
}
