//! Brute-force verifiers for covering, constrained locating and locating
//! arrays, plus an exhaustive search for the smallest CLA of a tiny model.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use serde::Serialize;

use crate::array::{ColumnIndex, RowSet, TestArray};
use crate::distinguish::{cross_pairs, group_by_signature, ClaParams, Distinguisher, Universe};
use crate::enumerate::{all_interactions, enumerate_valid_tests, Limits};
use crate::error::{Error, Result};
use crate::model::search::search;
use crate::model::{Interaction, InteractionSet, SutModel, Test};
use crate::par::into_par_iter;
#[allow(unused_imports)]
use crate::par::prelude::*;

/// Most witnesses a report carries.
pub const MAX_WITNESSES: usize = 100;

/// One concrete reason a verification failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The row violates the constraints.
    InvalidRow { row: usize, test: Test },
    /// A valid interaction no row covers.
    Uncovered { interaction: Interaction },
    /// Two sets that must be told apart share their covering rows.
    Collision { first: InteractionSet, second: InteractionSet, rows: RowSet },
}

impl Witness {
    pub fn describe(&self, model: &SutModel) -> String {
        match self {
            Witness::InvalidRow { row, test } => format!("row {row} violates constraints {test}"),
            Witness::Uncovered { interaction } => format!("valid interaction {} is not covered", interaction.display(model)),
            Witness::Collision { first, second, rows } => format!(
                "{} and {} are distinguishable but both cover rows {rows}",
                first.display(model),
                second.display(model)
            ),
        }
    }
}

/// Outcome of a verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    /// What was checked, e.g. `2-CCA` or `(1bar,2bar)-CLA`.
    pub property: String,
    pub passed: bool,
    /// The condition was vacuous (d = 0).
    pub degenerate: bool,
    pub rows: usize,
    /// Interactions (CCA) or interaction sets (CLA, LA) examined.
    pub checked: usize,
    /// Total number of failures; may exceed the witnesses kept.
    pub violations: u64,
    pub witnesses: Vec<Witness>,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(property: String, array: &TestArray) -> Self {
        let mut warnings = Vec::new();
        for (first, later) in array.duplicate_rows() {
            warnings.push(format!("row {later} duplicates row {first}"));
        }
        Report { property, passed: true, degenerate: false, rows: array.len(), checked: 0, violations: 0, witnesses: Vec::new(), warnings }
    }

    fn fail(&mut self, count: u64, witnesses: impl IntoIterator<Item = Witness>) {
        if count == 0 {
            return;
        }
        self.passed = false;
        self.violations += count;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(witnesses.into_iter().take(room));
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    /// Human-readable rendering with factor and value names.
    pub fn render(&self, model: &SutModel) -> String {
        let mut out = String::new();
        match (self.passed, self.witnesses.first()) {
            (true, _) => writeln!(out, "PASS: {} ({} rows, {} checked)", self.property, self.rows, self.checked),
            (false, Some(w)) => writeln!(out, "FAIL: {}", w.describe(model)),
            (false, None) => writeln!(out, "FAIL: {}", self.property),
        }
        .unwrap();
        if self.degenerate {
            writeln!(out, "note: d = 0 makes the condition vacuous").unwrap();
        }
        if !self.passed {
            writeln!(out, "{}: {} violation(s) over {} rows, {} checked", self.property, self.violations, self.rows, self.checked)
                .unwrap();
            for w in self.witnesses.iter().skip(1) {
                writeln!(out, "  {}", w.describe(model)).unwrap();
            }
            if (self.witnesses.len() as u64) < self.violations {
                writeln!(out, "  ... {} more not shown", self.violations - self.witnesses.len() as u64).unwrap();
            }
        }
        for w in &self.warnings {
            writeln!(out, "warning: {w}").unwrap();
        }
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict}: {} ({} rows, {} violations)", self.property, self.rows, self.violations)
    }
}

fn invalid_row_witnesses(model: &SutModel, array: &TestArray) -> Vec<Witness> {
    array
        .invalid_rows(model)
        .into_iter()
        .map(|row| Witness::InvalidRow { row, test: array.row(row).clone() })
        .collect()
}

fn check_array(model: &SutModel, array: &TestArray) -> Result<()> {
    if array.factors() != model.k() {
        return Err(Error::input(format!("array has {} columns, model has {} factors", array.factors(), model.k())));
    }
    for (i, r) in array.rows().iter().enumerate() {
        model.check_test(r).map_err(|e| Error::input(format!("row {i}: {e}")))?;
    }
    Ok(())
}

/// Every row valid and every valid `t`-way interaction covered.
pub fn verify_cca(model: &SutModel, array: &TestArray, t: usize, limits: &Limits) -> Result<Report> {
    check_array(model, array)?;
    if t == 0 || t > model.k() {
        return Err(Error::input(format!("strength {t} must lie in 1..={}", model.k())));
    }
    let _ = limits;
    let mut report = Report::new(format!("{t}-CCA"), array);
    let invalid = invalid_row_witnesses(model, array);
    report.fail(invalid.len() as u64, invalid);
    // Interactions covered by a valid row are valid by witness; only the rest
    // need a satisfiability probe.
    let valid_rows: Vec<usize> = (0..array.len()).filter(|&i| model.is_valid(array.row(i))).collect();
    let index = ColumnIndex::new(&array.select(valid_rows), &model.domain_sizes());
    let syntactic = all_interactions(model, t)?;
    report.checked = syntactic.len();
    let uncovered: Vec<Interaction> = into_par_iter!(syntactic)
        .filter(|i| index.covering_rows(i).is_empty() && search(model, i, &[]).is_some())
        .collect();
    report.fail(uncovered.len() as u64, uncovered.into_iter().map(|interaction| Witness::Uncovered { interaction }));
    Ok(report)
}

/// The CLA condition for `params`: all rows valid, and every two
/// distinguishable sets in the universe have different covering rows.
pub fn verify_cla(model: &SutModel, array: &TestArray, params: ClaParams, limits: &Limits) -> Result<Report> {
    check_array(model, array)?;
    if params.t > model.k() {
        return Err(Error::input(format!("strength {} exceeds the number of factors ({})", params.t, model.k())));
    }
    let mut report = Report::new(format!("{params}-CLA"), array);
    let invalid = invalid_row_witnesses(model, array);
    if !invalid.is_empty() {
        report.fail(invalid.len() as u64, invalid);
        return Ok(report);
    }
    if params.d == 0 {
        report.degenerate = true;
        report.warnings.push("d = 0: no two interaction sets are compared".into());
        return Ok(report);
    }
    let universe = Universe::build(model, params, limits)?;
    report.checked = universe.len();
    let signatures = universe.signatures(&ColumnIndex::new(array, &model.domain_sizes()));
    let all: Vec<usize> = (0..universe.len()).collect();
    let buckets: Vec<Vec<usize>> = group_by_signature(&all, &signatures).into_iter().filter(|b| b.len() > 1).collect();
    if buckets.is_empty() {
        return Ok(report);
    }
    let distinguisher = Distinguisher::new(model, limits)?;
    let screen = distinguisher.screen(&universe);
    let results: Vec<(u64, Vec<Witness>)> = into_par_iter!(buckets)
        .map(|bucket| {
            let classes = distinguisher.classify(&universe, screen.as_deref(), &bucket);
            let witnesses = classes
                .iter()
                .tuple_combinations()
                .take(MAX_WITNESSES)
                .map(|(a, b)| Witness::Collision {
                    first: universe.set(a[0]),
                    second: universe.set(b[0]),
                    rows: signatures[a[0]].clone(),
                })
                .collect();
            (cross_pairs(&classes), witnesses)
        })
        .collect();
    for (count, witnesses) in results {
        report.fail(count, witnesses);
    }
    Ok(report)
}

/// The locating-array condition for `params` over syntactic interactions:
/// equal covering rows only for equal sets. Row validity is not required.
pub fn verify_la(model: &SutModel, array: &TestArray, params: ClaParams, limits: &Limits) -> Result<Report> {
    check_array(model, array)?;
    let mut report = Report::new(format!("{params}-LA"), array);
    if params.d == 0 {
        report.degenerate = true;
        report.warnings.push("d = 0: no two interaction sets are compared".into());
        return Ok(report);
    }
    let universe = Universe::build_syntactic(model, params, limits)?;
    report.checked = universe.len();
    let signatures = universe.signatures(&ColumnIndex::new(array, &model.domain_sizes()));
    let all: Vec<usize> = (0..universe.len()).collect();
    for bucket in group_by_signature(&all, &signatures).into_iter().filter(|b| b.len() > 1) {
        let n = bucket.len() as u64;
        let witnesses: Vec<Witness> = bucket
            .iter()
            .tuple_combinations()
            .take(MAX_WITNESSES)
            .map(|(&a, &b)| Witness::Collision { first: universe.set(a), second: universe.set(b), rows: signatures[a].clone() })
            .collect();
        report.fail(n * (n - 1) / 2, witnesses);
    }
    Ok(report)
}

/// Smallest CLA for `params` built from valid tests, with one witness array
/// (rows in lexicographic order).
///
/// Iterative deepening over subsets of the valid tests. At every node the
/// colliding pair of sets with the fewest separating tests is chosen, and the
/// search branches on which separating test to add. Revisited row subsets are
/// skipped, and a packing of colliding pairs with disjoint separators bounds
/// the remaining depth from below. `budget` caps the number of nodes expanded
/// over the whole search.
pub fn minimal_cla_size(model: &SutModel, params: ClaParams, budget: u64, limits: &Limits) -> Result<(usize, TestArray)> {
    let tests = enumerate_valid_tests(model, limits.max_tests)?;
    let exhaustive = TestArray::from_rows(model.k(), tests.clone())?;
    let universe = Universe::build(model, params, limits)?;
    let full = universe.signatures(&ColumnIndex::new(&exhaustive, &model.domain_sizes()));
    // Sets with equal coverage over all valid tests are indistinguishable.
    let all: Vec<usize> = (0..universe.len()).collect();
    let mut class = vec![0usize; universe.len()];
    let groups = group_by_signature(&all, &full);
    for (c, g) in groups.iter().enumerate() {
        for &i in g {
            class[i] = c;
        }
    }
    // One representative per class suffices: members share every coverage.
    let reps: Vec<FixedBitSet> = groups.iter().map(|g| full[g[0]].bits().clone()).collect();
    let mut search = MinSearch { reps, tests: tests.len(), budget, nodes: 0, seen: HashSet::new() };
    for n in 0..=tests.len() {
        search.seen.clear();
        let mut chosen = FixedBitSet::with_capacity(tests.len());
        if search.dfs(&mut chosen, n)? {
            let rows: Vec<Test> = chosen.ones().map(|i| tests[i].clone()).collect();
            return Ok((n, TestArray::from_rows(model.k(), rows)?));
        }
    }
    Err(Error::Inconsistent("the exhaustive array failed its own CLA condition".into()))
}

struct MinSearch {
    reps: Vec<FixedBitSet>,
    tests: usize,
    budget: u64,
    nodes: u64,
    seen: HashSet<FixedBitSet>,
}

impl MinSearch {
    /// Separators of every colliding class pair under `chosen`.
    fn collisions(&self, chosen: &FixedBitSet) -> Vec<FixedBitSet> {
        let mut by_sig: std::collections::HashMap<FixedBitSet, Vec<usize>> = std::collections::HashMap::new();
        for (c, rep) in self.reps.iter().enumerate() {
            let mut sig = rep.clone();
            sig.intersect_with(chosen);
            by_sig.entry(sig).or_default().push(c);
        }
        let mut out = Vec::new();
        for members in by_sig.values().filter(|m| m.len() > 1) {
            for (&a, &b) in members.iter().tuple_combinations() {
                let mut sep = self.reps[a].clone();
                sep.symmetric_difference_with(&self.reps[b]);
                out.push(sep);
            }
        }
        out
    }

    fn dfs(&mut self, chosen: &mut FixedBitSet, left: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::cap("minimal-size search nodes", self.budget as usize));
        }
        let mut pending = self.collisions(chosen);
        if pending.is_empty() {
            return Ok(true);
        }
        if left == 0 || !self.seen.insert(chosen.clone()) {
            return Ok(false);
        }
        pending.sort_by_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
        if lower_bound(&pending) > left {
            return Ok(false);
        }
        let branch: Vec<usize> = pending[0].ones().collect();
        for row in branch {
            debug_assert!(row < self.tests && !chosen.contains(row));
            chosen.insert(row);
            if self.dfs(chosen, left - 1)? {
                return Ok(true);
            }
            chosen.set(row, false);
        }
        Ok(false)
    }
}

/// Greedy packing of pairwise disjoint separators; each needs its own row.
fn lower_bound(separators: &[FixedBitSet]) -> usize {
    let mut used = FixedBitSet::with_capacity(separators.first().map_or(0, FixedBitSet::len));
    let mut count = 0;
    for s in separators {
        if s.is_disjoint(&used) {
            used.union_with(s);
            count += 1;
        }
    }
    count
}
