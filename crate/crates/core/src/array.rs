//! Test arrays, row sets and pass/fail outcome vectors.

use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Interaction, InteractionSet, SutModel, Test};

/// An ordered list of tests; row identity is the index. Rows are not required
/// to be valid or distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestArray {
    factors: usize,
    rows: Vec<Test>,
}

impl TestArray {
    pub fn new(factors: usize) -> Self {
        TestArray { factors, rows: Vec::new() }
    }

    pub fn from_rows(factors: usize, rows: Vec<Test>) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != factors) {
            return Err(Error::input(format!("row {i} has {} entries, expected {factors}", r.len())));
        }
        Ok(TestArray { factors, rows })
    }

    /// Builds an array for `model`, range-checking every row.
    pub fn for_model(model: &SutModel, rows: Vec<Test>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            model.check_test(r).map_err(|e| Error::input(format!("row {i}: {e}")))?;
        }
        Ok(TestArray { factors: model.k(), rows })
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn rows(&self) -> &[Test] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Test {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Test) {
        assert_eq!(row.len(), self.factors, "row arity");
        self.rows.push(row);
    }

    /// The array made of the given rows, in the given order.
    pub fn select(&self, indices: impl IntoIterator<Item = usize>) -> TestArray {
        TestArray { factors: self.factors, rows: indices.into_iter().map(|i| self.rows[i].clone()).collect() }
    }

    /// `ρ_A(T)`.
    pub fn covering_rows(&self, t: &Interaction) -> RowSet {
        let mut set = RowSet::new(self.len());
        for (i, r) in self.rows.iter().enumerate() {
            if t.is_covered_by(r) {
                set.insert(i);
            }
        }
        set
    }

    /// `ρ_A(𝒯)`: union over members; empty for the empty set.
    pub fn covering_rows_of_set(&self, ts: &InteractionSet) -> RowSet {
        let mut set = RowSet::new(self.len());
        for (i, r) in self.rows.iter().enumerate() {
            if ts.is_hit_by(r) {
                set.insert(i);
            }
        }
        set
    }

    /// Indices of rows that falsify the model's constraints.
    pub fn invalid_rows(&self, model: &SutModel) -> Vec<usize> {
        (0..self.len()).filter(|&i| !model.is_valid(&self.rows[i])).collect()
    }

    /// Pairs `(first, later)` of identical rows.
    pub fn duplicate_rows(&self) -> Vec<(usize, usize)> {
        let mut seen = std::collections::HashMap::new();
        let mut dups = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(&j) = seen.get(r) {
                dups.push((j, i));
            } else {
                seen.insert(r, i);
            }
        }
        dups
    }
}

/// Set of row indices into one array, stored as a dense bitset of the
/// array's length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSet(FixedBitSet);

impl RowSet {
    pub fn new(rows: usize) -> Self {
        RowSet(FixedBitSet::with_capacity(rows))
    }

    pub fn full(rows: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(rows);
        bits.insert_range(..);
        RowSet(bits)
    }

    pub fn from_indices(rows: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = RowSet::new(rows);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Number of rows of the underlying array.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, row: usize) {
        self.0.insert(row);
    }

    pub fn remove(&mut self, row: usize) {
        self.0.set(row, false);
    }

    pub fn contains(&self, row: usize) -> bool {
        self.0.contains(row)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union_with(&mut self, other: &RowSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &RowSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn is_subset(&self, other: &RowSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Rows in exactly one of the two sets.
    pub fn symmetric_difference(&self, other: &RowSet) -> RowSet {
        let mut out = self.0.clone();
        out.symmetric_difference_with(&other.0);
        RowSet(out)
    }

    /// 64-bit hash of the contents, for bucketing; equal sets share it.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.0.as_slice().hash(&mut h);
        h.finish()
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.0
    }
}

impl Hash for RowSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.as_slice().hash(state);
    }
}

impl Serialize for RowSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.ones())
    }
}

impl fmt::Display for RowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

/// Per-(factor, value) row bitsets; `ρ_A(T)` is the intersection over `T`'s
/// pairs.
#[derive(Clone, Debug)]
pub struct ColumnIndex {
    rows: usize,
    columns: Vec<Vec<RowSet>>,
}

impl ColumnIndex {
    pub fn new(array: &TestArray, domain_sizes: &[usize]) -> Self {
        let n = array.len();
        let mut columns: Vec<Vec<RowSet>> = domain_sizes.iter().map(|&s| vec![RowSet::new(n); s]).collect();
        for (i, r) in array.rows().iter().enumerate() {
            for (f, &v) in r.iter().enumerate() {
                columns[f][v].insert(i);
            }
        }
        ColumnIndex { rows: n, columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn covering_rows(&self, t: &Interaction) -> RowSet {
        let mut pairs = t.pairs().iter();
        let Some(&(f, v)) = pairs.next() else {
            return RowSet::full(self.rows);
        };
        let mut out = self.columns[f][v].clone();
        for &(f, v) in pairs {
            out.intersect_with(&self.columns[f][v]);
        }
        out
    }

    pub fn covering_rows_of_set(&self, ts: &InteractionSet) -> RowSet {
        let mut out = RowSet::new(self.rows);
        for t in ts.members() {
            out.union_with(&self.covering_rows(t));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

/// One outcome per array row, in row order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeVector(Vec<Outcome>);

impl OutcomeVector {
    pub fn new(outcomes: Vec<Outcome>) -> Self {
        OutcomeVector(outcomes)
    }

    /// Outcomes a SUT would produce if exactly the members of `faults` were
    /// failure-triggering: a row fails iff it covers one of them.
    pub fn simulate(array: &TestArray, faults: &InteractionSet) -> Self {
        OutcomeVector(
            array
                .rows()
                .iter()
                .map(|r| if faults.is_hit_by(r) { Outcome::Fail } else { Outcome::Pass })
                .collect(),
        )
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn failing_rows(&self) -> RowSet {
        RowSet::from_indices(self.0.len(), (0..self.0.len()).filter(|&i| self.0[i] == Outcome::Fail))
    }
}
