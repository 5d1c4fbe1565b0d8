//! System-under-test model: factors, value domains and constraints.

mod expr;
mod interaction;
pub(crate) mod search;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expr::ConstraintExpr;
pub use interaction::{Interaction, InteractionSet};
pub use search::find_valid_test;

/// A test parameter and its ordered value names. Value `i` is named
/// `values[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    name: String,
    values: Vec<String>,
}

impl Factor {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.len() < 2 {
            return Err(Error::input(format!("factor {name} needs at least 2 values, got {}", values.len())));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = values.iter().find(|v| !seen.insert(v.as_str())) {
            return Err(Error::input(format!("factor {name} declares value {dup} twice")));
        }
        Ok(Factor { name, values })
    }

    /// A factor whose values are the numerals `0..n`.
    pub fn numeric(name: impl Into<String>, n: usize) -> Result<Self> {
        Factor::new(name, (0..n).map(|v| v.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.values.iter().position(|v| v == name)
    }
}

/// A full assignment: position `i` holds a value index of factor `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Test(Vec<usize>);

impl Test {
    pub fn new(values: Vec<usize>) -> Self {
        Test(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn into_values(self) -> Vec<usize> {
        self.0
    }

    /// The test viewed as its k-way interaction.
    pub fn as_interaction(&self) -> Interaction {
        Interaction::from_sorted(self.0.iter().copied().enumerate().collect())
    }
}

impl std::ops::Deref for Test {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Test {
    fn from(values: Vec<usize>) -> Self {
        Test(values)
    }
}

impl fmt::Display for Test {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Factors, domains and the constraint formula (conjunction of
/// `constraints`; empty means every test is valid).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SutModel {
    name: String,
    factors: Vec<Factor>,
    constraints: Vec<ConstraintExpr>,
}

impl SutModel {
    pub fn new(name: impl Into<String>, factors: Vec<Factor>, constraints: Vec<ConstraintExpr>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::input("a model needs at least one factor"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = factors.iter().find(|f| !seen.insert(f.name.as_str())) {
            return Err(Error::input(format!("factor {} declared twice", dup.name)));
        }
        if let Some(f) = factors.iter().find(|f| f.len() < 2) {
            return Err(Error::input(format!("factor {} needs at least 2 values", f.name)));
        }
        for c in &constraints {
            let mut bad = None;
            c.for_each_atom(&mut |f, v| {
                if bad.is_none() && factors.get(f).is_none_or(|fac| v >= fac.len()) {
                    bad = Some((f, v));
                }
            });
            if let Some((f, v)) = bad {
                return Err(Error::input(format!("constraint atom references factor {f} value {v}, not in the model")));
            }
        }
        Ok(SutModel { name: name.into(), factors, constraints })
    }

    /// Convenience for tests and generated corpora: factors `F1..Fk` with
    /// numeric values.
    pub fn numeric(name: impl Into<String>, domains: &[usize], constraints: Vec<ConstraintExpr>) -> Result<Self> {
        let factors = domains
            .iter()
            .enumerate()
            .map(|(i, &n)| Factor::numeric(format!("F{}", i + 1), n))
            .collect::<Result<Vec<_>>>()?;
        SutModel::new(name, factors, constraints)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn constraints(&self) -> &[ConstraintExpr] {
        &self.constraints
    }

    /// The conjunction of all constraint lines as one formula.
    pub fn constraint(&self) -> ConstraintExpr {
        match self.constraints.len() {
            0 => ConstraintExpr::True,
            1 => self.constraints[0].clone(),
            _ => ConstraintExpr::And(self.constraints.clone()),
        }
    }

    /// Number of factors.
    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::len).collect()
    }

    /// `|S_1 × … × S_k|`, saturating.
    pub fn total_tests(&self) -> u128 {
        self.factors
            .iter()
            .fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128))
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// The same factors with every constraint dropped.
    pub fn without_constraints(&self) -> SutModel {
        SutModel { name: self.name.clone(), factors: self.factors.clone(), constraints: Vec::new() }
    }

    pub fn check_test(&self, values: &[usize]) -> Result<()> {
        if values.len() != self.k() {
            return Err(Error::input(format!("test has {} entries, model has {} factors", values.len(), self.k())));
        }
        for (i, (&v, f)) in values.iter().zip(&self.factors).enumerate() {
            if v >= f.len() {
                return Err(Error::input(format!(
                    "entry {i} = {v} out of range for factor {} ({} values)",
                    f.name,
                    f.len()
                )));
            }
        }
        Ok(())
    }

    /// `φ(σ)`, after checking the test's shape.
    pub fn evaluate(&self, test: &[usize]) -> Result<bool> {
        self.check_test(test)?;
        Ok(self.is_valid(test))
    }

    /// `φ(σ)` without range checks.
    pub fn is_valid(&self, test: &[usize]) -> bool {
        self.constraints.iter().all(|c| c.eval(test))
    }

    /// Three-valued `φ` on a partial assignment.
    pub fn eval_partial(&self, values: &[Option<usize>]) -> Option<bool> {
        let mut result = Some(true);
        for c in &self.constraints {
            match c.eval_partial(values) {
                Some(false) => return Some(false),
                None => result = None,
                Some(true) => {}
            }
        }
        result
    }

    /// Whether some valid test covers `t`.
    pub fn is_valid_interaction(&self, t: &Interaction) -> Result<bool> {
        Ok(find_valid_test(self, t, &[])?.is_some())
    }
}
