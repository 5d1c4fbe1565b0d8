//! Valid tests, interactions of a test and the valid-interaction sets
//! `VI_t` and `V̄I_t`.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::array::TestArray;
use crate::error::{Error, Result};
use crate::model::{find_valid_test, Interaction, SutModel, Test};
use crate::par::into_par_iter;
#[allow(unused_imports)]
use crate::par::prelude::*;

/// Resource guards shared by every operation that enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Most valid tests `enumerate_valid_tests` may produce, and the largest
    /// test space the automatic backend enumerates.
    pub max_tests: usize,
    /// Most interaction sets a distinguishability universe may hold.
    pub max_universe: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_tests: 1_000_000, max_universe: 20_000 }
    }
}

/// Exact strength or every strength up to and including it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    UpTo,
}

/// How validity of interactions is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Enumerate when the full test space fits `Limits::max_tests`, probe
    /// otherwise.
    #[default]
    Auto,
    /// Collect the interactions of every valid test.
    Enumerate,
    /// One satisfiability query per syntactic interaction.
    Probe,
}

/// All valid tests in lexicographic order.
pub fn enumerate_valid_tests(model: &SutModel, cap: usize) -> Result<Vec<Test>> {
    if cap == 0 {
        return Err(Error::input("enumeration cap must be positive"));
    }
    let domains = model.domain_sizes();
    let mut out = Vec::new();
    let mut assignment = vec![None; model.k()];
    walk(model, &domains, &mut assignment, 0, cap, &mut out)?;
    Ok(out)
}

fn walk(
    model: &SutModel,
    domains: &[usize],
    assignment: &mut Vec<Option<usize>>,
    factor: usize,
    cap: usize,
    out: &mut Vec<Test>,
) -> Result<()> {
    if factor == domains.len() {
        if model.eval_partial(assignment) == Some(true) {
            if out.len() == cap {
                return Err(Error::cap("valid-test enumeration", cap));
            }
            out.push(Test::new(assignment.iter().map(|v| v.expect("assigned")).collect()));
        }
        return Ok(());
    }
    for v in 0..domains[factor] {
        assignment[factor] = Some(v);
        if model.eval_partial(assignment) != Some(false) {
            walk(model, domains, assignment, factor + 1, cap, out)?;
        }
    }
    assignment[factor] = None;
    Ok(())
}

fn check_strength(model: &SutModel, t: usize) -> Result<()> {
    if t > model.k() {
        return Err(Error::input(format!("strength {t} exceeds the number of factors ({})", model.k())));
    }
    Ok(())
}

/// The `C(k,t)` strength-`t` sub-assignments of `test`, in canonical order.
pub fn interactions_of(test: &[usize], t: usize) -> Result<Vec<Interaction>> {
    if t > test.len() {
        return Err(Error::input(format!("strength {t} exceeds test length {}", test.len())));
    }
    Ok((0..test.len()).combinations(t).map(|fs| Interaction::project(test, &fs)).collect())
}

/// Every syntactic `t`-way interaction `I_t`, in canonical order.
pub fn all_interactions(model: &SutModel, t: usize) -> Result<Vec<Interaction>> {
    check_strength(model, t)?;
    if t == 0 {
        return Ok(vec![Interaction::empty()]);
    }
    let domains = model.domain_sizes();
    let mut out = Vec::new();
    for fs in (0..model.k()).combinations(t) {
        for values in fs.iter().map(|&f| 0..domains[f]).multi_cartesian_product() {
            out.push(Interaction::from_sorted(fs.iter().copied().zip(values).collect()));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `VI_t` (exact) or `V̄I_t` (up-to) using the automatic backend.
pub fn valid_interactions(model: &SutModel, t: usize, mode: Mode) -> Result<Vec<Interaction>> {
    valid_interactions_with(model, t, mode, Backend::Auto, &Limits::default())
}

pub fn valid_interactions_with(
    model: &SutModel,
    t: usize,
    mode: Mode,
    backend: Backend,
    limits: &Limits,
) -> Result<Vec<Interaction>> {
    check_strength(model, t)?;
    let strengths = match mode {
        Mode::Exact => t..=t,
        Mode::UpTo => 0..=t,
    };
    let enumerate = match backend {
        Backend::Enumerate => true,
        Backend::Probe => false,
        Backend::Auto => model.total_tests() <= limits.max_tests as u128,
    };
    if enumerate {
        let tests = enumerate_valid_tests(model, limits.max_tests)?;
        let mut set = BTreeSet::new();
        for s in strengths {
            for test in &tests {
                set.extend(interactions_of(test, s)?);
            }
        }
        Ok(set.into_iter().collect())
    } else {
        let mut out = Vec::new();
        for s in strengths {
            let candidates = all_interactions(model, s)?;
            let valid: Vec<Interaction> = into_par_iter!(candidates)
                .filter(|t| crate::model::search::search(model, t, &[]).is_some())
                .collect();
            out.extend(valid);
        }
        Ok(out)
    }
}

/// `I_t \ VI_t`.
pub fn invalid_interactions(model: &SutModel, t: usize) -> Result<Vec<Interaction>> {
    let valid: BTreeSet<Interaction> = valid_interactions(model, t, Mode::Exact)?.into_iter().collect();
    Ok(all_interactions(model, t)?.into_iter().filter(|t| !valid.contains(t)).collect())
}

/// The distinct `t`-way interactions covered by some row of `array`.
pub fn interactions_in_array(array: &TestArray, t: usize) -> Result<Vec<Interaction>> {
    let mut set = BTreeSet::new();
    for row in array.rows() {
        set.extend(interactions_of(row, t)?);
    }
    Ok(set.into_iter().collect())
}

/// Whether `interaction` has a valid covering test; thin wrapper kept next to
/// the bulk operations.
pub fn is_valid(model: &SutModel, interaction: &Interaction) -> Result<bool> {
    Ok(find_valid_test(model, interaction, &[])?.is_some())
}

/// `C(n, r)` saturating at `u128::MAX`.
pub(crate) fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}
