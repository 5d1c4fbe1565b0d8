//! Fault localization: which interaction sets explain an outcome vector.

use std::fmt::Write as _;

use serde::Serialize;

use crate::array::{ColumnIndex, OutcomeVector, RowSet, TestArray};
use crate::distinguish::{ClaParams, Distinguisher, Universe};
use crate::enumerate::Limits;
use crate::error::{Error, Result};
use crate::model::{InteractionSet, SutModel};

/// Mutually indistinguishable candidate sets sharing the failing rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateClass {
    pub members: Vec<InteractionSet>,
    pub rows: RowSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Localization {
    /// Candidates whose covering rows equal the failing rows, one entry per
    /// indistinguishability class.
    Located { classes: Vec<CandidateClass> },
    /// No set in the hypothesis space explains the failing rows.
    Unexplained { failing: RowSet },
}

impl Localization {
    pub fn classes(&self) -> &[CandidateClass] {
        match self {
            Localization::Located { classes } => classes,
            Localization::Unexplained { .. } => &[],
        }
    }

    pub fn is_explained(&self) -> bool {
        matches!(self, Localization::Located { .. })
    }

    pub fn render(&self, model: &SutModel) -> String {
        let mut out = String::new();
        match self {
            Localization::Located { classes } => {
                for (i, c) in classes.iter().enumerate() {
                    writeln!(out, "class {} (rows {}):", i + 1, c.rows).unwrap();
                    for m in &c.members {
                        writeln!(out, "  {}", m.display(model)).unwrap();
                    }
                }
            }
            Localization::Unexplained { failing } => {
                writeln!(out, "unexplained outcome: no candidate covers exactly rows {failing}").unwrap();
            }
        }
        out
    }
}

/// Every set in the `params` universe whose covering rows equal the failing
/// rows, partitioned into indistinguishability classes.
pub fn locate_faults(
    model: &SutModel,
    array: &TestArray,
    outcomes: &OutcomeVector,
    params: ClaParams,
    limits: &Limits,
) -> Result<Localization> {
    if outcomes.len() != array.len() {
        return Err(Error::input(format!("{} outcomes for {} rows", outcomes.len(), array.len())));
    }
    if array.factors() != model.k() {
        return Err(Error::input(format!("array has {} columns, model has {} factors", array.factors(), model.k())));
    }
    let failing = outcomes.failing_rows();
    let universe = Universe::build(model, params, limits)?;
    let index = ColumnIndex::new(array, &model.domain_sizes());
    let signatures = universe.signatures(&index);
    let matching: Vec<usize> = (0..universe.len()).filter(|&i| signatures[i] == failing).collect();
    if matching.is_empty() {
        return Ok(Localization::Unexplained { failing });
    }
    let distinguisher = Distinguisher::new(model, limits)?;
    let screen = distinguisher.screen(&universe);
    let classes = distinguisher
        .classify(&universe, screen.as_deref(), &matching)
        .into_iter()
        .map(|c| CandidateClass { members: c.into_iter().map(|i| universe.set(i)).collect(), rows: failing.clone() })
        .collect();
    Ok(Localization::Located { classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Outcome;
    use crate::fixtures;
    use crate::model::Interaction;

    fn it(pairs: &[(usize, usize)]) -> Interaction {
        Interaction::new(pairs.iter().map(|&(f, v)| (f - 1, v))).unwrap()
    }

    #[test]
    fn la_1_2_first_row_failure() {
        let m = fixtures::phone_unconstrained();
        let a = fixtures::la_1_2();
        let mut o = vec![Outcome::Pass; a.len()];
        o[0] = Outcome::Fail;
        let loc = locate_faults(&m, &a, &OutcomeVector::new(o), ClaParams::new(1, 2), &Limits::default()).unwrap();
        assert_eq!(loc.classes().len(), 1);
        assert_eq!(loc.classes()[0].members, vec![InteractionSet::singleton(it(&[(2, 0), (3, 0)]))]);
    }

    #[test]
    fn all_pass_means_no_fault() {
        let m = fixtures::phone();
        let a = fixtures::cla_2bar_2bar();
        let o = OutcomeVector::new(vec![Outcome::Pass; a.len()]);
        let loc = locate_faults(&m, &a, &o, ClaParams::new(2, 2).bar_d().bar_t(), &Limits::default()).unwrap();
        assert_eq!(loc.classes().len(), 1);
        assert_eq!(loc.classes()[0].members, vec![InteractionSet::empty()]);
    }

    #[test]
    fn indistinguishable_candidates_share_a_class() {
        let m = fixtures::phone();
        let a = fixtures::cla_1_2bar();
        let planted = InteractionSet::singleton(it(&[(1, 0), (3, 0)]));
        let o = OutcomeVector::simulate(&a, &planted);
        let loc = locate_faults(&m, &a, &o, ClaParams::new(1, 2).bar_t(), &Limits::default()).unwrap();
        assert_eq!(loc.classes().len(), 1);
        let members = &loc.classes()[0].members;
        assert!(members.contains(&planted));
        assert!(members.contains(&InteractionSet::singleton(it(&[(2, 2), (3, 0)]))));
    }

    #[test]
    fn unexplained_outcome() {
        let m = fixtures::phone();
        let a = fixtures::cla_1_1();
        let o = OutcomeVector::new(vec![Outcome::Fail, Outcome::Pass, Outcome::Pass, Outcome::Fail, Outcome::Pass]);
        let loc = locate_faults(&m, &a, &o, ClaParams::new(1, 1), &Limits::default()).unwrap();
        assert!(!loc.is_explained());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let m = fixtures::phone();
        let a = fixtures::cla_1_1();
        assert!(locate_faults(&m, &a, &OutcomeVector::new(vec![]), ClaParams::new(1, 1), &Limits::default()).is_err());
    }
}
