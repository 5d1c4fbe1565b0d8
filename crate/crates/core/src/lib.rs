//! Constrained locating arrays for combinatorial interaction testing.
//!
//! A system under test is a set of factors with finite value domains and a
//! boolean constraint over them ([`SutModel`]). This crate enumerates valid
//! tests and interactions, decides distinguishability of interaction sets,
//! generates constrained covering arrays, reduces them to `(1̄,t̄)`-CLAs,
//! verifies every CLA variant by brute force and locates failure-triggering
//! interactions from pass/fail outcomes.
//!
//! ```
//! use cla::{fixtures, verify_cla, ClaParams, Limits};
//!
//! let model = fixtures::phone();
//! let array = fixtures::cla_1_1();
//! let report = verify_cla(&model, &array, ClaParams::new(1, 1), &Limits::default()).unwrap();
//! assert!(report.passed());
//! ```

pub mod array;
pub mod cca;
pub mod corpus;
pub mod distinguish;
pub mod enumerate;
pub mod error;
pub mod fixtures;
pub mod locate;
pub mod model;
mod par;
pub mod parser;
pub mod reduce;
pub mod selftest;
pub mod verify;

pub use array::{ColumnIndex, Outcome, OutcomeVector, RowSet, TestArray};
pub use cca::{generate_cca, CcaOptions};
pub use distinguish::{distinguishable, independent, indistinguishable_pairs, ClaParams, Universe};
pub use enumerate::{
    all_interactions, enumerate_valid_tests, interactions_of, invalid_interactions, valid_interactions,
    valid_interactions_with, Backend, Limits, Mode,
};
pub use error::{Error, Result};
pub use locate::{locate_faults, CandidateClass, Localization};
pub use model::{find_valid_test, ConstraintExpr, Factor, Interaction, InteractionSet, SutModel, Test};
pub use par::is_parallel;
pub use parser::{parse_array, parse_model, parse_outcomes, serialize_array, serialize_model, serialize_outcomes, ParseError};
pub use reduce::{generate_cla, reduce_map, reduce_to_cla, ClaGeneration, CoverageMap, ReduceOptions, ReductionReport, RowVerdict, Verdict};
pub use selftest::{run_all as run_selftest, CheckOutcome, SelfTestOptions};
pub use verify::{minimal_cla_size, verify_cca, verify_cla, verify_la, Report, Witness};
