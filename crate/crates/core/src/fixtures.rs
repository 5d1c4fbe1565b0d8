//! The running cell-phone example and its published arrays, embedded so
//! tests, benches and the CLI self-test share one copy.

use crate::array::TestArray;
use crate::model::SutModel;
use crate::parser::{parse_array, parse_model};

pub const PHONE_MODEL: &str = include_str!("../fixtures/phone.model");
pub const PHONE_UNCONSTRAINED_MODEL: &str = include_str!("../fixtures/phone_unconstrained.model");

/// `(1,2)`-LA that ignores the constraints.
pub const LA_1_2_ARRAY: &str = include_str!("../fixtures/la_1_2.array");
/// 2-CCA.
pub const CCA_2_ARRAY: &str = include_str!("../fixtures/cca_2.array");
/// `(1,1)`-CLA.
pub const CLA_1_1_ARRAY: &str = include_str!("../fixtures/cla_1_1.array");
/// `(2̄,1)`-CLA.
pub const CLA_2BAR_1_ARRAY: &str = include_str!("../fixtures/cla_2bar_1.array");
/// `(1,2̄)`-CLA.
pub const CLA_1_2BAR_ARRAY: &str = include_str!("../fixtures/cla_1_2bar.array");
/// `(2̄,2̄)`-CLA.
pub const CLA_2BAR_2BAR_ARRAY: &str = include_str!("../fixtures/cla_2bar_2bar.array");

pub fn phone() -> SutModel {
    parse_model(PHONE_MODEL).expect("phone fixture parses")
}

pub fn phone_unconstrained() -> SutModel {
    parse_model(PHONE_UNCONSTRAINED_MODEL).expect("unconstrained phone fixture parses")
}

fn array(text: &str) -> TestArray {
    parse_array(text, &phone()).expect("fixture array parses")
}

pub fn la_1_2() -> TestArray {
    array(LA_1_2_ARRAY)
}

pub fn cca_2() -> TestArray {
    array(CCA_2_ARRAY)
}

pub fn cla_1_1() -> TestArray {
    array(CLA_1_1_ARRAY)
}

pub fn cla_2bar_1() -> TestArray {
    array(CLA_2BAR_1_ARRAY)
}

pub fn cla_1_2bar() -> TestArray {
    array(CLA_1_2BAR_ARRAY)
}

pub fn cla_2bar_2bar() -> TestArray {
    array(CLA_2BAR_2BAR_ARRAY)
}
