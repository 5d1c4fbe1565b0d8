//! Property checks of the structural results over a seeded corpus of random
//! models: subsumption between CLA variants, agreement with locating arrays on
//! unconstrained models, the exhaustive array being a CLA, `(t+1)`-CCAs being
//! `(1̄,t̄)`-CLAs, and `(1̄,t)` coinciding with `(1̄,t̄)`.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::array::TestArray;
use crate::cca::{generate_cca, CcaOptions};
use crate::corpus::{random_model, random_subarray, CorpusShape};
use crate::distinguish::ClaParams;
use crate::enumerate::{enumerate_valid_tests, Limits};
use crate::error::{Error, Result};
use crate::model::SutModel;
use crate::par::into_par_iter;
#[allow(unused_imports)]
use crate::par::prelude::*;
use crate::reduce::{reduce_to_cla, ReduceOptions};
use crate::verify::{verify_cca, verify_cla, verify_la};

/// Failure messages kept per check.
const MAX_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfTestOptions {
    /// Number of random models.
    pub models: usize,
    pub seed: u64,
    /// Random valid-row subarrays drawn per model.
    pub subarrays: usize,
    pub shape: CorpusShape,
    pub limits: Limits,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        SelfTestOptions { models: 200, seed: 0, subarrays: 3, shape: CorpusShape::default(), limits: Limits::default() }
    }
}

impl SelfTestOptions {
    fn model_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
    }
}

/// Result of one property check over the corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Implications or agreements evaluated.
    pub cases: u64,
    /// Cases skipped because a universe or enumeration cap was hit.
    pub skipped: u64,
    /// Total failing cases; `failures` holds the first few.
    pub failed: u64,
    pub failures: Vec<String>,
    pub elapsed_ms: u128,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0 && self.cases > 0
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} cases, {} failed, {} skipped ({} ms)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failed,
            self.skipped,
            self.elapsed_ms
        )
    }
}

/// Per-model tally merged into a [`CheckOutcome`].
#[derive(Default)]
struct Tally {
    cases: u64,
    skipped: u64,
    failed: u64,
    failures: Vec<String>,
}

impl Tally {
    fn expect(&mut self, ok: bool, message: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(message());
            }
        }
    }

    /// Records an error: caps count as skips, anything else as a failure.
    fn error(&mut self, context: &str, err: Error) {
        if matches!(err, Error::CapExceeded { .. }) {
            self.skipped += 1;
        } else {
            self.expect(false, || format!("{context}: {err}"));
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.skipped += other.skipped;
        self.failed += other.failed;
        let room = MAX_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        self
    }
}

fn run_check(name: &str, options: &SelfTestOptions, shape: &CorpusShape, per_model: impl Fn(u64, &SutModel, &mut Tally) + Sync) -> CheckOutcome {
    let start = Instant::now();
    let tallies: Vec<Tally> = into_par_iter!((0..options.models))
        .map(|i| {
            let seed = options.model_seed(i);
            let model = random_model(seed, shape);
            let mut tally = Tally::default();
            per_model(seed, &model, &mut tally);
            tally
        })
        .collect();
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    CheckOutcome {
        name: name.to_string(),
        cases: total.cases,
        skipped: total.skipped,
        failed: total.failed,
        failures: total.failures,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Memoized pass/fail of `verify_cla` on one array; `None` when a cap was hit.
struct Verdicts<'a> {
    model: &'a SutModel,
    array: &'a TestArray,
    limits: &'a Limits,
    cache: HashMap<ClaParams, Option<bool>>,
}

impl<'a> Verdicts<'a> {
    fn new(model: &'a SutModel, array: &'a TestArray, limits: &'a Limits) -> Self {
        Verdicts { model, array, limits, cache: HashMap::new() }
    }

    fn get(&mut self, params: ClaParams, tally: &mut Tally) -> Option<bool> {
        if let Some(&v) = self.cache.get(&params) {
            return v;
        }
        let v = match verify_cla(self.model, self.array, params, self.limits) {
            Ok(r) => Some(r.passed()),
            Err(e) => {
                tally.error(&format!("{} verify {params}", self.model.name()), e);
                None
            }
        };
        self.cache.insert(params, v);
        v
    }
}

fn model_arrays(seed: u64, model: &SutModel, options: &SelfTestOptions, tally: &mut Tally) -> Vec<TestArray> {
    let valid = match enumerate_valid_tests(model, options.limits.max_tests) {
        Ok(v) => v,
        Err(e) => {
            tally.error(model.name(), e);
            return Vec::new();
        }
    };
    let mut arrays: Vec<TestArray> =
        (0..options.subarrays).map(|j| random_subarray(model.k(), &valid, seed ^ ((j as u64 + 1) << 48))).collect();
    match generate_cca(model, 2.min(model.k()), seed, &CcaOptions::default(), &options.limits) {
        Ok(a) => arrays.push(a),
        Err(e) => tally.error(&format!("{} gen-cca", model.name()), e),
    }
    arrays
}

fn implies(p: Option<bool>, q: Option<bool>) -> Option<bool> {
    match (p, q) {
        (Some(false), _) => Some(true),
        (Some(true), Some(q)) => Some(q),
        _ => None,
    }
}

/// Subsumption: a stronger variant passing implies each weaker one passes.
pub fn check_subsumption(options: &SelfTestOptions) -> CheckOutcome {
    run_check("subsumption between CLA variants", options, &options.shape, |seed, model, tally| {
        for (ai, array) in model_arrays(seed, model, options, tally).iter().enumerate() {
            let mut v = Verdicts::new(model, array, &options.limits);
            for d in 1..=2 {
                for t in 1..=2.min(model.k()) {
                    let p = |bd, bt| ClaParams::with_flags(d, t, bd, bt);
                    let mut rules = vec![
                        (p(true, true), p(true, false)),
                        (p(true, true), p(false, true)),
                        (p(true, false), p(false, false)),
                        (p(false, true), p(false, false)),
                        (p(true, true), ClaParams::with_flags(d - 1, t, true, true)),
                    ];
                    if t >= 2 {
                        rules.push((p(false, true), ClaParams::with_flags(d, t - 1, false, true)));
                    }
                    for (strong, weak) in rules {
                        let lhs = v.get(strong, tally);
                        let rhs = if lhs == Some(true) { v.get(weak, tally) } else { None };
                        if let Some(ok) = implies(lhs, rhs) {
                            tally.expect(ok, || format!("{} array {ai}: {strong} passes but {weak} fails", model.name()));
                        }
                    }
                }
            }
        }
    })
}

/// On unconstrained models CLA and LA verification agree whenever a
/// locating array exists, and an LA is always a CLA.
pub fn check_la_agreement(options: &SelfTestOptions) -> CheckOutcome {
    let shape = options.shape.unconstrained();
    run_check("CLA and LA agree without constraints", options, &shape, |seed, model, tally| {
        let exhaustive = match enumerate_valid_tests(model, options.limits.max_tests)
            .and_then(|rows| TestArray::from_rows(model.k(), rows))
        {
            Ok(a) => a,
            Err(e) => return tally.error(model.name(), e),
        };
        let mut arrays = model_arrays(seed, model, options, tally);
        arrays.push(exhaustive.clone());
        for d in 1..=2 {
            for t in 1..=2.min(model.k()) {
                for (bar_d, bar_t) in [(false, false), (true, false), (false, true), (true, true)] {
                    let params = ClaParams::with_flags(d, t, bar_d, bar_t);
                    let exists = match verify_la(model, &exhaustive, params, &options.limits) {
                        Ok(r) => r.passed(),
                        Err(e) => {
                            tally.error(model.name(), e);
                            continue;
                        }
                    };
                    for (ai, array) in arrays.iter().enumerate() {
                        let la = verify_la(model, array, params, &options.limits).map(|r| r.passed());
                        let cla = verify_cla(model, array, params, &options.limits).map(|r| r.passed());
                        match (la, cla) {
                            (Ok(la), Ok(cla)) => {
                                tally.expect(!la || cla, || format!("{} array {ai}: {params}-LA but not CLA", model.name()));
                                if exists {
                                    tally.expect(la == cla, || {
                                        format!("{} array {ai}: {params} LA={la} CLA={cla} though an LA exists", model.name())
                                    });
                                }
                            }
                            (Err(e), _) | (_, Err(e)) => tally.error(model.name(), e),
                        }
                    }
                }
            }
        }
    })
}

/// The array of all valid tests is a CLA for every variant.
pub fn check_exhaustive(options: &SelfTestOptions) -> CheckOutcome {
    run_check("exhaustive array is a CLA", options, &options.shape, |_, model, tally| {
        let exhaustive = match enumerate_valid_tests(model, options.limits.max_tests)
            .and_then(|rows| TestArray::from_rows(model.k(), rows))
        {
            Ok(a) => a,
            Err(e) => return tally.error(model.name(), e),
        };
        for d in 1..=2 {
            for t in 1..=3.min(model.k()) {
                for (bar_d, bar_t) in [(false, false), (true, false), (false, true), (true, true)] {
                    let params = ClaParams::with_flags(d, t, bar_d, bar_t);
                    match verify_cla(model, &exhaustive, params, &options.limits) {
                        Ok(r) => tally.expect(r.passed(), || format!("{}: exhaustive array fails {params}: {r}", model.name())),
                        Err(e) => tally.error(model.name(), e),
                    }
                }
            }
        }
    })
}

/// Every generated `(t+1)`-CCA is a `(1̄,t̄)`-CLA, for `t` in 1 and 2.
pub fn check_cca_is_cla(options: &SelfTestOptions) -> CheckOutcome {
    run_check("(t+1)-CCA is a (1bar,tbar)-CLA", options, &options.shape, |seed, model, tally| {
        for t in 1..=2 {
            if t >= model.k() {
                continue;
            }
            let cca = match generate_cca(model, t + 1, seed, &CcaOptions::default(), &options.limits) {
                Ok(a) => a,
                Err(e) => {
                    tally.error(&format!("{} gen-cca {}", model.name(), t + 1), e);
                    continue;
                }
            };
            let checks = verify_cca(model, &cca, t + 1, &options.limits).and_then(|c| {
                Ok((c.passed(), verify_cla(model, &cca, ClaParams::new(1, t).bar_d().bar_t(), &options.limits)?))
            });
            match checks {
                Ok((is_cca, cla)) => {
                    tally.expect(is_cca, || format!("{}: generated array is not a {}-CCA", model.name(), t + 1));
                    tally.expect(cla.passed(), || format!("{}: {}-CCA fails (1bar,{t}bar): {cla}", model.name(), t + 1));
                }
                Err(e) => tally.error(model.name(), e),
            }
        }
    })
}

/// `(1̄,t)` and `(1̄,t̄)` verification agree, and a `(1̄,t)`-CLA is a `t`-CCA.
pub fn check_bar_t_equivalence(options: &SelfTestOptions) -> CheckOutcome {
    run_check("(1bar,t) agrees with (1bar,tbar)", options, &options.shape, |seed, model, tally| {
        let mut arrays = model_arrays(seed, model, options, tally);
        if model.k() > 1 {
            let reduced = generate_cca(model, 2, seed, &CcaOptions::default(), &options.limits)
                .and_then(|cca| reduce_to_cla(model, &cca, 1, seed, &ReduceOptions::default(), &options.limits));
            match reduced {
                Ok((cla, _)) => arrays.push(cla),
                Err(e) => tally.error(&format!("{} reduce", model.name()), e),
            }
        }
        for (ai, array) in arrays.iter().enumerate() {
            let mut v = Verdicts::new(model, array, &options.limits);
            for t in 1..=2.min(model.k()) {
                let (Some(exact), Some(bar)) =
                    (v.get(ClaParams::new(1, t).bar_d(), tally), v.get(ClaParams::new(1, t).bar_d().bar_t(), tally))
                else {
                    continue;
                };
                tally.expect(exact == bar, || format!("{} array {ai}: (1bar,{t})={exact} but (1bar,{t}bar)={bar}", model.name()));
                if exact {
                    match verify_cca(model, array, t, &options.limits) {
                        Ok(r) => tally.expect(r.passed(), || format!("{} array {ai}: (1bar,{t})-CLA is not a {t}-CCA", model.name())),
                        Err(e) => tally.error(model.name(), e),
                    }
                }
            }
        }
    })
}

/// Every check, in a fixed order.
pub fn run_all(options: &SelfTestOptions) -> Vec<CheckOutcome> {
    vec![
        check_subsumption(options),
        check_la_agreement(options),
        check_exhaustive(options),
        check_cca_is_cla(options),
        check_bar_t_equivalence(options),
    ]
}

/// Runs every check and fails on the first one that does not pass.
pub fn run_all_strict(options: &SelfTestOptions) -> Result<Vec<CheckOutcome>> {
    let outcomes = run_all(options);
    if let Some(bad) = outcomes.iter().find(|o| !o.passed()) {
        return Err(Error::Inconsistent(format!("{bad}")));
    }
    Ok(outcomes)
}
