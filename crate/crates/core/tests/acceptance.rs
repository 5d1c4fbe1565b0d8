//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, with detail
//! lines beneath. Exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cla::corpus::{random_model, scale_model, CorpusShape};
use cla::reduce::{reduce_map, ClaGeneration, CoverageMap, Verdict};
use cla::selftest::{
    check_bar_t_equivalence, check_cca_is_cla, check_exhaustive, check_la_agreement, check_subsumption, CheckOutcome,
    SelfTestOptions,
};
use cla::{
    distinguishable, enumerate_valid_tests, fixtures, generate_cla, indistinguishable_pairs, invalid_interactions,
    locate_faults, minimal_cla_size, valid_interactions, verify_cca, verify_cla, CcaOptions, ClaParams, Interaction,
    InteractionSet, Limits, Mode, OutcomeVector, ReduceOptions, RowSet, SutModel, TestArray, Universe,
};

type Check = (&'static str, fn() -> Criterion);

/// Outcome of one criterion.
struct Criterion {
    passed: bool,
    details: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.details.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.passed &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(format!("     {}", what.into()));
    }
}

/// 1-based factor numbering.
fn it(pairs: &[(usize, usize)]) -> Interaction {
    Interaction::new(pairs.iter().map(|&(f, v)| (f - 1, v))).unwrap()
}

fn set(members: &[&[(usize, usize)]]) -> InteractionSet {
    InteractionSet::new(members.iter().map(|m| it(m)))
}

fn ordered(a: InteractionSet, b: InteractionSet) -> (InteractionSet, InteractionSet) {
    if b < a {
        (b, a)
    } else {
        (a, b)
    }
}

fn selftest_options() -> SelfTestOptions {
    SelfTestOptions { models: 200, seed: 0, ..SelfTestOptions::default() }
}

fn absorb(c: &mut Criterion, outcome: &CheckOutcome) {
    c.check(outcome.passed(), outcome.to_string());
    for f in &outcome.failures {
        c.note(f.clone());
    }
}

fn ac1() -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    let m = fixtures::phone();
    let tests = enumerate_valid_tests(&m, 1000).unwrap();
    c.check(tests.len() == 31, format!("|R| = {} (expected 31)", tests.len()));
    let mut listed = vec![
        it(&[(1, 2), (2, 0)]),
        it(&[(1, 1), (3, 0)]),
        it(&[(1, 2), (3, 0)]),
        it(&[(1, 2), (4, 0)]),
        it(&[(1, 2), (5, 0)]),
        it(&[(2, 0), (3, 0)]),
        it(&[(2, 1), (3, 0)]),
        it(&[(3, 2), (4, 0)]),
        it(&[(3, 2), (5, 0)]),
        it(&[(4, 1), (5, 0)]),
    ];
    listed.sort();
    let invalid = invalid_interactions(&m, 2).unwrap();
    c.check(invalid == listed, format!("invalid 2-way interactions are the listed ten ({} found)", invalid.len()));
    let vi2 = valid_interactions(&m, 2, Mode::Exact).unwrap().len();
    c.check(vi2 == 57, format!("|VI_2| = {vi2} (expected 57)"));
    let elapsed = start.elapsed();
    c.check(elapsed < Duration::from_secs(1), format!("elapsed {elapsed:?} < 1 s"));
    c
}

fn ac2() -> Criterion {
    let mut c = Criterion::new();
    let m = fixtures::phone();
    let l = Limits::default();
    let cases: [(&str, TestArray, ClaParams); 4] = [
        ("golden (1,1)-CLA", fixtures::cla_1_1(), ClaParams::new(1, 1)),
        ("golden (2bar,1)-CLA", fixtures::cla_2bar_1(), ClaParams::new(2, 1).bar_d()),
        ("golden (1,2bar)-CLA", fixtures::cla_1_2bar(), ClaParams::new(1, 2).bar_t()),
        ("golden (2bar,2bar)-CLA", fixtures::cla_2bar_2bar(), ClaParams::new(2, 2).bar_d().bar_t()),
    ];
    let cca_2 = verify_cca(&m, &fixtures::cca_2(), 2, &l).unwrap();
    c.check(cca_2.passed(), format!("golden 2-CCA: {cca_2}"));
    for (name, array, params) in cases {
        let r = verify_cla(&m, &array, params, &l).unwrap();
        c.check(r.passed() && array.len() == r.rows, format!("{name} ({} rows): {r}", array.len()));
    }
    let la_1_2 = verify_cca(&m, &fixtures::la_1_2(), 2, &l).unwrap();
    let headline = la_1_2.render(&m).lines().next().unwrap_or_default().to_string();
    c.check(!la_1_2.passed() && headline.starts_with("FAIL: row 0 violates constraints"), format!("golden (1,2)-LA under constraints: {headline}"));
    let free = fixtures::phone_unconstrained();
    let r = verify_cla(&free, &fixtures::la_1_2(), ClaParams::new(1, 2), &l).unwrap();
    c.check(r.passed(), format!("golden LA unconstrained (1,2)-CLA: {r}"));
    c
}

fn ac3() -> Criterion {
    let mut c = Criterion::new();
    let m = fixtures::phone();
    let l = Limits::default();

    let pairs_a: Vec<(InteractionSet, InteractionSet)> = [
        (set(&[&[(1, 0)]]), set(&[&[(1, 0)], &[(3, 0)]])),
        (set(&[&[(2, 2)]]), set(&[&[(2, 2)], &[(3, 0)]])),
        (set(&[&[(4, 0)]]), set(&[&[(4, 0)], &[(5, 0)]])),
        (set(&[&[(4, 1)]]), set(&[&[(1, 2)], &[(4, 1)]])),
        (set(&[&[(4, 1)]]), set(&[&[(3, 2)], &[(4, 1)]])),
        (set(&[&[(5, 1)]]), set(&[&[(1, 2)], &[(5, 1)]])),
        (set(&[&[(5, 1)]]), set(&[&[(3, 2)], &[(5, 1)]])),
        (set(&[&[(5, 1)]]), set(&[&[(4, 1)], &[(5, 1)]])),
        (set(&[&[(1, 2)], &[(4, 1)]]), set(&[&[(3, 2)], &[(4, 1)]])),
        (set(&[&[(1, 2)], &[(5, 1)]]), set(&[&[(3, 2)], &[(5, 1)]])),
        (set(&[&[(1, 2)], &[(5, 1)]]), set(&[&[(4, 1)], &[(5, 1)]])),
        (set(&[&[(3, 2)], &[(5, 1)]]), set(&[&[(4, 1)], &[(5, 1)]])),
        (set(&[&[(4, 0)], &[(4, 1)]]), set(&[&[(4, 0)], &[(5, 1)]])),
        (set(&[&[(4, 0)], &[(4, 1)]]), set(&[&[(5, 0)], &[(5, 1)]])),
        (set(&[&[(4, 0)], &[(5, 1)]]), set(&[&[(5, 0)], &[(5, 1)]])),
    ]
    .into_iter()
    .map(|(a, b)| ordered(a, b))
    .collect();
    let mut expected_a = pairs_a.clone();
    expected_a.sort();
    let found_a = indistinguishable_pairs(&m, ClaParams::new(2, 1).bar_d(), &l).unwrap();
    c.check(found_a == expected_a, format!("listed (2bar,1) pairs: {} pairs found, 15 listed, lists equal", found_a.len()));

    let mut expected_b: Vec<_> = [
        (set(&[&[(1, 0), (3, 0)]]), set(&[&[(2, 2), (3, 0)]])),
        (set(&[&[(1, 2), (4, 1)]]), set(&[&[(1, 2), (5, 1)]])),
        (set(&[&[(3, 2), (4, 1)]]), set(&[&[(3, 2), (5, 1)]])),
    ]
    .into_iter()
    .map(|(a, b)| ordered(a, b))
    .collect();
    expected_b.sort();
    let found_b = indistinguishable_pairs(&m, ClaParams::new(1, 2).bar_t(), &l).unwrap();
    c.check(found_b == expected_b, format!("listed (1,2bar) pairs: {} pairs found, 3 listed", found_b.len()));
    if found_b != expected_b {
        let exact = indistinguishable_pairs(&m, ClaParams::new(1, 2), &l).unwrap();
        c.note(format!("with strength exactly 2 the enumeration gives {} pairs, equal to the list: {}", exact.len(), exact == expected_b));
        for (a, b) in found_b.iter().filter(|p| !expected_b.contains(p)) {
            c.note(format!("additional pair {} ~ {} (one interaction contains the other)", a.display(&m), b.display(&m)));
        }
    }

    let pairs_c = [
        (set(&[&[(1, 0)]]), set(&[&[(1, 0)], &[(3, 0)]])),
        (set(&[&[(1, 2), (4, 1)]]), set(&[&[(1, 2), (4, 1)], &[(1, 2), (5, 1)]])),
        (set(&[&[(1, 0), (2, 0)], &[(1, 1), (2, 0)]]), set(&[&[(1, 2), (4, 1)], &[(1, 2), (5, 1)]])),
    ];
    let exhaustive = TestArray::from_rows(5, enumerate_valid_tests(&m, 1000).unwrap()).unwrap();
    for (a, b) in &pairs_c {
        let d = distinguishable(&m, a, b).unwrap();
        c.check(!d, format!("listed pair {} ~ {} indistinguishable", a.display(&m), b.display(&m)));
        if d {
            let witness = exhaustive
                .rows()
                .iter()
                .find(|r| a.is_hit_by(r) != b.is_hit_by(r))
                .expect("distinguishable pairs have a separating valid test");
            c.note(format!(
                "valid test {witness} covers a member of exactly one side ({} hit: {}, {} hit: {})",
                a.display(&m),
                a.is_hit_by(witness),
                b.display(&m),
                b.is_hit_by(witness)
            ));
        }
    }
    c
}

fn ac4() -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    absorb(&mut c, &check_cca_is_cla(&selftest_options()));
    let elapsed = start.elapsed();
    c.check(elapsed < Duration::from_secs(300), format!("elapsed {elapsed:?} < 5 min"));
    c
}

fn ac5() -> Criterion {
    let mut c = Criterion::new();
    absorb(&mut c, &check_bar_t_equivalence(&selftest_options()));
    c
}

fn ac6() -> Criterion {
    let mut c = Criterion::new();
    let options = selftest_options();
    absorb(&mut c, &check_subsumption(&options));
    absorb(&mut c, &check_exhaustive(&options));
    absorb(&mut c, &check_la_agreement(&options));
    c
}

fn ac7() -> Criterion {
    let mut c = Criterion::new();
    let toy = || {
        let rows = |r: &[usize]| RowSet::from_indices(6, r.iter().copied());
        let label = |i: usize| Interaction::new([(i, 0)]).unwrap();
        let mut map = CoverageMap::from_row_sets(
            6,
            vec![(label(0), rows(&[1, 2, 3])), (label(1), rows(&[1, 2, 4])), (label(2), rows(&[4, 5]))],
        );
        map.delete_row(0);
        map
    };
    for (order, expected) in [(vec![1, 2, 3, 4, 5], vec![1, 2]), (vec![5, 4, 3, 2, 1], vec![5, 3, 2])] {
        let mut map = toy();
        let deleted: Vec<usize> =
            reduce_map(&mut map, &order).into_iter().filter(|v| v.verdict == Verdict::Deleted).map(|v| v.row).collect();
        c.check(deleted == expected, format!("order {order:?} deletes rows {deleted:?} (expected {expected:?})"));
    }
    c
}

fn ac8() -> Criterion {
    let mut c = Criterion::new();
    let m = fixtures::phone();
    let l = Limits::default();
    let params = ClaParams::new(1, 2).bar_d().bar_t();
    let g: ClaGeneration = generate_cla(&m, 2, 0, &CcaOptions::default(), &ReduceOptions::default(), &l).unwrap();
    c.check(g.verification.passed(), format!("output verifies: {}", g.verification));
    c.check(g.cla.len() <= g.cca.len(), format!("size {} <= initial 3-CCA size {}", g.cla.len(), g.cca.len()));
    c.check(!g.report.deleted.is_empty(), format!("{} row(s) deleted", g.report.deleted.len()));
    match minimal_cla_size(&m, params, 50_000_000, &l) {
        Ok((min, witness)) => {
            let ok = verify_cla(&m, &witness, params, &l).unwrap().passed();
            c.check(ok && g.cla.len() >= min, format!("size {} >= minimal size {min} (witness verifies: {ok})", g.cla.len()));
        }
        Err(e) => c.check(false, format!("minimal size search: {e}")),
    }
    c
}

fn ac9() -> Criterion {
    let mut c = Criterion::new();
    let l = Limits::default();
    let free = fixtures::phone_unconstrained();
    let a = fixtures::la_1_2();
    let mut outcomes = vec![cla::Outcome::Pass; a.len()];
    outcomes[0] = cla::Outcome::Fail;
    let loc = locate_faults(&free, &a, &OutcomeVector::new(outcomes), ClaParams::new(1, 2), &l).unwrap();
    let unique = loc.classes().len() == 1 && loc.classes()[0].members == vec![set(&[&[(2, 0), (3, 0)]])];
    c.check(unique, "LA row-0 failure has the unique candidate {(2,0),(3,0)}");

    let mut recovered = 0;
    let trials = 100;
    for trial in 0..trials {
        let seed = trial as u64;
        let model: SutModel = if trial % 2 == 0 { fixtures::phone() } else { random_model(seed, &CorpusShape::default()) };
        let t = if model.k() > 2 { 1 + trial % 2 } else { 1 };
        let params = ClaParams::new(1, t).bar_d().bar_t();
        let options = CcaOptions { candidates: 10, ..CcaOptions::default() };
        let g = generate_cla(&model, t, seed, &options, &ReduceOptions { runs: 3 }, &l).unwrap();
        let universe = Universe::build(&model, params, &l).unwrap();
        let planted = universe.set(ChaCha8Rng::seed_from_u64(seed).gen_range(0..universe.len()));
        let o = OutcomeVector::simulate(&g.cla, &planted);
        let loc = locate_faults(&model, &g.cla, &o, params, &l).unwrap();
        if loc.classes().len() == 1 && loc.classes()[0].members.contains(&planted) {
            recovered += 1;
        } else {
            c.note(format!("trial {trial}: planted {planted} not recovered as a single class"));
        }
    }
    c.check(recovered == trials, format!("planted faults recovered in {recovered}/{trials} trials"));
    c
}

fn ac10() -> Criterion {
    let mut c = Criterion::new();
    let m = scale_model(0);
    let l = Limits::default();
    let start = Instant::now();
    let result = generate_cla(&m, 2, 0, &CcaOptions::default(), &ReduceOptions::default(), &l);
    let elapsed = start.elapsed();
    match result {
        Ok(g) => {
            c.check(g.verification.passed(), format!("20 factors, 10 constraints: {} -> {} rows, re-verified", g.cca.len(), g.cla.len()));
            c.check(elapsed < Duration::from_secs(60), format!("elapsed {elapsed:?} < 60 s"));
        }
        Err(e) => c.check(false, format!("gen-cla failed: {e}")),
    }
    c
}

fn main() -> ExitCode {
    let criteria: [Check; 10] = [
        ("AC1 phone fixture facts", ac1),
        ("AC2 golden arrays", ac2),
        ("AC3 indistinguishable pair enumeration", ac3),
        ("AC4 (t+1)-CCA is a (1bar,tbar)-CLA on 200 random models", ac4),
        ("AC5 (1bar,t) agrees with (1bar,tbar)", ac5),
        ("AC6 subsumption, LA agreement, exhaustive arrays", ac6),
        ("AC7 reduction toy traces", ac7),
        ("AC8 reduction effectiveness on the phone model", ac8),
        ("AC9 fault localization", ac9),
        ("AC10 scale smoke", ac10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let c = run();
        println!("[{}] {name} ({:.1} s)", if c.passed { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        for d in &c.details {
            println!("    {d}");
        }
        if !c.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
