//! Seeded random models and arrays for property checks and benchmarks.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::TestArray;
use crate::model::search::search;
use crate::model::{ConstraintExpr, Interaction, SutModel, Test};

/// Size ranges for [`random_model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusShape {
    pub factors: RangeInclusive<usize>,
    pub domain: RangeInclusive<usize>,
    pub constraints: RangeInclusive<usize>,
}

impl Default for CorpusShape {
    fn default() -> Self {
        CorpusShape { factors: 3..=6, domain: 2..=3, constraints: 0..=5 }
    }
}

impl CorpusShape {
    /// Same ranges with no constraints.
    pub fn unconstrained(&self) -> Self {
        CorpusShape { constraints: 0..=0, ..self.clone() }
    }
}

/// A satisfiable model drawn from `shape`; the same seed gives the same model.
///
/// Constraint formulas that would make the model unsatisfiable are redrawn,
/// and dropped after a bounded number of attempts.
pub fn random_model(seed: u64, shape: &CorpusShape) -> SutModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(shape.factors.clone());
    let domains: Vec<usize> = (0..k).map(|_| rng.gen_range(shape.domain.clone())).collect();
    let wanted = rng.gen_range(shape.constraints.clone());
    let mut constraints = Vec::with_capacity(wanted);
    for _ in 0..wanted {
        for _attempt in 0..16 {
            let candidate = random_constraint(&mut rng, &domains);
            let mut trial = constraints.clone();
            trial.push(candidate);
            let model = SutModel::numeric(format!("random-{seed}"), &domains, trial.clone()).expect("indices in range");
            if search(&model, &Interaction::empty(), &[]).is_some() {
                constraints = trial;
                break;
            }
        }
    }
    SutModel::numeric(format!("random-{seed}"), &domains, constraints).expect("indices in range")
}

fn random_atom(rng: &mut ChaCha8Rng, domains: &[usize]) -> ConstraintExpr {
    let f = rng.gen_range(0..domains.len());
    let v = rng.gen_range(0..domains[f]);
    if rng.gen_bool(0.8) {
        ConstraintExpr::eq(f, v)
    } else {
        ConstraintExpr::ne(f, v)
    }
}

/// One of: a forbidden combination, an implication, or a disjunction.
fn random_constraint(rng: &mut ChaCha8Rng, domains: &[usize]) -> ConstraintExpr {
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(1..=2);
            ConstraintExpr::not(ConstraintExpr::And((0..=n).map(|_| random_atom(rng, domains)).collect()))
        }
        1 => ConstraintExpr::implies(random_atom(rng, domains), random_atom(rng, domains)),
        _ => ConstraintExpr::Or(vec![random_atom(rng, domains), random_atom(rng, domains)]),
    }
}

/// A model with 20 factors of 2 to 4 values and 10 constraints, each
/// forbidding a pair of values or requiring one value to imply another.
pub fn scale_model(seed: u64) -> SutModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains: Vec<usize> = (0..20).map(|_| rng.gen_range(2..=4)).collect();
    let mut constraints: Vec<ConstraintExpr> = Vec::with_capacity(10);
    while constraints.len() < 10 {
        let mut fs: Vec<usize> = (0..domains.len()).collect();
        fs.shuffle(&mut rng);
        let (a, b) = (fs[0], fs[1]);
        let (va, vb) = (rng.gen_range(0..domains[a]), rng.gen_range(0..domains[b]));
        let c = if rng.gen_bool(0.5) {
            ConstraintExpr::not(ConstraintExpr::And(vec![ConstraintExpr::eq(a, va), ConstraintExpr::eq(b, vb)]))
        } else {
            ConstraintExpr::implies(ConstraintExpr::eq(a, va), ConstraintExpr::eq(b, vb))
        };
        let mut trial = constraints.clone();
        trial.push(c);
        let model = SutModel::numeric("scale", &domains, trial.clone()).expect("indices in range");
        if search(&model, &Interaction::empty(), &[]).is_some() {
            constraints = trial;
        }
    }
    SutModel::numeric("scale", &domains, constraints).expect("indices in range")
}

/// A random subset of `valid` (rows kept in their given order), holding
/// between one row and all of them.
pub fn random_subarray(k: usize, valid: &[Test], seed: u64) -> TestArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = if valid.is_empty() { 0 } else { rng.gen_range(1..=valid.len()) };
    let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, valid.len(), n).into_vec();
    picks.sort_unstable();
    TestArray::from_rows(k, picks.into_iter().map(|i| valid[i].clone()).collect()).expect("rows match k")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_valid_tests;

    #[test]
    fn models_are_satisfiable_and_in_shape() {
        let shape = CorpusShape::default();
        for seed in 0..100 {
            let m = random_model(seed, &shape);
            assert!(shape.factors.contains(&m.k()));
            assert!(m.domain_sizes().iter().all(|d| shape.domain.contains(d)));
            assert!(m.constraints().len() <= 5);
            assert!(!enumerate_valid_tests(&m, 10_000).unwrap().is_empty());
        }
    }

    #[test]
    fn models_are_reproducible() {
        let shape = CorpusShape::default();
        assert_eq!(random_model(9, &shape), random_model(9, &shape));
        assert!(random_model(3, &shape.unconstrained()).constraints().is_empty());
    }

    #[test]
    fn scale_model_shape() {
        let m = scale_model(0);
        assert_eq!(m.k(), 20);
        assert_eq!(m.constraints().len(), 10);
        assert!(m.domain_sizes().iter().all(|d| (2..=4).contains(d)));
    }

    #[test]
    fn subarrays_use_valid_rows() {
        let m = random_model(4, &CorpusShape::default());
        let valid = enumerate_valid_tests(&m, 10_000).unwrap();
        let a = random_subarray(m.k(), &valid, 1);
        assert!(!a.is_empty());
        assert!(a.rows().iter().all(|r| valid.contains(r)));
    }
}
