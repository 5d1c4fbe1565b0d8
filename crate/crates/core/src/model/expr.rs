use serde::{Deserialize, Serialize};

/// Boolean formula over factor-value atoms.
///
/// Atoms reference factors and values by index into the owning
/// [`SutModel`](super::SutModel); the model validates references on
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintExpr {
    True,
    Atom {
        factor: usize,
        value: usize,
        /// `true` for `F = v`, `false` for `F != v`.
        equals: bool,
    },
    Not(Box<ConstraintExpr>),
    And(Vec<ConstraintExpr>),
    Or(Vec<ConstraintExpr>),
    Implies(Box<ConstraintExpr>, Box<ConstraintExpr>),
}

impl ConstraintExpr {
    pub fn eq(factor: usize, value: usize) -> Self {
        ConstraintExpr::Atom { factor, value, equals: true }
    }

    pub fn ne(factor: usize, value: usize) -> Self {
        ConstraintExpr::Atom { factor, value, equals: false }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: ConstraintExpr) -> Self {
        ConstraintExpr::Not(Box::new(inner))
    }

    pub fn implies(lhs: ConstraintExpr, rhs: ConstraintExpr) -> Self {
        ConstraintExpr::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// Evaluates the formula on a full assignment.
    pub fn eval(&self, values: &[usize]) -> bool {
        match self {
            ConstraintExpr::True => true,
            ConstraintExpr::Atom { factor, value, equals } => (values[*factor] == *value) == *equals,
            ConstraintExpr::Not(inner) => !inner.eval(values),
            ConstraintExpr::And(children) => children.iter().all(|c| c.eval(values)),
            ConstraintExpr::Or(children) => children.iter().any(|c| c.eval(values)),
            ConstraintExpr::Implies(lhs, rhs) => !lhs.eval(values) || rhs.eval(values),
        }
    }

    /// Three-valued evaluation on a partial assignment: `Some(b)` when every
    /// completion evaluates to `b`, `None` when undecided.
    ///
    /// This is sound but not complete: `None` may be returned for formulas
    /// whose value is in fact forced (e.g. `F = 0 || F != 0` with `F`
    /// unassigned).
    pub fn eval_partial(&self, values: &[Option<usize>]) -> Option<bool> {
        match self {
            ConstraintExpr::True => Some(true),
            ConstraintExpr::Atom { factor, value, equals } => {
                values[*factor].map(|v| (v == *value) == *equals)
            }
            ConstraintExpr::Not(inner) => inner.eval_partial(values).map(|b| !b),
            ConstraintExpr::And(children) => {
                let mut result = Some(true);
                for c in children {
                    match c.eval_partial(values) {
                        Some(false) => return Some(false),
                        None => result = None,
                        Some(true) => {}
                    }
                }
                result
            }
            ConstraintExpr::Or(children) => {
                let mut result = Some(false);
                for c in children {
                    match c.eval_partial(values) {
                        Some(true) => return Some(true),
                        None => result = None,
                        Some(false) => {}
                    }
                }
                result
            }
            ConstraintExpr::Implies(lhs, rhs) => match (lhs.eval_partial(values), rhs.eval_partial(values)) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            },
        }
    }

    /// Calls `f` on every atom as `(factor, value)`.
    pub fn for_each_atom(&self, f: &mut impl FnMut(usize, usize)) {
        match self {
            ConstraintExpr::True => {}
            ConstraintExpr::Atom { factor, value, .. } => f(*factor, *value),
            ConstraintExpr::Not(inner) => inner.for_each_atom(f),
            ConstraintExpr::And(children) | ConstraintExpr::Or(children) => {
                children.iter().for_each(|c| c.for_each_atom(f))
            }
            ConstraintExpr::Implies(lhs, rhs) => {
                lhs.for_each_atom(f);
                rhs.for_each_atom(f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implies_is_unknown_until_decidable() {
        let e = ConstraintExpr::implies(ConstraintExpr::eq(0, 0), ConstraintExpr::ne(1, 2));
        assert_eq!(e.eval_partial(&[None, None]), None);
        assert_eq!(e.eval_partial(&[Some(1), None]), Some(true));
        assert_eq!(e.eval_partial(&[None, Some(1)]), Some(true));
        assert_eq!(e.eval_partial(&[Some(0), None]), None);
        assert_eq!(e.eval_partial(&[Some(0), Some(2)]), Some(false));
    }

    #[test]
    fn and_short_circuits_on_false() {
        let e = ConstraintExpr::And(vec![ConstraintExpr::eq(0, 1), ConstraintExpr::eq(1, 0)]);
        assert_eq!(e.eval_partial(&[Some(0), None]), Some(false));
        assert_eq!(e.eval_partial(&[Some(1), None]), None);
        assert_eq!(e.eval_partial(&[Some(1), Some(0)]), Some(true));
    }

    #[test]
    fn partial_agrees_with_full_when_assigned() {
        let e = ConstraintExpr::not(ConstraintExpr::Or(vec![
            ConstraintExpr::eq(0, 0),
            ConstraintExpr::implies(ConstraintExpr::eq(1, 1), ConstraintExpr::ne(0, 1)),
        ]));
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(e.eval_partial(&[Some(a), Some(b)]), Some(e.eval(&[a, b])));
            }
        }
    }
}
