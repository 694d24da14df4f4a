//! Seeded random sentences for soundness testing.

use rand::Rng;

use super::ast::{Formula, Term};

/// Shape limits for generated sentences.
#[derive(Debug, Clone, Copy)]
pub struct SentenceShape {
    pub max_rank: usize,
    pub max_depth: usize,
    pub max_term_depth: usize,
}

impl Default for SentenceShape {
    fn default() -> Self {
        SentenceShape { max_rank: 2, max_depth: 4, max_term_depth: 2 }
    }
}

/// A random sentence built from equations, products, inverses, boolean
/// connectives and quantifiers, of quantifier rank at most `shape.max_rank`.
pub fn random_sentence<R: Rng>(rng: &mut R, shape: SentenceShape) -> Formula {
    let mut scope = Vec::new();
    if shape.max_rank > 0 {
        quantified(rng, shape, &mut scope, shape.max_rank, shape.max_depth)
    } else {
        formula(rng, shape, &mut scope, 0, shape.max_depth)
    }
}

fn quantified<R: Rng>(
    rng: &mut R,
    shape: SentenceShape,
    scope: &mut Vec<String>,
    rank: usize,
    depth: usize,
) -> Formula {
    let v = format!("x{}", scope.len());
    scope.push(v.clone());
    let body = formula(rng, shape, scope, rank - 1, depth.saturating_sub(1));
    scope.pop();
    if rng.gen_bool(0.5) {
        Formula::forall(v, body)
    } else {
        Formula::exists(v, body)
    }
}

fn formula<R: Rng>(rng: &mut R, shape: SentenceShape, scope: &mut Vec<String>, rank: usize, depth: usize) -> Formula {
    if depth == 0 {
        return atom(rng, shape, scope);
    }
    let quantifier_weight = if rank > 0 { 4 } else { 0 };
    let pick = rng.gen_range(0..(quantifier_weight + 7));
    match pick {
        p if p < quantifier_weight => quantified(rng, shape, scope, rank, depth),
        p if p < quantifier_weight + 3 => atom(rng, shape, scope),
        p if p == quantifier_weight + 3 => Formula::not(formula(rng, shape, scope, rank, depth - 1)),
        p if p == quantifier_weight + 4 => {
            Formula::And(vec![formula(rng, shape, scope, rank, depth - 1), formula(rng, shape, scope, rank, depth - 1)])
        }
        p if p == quantifier_weight + 5 => {
            Formula::Or(vec![formula(rng, shape, scope, rank, depth - 1), formula(rng, shape, scope, rank, depth - 1)])
        }
        _ => Formula::implies(formula(rng, shape, scope, rank, depth - 1), formula(rng, shape, scope, rank, depth - 1)),
    }
}

fn atom<R: Rng>(rng: &mut R, shape: SentenceShape, scope: &[String]) -> Formula {
    Formula::eq(term(rng, scope, shape.max_term_depth), term(rng, scope, shape.max_term_depth))
}

fn term<R: Rng>(rng: &mut R, scope: &[String], depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.45) {
        if scope.is_empty() || rng.gen_bool(0.15) {
            return Term::One;
        }
        return Term::var(scope[rng.gen_range(0..scope.len())].clone());
    }
    if rng.gen_bool(0.7) {
        Term::mul(term(rng, scope, depth - 1), term(rng, scope, depth - 1))
    } else {
        Term::inv(term(rng, scope, depth - 1))
    }
}
