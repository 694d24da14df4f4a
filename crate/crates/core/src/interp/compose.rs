//! The composed self-maps `H -> G -> H^w` and `G -> H^w` read inside `G`,
//! and conjugation by a representative recovered through a translation.

use std::collections::BTreeSet;

use super::{block_eq, literal, pattern_terms, translate, InterpError, Interpretation};
use crate::folog::{Evaluator, Formula, ParamEnv, Term};
use crate::gamma::{Cell, Class, GammaCodec, Kind};

/// `E(x, xs)` over `H`: `xs` is the encoding of the element `x` of `H`.
pub fn composed_h_formula(codec: &GammaCodec, x: &Term, xs: &[Term]) -> Formula {
    let slot = codec.pattern(Class { coset: 0, kind: Kind::Slot });
    let mark = codec.pattern(Class { coset: 0, kind: Kind::Xi });
    Formula::or(vec![
        Formula::and(vec![Formula::neq(x.clone(), Term::One), block_eq(xs, &pattern_terms(slot, x))]),
        Formula::and(vec![Formula::eq(x.clone(), Term::One), block_eq(xs, &pattern_terms(mark, &Term::One))]),
    ])
}

/// `F(x, xs)` over `G`: `xs` is the encoding of `x`, with entries read as
/// elements of `G`. Coset membership of `x` is tested with `kappa` (free in
/// `kappa_var`, parameter-free).
pub fn composed_g_formula(codec: &GammaCodec, kappa: &Formula, kappa_var: &str, x: &Term, xs: &[Term]) -> Formula {
    let ext = codec.ext();
    let g = ext.group();
    let parent = |a: usize| literal(ext.subgroup().parent_id(a));
    let lift = |cells: &[Cell], carrier: &Term| -> Vec<Term> {
        cells
            .iter()
            .map(|c| match c {
                Cell::Carrier => carrier.clone(),
                Cell::Fixed(a) => parent(*a),
            })
            .collect()
    };
    let mut cases = Vec::new();
    for class in codec.classes() {
        let t = ext.t(class.coset);
        let cells = codec.pattern(class);
        match class.kind {
            Kind::Slot => {
                let h = Term::mul_simplified(x.clone(), literal(g.inv(t)));
                cases.push(Formula::and(vec![
                    kappa.substitute_var(kappa_var, h.clone()),
                    Formula::neq(x.clone(), literal(t)),
                    block_eq(xs, &lift(cells, &h)),
                ]));
            }
            Kind::Xi => {
                cases.push(Formula::and(vec![
                    Formula::eq(x.clone(), literal(t)),
                    block_eq(xs, &lift(cells, &Term::One)),
                ]));
            }
        }
    }
    Formula::or(cases)
}

/// Formula over `H` defining conjugation `a -> t^-1 a t`.
#[derive(Debug, Clone)]
pub struct ConditionA {
    pub t: usize,
    /// free variables `x`, `y`
    pub formula: Formula,
    /// defined pairs, as local ids of `H`
    pub graph: BTreeSet<(usize, usize)>,
}

/// Translates `x * t = t * y` along the interpretation of `G` in `H`, then
/// restricts both arguments to `H` through the composed map, and checks the
/// result defines `a -> t^-1 a t` on `H`.
pub fn condition_a_from_b(
    interp: &Interpretation,
    codec: &GammaCodec,
    t: usize,
    budget: u64,
) -> Result<ConditionA, InterpError> {
    let ext = codec.ext();
    let g = ext.group();
    let phi = Formula::eq(Term::mul(Term::var("x"), Term::Const(t)), Term::mul(Term::Const(t), Term::var("y")));
    let res = translate(&phi, interp, &ParamEnv::new())?;
    let mut bound = Vec::new();
    let mut parts = Vec::new();
    for (v, block) in res.source_vars.iter().zip(&res.blocks) {
        let terms: Vec<Term> = block.iter().cloned().map(Term::Var).collect();
        parts.push(composed_h_formula(codec, &Term::var(v.clone()), &terms));
        bound.extend(block.iter().cloned());
    }
    parts.push(res.psi);
    let chi = Formula::exists_block(&bound, Formula::and(parts));

    let h = ext.h_table();
    let set = Evaluator::new(h, &ParamEnv::new()).with_budget(budget).definable_set(&chi, &["x".into(), "y".into()])?;
    let got: BTreeSet<(usize, usize)> = set.into_iter().map(|p| (p[0], p[1])).collect();
    let sub = ext.subgroup();
    let want: BTreeSet<(usize, usize)> = h
        .elements()
        .map(|a| {
            let b = g.mul(g.mul(g.inv(t), sub.parent_id(a)), t);
            (a, sub.local_id(b).expect("normal subgroup"))
        })
        .collect();
    if let Some(&pair) = got.difference(&want).next() {
        return Err(InterpError::GraphMismatch { pair, formula_value: true });
    }
    if let Some(&pair) = want.difference(&got).next() {
        return Err(InterpError::GraphMismatch { pair, formula_value: false });
    }
    Ok(ConditionA { t, formula: chi, graph: got })
}

/// Checks that `f` over `structure` defines exactly `graph` on `vars`.
pub(super) fn defines_exactly(
    structure: &crate::group::GroupTable,
    f: &Formula,
    vars: &[String],
    graph: &BTreeSet<Vec<usize>>,
    budget: u64,
) -> Result<Option<(Vec<usize>, bool)>, InterpError> {
    let got = Evaluator::new(structure, &ParamEnv::new()).with_budget(budget).definable_set(f, vars)?;
    if let Some(t) = got.difference(graph).next() {
        return Ok(Some((t.clone(), true)));
    }
    Ok(graph.difference(&got).next().map(|t| (t.clone(), false)))
}
