//! Interpretations between a group and a definable normal subgroup.
//!
//! `H` is interpreted in `G` by its defining formula. `G` is interpreted in
//! `H` through the tuple encoding of [`crate::gamma`], with the product given
//! by one quantifier-free case formula per pair of pattern classes.
//!
//! Formulas over `H` use local ids of `H` for their literals.

mod compose;
mod translate;
mod verify;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::extension::ExtensionError;
use crate::folog::{EvalError, Evaluator, Formula, ParamEnv, Term};
use crate::gamma::{Cell, Class, GammaCodec, GammaError, Kind};
use crate::group::{GroupTable, Subgroup};

pub use compose::{composed_g_formula, composed_h_formula, condition_a_from_b, ConditionA};
pub use translate::{check_equivalence, translate, Equivalence, TranslationResult};
pub use verify::{verify_biinterpretation, CocycleFault, VerifyError, VerifyOptions, FIXED_SENTENCES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaRole {
    Domain,
    Mult,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("formula does not define the subgroup (missing {missing:?}, extra {extra:?})")]
    KappaMismatch { missing: Vec<usize>, extra: Vec<usize> },
    #[error("defining formula must have at most one free variable, found {0:?}")]
    KappaArity(Vec<String>),
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("{role:?} formula is not exact at {tuple:?} (formula says {formula_value})")]
    FormulaExactnessFailure { role: FormulaRole, tuple: Vec<usize>, formula_value: bool },
    #[error("conjugation graph mismatch at {pair:?} (formula says {formula_value})")]
    GraphMismatch { pair: (usize, usize), formula_value: bool },
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl InterpError {
    pub fn counterexample(&self) -> Value {
        match self {
            InterpError::KappaMismatch { missing, extra } => json!({"missing": missing, "extra": extra}),
            InterpError::FormulaExactnessFailure { tuple, formula_value, .. } => {
                json!({"tuple": tuple, "formula": formula_value})
            }
            InterpError::GraphMismatch { pair, formula_value } => {
                json!({"pair": [pair.0, pair.1], "formula": formula_value})
            }
            other => json!({"error": other.to_string()}),
        }
    }
}

/// Names `prefix0 .. prefix{n-1}`.
pub fn block_vars(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

fn var_terms(names: &[String]) -> Vec<Term> {
    names.iter().map(|n| Term::var(n.clone())).collect()
}

/// `1` for the identity, `#a` otherwise.
pub fn literal(a: usize) -> Term {
    if a == 0 {
        Term::One
    } else {
        Term::Const(a)
    }
}

/// Blockwise equality of two equally long term lists.
pub fn block_eq(a: &[Term], b: &[Term]) -> Formula {
    Formula::and(a.iter().zip(b).map(|(x, y)| Formula::eq(x.clone(), y.clone())).collect())
}

/// An interpretation of `source` in `target` of some dimension `n`.
#[derive(Debug, Clone)]
pub struct Interpretation {
    source: Arc<GroupTable>,
    target: Arc<GroupTable>,
    dim: usize,
    /// free variables `x0..`
    domain_formula: Formula,
    /// free variables `x0.., y0.., z0..`
    mult_formula: Formula,
    coord_map: Vec<Vec<usize>>,
}

impl Interpretation {
    pub fn source(&self) -> &Arc<GroupTable> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GroupTable> {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_formula(&self) -> &Formula {
        &self.domain_formula
    }

    pub fn mult_formula(&self) -> &Formula {
        &self.mult_formula
    }

    pub fn coord(&self, g: usize) -> &[usize] {
        &self.coord_map[g]
    }

    pub fn coord_map(&self) -> &[Vec<usize>] {
        &self.coord_map
    }

    pub fn domain_vars(&self) -> Vec<String> {
        block_vars("x", self.dim)
    }

    pub fn mult_vars(&self) -> Vec<String> {
        ["x", "y", "z"].iter().flat_map(|p| block_vars(p, self.dim)).collect()
    }

    /// Domain formula at the given terms.
    pub fn domain_at(&self, x: &[Term]) -> Formula {
        let map: HashMap<String, Term> = self.domain_vars().into_iter().zip(x.iter().cloned()).collect();
        self.domain_formula.substitute(&map)
    }

    /// Graph of the product at the given terms: `x * y = z`.
    pub fn mult_at(&self, x: &[Term], y: &[Term], z: &[Term]) -> Formula {
        let terms = x.iter().chain(y).chain(z).cloned();
        let map: HashMap<String, Term> = self.mult_vars().into_iter().zip(terms).collect();
        self.mult_formula.substitute(&map)
    }

    /// Checks both defining formulas against the coordinate map exhaustively.
    pub fn check_exactness(&self, budget: u64) -> Result<(), InterpError> {
        self.check_domain(budget)?;
        self.check_mult(budget)
    }

    pub fn check_domain(&self, budget: u64) -> Result<(), InterpError> {
        let mut ev = Evaluator::new(&self.target, &ParamEnv::new()).with_budget(budget);
        let got = ev.definable_set(&self.domain_formula, &self.domain_vars())?;
        let want: BTreeSet<Vec<usize>> = self.coord_map.iter().cloned().collect();
        first_difference(&got, &want, FormulaRole::Domain)
    }

    pub fn check_mult(&self, budget: u64) -> Result<(), InterpError> {
        let mut ev = Evaluator::new(&self.target, &ParamEnv::new()).with_budget(budget);
        let got = ev.definable_set(&self.mult_formula, &self.mult_vars())?;
        let s = &self.source;
        let want: BTreeSet<Vec<usize>> = s
            .elements()
            .flat_map(|a| s.elements().map(move |b| (a, b)))
            .map(|(a, b)| {
                let mut t = self.coord_map[a].clone();
                t.extend(&self.coord_map[b]);
                t.extend(&self.coord_map[s.mul(a, b)]);
                t
            })
            .collect();
        first_difference(&got, &want, FormulaRole::Mult)
    }
}

fn first_difference(
    got: &BTreeSet<Vec<usize>>,
    want: &BTreeSet<Vec<usize>>,
    role: FormulaRole,
) -> Result<(), InterpError> {
    if let Some(t) = got.difference(want).next() {
        return Err(InterpError::FormulaExactnessFailure { role, tuple: t.clone(), formula_value: true });
    }
    if let Some(t) = want.difference(got).next() {
        return Err(InterpError::FormulaExactnessFailure { role, tuple: t.clone(), formula_value: false });
    }
    Ok(())
}

/// The single free variable of a defining formula (`x` if it has none).
pub fn kappa_var(kappa: &Formula) -> Result<String, InterpError> {
    let free = kappa.free_vars();
    match free.len() {
        0 => Ok("x".into()),
        1 => Ok(free[0].clone()),
        _ => Err(InterpError::KappaArity(free)),
    }
}

/// `H` inside `G` as the set defined by `kappa`, which must be parameter-free
/// (resolve parameters first). The source is `H` with its local numbering.
pub fn interpret_h_in_g(h: &Subgroup, kappa: &Formula, budget: u64) -> Result<Interpretation, InterpError> {
    let g = h.parent().clone();
    let v = kappa_var(kappa)?;
    let set =
        Evaluator::new(&g, &ParamEnv::new()).with_budget(budget).definable_set(kappa, std::slice::from_ref(&v))?;
    let defined: BTreeSet<usize> = set.into_iter().map(|t| t[0]).collect();
    let members: BTreeSet<usize> = h.members().iter().copied().collect();
    if defined != members {
        return Err(InterpError::KappaMismatch {
            missing: members.difference(&defined).copied().collect(),
            extra: defined.difference(&members).copied().collect(),
        });
    }
    let at = |t: &str| kappa.substitute_var(&v, Term::var(t));
    let interp = Interpretation {
        source: Arc::new(h.induced_table()),
        target: g,
        dim: 1,
        domain_formula: at("x0"),
        mult_formula: Formula::and(vec![
            at("x0"),
            at("y0"),
            at("z0"),
            Formula::eq(Term::mul(Term::var("x0"), Term::var("y0")), Term::var("z0")),
        ]),
        coord_map: h.members().iter().map(|&m| vec![m]).collect(),
    };
    interp.check_mult(budget)?;
    Ok(interp)
}

/// How an automorphism of `H` is written as a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaDefinition {
    /// conjugation `h -> c h c^-1` by a local id `c`
    Inner { c: usize },
    /// explicit graph
    Graph,
}

fn is_automorphism(h: &GroupTable, sigma: &[usize]) -> bool {
    if sigma.len() != h.order() || sigma.iter().any(|&v| v >= h.order()) {
        return false;
    }
    let distinct: BTreeSet<usize> = sigma.iter().copied().collect();
    distinct.len() == h.order()
        && h.elements().all(|a| h.elements().all(|b| sigma[h.mul(a, b)] == h.mul(sigma[a], sigma[b])))
}

/// Smallest inner witness for `sigma`, if any.
pub fn sigma_definition(h: &GroupTable, sigma: &[usize]) -> Result<SigmaDefinition, InterpError> {
    if !is_automorphism(h, sigma) {
        return Err(InterpError::NotAutomorphism);
    }
    Ok(h.elements()
        .find(|&c| h.elements().all(|a| h.conj(c, a) == sigma[a]))
        .map_or(SigmaDefinition::Graph, |c| SigmaDefinition::Inner { c }))
}

/// A formula `chi(x, y)` over `H` defining the graph of `sigma`.
pub fn sigma_defining_formula(h: &GroupTable, sigma: &[usize]) -> Result<Formula, InterpError> {
    let (x, y) = (Term::var("x"), Term::var("y"));
    Ok(match sigma_definition(h, sigma)? {
        SigmaDefinition::Inner { c } => {
            Formula::eq(y, Term::mul(Term::mul(Term::Const(c), x), Term::inv(Term::Const(c))))
        }
        SigmaDefinition::Graph => Formula::or(
            h.elements()
                .map(|a| {
                    Formula::and(vec![
                        Formula::eq(x.clone(), Term::Const(a)),
                        Formula::eq(y.clone(), Term::Const(sigma[a])),
                    ])
                })
                .collect(),
        ),
    })
}

/// Conjunction describing a class pattern at the given terms.
pub fn pattern_formula(pattern: &[Cell], vars: &[Term]) -> Formula {
    Formula::and(
        pattern
            .iter()
            .zip(vars)
            .map(|(cell, v)| match cell {
                Cell::Carrier => Formula::neq(v.clone(), Term::One),
                Cell::Fixed(a) => Formula::eq(v.clone(), literal(*a)),
            })
            .collect(),
    )
}

/// Pattern filled with a carrier term.
fn pattern_terms(pattern: &[Cell], carrier: &Term) -> Vec<Term> {
    pattern
        .iter()
        .map(|cell| match cell {
            Cell::Carrier => carrier.clone(),
            Cell::Fixed(a) => literal(*a),
        })
        .collect()
}

fn carrier_term(pattern: &[Cell], vars: &[Term]) -> Option<Term> {
    pattern.iter().position(|c| *c == Cell::Carrier).map(|p| vars[p].clone())
}

fn eval_closed(h: &GroupTable, t: &Term) -> usize {
    match t {
        Term::One => 0,
        Term::Const(c) => *c,
        Term::Mul(a, b) => h.mul(eval_closed(h, a), eval_closed(h, b)),
        Term::Inv(a) => h.inv(eval_closed(h, a)),
        Term::Var(_) | Term::Param(_) => unreachable!("closed term"),
    }
}

/// `z` encodes `p t_k`: split on whether `p` is the identity.
fn result_formula(codec: &GammaCodec, p: Term, k: usize, z: &[Term]) -> Formula {
    let h = codec.ext().h_table();
    let slot = codec.pattern(Class { coset: k, kind: Kind::Slot });
    let mark = codec.pattern(Class { coset: k, kind: Kind::Xi });
    if p.vars().is_empty() {
        let v = eval_closed(h, &p);
        let pattern = if v == 0 { mark } else { slot };
        return block_eq(z, &pattern_terms(pattern, &literal(v)));
    }
    Formula::or(vec![
        Formula::and(vec![Formula::eq(p.clone(), Term::One), block_eq(z, &pattern_terms(mark, &Term::One))]),
        Formula::and(vec![Formula::neq(p.clone(), Term::One), block_eq(z, &pattern_terms(slot, &p))]),
    ])
}

/// The case formula for one pair of classes.
fn case_formula(
    codec: &GammaCodec,
    sigmas: &[SigmaDefinition],
    (ca, cb): (Class, Class),
    (x, y, z): (&[Term], &[Term], &[Term]),
) -> Formula {
    let ext = codec.ext();
    let h = ext.h_table();
    let (i, j) = (ca.coset, cb.coset);
    let left = carrier_term(codec.pattern(ca), x).unwrap_or(Term::One);
    let right = carrier_term(codec.pattern(cb), y);
    let c = ext.c_local(i, j);
    let k = ext.k(i, j);
    let product = |s: Term| Term::mul_simplified(Term::mul_simplified(left.clone(), s), literal(c));
    let result = match (right, sigmas[i]) {
        (None, _) => result_formula(codec, product(Term::One), k, z),
        (Some(r), SigmaDefinition::Inner { c: w }) => {
            let s = Term::mul_simplified(Term::mul_simplified(literal(w), r), literal(h.inv(w)));
            result_formula(codec, product(s), k, z)
        }
        (Some(r), SigmaDefinition::Graph) => Formula::or(
            h.elements()
                .skip(1)
                .map(|a| {
                    Formula::and(vec![
                        Formula::eq(r.clone(), Term::Const(a)),
                        result_formula(codec, product(literal(ext.sigma(i)[a])), k, z),
                    ])
                })
                .collect(),
        ),
    };
    Formula::and(vec![pattern_formula(codec.pattern(ca), x), pattern_formula(codec.pattern(cb), y), result])
}

/// `G` inside `H^w` through the codec, with both formulas checked exactly.
pub fn interpret_g_in_h(codec: &GammaCodec, budget: u64) -> Result<Interpretation, InterpError> {
    let interp = g_in_h_unchecked(codec)?;
    interp.check_exactness(budget)?;
    Ok(interp)
}

fn g_in_h_unchecked(codec: &GammaCodec) -> Result<Interpretation, InterpError> {
    let ext = codec.ext();
    let h = ext.h_table();
    let w = codec.width();
    let sigmas = (0..ext.m()).map(|i| sigma_definition(h, ext.sigma(i))).collect::<Result<Vec<_>, _>>()?;
    let x = var_terms(&block_vars("x", w));
    let y = var_terms(&block_vars("y", w));
    let z = var_terms(&block_vars("z", w));
    let domain_formula = Formula::or(codec.classes().map(|c| pattern_formula(codec.pattern(c), &x)).collect());
    let mut cases = Vec::new();
    for ca in codec.classes() {
        for cb in codec.classes() {
            cases.push(case_formula(codec, &sigmas, (ca, cb), (&x, &y, &z)));
        }
    }
    Ok(Interpretation {
        source: ext.group().clone(),
        target: h.clone(),
        dim: w,
        domain_formula,
        mult_formula: Formula::or(cases),
        coord_map: codec.domain().to_vec(),
    })
}
