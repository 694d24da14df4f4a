//! Compiling formulas about the source into formulas about the target.

use std::collections::{BTreeMap, BTreeSet};

use super::{block_eq, literal, Interpretation};
use crate::folog::{EvalError, Evaluator, Formula, ParamEnv, Term};

/// A translated formula with the block layout of its free variables.
#[derive(Debug, Clone)]
pub struct TranslationResult {
    pub psi: Formula,
    /// free variables of the source formula, in first-occurrence order
    pub source_vars: Vec<String>,
    /// the target block of each source free variable
    pub blocks: Vec<Vec<String>>,
    /// number of source free variables
    pub r: usize,
    /// number of target free variables, `dim * r`
    pub s: usize,
    coord_map: Vec<Vec<usize>>,
}

impl TranslationResult {
    /// Target tuple for a source tuple: coordinatewise encoding.
    pub fn beta(&self, a: &[usize]) -> Vec<usize> {
        a.iter().flat_map(|&g| self.coord_map[g].iter().copied()).collect()
    }

    pub fn target_vars(&self) -> Vec<String> {
        self.blocks.concat()
    }
}

struct Translator<'a> {
    interp: &'a Interpretation,
    sep: String,
    fresh_prefix: String,
    counter: usize,
}

fn is_prefix_digits(name: &str, prefix: &str) -> bool {
    name.strip_prefix(prefix).is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

impl Translator<'_> {
    fn block(&self, v: &str) -> Vec<String> {
        (0..self.interp.dim()).map(|k| format!("{v}{}{k}", self.sep)).collect()
    }

    fn literal_block(&self, g: usize) -> Vec<Term> {
        self.interp.coord(g).iter().map(|&a| literal(a)).collect()
    }

    fn fresh(&mut self) -> Vec<String> {
        let name = format!("{}{}", self.fresh_prefix, self.counter);
        self.counter += 1;
        self.block(&name)
    }

    /// Target block for a term; products and inverses are materialized as
    /// fresh blocks, innermost-leftmost first, with their defining guards.
    fn flatten(&mut self, t: &Term, guards: &mut Vec<(Vec<String>, Formula)>) -> Vec<Term> {
        match t {
            Term::Var(v) => self.block(v).into_iter().map(Term::Var).collect(),
            Term::Const(g) => self.literal_block(*g),
            Term::One => self.literal_block(0),
            Term::Param(p) => unreachable!("parameter @{p} resolved before translation"),
            Term::Mul(a, b) => {
                let fa = self.flatten(a, guards);
                let fb = self.flatten(b, guards);
                let v = self.fresh();
                let vt: Vec<Term> = v.iter().cloned().map(Term::Var).collect();
                guards.push((v, self.interp.mult_at(&fa, &fb, &vt)));
                vt
            }
            Term::Inv(a) => {
                let fa = self.flatten(a, guards);
                let v = self.fresh();
                let vt: Vec<Term> = v.iter().cloned().map(Term::Var).collect();
                let e = self.literal_block(0);
                guards.push((v, self.interp.mult_at(&fa, &vt, &e)));
                vt
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Eq(a, b) => {
                let mut guards = Vec::new();
                let fa = self.flatten(a, &mut guards);
                let fb = self.flatten(b, &mut guards);
                let mut out = block_eq(&fa, &fb);
                for (vars, guard) in guards.into_iter().rev() {
                    out = Formula::exists_block(&vars, Formula::and(vec![guard, out]));
                }
                out
            }
            Formula::Not(g) => Formula::not(self.formula(g)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| self.formula(g)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| self.formula(g)).collect()),
            Formula::Implies(a, b) => Formula::implies(self.formula(a), self.formula(b)),
            Formula::Exists(v, g) => {
                let block = self.block(v);
                let terms: Vec<Term> = block.iter().cloned().map(Term::Var).collect();
                let body = Formula::and(vec![self.interp.domain_at(&terms), self.formula(g)]);
                Formula::exists_block(&block, body)
            }
            Formula::Forall(v, g) => {
                let block = self.block(v);
                let terms: Vec<Term> = block.iter().cloned().map(Term::Var).collect();
                let body = Formula::implies(self.interp.domain_at(&terms), self.formula(g));
                Formula::forall_block(&block, body)
            }
        }
    }
}

/// Translates `phi` along `interp`. Each source variable `x` becomes the
/// block `x_0 .. x_{n-1}`; parameters are resolved in `env` (over the source)
/// and replaced by the literal blocks of their encodings.
pub fn translate(phi: &Formula, interp: &Interpretation, env: &ParamEnv) -> Result<TranslationResult, EvalError> {
    let phi = phi.resolve_params(env)?.rename_shadowed();
    let order = interp.source().order();
    let mut bad = None;
    phi_consts(&phi, &mut |c| {
        if c >= order {
            bad = Some(c);
        }
    });
    if let Some(id) = bad {
        return Err(EvalError::ConstOutOfRange { id, order });
    }
    let vars: BTreeSet<String> = phi.all_vars();
    let mut fresh_prefix = String::from("v");
    while vars.iter().any(|v| is_prefix_digits(v, &fresh_prefix)) {
        fresh_prefix.push('v');
    }
    let mut t = Translator { interp, sep: "_".into(), fresh_prefix, counter: 0 };
    let psi = t.formula(&phi);
    let source_vars = phi.free_vars();
    let blocks: Vec<Vec<String>> = source_vars.iter().map(|v| t.block(v)).collect();
    Ok(TranslationResult {
        psi,
        r: source_vars.len(),
        s: source_vars.len() * interp.dim(),
        source_vars,
        blocks,
        coord_map: interp.coord_map().to_vec(),
    })
}

fn phi_consts(f: &Formula, out: &mut impl FnMut(usize)) {
    fn term(t: &Term, out: &mut impl FnMut(usize)) {
        match t {
            Term::Const(c) => out(*c),
            Term::Mul(a, b) => {
                term(a, out);
                term(b, out);
            }
            Term::Inv(a) => term(a, out),
            _ => {}
        }
    }
    match f {
        Formula::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => phi_consts(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| phi_consts(g, out)),
        Formula::Implies(a, b) => {
            phi_consts(a, out);
            phi_consts(b, out);
        }
    }
}

/// Outcome of comparing `phi` in the source with its translation in the
/// target over every source assignment of the free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub holds: bool,
    /// number of assignments compared
    pub instances: usize,
    /// source and target truth values at the first assignment
    pub first: (bool, bool),
    /// first assignment where the sides differ
    pub counterexample: Option<Vec<usize>>,
}

/// Checks `source |= phi(a)  <=>  target |= psi(beta(a))` for every `a`.
pub fn check_equivalence(
    phi: &Formula,
    result: &TranslationResult,
    interp: &Interpretation,
    env: &ParamEnv,
    budget: u64,
) -> Result<Equivalence, EvalError> {
    let mut src = Evaluator::new(interp.source(), env).with_budget(budget);
    let mut tgt = Evaluator::new(interp.target(), &ParamEnv::new()).with_budget(budget);
    check_equivalence_with(phi, result, &mut src, &mut tgt)
}

pub(super) fn check_equivalence_with(
    phi: &Formula,
    result: &TranslationResult,
    src: &mut Evaluator,
    tgt: &mut Evaluator,
) -> Result<Equivalence, EvalError> {
    let n = src.structure().order();
    let r = result.r;
    let target_vars = result.target_vars();
    let total = n.pow(r as u32);
    let mut first = None;
    for idx in 0..total {
        let a: Vec<usize> = (0..r).map(|p| (idx / n.pow((r - 1 - p) as u32)) % n).collect();
        let sa: BTreeMap<String, usize> = result.source_vars.iter().cloned().zip(a.iter().copied()).collect();
        let ta: BTreeMap<String, usize> = target_vars.iter().cloned().zip(result.beta(&a)).collect();
        let lhs = src.eval(phi, &sa)?;
        let rhs = tgt.eval(&result.psi, &ta)?;
        let pair = (lhs, rhs);
        first.get_or_insert(pair);
        if lhs != rhs {
            return Ok(Equivalence {
                holds: false,
                instances: idx + 1,
                first: first.unwrap(),
                counterexample: Some(a),
            });
        }
    }
    Ok(Equivalence { holds: true, instances: total, first: first.unwrap_or((true, true)), counterexample: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::extension_data;
    use crate::folog::{default_budget, parse_formula, parse_sentence};
    use crate::gamma::build_codec;
    use crate::group::{dihedral, quaternion8, subgroup_closure, GroupTable};
    use crate::interp::interpret_g_in_h;
    use std::sync::Arc;

    fn g_in_h(g: GroupTable, gens: &[usize]) -> Interpretation {
        let ext = Arc::new(extension_data(&subgroup_closure(&Arc::new(g), gens)).unwrap());
        interpret_g_in_h(&build_codec(ext).unwrap(), default_budget()).unwrap()
    }

    fn verdict(interp: &Interpretation, s: &str) -> Equivalence {
        let phi = parse_sentence(s).unwrap();
        let res = translate(&phi, interp, &ParamEnv::new()).unwrap();
        check_equivalence(&phi, &res, interp, &ParamEnv::new(), default_budget()).unwrap()
    }

    #[test]
    fn sentence_examples() {
        let q8 = g_in_h(quaternion8().unwrap(), &[1]);
        assert_eq!(verdict(&q8, "exists x. !(x = 1)").first, (true, true));
        let s3 = g_in_h(dihedral(3).unwrap(), &[1]);
        let e = verdict(&s3, "forall x. forall y. x*y = y*x");
        assert!(e.holds);
        assert_eq!(e.first, (false, false));
        assert_eq!(verdict(&s3, "1 = 1").first, (true, true));
    }

    #[test]
    fn free_variables_and_parameters() {
        let s3 = g_in_h(dihedral(3).unwrap(), &[1]);
        let phi = parse_formula("x*@t = @t*x^-1").unwrap();
        let env = ParamEnv::new().bind("t", 3);
        let res = translate(&phi, &s3, &env).unwrap();
        assert_eq!((res.r, res.s), (1, 3));
        assert_eq!(res.blocks, vec![vec!["x_0".to_string(), "x_1".into(), "x_2".into()]]);
        let e = check_equivalence(&phi, &res, &s3, &env, default_budget()).unwrap();
        assert!(e.holds);
        assert_eq!(e.instances, 6);
    }

    #[test]
    fn fresh_names_avoid_source_variables() {
        let s3 = g_in_h(dihedral(3).unwrap(), &[1]);
        let phi = parse_sentence("forall v0. exists v1. v0*v1 = v1*v0").unwrap();
        let res = translate(&phi, &s3, &ParamEnv::new()).unwrap();
        assert!(res.psi.to_string().contains("vv0_0"));
        let e = check_equivalence(&phi, &res, &s3, &ParamEnv::new(), default_budget()).unwrap();
        assert!(e.holds && e.first.0);
    }

    #[test]
    fn size_is_bounded_by_interpretation_size() {
        let s3 = g_in_h(dihedral(3).unwrap(), &[1]);
        let k = s3.mult_formula().size() + s3.domain_formula().size();
        for s in ["forall x. forall y. x*y = y*x", "exists x. x*x*x = 1 & !(x = 1)", "forall x. x^-1*x = 1"] {
            let phi = parse_sentence(s).unwrap();
            let res = translate(&phi, &s3, &ParamEnv::new()).unwrap();
            assert!(res.psi.size() <= 4 * phi.size() * k, "{s}");
        }
    }
}
