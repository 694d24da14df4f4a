//! End-to-end verification that a group and a definable normal subgroup of
//! finite index interpret each other with definable composed maps.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::compose::defines_exactly;
use super::translate::check_equivalence_with;
use super::{
    composed_g_formula, composed_h_formula, condition_a_from_b, g_in_h_unchecked, interpret_h_in_g, kappa_var,
    translate, InterpError, Interpretation,
};
use crate::extension::{extension_data, verify_extension_identities, ExtensionData};
use crate::folog::{
    default_budget, parse_sentence, random_sentence, EvalError, Evaluator, Formula, ParamEnv, SentenceShape, Term,
};
use crate::gamma::{auto_mode, build_codec_with_mode, check_isomorphism, GammaCodec, GammaError, Mode};
use crate::group::{coset_decomposition, is_normal, GroupTable, Subgroup};
use crate::report::{Step, VerificationReport};

/// Sentences checked in every translation suite before the random ones.
pub const FIXED_SENTENCES: [&str; 4] =
    ["forall x. forall y. x*y = y*x", "exists x. !(x = 1)", "forall x. x*x*x = 1", "exists x. x*x = 1 & !(x = 1)"];

/// Replaces one cocycle value before verification (for fault injection).
/// Coset indices are 1-based; `value` is an element id of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleFault {
    pub i: usize,
    pub j: usize,
    pub value: usize,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// `None` picks star mode exactly for index 2
    pub mode: Option<Mode>,
    pub budget: u64,
    pub suite_seed: u64,
    /// number of random sentences; 0 skips the translation suite
    pub suite_size: usize,
    pub cocycle_fault: Option<CocycleFault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mode: None, budget: default_budget(), suite_seed: 0, suite_size: 0, cocycle_fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Input(EvalError),
    #[error("defining formula must have at most one free variable, found {0:?}")]
    KappaArity(Vec<String>),
    /// The report holds the steps completed before the cap was hit.
    #[error("{error}")]
    ComplexityCap { report: Box<VerificationReport>, error: EvalError },
}

struct Run {
    instance: String,
    steps: Vec<Step>,
}

enum Halt {
    Failed,
    Cap(EvalError),
}

impl Run {
    fn push(&mut self, step: Step) -> Result<(), Halt> {
        let pass = step.pass;
        self.steps.push(step);
        if pass {
            Ok(())
        } else {
            Err(Halt::Failed)
        }
    }

    /// Records a failed step for an interpretation error, unless it is a cap.
    fn fail(&mut self, name: &str, e: InterpError) -> Halt {
        if let InterpError::Eval(err @ EvalError::ComplexityCap { .. }) = e {
            return Halt::Cap(err);
        }
        self.steps.push(Step::fail(name, e.counterexample()).with_detail(e.to_string()));
        Halt::Failed
    }

    fn report(self) -> VerificationReport {
        VerificationReport::new(self.instance, self.steps)
    }
}

fn cap(e: EvalError) -> Halt {
    Halt::Cap(e)
}

/// Runs every check in order and stops at the first failing one.
///
/// `kappa` has one free variable and may use parameters bound in `env`.
/// Failures are recorded as report steps; only input errors and exhausted
/// budgets are returned as errors.
pub fn verify_biinterpretation(
    instance: &str,
    g: Arc<GroupTable>,
    kappa: &Formula,
    env: &ParamEnv,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let kappa = kappa.resolve_params(env).map_err(VerifyError::Input)?;
    let var = kappa_var(&kappa).map_err(|e| match e {
        InterpError::KappaArity(v) => VerifyError::KappaArity(v),
        other => unreachable!("{other}"),
    })?;
    let mut run = Run { instance: instance.to_string(), steps: Vec::new() };
    match steps(&mut run, g, &kappa, &var, opts) {
        Ok(()) | Err(Halt::Failed) => Ok(run.report()),
        Err(Halt::Cap(error @ EvalError::ComplexityCap { .. })) => {
            let report = VerificationReport::incomplete(run.instance, run.steps);
            Err(VerifyError::ComplexityCap { report: Box::new(report), error })
        }
        Err(Halt::Cap(error)) => Err(VerifyError::Input(error)),
    }
}

fn steps(run: &mut Run, g: Arc<GroupTable>, kappa: &Formula, var: &str, opts: &VerifyOptions) -> Result<(), Halt> {
    let budget = opts.budget;
    let kappa_text = kappa.to_string();

    // 1. the defined set is a normal subgroup, nontrivial, of index >= 2
    let set = Evaluator::new(&g, &ParamEnv::new())
        .with_budget(budget)
        .definable_set(kappa, &[var.to_string()])
        .map_err(cap)?;
    let members: Vec<usize> = set.into_iter().map(|t| t[0]).collect();
    let sub = match Subgroup::from_members(g.clone(), members.iter().copied()) {
        Ok(s) => s,
        Err(_) => {
            return run.push(
                Step::fail("hypotheses", json!({"defined": members, "reason": "not a subgroup"}))
                    .with_witness(&kappa_text),
            )
        }
    };
    let index = g.order() / sub.order();
    let problem = if !is_normal(&sub) {
        Some("not normal")
    } else if sub.order() < 2 {
        Some("trivial subgroup")
    } else if index < 2 {
        Some("index 1")
    } else {
        None
    };
    if let Some(reason) = problem {
        return run
            .push(Step::fail("hypotheses", json!({"defined": members, "reason": reason})).with_witness(&kappa_text));
    }
    debug_assert_eq!(coset_decomposition(&sub).index(), index);
    run.push(
        Step::pass("hypotheses")
            .with_witness(&kappa_text)
            .with_detail(format!("subgroup of order {}, index {index}", sub.order())),
    )?;

    // 2. extension data
    let ext = extension_data(&sub).expect("hypotheses checked");
    let ext = match opts.cocycle_fault {
        None => ext,
        Some(fault) => match inject(&ext, fault) {
            Ok(e) => e,
            Err(msg) => {
                return run.push(
                    Step::fail("extension-identities", json!({"fault": [fault.i, fault.j, fault.value]}))
                        .with_detail(msg),
                )
            }
        },
    };
    let ext = Arc::new(ext);
    let ext_report = verify_extension_identities(&ext);
    match ext_report.first_failure() {
        None => {
            run.push(Step::pass("extension-identities").with_detail(format!("{} identities", ext_report.steps.len())))?
        }
        Some(f) => {
            return run.push(Step::fail("extension-identities", json!({"identity": f.name, "at": f.counterexample})))
        }
    }

    // 3. the encoding is an isomorphism onto its image
    let mode = opts.mode.unwrap_or_else(|| auto_mode(ext.m()));
    let codec = match build_codec_with_mode(ext.clone(), mode) {
        Ok(c) => c,
        Err(GammaError::Collision { a, b, tuple }) => {
            return run.push(
                Step::fail("gamma-isomorphism", json!({"elements": [a, b], "tuple": tuple}))
                    .with_detail(format!("{mode} encoding is not injective")),
            )
        }
        Err(e) => return run.push(Step::fail("gamma-isomorphism", json!({"error": e.to_string()}))),
    };
    if let Err((a, b)) = check_isomorphism(&codec) {
        return run.push(Step::fail("gamma-isomorphism", json!({"pair": [a, b]})));
    }
    run.push(Step::pass("gamma-isomorphism").with_detail(format!(
        "{mode} encoding, width {}, marker #{}",
        codec.width(),
        codec.xi()
    )))?;

    // 4. H in G
    let h_in_g = match interpret_h_in_g(&sub, kappa, budget) {
        Ok(i) => i,
        Err(e) => return Err(run.fail("h-in-g-exactness", e)),
    };
    run.push(Step::pass("h-in-g-exactness").with_witness(h_in_g.mult_formula().to_string()))?;

    // 5, 6. G in H
    let g_in_h = g_in_h_unchecked(&codec).map_err(|e| run.fail("g-in-h-domain", e))?;
    g_in_h.check_domain(budget).map_err(|e| run.fail("g-in-h-domain", e))?;
    run.push(Step::pass("g-in-h-domain").with_witness(g_in_h.domain_formula().to_string()))?;
    g_in_h.check_mult(budget).map_err(|e| run.fail("g-in-h-mult", e))?;
    run.push(
        Step::pass("g-in-h-mult")
            .with_witness(g_in_h.mult_formula().to_string())
            .with_detail(format!("{} cases", codec.classes().count().pow(2))),
    )?;

    // 7, 8. composed self-maps
    composed_h_step(run, &codec, budget)?;
    composed_g_step(run, &codec, kappa, var, budget)?;

    // 9. conjugation by each representative is definable in H
    for &t in ext.transversal() {
        let name = format!("condition-a[t=#{t}]");
        let c = condition_a_from_b(&g_in_h, &codec, t, budget).map_err(|e| run.fail(&name, e))?;
        run.push(Step::pass(name).with_witness(c.formula.to_string()))?;
    }

    // 10. translation suite
    if opts.suite_size > 0 {
        suite_step(run, &g_in_h, opts)?;
    }
    Ok(())
}

fn inject(ext: &ExtensionData, fault: CocycleFault) -> Result<ExtensionData, String> {
    let m = ext.m();
    if fault.i == 0 || fault.j == 0 || fault.i > m || fault.j > m {
        return Err(format!("coset index out of range 1..={m}"));
    }
    let mut c: Vec<Vec<usize>> = (0..m).map(|i| (0..m).map(|j| ext.c(i, j)).collect()).collect();
    c[fault.i - 1][fault.j - 1] = fault.value;
    let k = (0..m).map(|i| (0..m).map(|j| ext.k(i, j)).collect()).collect();
    let sigma = (0..m).map(|i| ext.sigma(i).to_vec()).collect();
    ExtensionData::from_parts(ext.subgroup().clone(), ext.transversal().to_vec(), c, k, sigma)
        .map_err(|e| e.to_string())
}

fn block(prefix: &str, w: usize) -> (Vec<String>, Vec<Term>) {
    let names: Vec<String> = (0..w).map(|k| format!("{prefix}_{k}")).collect();
    let terms = names.iter().cloned().map(Term::Var).collect();
    (names, terms)
}

fn composed_h_step(run: &mut Run, codec: &GammaCodec, budget: u64) -> Result<(), Halt> {
    let name = "composed-h-map";
    let ext = codec.ext();
    let (names, terms) = block("x", codec.width());
    let f = composed_h_formula(codec, &Term::var("x"), &terms);
    let vars: Vec<String> = std::iter::once("x".to_string()).chain(names).collect();
    let graph: BTreeSet<Vec<usize>> = ext
        .h_table()
        .elements()
        .map(|a| {
            let mut row = vec![a];
            row.extend(codec.encode(ext.subgroup().parent_id(a)));
            row
        })
        .collect();
    match defines_exactly(ext.h_table(), &f, &vars, &graph, budget).map_err(|e| run.fail(name, e))? {
        None => run.push(Step::pass(name).with_witness(f.to_string())),
        Some((t, v)) => run.push(Step::fail(name, json!({"tuple": t, "formula": v})).with_witness(f.to_string())),
    }
}

fn composed_g_step(run: &mut Run, codec: &GammaCodec, kappa: &Formula, var: &str, budget: u64) -> Result<(), Halt> {
    let name = "composed-g-map";
    let ext = codec.ext();
    let sub = ext.subgroup();
    let (names, terms) = block("x", codec.width());
    let f = composed_g_formula(codec, kappa, var, &Term::var("x"), &terms);
    let vars: Vec<String> = std::iter::once("x".to_string()).chain(names).collect();
    let graph: BTreeSet<Vec<usize>> = ext
        .group()
        .elements()
        .map(|g| {
            let mut row = vec![g];
            row.extend(codec.encode(g).iter().map(|&a| sub.parent_id(a)));
            row
        })
        .collect();
    match defines_exactly(ext.group(), &f, &vars, &graph, budget).map_err(|e| run.fail(name, e))? {
        None => run.push(Step::pass(name).with_witness(f.to_string())),
        Some((t, v)) => run.push(Step::fail(name, json!({"tuple": t, "formula": v})).with_witness(f.to_string())),
    }
}

fn suite_step(run: &mut Run, interp: &Interpretation, opts: &VerifyOptions) -> Result<(), Halt> {
    let name = "translation-soundness";
    let mut rng = ChaCha8Rng::seed_from_u64(opts.suite_seed);
    let mut sentences: Vec<Formula> =
        FIXED_SENTENCES.iter().map(|s| parse_sentence(s).expect("fixed sentence parses")).collect();
    sentences.extend((0..opts.suite_size).map(|_| random_sentence(&mut rng, SentenceShape::default())));
    let env = ParamEnv::new();
    let mut src = Evaluator::new(interp.source(), &env).with_budget(opts.budget);
    let mut tgt = Evaluator::new(interp.target(), &env).with_budget(opts.budget);
    let mut skipped = 0;
    for phi in &sentences {
        let res = translate(phi, interp, &env).map_err(cap)?;
        match check_equivalence_with(phi, &res, &mut src, &mut tgt) {
            Ok(e) if e.holds => {}
            Ok(e) => {
                return run.push(Step::fail(
                    name,
                    json!({"sentence": phi.to_string(), "source": e.first.0, "target": e.first.1}),
                ))
            }
            Err(EvalError::ComplexityCap { .. }) => skipped += 1,
            Err(other) => return Err(cap(other)),
        }
    }
    let total = sentences.len();
    let detail = format!("{total} sentences, {skipped} skipped over budget");
    if skipped * 5 >= total {
        return run.push(Step::fail(name, json!({"skipped": skipped, "total": total})).with_detail(detail));
    }
    run.push(Step::pass(name).with_detail(detail))
}
