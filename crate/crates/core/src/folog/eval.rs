//! Exhaustive model checking of formulas in a finite group.
//!
//! Formulas are compiled to a slot-indexed form before evaluation. Quantifier
//! blocks whose body starts with quantifier-free conjuncts over the block
//! variables (`exists v. (G & ...)`, `forall v. (G -> ...)`) enumerate only
//! the assignments satisfying `G`, found by a pruned search and memoized per
//! value of `G`'s other variables. Other blocks enumerate the whole
//! structure, pruning with three-valued evaluation of the quantifier-free
//! part of the body. Both strategies are exact.
//!
//! Work is counted in visited assignments and capped by a budget.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::ast::{Formula, Term};
use crate::group::GroupTable;

/// Default enumeration budget.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "BIINTERP_BUDGET";

/// The budget from `BIINTERP_BUDGET`, or [`DEFAULT_BUDGET`].
pub fn default_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

/// Reassembles a block body from the conjuncts left after guard extraction.
type Rebuild = Box<dyn FnOnce(Vec<CNode>) -> CNode>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unbound parameter `@{0}`")]
    UnboundParameter(String),
    #[error("element #{id} out of range for a structure of order {order}")]
    ConstOutOfRange { id: usize, order: usize },
    #[error("enumeration budget {budget} exhausted after {spent} steps (naive estimate {estimate:.3e})")]
    ComplexityCap { budget: u64, spent: u64, estimate: f64 },
}

/// Named parameters bound to elements of one structure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamEnv(BTreeMap<String, usize>);

impl ParamEnv {
    pub fn new() -> ParamEnv {
        ParamEnv::default()
    }

    pub fn bind(mut self, name: impl Into<String>, id: usize) -> ParamEnv {
        self.0.insert(name.into(), id);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, id: usize) {
        self.0.insert(name.into(), id);
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.0.get(name).copied()
    }

    pub fn bindings(&self) -> &BTreeMap<String, usize> {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, usize)> for ParamEnv {
    fn from_iter<I: IntoIterator<Item = (String, usize)>>(iter: I) -> Self {
        ParamEnv(iter.into_iter().collect())
    }
}

/// Cost of evaluating `f` by plain nested enumeration: `|M|^rank * |f|`.
pub fn naive_estimate(order: usize, f: &Formula) -> f64 {
    (order as f64).powi(f.quantifier_rank() as i32) * f.size() as f64
}

const UNSET: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CTerm {
    Var(u32),
    Const(u32),
    Mul(Box<CTerm>, Box<CTerm>),
    Inv(Box<CTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CNode {
    Eq(CTerm, CTerm),
    Not(Box<CNode>),
    And(Vec<CNode>),
    Or(Vec<CNode>),
    Implies(Box<CNode>, Box<CNode>),
    Block(Box<Block>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Block {
    universal: bool,
    vars: Vec<u32>,
    guard: Option<Guard>,
    rest: CNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Guard {
    cond: CNode,
    /// outer slots read by `cond`, in first-occurrence order
    key_slots: Vec<u32>,
    memo: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    False,
    True,
    Unknown,
}

impl CTerm {
    fn slots(&self, out: &mut Vec<u32>) {
        match self {
            CTerm::Var(s) => {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
            CTerm::Const(_) => {}
            CTerm::Mul(a, b) => {
                a.slots(out);
                b.slots(out);
            }
            CTerm::Inv(a) => a.slots(out),
        }
    }

    fn renumber(&self, map: &HashMap<u32, u32>) -> CTerm {
        match self {
            CTerm::Var(s) => CTerm::Var(map[s]),
            CTerm::Const(c) => CTerm::Const(*c),
            CTerm::Mul(a, b) => CTerm::Mul(Box::new(a.renumber(map)), Box::new(b.renumber(map))),
            CTerm::Inv(a) => CTerm::Inv(Box::new(a.renumber(map))),
        }
    }
}

impl CNode {
    fn is_quantifier_free(&self) -> bool {
        match self {
            CNode::Eq(..) => true,
            CNode::Not(f) => f.is_quantifier_free(),
            CNode::And(fs) | CNode::Or(fs) => fs.iter().all(CNode::is_quantifier_free),
            CNode::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            CNode::Block(_) => false,
        }
    }

    /// Slots of a quantifier-free node in first-occurrence order.
    fn slots(&self, out: &mut Vec<u32>) {
        match self {
            CNode::Eq(a, b) => {
                a.slots(out);
                b.slots(out);
            }
            CNode::Not(f) => f.slots(out),
            CNode::And(fs) | CNode::Or(fs) => fs.iter().for_each(|f| f.slots(out)),
            CNode::Implies(a, b) => {
                a.slots(out);
                b.slots(out);
            }
            CNode::Block(_) => unreachable!("guards are quantifier-free"),
        }
    }

    fn renumber(&self, map: &HashMap<u32, u32>) -> CNode {
        match self {
            CNode::Eq(a, b) => CNode::Eq(a.renumber(map), b.renumber(map)),
            CNode::Not(f) => CNode::Not(Box::new(f.renumber(map))),
            CNode::And(fs) => CNode::And(fs.iter().map(|f| f.renumber(map)).collect()),
            CNode::Or(fs) => CNode::Or(fs.iter().map(|f| f.renumber(map)).collect()),
            CNode::Implies(a, b) => CNode::Implies(Box::new(a.renumber(map)), Box::new(b.renumber(map))),
            CNode::Block(_) => unreachable!("guards are quantifier-free"),
        }
    }
}

fn conjuncts(node: CNode) -> Vec<CNode> {
    match node {
        CNode::And(fs) => fs,
        other => vec![other],
    }
}

fn conjoin(mut parts: Vec<CNode>) -> CNode {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        CNode::And(parts)
    }
}

type MemoKey = (CNode, usize, usize);

/// Evaluates formulas in one structure under one parameter environment.
///
/// Guard memos persist across calls, so reusing an evaluator for many
/// formulas of the same shape (translations through one interpretation)
/// amortizes the guard searches.
pub struct Evaluator<'a> {
    structure: &'a GroupTable,
    env: ParamEnv,
    budget: u64,
    spent: u64,
    estimate: f64,
    interner: HashMap<MemoKey, usize>,
    memos: Vec<HashMap<Vec<u32>, Rc<Vec<u32>>>>,
}

struct Compiler<'e, 'a> {
    eval: &'e mut Evaluator<'a>,
    scope: Vec<(String, u32)>,
    next_slot: u32,
}

impl Compiler<'_, '_> {
    fn fresh(&mut self) -> u32 {
        let s = self.next_slot;
        self.next_slot += 1;
        s
    }

    fn term(&mut self, t: &Term) -> Result<CTerm, EvalError> {
        let order = self.eval.structure.order();
        Ok(match t {
            Term::Var(v) => match self.scope.iter().rev().find(|(n, _)| n == v) {
                Some(&(_, s)) => CTerm::Var(s),
                None => return Err(EvalError::UnboundVariable(v.clone())),
            },
            Term::Param(p) => {
                let id = self.eval.env.get(p).ok_or_else(|| EvalError::UnboundParameter(p.clone()))?;
                if id >= order {
                    return Err(EvalError::ConstOutOfRange { id, order });
                }
                CTerm::Const(id as u32)
            }
            Term::Const(id) => {
                if *id >= order {
                    return Err(EvalError::ConstOutOfRange { id: *id, order });
                }
                CTerm::Const(*id as u32)
            }
            Term::One => CTerm::Const(0),
            Term::Mul(a, b) => CTerm::Mul(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Term::Inv(a) => CTerm::Inv(Box::new(self.term(a)?)),
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<CNode, EvalError> {
        Ok(match f {
            Formula::Eq(a, b) => CNode::Eq(self.term(a)?, self.term(b)?),
            Formula::Not(g) => CNode::Not(Box::new(self.formula(g)?)),
            Formula::And(gs) => CNode::And(gs.iter().map(|g| self.formula(g)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => CNode::Or(gs.iter().map(|g| self.formula(g)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => CNode::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Forall(..) | Formula::Exists(..) => {
                let universal = matches!(f, Formula::Forall(..));
                let mut vars = Vec::new();
                let mut body = f;
                while let (Formula::Forall(v, g), true) | (Formula::Exists(v, g), false) = (body, universal) {
                    let s = self.fresh();
                    self.scope.push((v.clone(), s));
                    vars.push(s);
                    body = g;
                }
                let compiled = self.formula(body);
                self.scope.truncate(self.scope.len() - vars.len());
                self.block(universal, vars, compiled?)
            }
        })
    }

    fn block(&mut self, universal: bool, vars: Vec<u32>, body: CNode) -> CNode {
        // split the body into guard conjuncts and the rest
        let (candidates, rebuild): (Vec<CNode>, Rebuild) = if universal {
            match body {
                CNode::Implies(a, b) => {
                    let b = *b;
                    (
                        conjuncts(*a),
                        Box::new(move |rest: Vec<CNode>| {
                            if rest.is_empty() {
                                b
                            } else {
                                CNode::Implies(Box::new(conjoin(rest)), Box::new(b))
                            }
                        }),
                    )
                }
                other => return CNode::Block(Box::new(Block { universal, vars, guard: None, rest: other })),
            }
        } else {
            (conjuncts(body), Box::new(conjoin))
        };
        let mut guard_parts = Vec::new();
        let mut rest_parts = Vec::new();
        for c in candidates {
            let mentions_block = c.is_quantifier_free() && {
                let mut s = Vec::new();
                c.slots(&mut s);
                s.iter().any(|x| vars.contains(x))
            };
            if mentions_block {
                guard_parts.push(c);
            } else {
                rest_parts.push(c);
            }
        }
        if guard_parts.is_empty() {
            let rest = rebuild(rest_parts);
            return CNode::Block(Box::new(Block { universal, vars, guard: None, rest }));
        }
        let cond = conjoin(guard_parts);
        let mut used = Vec::new();
        cond.slots(&mut used);
        let guarded: Vec<u32> = vars.iter().copied().filter(|v| used.contains(v)).collect();
        let free: Vec<u32> = vars.iter().copied().filter(|v| !used.contains(v)).collect();
        let key_slots: Vec<u32> = used.iter().copied().filter(|v| !vars.contains(v)).collect();
        let mut rest = rebuild(rest_parts);
        if !free.is_empty() {
            rest = self.block(universal, free, rest);
        }
        // canonical numbering: key slots, then block slots in binder order
        let map: HashMap<u32, u32> =
            key_slots.iter().chain(guarded.iter()).enumerate().map(|(i, &s)| (s, i as u32)).collect();
        let key = (cond.renumber(&map), key_slots.len(), guarded.len());
        let next = self.eval.interner.len();
        let memo = *self.eval.interner.entry(key).or_insert(next);
        if memo == self.eval.memos.len() {
            self.eval.memos.push(HashMap::new());
        }
        CNode::Block(Box::new(Block { universal, vars: guarded, guard: Some(Guard { cond, key_slots, memo }), rest }))
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(structure: &'a GroupTable, env: &ParamEnv) -> Evaluator<'a> {
        Evaluator {
            structure,
            env: env.clone(),
            budget: default_budget(),
            spent: 0,
            estimate: 0.0,
            interner: HashMap::new(),
            memos: Vec::new(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Evaluator<'a> {
        self.budget = budget;
        self
    }

    pub fn structure(&self) -> &GroupTable {
        self.structure
    }

    /// Steps spent by the last call.
    pub fn spent(&self) -> u64 {
        self.spent
    }

    fn compile(&mut self, f: &Formula, free: &[String]) -> Result<(CNode, usize), EvalError> {
        let mut c = Compiler { eval: self, scope: Vec::new(), next_slot: 0 };
        for v in free {
            let s = c.fresh();
            c.scope.push((v.clone(), s));
        }
        let node = c.formula(f)?;
        Ok((node, c.next_slot as usize))
    }

    fn start(&mut self, f: &Formula) {
        self.spent = 0;
        self.estimate = naive_estimate(self.structure.order(), f);
    }

    fn tick(&mut self, n: u64) -> Result<(), EvalError> {
        self.spent += n;
        if self.spent > self.budget {
            Err(EvalError::ComplexityCap { budget: self.budget, spent: self.spent, estimate: self.estimate })
        } else {
            Ok(())
        }
    }

    /// Truth value of `f` under `assignment`, which must cover its free variables.
    pub fn eval(&mut self, f: &Formula, assignment: &BTreeMap<String, usize>) -> Result<bool, EvalError> {
        let free = f.free_vars();
        if let Some(v) = free.iter().find(|v| !assignment.contains_key(*v)) {
            return Err(EvalError::UnboundVariable(v.clone()));
        }
        let order = self.structure.order();
        for &id in assignment.values() {
            if id >= order {
                return Err(EvalError::ConstOutOfRange { id, order });
            }
        }
        self.start(f);
        let (node, slots) = self.compile(f, &free)?;
        let mut a = vec![UNSET; slots];
        for (i, v) in free.iter().enumerate() {
            a[i] = assignment[v] as u32;
        }
        self.node(&node, &mut a)
    }

    pub fn eval_sentence(&mut self, f: &Formula) -> Result<bool, EvalError> {
        self.eval(f, &BTreeMap::new())
    }

    /// `{ a in M^n : M |= f(a) }` over the listed variables, which must
    /// include every free variable of `f`.
    pub fn definable_set(&mut self, f: &Formula, vars: &[String]) -> Result<BTreeSet<Vec<usize>>, EvalError> {
        if let Some(v) = f.free_vars().into_iter().find(|v| !vars.contains(v)) {
            return Err(EvalError::UnboundVariable(v));
        }
        self.start(f);
        let (node, slots) = self.compile(f, vars)?;
        let mut a = vec![UNSET; slots];
        let mut out = BTreeSet::new();
        let order = (self.structure.order() as f64).powi(vars.len() as i32);
        self.estimate = self.estimate.max(order * f.size() as f64);
        self.collect(&node, vars.len(), 0, &mut a, &mut out)?;
        Ok(out)
    }

    fn collect(
        &mut self,
        node: &CNode,
        n: usize,
        depth: usize,
        a: &mut Vec<u32>,
        out: &mut BTreeSet<Vec<usize>>,
    ) -> Result<(), EvalError> {
        if depth == n {
            if self.node(node, a)? {
                out.insert(a[..n].iter().map(|&v| v as usize).collect());
            }
            return Ok(());
        }
        for v in 0..self.structure.order() as u32 {
            self.tick(1)?;
            a[depth] = v;
            if depth + 1 < n && self.partial(node, a) == Tri::False {
                continue;
            }
            self.collect(node, n, depth + 1, a, out)?;
        }
        a[depth] = UNSET;
        Ok(())
    }

    fn term(&self, t: &CTerm, a: &[u32]) -> Option<u32> {
        match t {
            CTerm::Var(s) => {
                let v = a[*s as usize];
                (v != UNSET).then_some(v)
            }
            CTerm::Const(c) => Some(*c),
            CTerm::Mul(x, y) => {
                let x = self.term(x, a)?;
                let y = self.term(y, a)?;
                Some(self.structure.mul(x as usize, y as usize) as u32)
            }
            CTerm::Inv(x) => Some(self.structure.inv(self.term(x, a)? as usize) as u32),
        }
    }

    /// Three-valued evaluation; quantified subformulas count as unknown.
    fn partial(&self, node: &CNode, a: &[u32]) -> Tri {
        match node {
            CNode::Eq(x, y) => match (self.term(x, a), self.term(y, a)) {
                (Some(x), Some(y)) => {
                    if x == y {
                        Tri::True
                    } else {
                        Tri::False
                    }
                }
                _ => Tri::Unknown,
            },
            CNode::Not(f) => match self.partial(f, a) {
                Tri::True => Tri::False,
                Tri::False => Tri::True,
                Tri::Unknown => Tri::Unknown,
            },
            CNode::And(fs) => {
                let mut acc = Tri::True;
                for f in fs {
                    match self.partial(f, a) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => acc = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                acc
            }
            CNode::Or(fs) => {
                let mut acc = Tri::False;
                for f in fs {
                    match self.partial(f, a) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => acc = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                acc
            }
            CNode::Implies(x, y) => match self.partial(x, a) {
                Tri::False => Tri::True,
                px => match (px, self.partial(y, a)) {
                    (_, Tri::True) => Tri::True,
                    (Tri::True, py) => py,
                    _ => Tri::Unknown,
                },
            },
            CNode::Block(_) => Tri::Unknown,
        }
    }

    fn node(&mut self, node: &CNode, a: &mut Vec<u32>) -> Result<bool, EvalError> {
        Ok(match node {
            CNode::Eq(x, y) => self.term(x, a) == self.term(y, a),
            CNode::Not(f) => !self.node(f, a)?,
            CNode::And(fs) => {
                for f in fs {
                    if !self.node(f, a)? {
                        return Ok(false);
                    }
                }
                true
            }
            CNode::Or(fs) => {
                for f in fs {
                    if self.node(f, a)? {
                        return Ok(true);
                    }
                }
                false
            }
            CNode::Implies(x, y) => !self.node(x, a)? || self.node(y, a)?,
            CNode::Block(b) => match &b.guard {
                Some(g) => self.guarded(b, g, a)?,
                None => self.unguarded(b, 0, a)?,
            },
        })
    }

    fn guarded(&mut self, b: &Block, g: &Guard, a: &mut Vec<u32>) -> Result<bool, EvalError> {
        let cands = self.candidates(b, g, a)?;
        let w = b.vars.len();
        let mut result = b.universal;
        for cand in cands.chunks(w) {
            self.tick(1)?;
            for (s, &v) in b.vars.iter().zip(cand) {
                a[*s as usize] = v;
            }
            let r = self.node(&b.rest, a)?;
            if r != b.universal {
                result = r;
                break;
            }
        }
        for s in &b.vars {
            a[*s as usize] = UNSET;
        }
        Ok(result)
    }

    fn candidates(&mut self, b: &Block, g: &Guard, a: &mut Vec<u32>) -> Result<Rc<Vec<u32>>, EvalError> {
        let key: Vec<u32> = g.key_slots.iter().map(|s| a[*s as usize]).collect();
        if let Some(hit) = self.memos[g.memo].get(&key) {
            return Ok(hit.clone());
        }
        let mut out = Vec::new();
        self.guard_search(&g.cond, &b.vars, 0, a, &mut out)?;
        let out = Rc::new(out);
        self.memos[g.memo].insert(key, out.clone());
        Ok(out)
    }

    fn guard_search(
        &mut self,
        cond: &CNode,
        vars: &[u32],
        depth: usize,
        a: &mut Vec<u32>,
        out: &mut Vec<u32>,
    ) -> Result<(), EvalError> {
        let slot = vars[depth] as usize;
        for v in 0..self.structure.order() as u32 {
            self.tick(1)?;
            a[slot] = v;
            match self.partial(cond, a) {
                Tri::False => {}
                _ if depth + 1 < vars.len() => self.guard_search(cond, vars, depth + 1, a, out)?,
                Tri::True => out.extend(vars.iter().map(|s| a[*s as usize])),
                Tri::Unknown => unreachable!("guard fully assigned"),
            }
        }
        a[slot] = UNSET;
        Ok(())
    }

    /// Plain enumeration of a block; returns the block's truth value.
    fn unguarded(&mut self, b: &Block, depth: usize, a: &mut Vec<u32>) -> Result<bool, EvalError> {
        let slot = b.vars[depth] as usize;
        let last = depth + 1 == b.vars.len();
        let mut result = b.universal;
        for v in 0..self.structure.order() as u32 {
            self.tick(1)?;
            a[slot] = v;
            let r = if last {
                self.node(&b.rest, a)?
            } else {
                match self.partial(&b.rest, a) {
                    Tri::True => true,
                    Tri::False => false,
                    Tri::Unknown => self.unguarded(b, depth + 1, a)?,
                }
            };
            if r != b.universal {
                result = r;
                break;
            }
        }
        a[slot] = UNSET;
        Ok(result)
    }
}

/// `M |= f` under `assignment`, with the default budget.
pub fn evaluate(
    structure: &GroupTable,
    f: &Formula,
    env: &ParamEnv,
    assignment: &BTreeMap<String, usize>,
) -> Result<bool, EvalError> {
    Evaluator::new(structure, env).eval(f, assignment)
}

/// Tuples over `free_vars` satisfying `f`, with the default budget.
pub fn definable_set(
    structure: &GroupTable,
    f: &Formula,
    free_vars: &[String],
    env: &ParamEnv,
) -> Result<BTreeSet<Vec<usize>>, EvalError> {
    Evaluator::new(structure, env).definable_set(f, free_vars)
}
