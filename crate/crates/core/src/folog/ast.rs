use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// A term over the group signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// Named parameter `@name`, resolved through a [`ParamEnv`](super::ParamEnv).
    Param(String),
    /// Element literal `#id` of the structure the formula is evaluated in.
    Const(usize),
    One,
    Mul(Box<Term>, Box<Term>),
    Inv(Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn param(name: impl Into<String>) -> Term {
        Term::Param(name.into())
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn inv(a: Term) -> Term {
        Term::Inv(Box::new(a))
    }

    /// Product that drops identity literals (`#0` and `1`).
    pub fn mul_simplified(a: Term, b: Term) -> Term {
        match (a.is_identity_literal(), b.is_identity_literal()) {
            (true, _) => b,
            (_, true) => a,
            _ => Term::mul(a, b),
        }
    }

    fn is_identity_literal(&self) -> bool {
        matches!(self, Term::One | Term::Const(0))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Param(_) | Term::Const(_) | Term::One => 1,
            Term::Mul(a, b) => 1 + a.size() + b.size(),
            Term::Inv(a) => 1 + a.size(),
        }
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Param(_) | Term::Const(_) | Term::One => {}
            Term::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Inv(a) => a.collect_vars(out),
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn substitute(&self, map: &HashMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Param(_) | Term::Const(_) | Term::One => self.clone(),
            Term::Mul(a, b) => Term::mul(a.substitute(map), b.substitute(map)),
            Term::Inv(a) => Term::inv(a.substitute(map)),
        }
    }

    fn resolve_params(&self, env: &BTreeMap<String, usize>) -> Result<Term, String> {
        Ok(match self {
            Term::Param(p) => Term::Const(*env.get(p).ok_or_else(|| p.clone())?),
            Term::Var(_) | Term::Const(_) | Term::One => self.clone(),
            Term::Mul(a, b) => Term::mul(a.resolve_params(env)?, b.resolve_params(env)?),
            Term::Inv(a) => Term::inv(a.resolve_params(env)?),
        })
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Param(p) => {
                out.insert(p.clone());
            }
            Term::Var(_) | Term::Const(_) | Term::One => {}
            Term::Mul(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Term::Inv(a) => a.collect_params(out),
        }
    }
}

/// A first-order formula over the group signature with equality.
///
/// `And`/`Or` are n-ary; the empty conjunction is never produced by the
/// builders (see [`Formula::and`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// `1 = 1`
    pub fn truth() -> Formula {
        Formula::Eq(Term::One, Term::One)
    }

    /// `!(1 = 1)`
    pub fn falsity() -> Formula {
        Formula::not(Formula::truth())
    }

    /// Conjunction; an empty list gives [`Formula::truth`], a single
    /// conjunct is returned as is.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::truth(),
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction; an empty list gives [`Formula::falsity`].
    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::falsity(),
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn exists_block(vars: &[String], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    pub fn forall_block(vars: &[String], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    /// Number of AST nodes, terms included.
    pub fn size(&self) -> usize {
        match self {
            Formula::Eq(a, b) => 1 + a.size() + b.size(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.size(),
        }
    }

    /// Maximum nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0),
            Formula::Implies(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.quantifier_rank(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_rank() == 0
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::Eq(a, b) => {
                for v in a.vars().into_iter().chain(b.vars()) {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.to_string());
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&str)) {
        match self {
            Formula::Eq(a, b) => {
                for v in a.vars().iter().chain(b.vars().iter()) {
                    f(v);
                }
            }
            Formula::Not(g) => g.visit_vars(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_vars(f)),
            Formula::Implies(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Formula::Forall(v, g) | Formula::Exists(v, g) => {
                f(v);
                g.visit_vars(f);
            }
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_params(&mut out));
        out
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_terms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_terms(f)),
            Formula::Implies(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
        }
    }

    /// Capture-avoiding substitution of terms for free variables.
    pub fn substitute(&self, map: &HashMap<String, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Eq(a, b) => Formula::Eq(a.substitute(map), b.substitute(map)),
            Formula::Not(f) => Formula::not(f.substitute(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.substitute(map), b.substitute(map)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(self, Formula::Forall(..));
                let mut inner = map.clone();
                inner.remove(v);
                let body_free = body.free_vars();
                inner.retain(|k, _| body_free.contains(k));
                let captured = inner.values().any(|t| t.vars().contains(v));
                let (v, body) = if captured {
                    let mut avoid = body.all_vars();
                    for t in inner.values() {
                        avoid.extend(t.vars());
                    }
                    let fresh = fresh_name(v, &avoid);
                    let renamed = body.substitute(&HashMap::from([(v.clone(), Term::Var(fresh.clone()))]));
                    (fresh, renamed)
                } else {
                    (v.clone(), (**body).clone())
                };
                let body = body.substitute(&inner);
                if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                }
            }
        }
    }

    /// Substitutes a single variable.
    pub fn substitute_var(&self, var: &str, term: Term) -> Formula {
        self.substitute(&HashMap::from([(var.to_string(), term)]))
    }

    /// Replaces every `@name` with the literal it is bound to.
    pub fn resolve_params(&self, env: &super::ParamEnv) -> Result<Formula, super::EvalError> {
        self.resolve_params_map(env.bindings()).map_err(super::EvalError::UnboundParameter)
    }

    fn resolve_params_map(&self, env: &BTreeMap<String, usize>) -> Result<Formula, String> {
        Ok(match self {
            Formula::Eq(a, b) => Formula::Eq(a.resolve_params(env)?, b.resolve_params(env)?),
            Formula::Not(f) => Formula::not(f.resolve_params_map(env)?),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.resolve_params_map(env)).collect::<Result<_, _>>()?),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.resolve_params_map(env)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => Formula::implies(a.resolve_params_map(env)?, b.resolve_params_map(env)?),
            Formula::Forall(v, f) => Formula::forall(v.clone(), f.resolve_params_map(env)?),
            Formula::Exists(v, f) => Formula::exists(v.clone(), f.resolve_params_map(env)?),
        })
    }

    /// Renames bound variables that shadow an enclosing binder or a free
    /// variable, so no name is both free and bound along one path.
    pub fn rename_shadowed(&self) -> Formula {
        let mut avoid = self.all_vars();
        let mut scope: Vec<String> = self.free_vars();
        self.rename_shadowed_in(&mut scope, &mut avoid)
    }

    fn rename_shadowed_in(&self, scope: &mut Vec<String>, avoid: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::Eq(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.rename_shadowed_in(scope, avoid)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_shadowed_in(scope, avoid)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_shadowed_in(scope, avoid)).collect()),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_shadowed_in(scope, avoid), b.rename_shadowed_in(scope, avoid))
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let (name, body) = if scope.contains(v) {
                    let fresh = fresh_name(v, avoid);
                    avoid.insert(fresh.clone());
                    let renamed = body.substitute_var(v, Term::Var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (v.clone(), (**body).clone())
                };
                scope.push(name.clone());
                let body = body.rename_shadowed_in(scope, avoid);
                scope.pop();
                if matches!(self, Formula::Forall(..)) {
                    Formula::forall(name, body)
                } else {
                    Formula::exists(name, body)
                }
            }
        }
    }
}

/// `base_1`, `base_2`, ... : the first one not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..).map(|i| format!("{base}_{i}")).find(|n| !avoid.contains(n)).expect("unbounded supply")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Param(p) => write!(f, "@{p}"),
            Term::Const(c) => write!(f, "#{c}"),
            Term::One => write!(f, "1"),
            Term::Mul(a, b) => {
                write!(f, "{a} * ")?;
                if matches!(**b, Term::Mul(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Term::Inv(a) => match **a {
                Term::Var(_) | Term::Param(_) | Term::Const(_) | Term::One => write!(f, "{a}^-1"),
                _ => write!(f, "({a})^-1"),
            },
        }
    }
}

struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::Eq(..) | Formula::Not(_) => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}

/// Canonical text form: binary connectives and quantifiers are parenthesized
/// whenever they appear as an operand, negation always wraps its argument.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str| -> fmt::Result {
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{}", Operand(g))?;
            }
            Ok(())
        };
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(fs) => join(f, fs, "&"),
            Formula::Or(fs) => join(f, fs, "|"),
            Formula::Implies(a, b) => write!(f, "{} -> {}", Operand(a), Operand(b)),
            Formula::Forall(v, g) => write!(f, "forall {v}. {g}"),
            Formula::Exists(v, g) => write!(f, "exists {v}. {g}"),
        }
    }
}
