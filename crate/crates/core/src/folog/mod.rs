//! First-order logic over the language of groups: syntax, parsing, a
//! finite-structure evaluator, characteristic sentences and random sentences.

mod ast;
pub mod axiom;
mod eval;
mod parse;
pub mod random;

pub use ast::{fresh_name, Formula, Term};
pub use axiom::{
    axiomatize_with_tuple, check_axiomatization, AxiomCheck, AxiomError, AxiomatizationCertificate, CertificateFile,
};
pub use eval::{
    default_budget, definable_set, evaluate, naive_estimate, EvalError, Evaluator, ParamEnv, BUDGET_ENV, DEFAULT_BUDGET,
};
pub use parse::{parse_formula, parse_sentence, parse_term, ParseError};
pub use random::{random_sentence, SentenceShape};
