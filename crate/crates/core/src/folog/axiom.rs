//! Sentences that pin down a finite group together with a generating tuple.
//!
//! Every element `g` gets a shortest positive word `w_g(y_1..y_s)` in the
//! generators. The sentence asserts the multiplication table on those words,
//! their pairwise distinctness, and that every element is one of them. A
//! structure satisfies it at a tuple exactly when the word map is an
//! isomorphism sending the base tuple there.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{Formula, Term};
use super::eval::{EvalError, Evaluator, ParamEnv};
use super::parse::{parse_formula, ParseError};
use crate::group::{GroupError, GroupFile, GroupTable, DEFAULT_ORDER_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AxiomError {
    #[error("tuple does not generate the group (reaches {reached} of {order} elements)")]
    NotGenerating { reached: usize, order: usize },
    #[error("group order {order} exceeds the cap {cap}")]
    GroupTooLarge { order: usize, cap: usize },
    #[error("tuple has {got} entries, certificate expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("tuple entry {0} out of range")]
    ElementOutOfRange(usize),
    #[error("word map is not an isomorphism although the sentence holds")]
    InvalidWitness,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Name of the `i`-th (0-based) free variable of a certificate sentence.
pub fn tuple_var(i: usize) -> String {
    format!("y{}", i + 1)
}

#[derive(Debug, Clone)]
pub struct AxiomatizationCertificate {
    base: Arc<GroupTable>,
    tuple: Vec<usize>,
    words: Vec<Term>,
    sentence: Formula,
}

/// Outcome of checking a certificate against a structure and tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub holds: bool,
    /// `witness[g]` is the image of base element `g`.
    pub witness: Option<Vec<usize>>,
}

/// Serialized certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub sentence: String,
    pub tuple_arity: usize,
    pub tuple: Vec<usize>,
    pub base: GroupFile,
}

fn shortest_words(h: &GroupTable, tuple: &[usize]) -> Vec<Option<Term>> {
    let mut words: Vec<Option<Term>> = vec![None; h.order()];
    words[0] = Some(Term::One);
    let mut queue = VecDeque::from([0usize]);
    while let Some(e) = queue.pop_front() {
        for (i, &g) in tuple.iter().enumerate() {
            let p = h.mul(e, g);
            if words[p].is_none() {
                let w = words[e].clone().expect("visited");
                let y = Term::Var(tuple_var(i));
                words[p] = Some(if e == 0 { y } else { Term::mul(w, y) });
                queue.push_back(p);
            }
        }
    }
    words
}

/// Builds the characteristic sentence of `(h, tuple)`.
///
/// Table entries with an identity factor are left out: they hold in every
/// group because `w_1` is the constant `1`.
pub fn axiomatize_with_tuple(h: Arc<GroupTable>, tuple: &[usize]) -> Result<AxiomatizationCertificate, AxiomError> {
    if h.order() > DEFAULT_ORDER_CAP {
        return Err(AxiomError::GroupTooLarge { order: h.order(), cap: DEFAULT_ORDER_CAP });
    }
    if let Some(&bad) = tuple.iter().find(|&&t| t >= h.order()) {
        return Err(AxiomError::ElementOutOfRange(bad));
    }
    let words = shortest_words(&h, tuple);
    let reached = words.iter().filter(|w| w.is_some()).count();
    if reached < h.order() {
        return Err(AxiomError::NotGenerating { reached, order: h.order() });
    }
    let words: Vec<Term> = words.into_iter().map(Option::unwrap).collect();
    let n = h.order();
    let mut parts = Vec::new();
    for a in 1..n {
        for b in 1..n {
            parts.push(Formula::eq(Term::mul(words[a].clone(), words[b].clone()), words[h.mul(a, b)].clone()));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            parts.push(Formula::neq(words[a].clone(), words[b].clone()));
        }
    }
    // repeated or trivial tuple entries are not pinned down by the words
    for (i, &t) in tuple.iter().enumerate() {
        let y = Term::Var(tuple_var(i));
        if words[t] != y {
            parts.push(Formula::eq(y, words[t].clone()));
        }
    }
    let x = Term::var("x");
    let cover = Formula::or(words.iter().map(|w| Formula::eq(x.clone(), w.clone())).collect());
    parts.push(Formula::forall("x", cover));
    Ok(AxiomatizationCertificate { base: h, tuple: tuple.to_vec(), words, sentence: Formula::and(parts) })
}

fn eval_word(h: &GroupTable, w: &Term, tuple: &[usize]) -> usize {
    match w {
        Term::One => 0,
        Term::Var(v) => {
            let i: usize = v[1..].parse().expect("tuple variable");
            tuple[i - 1]
        }
        Term::Mul(a, b) => h.mul(eval_word(h, a, tuple), eval_word(h, b, tuple)),
        _ => unreachable!("words are positive products of tuple variables"),
    }
}

impl AxiomatizationCertificate {
    pub fn base(&self) -> &Arc<GroupTable> {
        &self.base
    }

    pub fn tuple(&self) -> &[usize] {
        &self.tuple
    }

    pub fn sentence(&self) -> &Formula {
        &self.sentence
    }

    /// Shortest word of each base element.
    pub fn words(&self) -> &[Term] {
        &self.words
    }

    pub fn arity(&self) -> usize {
        self.tuple.len()
    }

    pub fn to_file(&self) -> CertificateFile {
        CertificateFile {
            sentence: self.sentence.to_string(),
            tuple_arity: self.arity(),
            tuple: self.tuple.clone(),
            base: GroupFile::from_table(&self.base),
        }
    }

    /// Rebuilds a certificate from its file form, checking that the stored
    /// sentence is the one the base and tuple produce.
    pub fn from_file(file: &CertificateFile) -> Result<AxiomatizationCertificate, AxiomError> {
        let base = Arc::new(file.base.clone().into_table()?);
        let cert = axiomatize_with_tuple(base, &file.tuple)?;
        if file.tuple_arity != cert.arity() {
            return Err(AxiomError::ArityMismatch { expected: file.tuple_arity, got: cert.arity() });
        }
        let stored = parse_formula(&file.sentence)?;
        if stored != cert.sentence {
            return Err(AxiomError::Parse(ParseError::Syntax {
                offset: 0,
                message: "sentence does not match the base group and tuple".into(),
            }));
        }
        Ok(cert)
    }
}

/// Evaluates the certificate sentence in `h2` at `tuple2`; when it holds,
/// returns the word-map isomorphism after checking it is bijective and
/// multiplicative.
pub fn check_axiomatization(
    cert: &AxiomatizationCertificate,
    h2: &GroupTable,
    tuple2: &[usize],
) -> Result<AxiomCheck, AxiomError> {
    if tuple2.len() != cert.arity() {
        return Err(AxiomError::ArityMismatch { expected: cert.arity(), got: tuple2.len() });
    }
    if let Some(&bad) = tuple2.iter().find(|&&t| t >= h2.order()) {
        return Err(AxiomError::ElementOutOfRange(bad));
    }
    let assignment: BTreeMap<String, usize> = tuple2.iter().enumerate().map(|(i, &t)| (tuple_var(i), t)).collect();
    let holds = Evaluator::new(h2, &ParamEnv::new()).eval(&cert.sentence, &assignment)?;
    if !holds {
        return Ok(AxiomCheck { holds, witness: None });
    }
    let base = &cert.base;
    let witness: Vec<usize> = cert.words.iter().map(|w| eval_word(h2, w, tuple2)).collect();
    let mut hit = vec![false; h2.order()];
    let bijective = base.order() == h2.order() && witness.iter().all(|&x| !std::mem::replace(&mut hit[x], true));
    let multiplicative = bijective
        && base.elements().all(|a| base.elements().all(|b| witness[base.mul(a, b)] == h2.mul(witness[a], witness[b])));
    let on_tuple = cert.tuple.iter().zip(tuple2).all(|(&a, &b)| witness[a] == b);
    if !multiplicative || !on_tuple {
        return Err(AxiomError::InvalidWitness);
    }
    Ok(AxiomCheck { holds, witness: Some(witness) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, dihedral};

    #[test]
    fn c2_sentence_shape() {
        let cert = axiomatize_with_tuple(Arc::new(cyclic(2).unwrap()), &[1]).unwrap();
        assert_eq!(cert.sentence().to_string(), "y1 * y1 = 1 & !(1 = y1) & (forall x. x = 1 | x = y1)");
    }

    #[test]
    fn trivial_group_sentence() {
        let cert = axiomatize_with_tuple(Arc::new(cyclic(1).unwrap()), &[]).unwrap();
        assert_eq!(cert.sentence().to_string(), "forall x. x = 1");
    }

    #[test]
    fn c3_sentence_fails_everywhere_in_c2() {
        let cert = axiomatize_with_tuple(Arc::new(cyclic(3).unwrap()), &[1]).unwrap();
        let c2 = cyclic(2).unwrap();
        for a in 0..2 {
            assert!(!check_axiomatization(&cert, &c2, &[a]).unwrap().holds);
        }
    }

    #[test]
    fn identity_and_automorphism_witnesses() {
        let c2 = Arc::new(cyclic(2).unwrap());
        let cert = axiomatize_with_tuple(c2.clone(), &[1]).unwrap();
        let check = check_axiomatization(&cert, &c2, &[1]).unwrap();
        assert_eq!(check.witness, Some(vec![0, 1]));
        assert!(!check_axiomatization(&cert, &cyclic(3).unwrap(), &[1]).unwrap().holds);

        // S3 with (r, s) against (r^2, sr)
        let s3 = Arc::new(dihedral(3).unwrap());
        let cert = axiomatize_with_tuple(s3.clone(), &[1, 3]).unwrap();
        let check = check_axiomatization(&cert, &s3, &[2, 4]).unwrap();
        let w = check.witness.unwrap();
        assert_ne!(w, (0..6).collect::<Vec<_>>());
        assert_eq!((w[1], w[3]), (2, 4));
    }

    #[test]
    fn repeated_and_trivial_entries_are_pinned() {
        let c4 = Arc::new(cyclic(4).unwrap());
        let cert = axiomatize_with_tuple(c4.clone(), &[1, 1]).unwrap();
        assert!(!check_axiomatization(&cert, &c4, &[1, 0]).unwrap().holds);
        assert!(!check_axiomatization(&cert, &c4, &[1, 3]).unwrap().holds);
        assert!(check_axiomatization(&cert, &c4, &[3, 3]).unwrap().holds);
        let cert = axiomatize_with_tuple(c4.clone(), &[1, 0]).unwrap();
        assert!(!check_axiomatization(&cert, &c4, &[1, 1]).unwrap().holds);
        assert!(check_axiomatization(&cert, &c4, &[3, 0]).unwrap().holds);
    }

    #[test]
    fn errors() {
        let s3 = Arc::new(dihedral(3).unwrap());
        assert!(matches!(axiomatize_with_tuple(s3.clone(), &[1]), Err(AxiomError::NotGenerating { reached: 3, .. })));
        let cert = axiomatize_with_tuple(s3.clone(), &[1, 3]).unwrap();
        assert!(matches!(check_axiomatization(&cert, &s3, &[1]), Err(AxiomError::ArityMismatch { .. })));
    }

    #[test]
    fn file_round_trip() {
        let s3 = Arc::new(dihedral(3).unwrap());
        let cert = axiomatize_with_tuple(s3, &[1, 3]).unwrap();
        let file = cert.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let back = AxiomatizationCertificate::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.sentence(), cert.sentence());
        let mut tampered = file;
        tampered.sentence = "forall x. x = 1".into();
        assert!(AxiomatizationCertificate::from_file(&tampered).is_err());
    }
}
