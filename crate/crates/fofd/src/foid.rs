//! Bridge from inductive definitions read under well-founded semantics to
//! alternating fixpoint definitions. Each defined predicate P gains a fresh
//! complement predicate; negative occurrences of defined predicates are
//! rerouted through the complements, so the resulting rule bodies are
//! syntactically positive in every defined symbol. The complement rules live
//! in a greatest-fixpoint subdefinition nested inside a least-fixpoint
//! definition of the original predicates.
//!
//! The rule sets alone admit one spurious model when the well-founded model
//! of the input is partial: all atoms and all complements false. Totality
//! sentences requiring exactly one of P(x̄), P_neg(x̄) per tuple cut that
//! model and make the complement relation exact in every surviving model.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::eval::{enumerate_models, EvalError};
use crate::logic::{
    merge_rules, tuples, DefKind, FixpointDef, Formula, GidTheory, MergeError, Rule, Structure,
    Term, Theory, VocabError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    /// An occurrence inside an equivalence has both polarities at once, so
    /// there is no single complement literal to reroute it through.
    #[error("defined predicate '{0}' occurs inside an equivalence")]
    BothPolarities(String),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

/// One transformed rule set: the alternating definition and, per defined
/// predicate, its complement predicate and head variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GidTransform {
    pub def: FixpointDef,
    pub complements: Vec<(String, String, Vec<String>)>,
}

/// A transformed theory together with every complement pair introduced by
/// its definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryTransform {
    pub theory: Theory,
    pub complements: Vec<(String, String, Vec<String>)>,
}

fn complement_name(pred: &str, reserved: &BTreeSet<String>) -> String {
    let mut name = format!("{pred}_neg");
    while reserved.contains(&name) {
        name.push('_');
    }
    name
}

/// A defined predicate occurring under an equivalence, if any.
fn defined_in_iff(f: &Formula, defined: &BTreeSet<String>) -> Option<String> {
    match f {
        Formula::Atom(_, _) | Formula::Eq(_, _) => None,
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => {
            defined_in_iff(g, defined)
        }
        Formula::And(gs) | Formula::Or(gs) => gs.iter().find_map(|g| defined_in_iff(g, defined)),
        Formula::Imp(a, b) => {
            defined_in_iff(a, defined).or_else(|| defined_in_iff(b, defined))
        }
        Formula::Iff(a, b) => {
            let mut hit = None;
            for side in [a, b] {
                side.visit_preds(&mut |p| {
                    if hit.is_none() && defined.contains(p) {
                        hit = Some(p.to_string());
                    }
                });
            }
            hit.or_else(|| defined_in_iff(a, defined))
                .or_else(|| defined_in_iff(b, defined))
        }
    }
}

/// Negation normal form of `f` (negated first when `negate`). Equivalences
/// are kept whole; callers reject them when they contain defined symbols.
fn nnf(f: &Formula, negate: bool) -> Formula {
    match f {
        Formula::Atom(_, _) | Formula::Eq(_, _) | Formula::Iff(_, _) => {
            if negate {
                Formula::Not(Box::new(f.clone()))
            } else {
                f.clone()
            }
        }
        Formula::Not(g) => nnf(g, !negate),
        Formula::And(gs) => {
            let parts = gs.iter().map(|g| nnf(g, negate)).collect();
            if negate {
                Formula::Or(parts)
            } else {
                Formula::And(parts)
            }
        }
        Formula::Or(gs) => {
            let parts = gs.iter().map(|g| nnf(g, negate)).collect();
            if negate {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Imp(a, b) => {
            if negate {
                Formula::And(vec![nnf(a, false), nnf(b, true)])
            } else {
                Formula::Or(vec![nnf(a, true), nnf(b, false)])
            }
        }
        Formula::Forall(x, g) => {
            let body = Box::new(nnf(g, negate));
            if negate {
                Formula::Exists(x.clone(), body)
            } else {
                Formula::Forall(x.clone(), body)
            }
        }
        Formula::Exists(x, g) => {
            let body = Box::new(nnf(g, negate));
            if negate {
                Formula::Forall(x.clone(), body)
            } else {
                Formula::Exists(x.clone(), body)
            }
        }
    }
}

/// Replaces each negative occurrence P(t̄) of a defined predicate by
/// ¬P_neg(t̄), collapsing the double negation this creates under an
/// enclosing negation. Positive occurrences stay.
fn bar(f: &Formula, positive: bool, comp: &BTreeMap<String, String>) -> Formula {
    match f {
        Formula::Atom(p, args) => {
            if !positive {
                if let Some(c) = comp.get(p) {
                    return Formula::Not(Box::new(Formula::Atom(c.clone(), args.clone())));
                }
            }
            f.clone()
        }
        Formula::Eq(_, _) | Formula::Iff(_, _) => f.clone(),
        Formula::Not(g) => match bar(g, !positive, comp) {
            Formula::Not(h) => *h,
            inner => Formula::Not(Box::new(inner)),
        },
        Formula::And(gs) => Formula::And(gs.iter().map(|g| bar(g, positive, comp)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| bar(g, positive, comp)).collect()),
        Formula::Imp(a, b) => Formula::imp(bar(a, !positive, comp), bar(b, positive, comp)),
        Formula::Forall(x, g) => Formula::forall(x, bar(g, positive, comp)),
        Formula::Exists(x, g) => Formula::exists(x, bar(g, positive, comp)),
    }
}

/// Compiles one rule set into an alternating fixpoint definition. Rules are
/// merged to one per head first. Fresh complement names avoid `reserved` and
/// each other. The result defines the original predicates in a least
/// fixpoint whose bodies reroute negative defined occurrences through the
/// complements, and the complements in a nested greatest fixpoint whose
/// bodies are the rerouted negation normal forms of the negated originals.
pub fn transform_gid(
    rules: &[Rule],
    reserved: &BTreeSet<String>,
) -> Result<GidTransform, TransformError> {
    let merged = merge_rules(rules.to_vec())?;
    let defined: BTreeSet<String> = merged.iter().map(|r| r.head.clone()).collect();
    let mut taken = reserved.clone();
    for r in &merged {
        if let Some(p) = defined_in_iff(&r.body, &defined) {
            return Err(TransformError::BothPolarities(p));
        }
        taken.insert(r.head.clone());
        r.body.visit_preds(&mut |p| {
            taken.insert(p.to_string());
        });
    }
    let mut comp = BTreeMap::new();
    let mut complements = Vec::new();
    for r in &merged {
        let c = complement_name(&r.head, &taken);
        taken.insert(c.clone());
        comp.insert(r.head.clone(), c.clone());
        complements.push((r.head.clone(), c, r.vars.clone()));
    }
    let originals = merged
        .iter()
        .map(|r| Rule {
            head: r.head.clone(),
            vars: r.vars.clone(),
            body: bar(&r.body, true, &comp),
        })
        .collect();
    let negatives = merged
        .iter()
        .map(|r| Rule {
            head: comp[&r.head].clone(),
            vars: r.vars.clone(),
            body: bar(&nnf(&r.body, true), true, &comp),
        })
        .collect();
    let def = FixpointDef::new(
        DefKind::Lfd,
        originals,
        vec![FixpointDef::new(DefKind::Gfd, negatives, vec![])],
    );
    Ok(GidTransform { def, complements })
}

/// Sentences making each complement the exact relative complement of its
/// predicate: every tuple satisfies one of the pair and never both.
pub fn complement_sentences(complements: &[(String, String, Vec<String>)]) -> Vec<Formula> {
    let mut out = Vec::new();
    for (pred, comp, vars) in complements {
        let args: Vec<Term> = vars.iter().map(|x| Term::Var(x.clone())).collect();
        let p = Formula::Atom(pred.clone(), args.clone());
        let c = Formula::Atom(comp.clone(), args);
        let close = |f: Formula| vars.iter().rev().fold(f, |g, x| Formula::forall(x, g));
        out.push(close(Formula::Or(vec![p.clone(), c.clone()])));
        out.push(close(Formula::not(Formula::And(vec![p, c]))));
    }
    out
}

/// Transforms every rule set of the theory and appends the totality
/// sentences. The vocabulary extends the original with one complement
/// predicate per defined symbol; open symbols are untouched.
pub fn transform_theory(t: &GidTheory) -> Result<TheoryTransform, TransformError> {
    let mut reserved: BTreeSet<String> = t.vocab.preds().map(|(n, _)| n.to_string()).collect();
    reserved.extend(t.vocab.consts().map(str::to_string));
    let mut defs = Vec::new();
    let mut complements = Vec::new();
    for rules in &t.gids {
        let tr = transform_gid(rules, &reserved)?;
        for (_, c, _) in &tr.complements {
            reserved.insert(c.clone());
        }
        defs.push(tr.def);
        complements.extend(tr.complements);
    }
    let mut sentences = t.sentences.clone();
    sentences.extend(complement_sentences(&complements));
    let mut theory = Theory::new(sentences, defs)?;
    for (name, arity) in t.vocab.preds() {
        theory.vocab.declare_pred(name, arity)?;
    }
    for c in t.vocab.consts() {
        theory.vocab.declare_const(c);
    }
    Ok(TheoryTransform {
        theory,
        complements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrespondenceError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("two models of the transformed theory agree on the original vocabulary")]
    RestrictionCollision,
    #[error("'{comp}' is not the complement of '{pred}' in some model")]
    NotComplement { pred: String, comp: String },
}

/// The transformed theory's models restricted to the original vocabulary.
/// Restrictions are pairwise distinct and each complement is verified to be
/// the exact relative complement of its predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceReport {
    pub models: Vec<Structure>,
}

/// Enumerates the models of the transformed theory over `frame` and checks
/// the correspondence they are meant to witness: distinct restrictions to
/// the original vocabulary and exact complements. The enumeration cap
/// `max_atoms` bounds the undetermined ground atoms.
pub fn check_correspondence(
    original: &GidTheory,
    transform: &TheoryTransform,
    frame: &Structure,
    max_atoms: usize,
) -> Result<CorrespondenceReport, CorrespondenceError> {
    let models = enumerate_models(&transform.theory, frame, max_atoms)?;
    let n = frame.domain.len();
    for m in &models {
        for (pred, comp, vars) in &transform.complements {
            let full: BTreeSet<Vec<u32>> = tuples(n, vars.len()).collect();
            let p = m.rel(pred).cloned().unwrap_or_default();
            let c = m.rel(comp).cloned().unwrap_or_default();
            let expected: BTreeSet<Vec<u32>> = full.difference(&p).cloned().collect();
            if c != expected {
                return Err(CorrespondenceError::NotComplement {
                    pred: pred.clone(),
                    comp: comp.clone(),
                });
            }
        }
    }
    let sigma: BTreeSet<String> = original.vocab.preds().map(|(n, _)| n.to_string()).collect();
    let restricted: Vec<Structure> = models.iter().map(|m| m.restrict(&sigma)).collect();
    for i in 0..restricted.len() {
        for j in i + 1..restricted.len() {
            if restricted[i] == restricted[j] {
                return Err(CorrespondenceError::RestrictionCollision);
            }
        }
    }
    Ok(CorrespondenceReport { models: restricted })
}
