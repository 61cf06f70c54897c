//! Direct evaluation of theories over finite structures: formula truth,
//! the one-step operator of a definition, iterated fixpoints, model
//! checking, and exhaustive model expansion for small instances.
//!
//! The one-step operator works on interpretations of the defined symbols.
//! Given a context for the open symbols and a current value J, it first
//! solves every subdefinition to a fresh fixpoint under the context extended
//! with J's values for the locally defined symbols, then re-evaluates the
//! local rule bodies reading subdefinition symbols from those fresh values
//! and locally defined symbols from the stale J. Positivity of defined
//! symbols makes the operator monotone, so iteration from the empty (least)
//! or full (greatest) interpretation reaches the fixpoint in at most one
//! step per ground atom.

use crate::logic::{tuples, DefKind, FixpointDef, Formula, Structure, StructureError, Term, Theory};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("predicate {0} has no interpretation")]
    Uninterpreted(String),
    #[error("constant {0} has no interpretation")]
    UnknownConstant(String),
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("definitions depend on each other's defined symbols")]
    CyclicDefinitions,
    #[error("{0} undetermined ground atoms exceed the enumeration limit of {1}")]
    TooManyAtoms(usize, usize),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Evaluates a formula under a variable environment. The environment is a
/// stack; later bindings shadow earlier ones.
pub fn eval(
    f: &Formula,
    s: &Structure,
    env: &mut Vec<(String, u32)>,
) -> Result<bool, EvalError> {
    let term = |t: &Term, env: &Vec<(String, u32)>| -> Result<u32, EvalError> {
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|&(_, e)| e)
                .ok_or_else(|| EvalError::UnboundVariable(x.clone())),
            Term::Const(c) => s
                .constant_element(c)
                .ok_or_else(|| EvalError::UnknownConstant(c.clone())),
        }
    };
    match f {
        Formula::Atom(p, args) => {
            let mut tuple = Vec::with_capacity(args.len());
            for a in args {
                tuple.push(term(a, env)?);
            }
            s.holds(p, &tuple)
                .ok_or_else(|| EvalError::Uninterpreted(p.clone()))
        }
        Formula::Eq(a, b) => Ok(term(a, env)? == term(b, env)?),
        Formula::Not(g) => Ok(!eval(g, s, env)?),
        Formula::And(gs) => {
            for g in gs {
                if !eval(g, s, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval(g, s, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Imp(a, b) => Ok(!eval(a, s, env)? || eval(b, s, env)?),
        Formula::Iff(a, b) => Ok(eval(a, s, env)? == eval(b, s, env)?),
        Formula::Forall(x, g) => {
            for e in 0..s.domain.len() as u32 {
                env.push((x.clone(), e));
                let v = eval(g, s, env);
                env.pop();
                if !v? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(x, g) => {
            for e in 0..s.domain.len() as u32 {
                env.push((x.clone(), e));
                let v = eval(g, s, env);
                env.pop();
                if v? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

pub fn eval_closed(f: &Formula, s: &Structure) -> Result<bool, EvalError> {
    eval(f, s, &mut Vec::new())
}

fn def_arities(def: &FixpointDef) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    def.walk_rules(&mut |r| {
        out.insert(r.head.clone(), r.vars.len());
    });
    out
}

fn extreme(def: &FixpointDef, domain: &[String], full: bool) -> Structure {
    let mut s = Structure::new(domain.to_vec());
    let n = domain.len();
    for (p, arity) in def_arities(def) {
        let rel = if full {
            tuples(n, arity).collect()
        } else {
            BTreeSet::new()
        };
        s.set_rel(&p, rel);
    }
    s
}

/// One step of a definition's operator. `context` supplies the open symbols
/// (interpretations of defined symbols are ignored), `j` the current value
/// of the defined symbols. The result interprets exactly the defined
/// symbols.
pub fn apply_operator(
    def: &FixpointDef,
    context: &Structure,
    j: &Structure,
) -> Result<Structure, EvalError> {
    let context = context.without(&def.defined_predicates());
    let local = def.local_defined();
    let j_local = j.restrict(&local);
    let jprime = context.join(&j_local)?;

    let mut fresh = Structure::new(context.domain.clone());
    for sub in &def.subdefs {
        let fix = fixpoint(sub, &jprime)?;
        for (p, r) in fix.rels() {
            fresh.set_rel(p, r.clone());
        }
    }

    let eval_s = jprime.join(&fresh)?;
    let mut out = fresh;
    let n = context.domain.len();
    for rule in &def.rules {
        let mut rel = BTreeSet::new();
        for tuple in tuples(n, rule.vars.len()) {
            let mut env: Vec<(String, u32)> =
                rule.vars.iter().cloned().zip(tuple.iter().copied()).collect();
            if eval(&rule.body, &eval_s, &mut env)? {
                rel.insert(tuple);
            }
        }
        out.set_rel(&rule.head, rel);
    }
    Ok(out)
}

/// Iterates the operator from the least (LFD) or greatest (GFD) value of
/// the defined symbols to the fixpoint. Returns every iterate, the starting
/// value first and the fixpoint last.
pub fn fixpoint_iterates(
    def: &FixpointDef,
    context: &Structure,
) -> Result<Vec<Structure>, EvalError> {
    let context = context.without(&def.defined_predicates());
    let start = extreme(def, &context.domain, def.kind == DefKind::Gfd);
    let mut iterates = vec![start];
    loop {
        let next = apply_operator(def, &context, iterates.last().unwrap())?;
        if &next == iterates.last().unwrap() {
            return Ok(iterates);
        }
        iterates.push(next);
    }
}

/// The definition's fixpoint under the given context: the least fixpoint for
/// LFD, the greatest for GFD, over interpretations of the defined symbols.
pub fn fixpoint(def: &FixpointDef, context: &Structure) -> Result<Structure, EvalError> {
    Ok(fixpoint_iterates(def, context)?.pop().unwrap())
}

/// Whether a total structure satisfies every sentence and equips every
/// definition's defined symbols with the fixpoint the open part determines.
pub fn check_model(theory: &Theory, s: &Structure) -> Result<bool, EvalError> {
    for f in &theory.sentences {
        if !eval_closed(f, s)? {
            return Ok(false);
        }
    }
    for d in &theory.defs {
        for p in d.defined_predicates() {
            if !s.interprets(&p) {
                return Err(EvalError::Uninterpreted(p));
            }
        }
        let expected = fixpoint(d, s)?;
        for (p, rel) in expected.rels() {
            if s.rel(p) != Some(rel) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Extends an interpretation of the open symbols with every definition's
/// fixpoint. Definitions reading another definition's symbols are solved
/// once those are available; mutual dependence is an error.
pub fn expand_definitions(theory: &Theory, open: &Structure) -> Result<Structure, EvalError> {
    let mut s = open.clone();
    let mut pending: Vec<&FixpointDef> = theory.defs.iter().collect();
    while !pending.is_empty() {
        let mut next = Vec::new();
        let mut progressed = false;
        for d in pending {
            if d.open_preds().iter().all(|p| s.interprets(p)) {
                let fix = fixpoint(d, &s)?;
                for (p, r) in fix.rels() {
                    s.set_rel(p, r.clone());
                }
                progressed = true;
            } else {
                next.push(d);
            }
        }
        if !progressed {
            return Err(EvalError::CyclicDefinitions);
        }
        pending = next;
    }
    Ok(s)
}

/// All models of the theory extending `frame`, found by exhaustive search
/// over the undetermined ground atoms of the vocabulary. The search space is
/// capped at `max_atoms` undetermined atoms. Models come in a fixed order:
/// atoms are enumerated predicate-major, tuple-lexicographic, and candidate
/// interpretations by binary counting with the last atom flipping fastest.
pub fn enumerate_models(
    theory: &Theory,
    frame: &Structure,
    max_atoms: usize,
) -> Result<Vec<Structure>, EvalError> {
    for c in theory.vocab.consts() {
        if frame.constant_element(c).is_none() {
            return Err(EvalError::UnknownConstant(c.to_string()));
        }
    }
    let n = frame.domain.len();
    let mut free: Vec<(String, Vec<u32>)> = Vec::new();
    for (p, arity) in theory.vocab.preds() {
        if !frame.interprets(p) {
            for t in tuples(n, arity) {
                free.push((p.to_string(), t));
            }
        }
    }
    if free.len() > max_atoms {
        return Err(EvalError::TooManyAtoms(free.len(), max_atoms));
    }
    let mut models = Vec::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut cand = frame.clone();
        for (p, _) in theory.vocab.preds() {
            if !frame.interprets(p) {
                cand.set_rel(p, BTreeSet::new());
            }
        }
        for (i, (p, t)) in free.iter().enumerate() {
            if mask >> (free.len() - 1 - i) & 1 == 1 {
                let mut rel = cand.rel(p).cloned().unwrap_or_default();
                rel.insert(t.clone());
                cand.set_rel(p, rel);
            }
        }
        if check_model(theory, &cand)? {
            models.push(cand);
        }
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_structure, parse_theory};

    fn prop_structure(pairs: &[(&str, bool)]) -> Structure {
        let mut s = Structure::new(vec![]);
        for &(p, v) in pairs {
            let rel = if v {
                [vec![]].into_iter().collect()
            } else {
                BTreeSet::new()
            };
            s.set_rel(p, rel);
        }
        s
    }

    fn rels_of(s: &Structure) -> Vec<(String, bool)> {
        s.rels()
            .map(|(p, r)| (p.to_string(), !r.is_empty()))
            .collect()
    }

    #[test]
    fn formula_evaluation_over_a_graph() {
        let s = parse_structure(
            "domain = { a, b, c }.
Edge = { (a, b), (b, c), (c, a) }.
Lab = { b }.
start = a.
",
        )
        .unwrap();
        let t = |src: &str| eval_closed(&parse_formula(src).unwrap(), &s).unwrap();
        assert!(t("Edge(a, b)"));
        assert!(!t("Edge(b, a)"));
        assert!(t("!x: ?y: Edge(x, y)"));
        assert!(!t("?x: Edge(x, x)"));
        assert!(t("?x: Lab(x) & ?y: Edge(x, y) & ~Lab(y)"));
        assert!(t("start = a"));
        assert!(t("b != start"));
        assert!(t("Edge(start, b) => Lab(b)"));
        assert!(t("Lab(b) <=> ~Lab(a)"));
        assert!(t("!x: !y: !z: Edge(x, y) & Edge(y, z) => ~Edge(z, y)"));

        assert_eq!(
            eval_closed(&parse_formula("Missing(a)").unwrap(), &s),
            Err(EvalError::Uninterpreted("Missing".into()))
        );
        assert_eq!(
            eval_closed(&parse_formula("Edge(a, nope)").unwrap(), &s),
            Err(EvalError::UnknownConstant("nope".into()))
        );
    }

    #[test]
    fn quantifiers_over_the_empty_domain() {
        let mut s = Structure::new(vec![]);
        s.set_rel("P", BTreeSet::new());
        assert!(eval_closed(&parse_formula("!x: P(x)").unwrap(), &s).unwrap());
        assert!(!eval_closed(&parse_formula("?x: P(x)").unwrap(), &s).unwrap());
    }

    /// The nested example: LFD { p <- q | r. q <- p. GFD { r <- p.
    /// s <- t | a. t <- s. } } under a = false.
    #[test]
    fn nested_fixpoint_iterates_match_the_worked_trace() {
        let (t, _) = parse_theory(
            "LFD {
  p <- q | r.
  q <- p.
  GFD {
    r <- p.
    s <- t | a.
    t <- s.
  }
}
",
        )
        .unwrap();
        let d = &t.defs[0];
        let ctx = prop_structure(&[("a", false)]);

        // Outer least fixpoint: empty start, one productive step.
        let outer = fixpoint_iterates(d, &ctx).unwrap();
        assert_eq!(outer.len(), 2);
        assert_eq!(
            rels_of(&outer[0]),
            [("p", false), ("q", false), ("r", false), ("s", false), ("t", false)]
                .map(|(p, v)| (p.to_string(), v))
        );
        let limit = [("p", false), ("q", false), ("r", false), ("s", true), ("t", true)]
            .map(|(p, v)| (p.to_string(), v));
        assert_eq!(rels_of(&outer[1]), limit);

        // Inner greatest fixpoint under the context the first outer step
        // builds: starts from everything true, settles in one step.
        let inner_ctx = prop_structure(&[("a", false), ("p", false), ("q", false)]);
        let inner = fixpoint_iterates(&d.subdefs[0], &inner_ctx).unwrap();
        assert_eq!(inner.len(), 2);
        assert_eq!(
            rels_of(&inner[0]),
            [("r", true), ("s", true), ("t", true)].map(|(p, v)| (p.to_string(), v))
        );
        assert_eq!(
            rels_of(&inner[1]),
            [("r", false), ("s", true), ("t", true)].map(|(p, v)| (p.to_string(), v))
        );

        // The full model under a = false, and a non-model differing on s.
        let model = prop_structure(&[
            ("a", false),
            ("p", false),
            ("q", false),
            ("r", false),
            ("s", true),
            ("t", true),
        ]);
        assert!(check_model(&t, &model).unwrap());
        let mut wrong = model.clone();
        wrong.set_rel("s", BTreeSet::new());
        wrong.set_rel("t", BTreeSet::new());
        assert!(!check_model(&t, &wrong).unwrap());
    }

    #[test]
    fn local_rules_read_stale_local_values() {
        // q depends on p through the stale iterate, so the least fixpoint
        // needs two productive steps: p first, then q.
        let (t, _) = parse_theory("LFD {\n  p <- a.\n  q <- p.\n}\n").unwrap();
        let ctx = prop_structure(&[("a", true)]);
        let iters = fixpoint_iterates(&t.defs[0], &ctx).unwrap();
        assert_eq!(iters.len(), 3);
        assert_eq!(
            rels_of(&iters[1]),
            [("p", true), ("q", false)].map(|(p, v)| (p.to_string(), v))
        );
        assert_eq!(
            rels_of(&iters[2]),
            [("p", true), ("q", true)].map(|(p, v)| (p.to_string(), v))
        );
    }

    #[test]
    fn least_and_greatest_disagree_on_a_plain_loop() {
        let lfd = parse_theory("LFD {\n  p <- q.\n  q <- p.\n}\n").unwrap().0;
        let gfd = parse_theory("GFD {\n  p <- q.\n  q <- p.\n}\n").unwrap().0;
        let ctx = Structure::new(vec![]);
        let least = fixpoint(&lfd.defs[0], &ctx).unwrap();
        let greatest = fixpoint(&gfd.defs[0], &ctx).unwrap();
        assert_eq!(
            rels_of(&least),
            [("p", false), ("q", false)].map(|(p, v)| (p.to_string(), v))
        );
        assert_eq!(
            rels_of(&greatest),
            [("p", true), ("q", true)].map(|(p, v)| (p.to_string(), v))
        );

        assert_eq!(enumerate_models(&lfd, &ctx, 8).unwrap().len(), 1);
        assert_eq!(enumerate_models(&gfd, &ctx, 8).unwrap().len(), 1);
        assert_eq!(
            enumerate_models(&lfd, &ctx, 1),
            Err(EvalError::TooManyAtoms(2, 1))
        );
    }

    #[test]
    fn reachability_as_a_least_fixpoint() {
        let (t, _) = parse_theory(
            "LFD {
  Reach(x) <- x = root | ?y: Reach(y) & Edge(y, x).
}
",
        )
        .unwrap();
        let s = parse_structure(
            "domain = { root, m, far }.
Edge = { (root, m), (far, m) }.
",
        )
        .unwrap();
        let out = expand_definitions(&t, &s).unwrap();
        let reach = out.rel("Reach").unwrap();
        assert_eq!(*reach, [vec![0], vec![1]].into_iter().collect());
        assert!(check_model(&t, &out).unwrap());
    }

    #[test]
    fn definitions_chain_and_cycles_are_rejected() {
        let (chain, _) = parse_theory("LFD {\n  q <- p.\n}\nLFD {\n  p <- a.\n}\n").unwrap();
        let ctx = prop_structure(&[("a", true)]);
        let out = expand_definitions(&chain, &ctx).unwrap();
        assert!(out.holds("q", &[]).unwrap());

        let (cyc, _) = parse_theory("LFD {\n  q <- p.\n}\nLFD {\n  p <- q.\n}\n").unwrap();
        assert_eq!(
            expand_definitions(&cyc, &Structure::new(vec![])),
            Err(EvalError::CyclicDefinitions)
        );
    }

    #[test]
    fn sentences_prune_expansion_candidates() {
        let (t, _) = parse_theory("p | a.\nLFD {\n  p <- b.\n}\n").unwrap();
        let frame = Structure::new(vec![]);
        let models = enumerate_models(&t, &frame, 8).unwrap();
        // Free atoms a, b; p follows b, and the sentence demands p or a.
        let shapes: Vec<Vec<(String, bool)>> = models.iter().map(rels_of).collect();
        let expect = |a: bool, b: bool, p: bool| {
            vec![
                ("a".to_string(), a),
                ("b".to_string(), b),
                ("p".to_string(), p),
            ]
        };
        assert_eq!(
            shapes,
            vec![expect(false, true, true), expect(true, false, false), expect(true, true, true)]
        );
    }

    #[test]
    fn fairness_on_a_small_labeled_graph() {
        let (t, _) = parse_theory(crate::bench::FAIRNESS).unwrap();
        // Ring s0 -> s1 -> s0 with s0 labeled by a; the label element has a
        // self loop and no label, so it is not fair.
        let s = parse_structure(
            "domain = { s0, s1, a }.
Edge = { (s0, s1), (s1, s0), (a, a) }.
L = { (s0, a) }.
",
        )
        .unwrap();
        let out = expand_definitions(&t, &s).unwrap();
        assert_eq!(*out.rel("P").unwrap(), [vec![0], vec![1]].into_iter().collect());
        assert!(check_model(&t, &out).unwrap());

        // Without labels nothing is fair.
        let bare = parse_structure(
            "domain = { s0, s1, a }.
Edge = { (s0, s1), (s1, s0), (a, a) }.
L = {}.
",
        )
        .unwrap();
        let out = expand_definitions(&t, &bare).unwrap();
        assert!(out.rel("P").unwrap().is_empty());
    }
}
