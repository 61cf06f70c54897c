//! Core syntax: vocabularies, formulas, rules, nested fixpoint definitions,
//! and finite structures.
//!
//! A fixpoint definition is a set of rules `P(x̄) <- φ` together with nested
//! least/greatest subdefinitions. Well-formedness (see [`validate`]) requires
//! that defined symbols occur only positively below their defining node, that
//! local rules and subdefinitions partition the defined symbols, and that a
//! subdefinition only opens on symbols visible at its parent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Predicate and constant declarations. Names are unique per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    preds: BTreeMap<String, usize>,
    consts: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a predicate; re-declaring with a different arity is an error.
    pub fn declare_pred(&mut self, name: &str, arity: usize) -> Result<(), VocabError> {
        match self.preds.get(name) {
            Some(&a) if a != arity => Err(VocabError::ArityClash {
                name: name.to_string(),
                old: a,
                new: arity,
            }),
            _ => {
                self.preds.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn declare_const(&mut self, name: &str) {
        self.consts.insert(name.to_string());
    }

    pub fn pred_arity(&self, name: &str) -> Option<usize> {
        self.preds.get(name).copied()
    }

    pub fn preds(&self) -> impl Iterator<Item = (&str, usize)> {
        self.preds.iter().map(|(n, &a)| (n.as_str(), a))
    }

    pub fn consts(&self) -> impl Iterator<Item = &str> {
        self.consts.iter().map(|s| s.as_str())
    }

    pub fn has_const(&self, name: &str) -> bool {
        self.consts.contains(name)
    }

    /// Collects every symbol occurring in the given sentences and definitions.
    pub fn infer(sentences: &[Formula], defs: &[FixpointDef]) -> Result<Self, VocabError> {
        let mut v = Vocabulary::new();
        for s in sentences {
            v.absorb_formula(s, &mut Vec::new())?;
        }
        for d in defs {
            v.absorb_def(d)?;
        }
        Ok(v)
    }

    fn absorb_def(&mut self, d: &FixpointDef) -> Result<(), VocabError> {
        for r in &d.rules {
            self.declare_pred(&r.head, r.vars.len())?;
            let mut bound: Vec<String> = r.vars.clone();
            self.absorb_formula(&r.body, &mut bound)?;
        }
        for s in &d.subdefs {
            self.absorb_def(s)?;
        }
        Ok(())
    }

    fn absorb_formula(&mut self, f: &Formula, bound: &mut Vec<String>) -> Result<(), VocabError> {
        match f {
            Formula::Atom(p, args) => {
                self.declare_pred(p, args.len())?;
                for t in args {
                    self.absorb_term(t, bound);
                }
                Ok(())
            }
            Formula::Eq(a, b) => {
                self.absorb_term(a, bound);
                self.absorb_term(b, bound);
                Ok(())
            }
            Formula::Not(g) => self.absorb_formula(g, bound),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    self.absorb_formula(g, bound)?;
                }
                Ok(())
            }
            Formula::Imp(a, b) | Formula::Iff(a, b) => {
                self.absorb_formula(a, bound)?;
                self.absorb_formula(b, bound)
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                bound.push(x.clone());
                let r = self.absorb_formula(g, bound);
                bound.pop();
                r
            }
        }
    }

    fn absorb_term(&mut self, t: &Term, bound: &[String]) {
        if let Term::Const(c) = t {
            self.consts.insert(c.clone());
        } else if let Term::Var(x) = t {
            debug_assert!(bound.contains(x), "unbound variable {x} escaped the parser");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("predicate {name} used with arity {new} but declared with arity {old}")]
    ArityClash { name: String, old: usize, new: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    /// Empty conjunction is truth.
    And(Vec<Formula>),
    /// Empty disjunction is falsity.
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn tru() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn fls() -> Formula {
        Formula::Or(Vec::new())
    }

    pub fn atom(p: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(p.to_string(), args)
    }

    pub fn prop(p: &str) -> Formula {
        Formula::Atom(p.to_string(), Vec::new())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    /// Conjunction without singleton wrappers.
    pub fn and_of(mut gs: Vec<Formula>) -> Formula {
        if gs.len() == 1 {
            gs.pop().unwrap()
        } else {
            Formula::And(gs)
        }
    }

    /// Disjunction without singleton wrappers.
    pub fn or_of(mut gs: Vec<Formula>) -> Formula {
        if gs.len() == 1 {
            gs.pop().unwrap()
        } else {
            Formula::Or(gs)
        }
    }

    /// Visits every predicate occurrence with its syntactic polarity.
    /// Both sides of an equivalence count as occurring with both polarities.
    pub fn visit_polarity(&self, pos: bool, visit: &mut impl FnMut(&str, bool)) {
        match self {
            Formula::Atom(p, _) => visit(p, pos),
            Formula::Eq(_, _) => {}
            Formula::Not(g) => g.visit_polarity(!pos, visit),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    g.visit_polarity(pos, visit);
                }
            }
            Formula::Imp(a, b) => {
                a.visit_polarity(!pos, visit);
                b.visit_polarity(pos, visit);
            }
            Formula::Iff(a, b) => {
                a.visit_polarity(pos, visit);
                a.visit_polarity(!pos, visit);
                b.visit_polarity(pos, visit);
                b.visit_polarity(!pos, visit);
            }
            Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_polarity(pos, visit),
        }
    }

    /// Visits every predicate symbol occurring in the formula.
    pub fn visit_preds(&self, visit: &mut impl FnMut(&str)) {
        self.visit_polarity(true, &mut |p, _| visit(p));
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let term = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            if let Term::Var(x) = t {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
        };
        match self {
            Formula::Atom(_, args) => {
                for t in args {
                    term(t, bound, out);
                }
            }
            Formula::Eq(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    g.collect_free(bound, out);
                }
            }
            Formula::Imp(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                bound.push(x.clone());
                g.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Capture-avoiding substitution of variables by terms. Binders whose
    /// variable would capture a substituted term are renamed with primes.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Formula {
        let sub_term = |t: &Term| -> Term {
            match t {
                Term::Var(x) => map.get(x).cloned().unwrap_or_else(|| t.clone()),
                Term::Const(_) => t.clone(),
            }
        };
        match self {
            Formula::Atom(p, args) => Formula::Atom(p.clone(), args.iter().map(sub_term).collect()),
            Formula::Eq(a, b) => Formula::Eq(sub_term(a), sub_term(b)),
            Formula::Not(g) => Formula::not(g.substitute(map)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Imp(a, b) => Formula::imp(a.substitute(map), b.substitute(map)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(map), b.substitute(map)),
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let mut inner = map.clone();
                inner.remove(x);
                let captures = inner
                    .iter()
                    .any(|(_, t)| matches!(t, Term::Var(v) if v == x));
                let (x2, g2) = if captures {
                    let mut fresh = format!("{x}'");
                    let used = g.free_vars();
                    while used.contains(&fresh) || inner.contains_key(&fresh) {
                        fresh.push('\'');
                    }
                    let mut rename = BTreeMap::new();
                    rename.insert(x.clone(), Term::Var(fresh.clone()));
                    (fresh, g.substitute(&rename))
                } else {
                    (x.clone(), (**g).clone())
                };
                let body = Box::new(g2.substitute(&inner));
                match self {
                    Formula::Forall(_, _) => Formula::Forall(x2, body),
                    _ => Formula::Exists(x2, body),
                }
            }
        }
    }
}

/// A rule `head(vars) <- body`. Head variables are distinct and cover the
/// body's free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: String,
    pub vars: Vec<String>,
    pub body: Formula,
}

impl Rule {
    pub fn new(head: &str, vars: &[&str], body: Formula) -> Rule {
        Rule {
            head: head.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            body,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefKind {
    Lfd,
    Gfd,
}

impl fmt::Display for DefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefKind::Lfd => "LFD",
            DefKind::Gfd => "GFD",
        })
    }
}

/// A least or greatest fixpoint definition with local rules and nested
/// subdefinitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixpointDef {
    pub kind: DefKind,
    pub rules: Vec<Rule>,
    pub subdefs: Vec<FixpointDef>,
}

impl FixpointDef {
    pub fn new(kind: DefKind, rules: Vec<Rule>, subdefs: Vec<FixpointDef>) -> FixpointDef {
        FixpointDef {
            kind,
            rules,
            subdefs,
        }
    }

    /// Predicates defined by local rules only.
    pub fn local_defined(&self) -> BTreeSet<String> {
        self.rules.iter().map(|r| r.head.clone()).collect()
    }

    /// All predicates defined anywhere in this definition's tree.
    pub fn defined_predicates(&self) -> BTreeSet<String> {
        let mut out = self.local_defined();
        for s in &self.subdefs {
            out.extend(s.defined_predicates());
        }
        out
    }

    /// Predicate symbols occurring anywhere in this definition's tree,
    /// heads included.
    pub fn occurring_preds(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_rules(&mut |r| {
            out.insert(r.head.clone());
            r.body.visit_preds(&mut |p| {
                out.insert(p.to_string());
            });
        });
        out
    }

    /// Predicate symbols occurring in the tree but not defined by it.
    pub fn open_preds(&self) -> BTreeSet<String> {
        let defined = self.defined_predicates();
        self.occurring_preds()
            .into_iter()
            .filter(|p| !defined.contains(p))
            .collect()
    }

    /// Constants occurring anywhere in rule bodies of the tree.
    pub fn open_consts(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_rules(&mut |r| collect_consts(&r.body, &mut out));
        out
    }

    pub fn walk_rules(&self, f: &mut impl FnMut(&Rule)) {
        for r in &self.rules {
            f(r);
        }
        for s in &self.subdefs {
            s.walk_rules(f);
        }
    }
}

fn collect_consts(f: &Formula, out: &mut BTreeSet<String>) {
    let term = |t: &Term, out: &mut BTreeSet<String>| {
        if let Term::Const(c) = t {
            out.insert(c.clone());
        }
    };
    match f {
        Formula::Atom(_, args) => {
            for t in args {
                term(t, out);
            }
        }
        Formula::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::Not(g) => collect_consts(g, out),
        Formula::And(gs) | Formula::Or(gs) => {
            for g in gs {
                collect_consts(g, out);
            }
        }
        Formula::Imp(a, b) | Formula::Iff(a, b) => {
            collect_consts(a, out);
            collect_consts(b, out);
        }
        Formula::Forall(_, g) | Formula::Exists(_, g) => collect_consts(g, out),
    }
}

/// A theory: sentences plus fixpoint definitions over a shared vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub vocab: Vocabulary,
    pub sentences: Vec<Formula>,
    pub defs: Vec<FixpointDef>,
}

impl Theory {
    pub fn new(sentences: Vec<Formula>, defs: Vec<FixpointDef>) -> Result<Theory, VocabError> {
        let vocab = Vocabulary::infer(&sentences, &defs)?;
        Ok(Theory {
            vocab,
            sentences,
            defs,
        })
    }

    /// Predicates defined by some definition of the theory.
    pub fn defined_predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for d in &self.defs {
            out.extend(d.defined_predicates());
        }
        out
    }

    /// Predicates of the vocabulary left open by every definition.
    pub fn open_predicates(&self) -> BTreeSet<String> {
        let defined = self.defined_predicates();
        self.vocab
            .preds()
            .map(|(n, _)| n.to_string())
            .filter(|p| !defined.contains(p))
            .collect()
    }
}

/// A theory whose definitions are flat rule sets read under well-founded
/// semantics. Rules may use defined symbols negatively; rules for one head
/// need not be merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GidTheory {
    pub vocab: Vocabulary,
    pub sentences: Vec<Formula>,
    pub gids: Vec<Vec<Rule>>,
}

impl GidTheory {
    pub fn new(sentences: Vec<Formula>, gids: Vec<Vec<Rule>>) -> Result<GidTheory, VocabError> {
        let shells: Vec<FixpointDef> = gids
            .iter()
            .map(|rs| FixpointDef::new(DefKind::Lfd, rs.clone(), vec![]))
            .collect();
        let vocab = Vocabulary::infer(&sentences, &shells)?;
        Ok(GidTheory {
            vocab,
            sentences,
            gids,
        })
    }

    pub fn defined_predicates(&self) -> BTreeSet<String> {
        self.gids
            .iter()
            .flat_map(|rs| rs.iter().map(|r| r.head.clone()))
            .collect()
    }
}

/// Well-formedness violations for a fixpoint definition. `path` indexes the
/// chain of subdefinitions from the definition root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two local rules share a head; normal form wants them merged first.
    DuplicateLocalRule { path: Vec<usize>, pred: String },
    /// A predicate is defined both locally and in a subdefinition, or in two
    /// subdefinitions.
    OverlappingDefinitions { path: Vec<usize>, pred: String },
    /// A defined predicate occurs under an odd number of negations in a rule
    /// body below its defining node.
    NegativeDefinedOccurrence {
        path: Vec<usize>,
        pred: String,
        rule_head: String,
    },
    /// A subdefinition mentions a symbol defined by one of its siblings.
    SiblingDefinedSymbol {
        path: Vec<usize>,
        subdef: usize,
        pred: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = |p: &[usize]| {
            if p.is_empty() {
                "the root definition".to_string()
            } else {
                format!(
                    "subdefinition {}",
                    p.iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(".")
                )
            }
        };
        match self {
            Violation::DuplicateLocalRule { path: p, pred } => write!(
                f,
                "{} has more than one local rule for {pred} (merge rule bodies first)",
                path(p)
            ),
            Violation::OverlappingDefinitions { path: p, pred } => write!(
                f,
                "{pred} is defined more than once under {} (local rules and subdefinitions must partition the defined symbols)",
                path(p)
            ),
            Violation::NegativeDefinedOccurrence { path: p, pred, rule_head } => write!(
                f,
                "{pred} is defined in {} but occurs negatively in the rule for {rule_head}",
                path(p)
            ),
            Violation::SiblingDefinedSymbol { path: p, subdef, pred } => write!(
                f,
                "subdefinition {subdef} of {} mentions {pred}, which is defined by a sibling subdefinition",
                path(p)
            ),
        }
    }
}

/// Checks the well-formedness conditions of a fixpoint definition: one local
/// rule per defined symbol, defined symbols partitioned over local rules and
/// subdefinitions, positive occurrence of defined symbols below their
/// defining node, and no symbol shared between sibling subdefinitions.
pub fn validate(def: &FixpointDef) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    validate_node(def, &mut path, &mut out);
    out
}

fn validate_node(def: &FixpointDef, path: &mut Vec<usize>, out: &mut Vec<Violation>) {
    // Normal form: one local rule per head.
    let mut seen = BTreeSet::new();
    for r in &def.rules {
        if !seen.insert(r.head.clone()) {
            out.push(Violation::DuplicateLocalRule {
                path: path.clone(),
                pred: r.head.clone(),
            });
        }
    }

    // Partition of defined symbols over local rules and subdefinitions.
    let mut parts: Vec<BTreeSet<String>> = vec![def.local_defined()];
    parts.extend(def.subdefs.iter().map(|s| s.defined_predicates()));
    let mut assigned = BTreeSet::new();
    for part in &parts {
        for p in part {
            if !assigned.insert(p.clone()) {
                out.push(Violation::OverlappingDefinitions {
                    path: path.clone(),
                    pred: p.clone(),
                });
            }
        }
    }

    // Defined symbols of this node occur only positively in rules of its tree.
    let defined = def.defined_predicates();
    def.walk_rules(&mut |r| {
        r.body.visit_polarity(true, &mut |p, pos| {
            if !pos && defined.contains(p) {
                let v = Violation::NegativeDefinedOccurrence {
                    path: path.clone(),
                    pred: p.to_string(),
                    rule_head: r.head.clone(),
                };
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        });
    });

    // Sibling subdefinitions must not see each other's defined symbols.
    for (i, sub) in def.subdefs.iter().enumerate() {
        let opens = sub.open_preds();
        for (j, other) in def.subdefs.iter().enumerate() {
            if i == j {
                continue;
            }
            let other_def = other.defined_predicates();
            for p in opens.iter().filter(|p| other_def.contains(*p)) {
                out.push(Violation::SiblingDefinedSymbol {
                    path: path.clone(),
                    subdef: i,
                    pred: p.clone(),
                });
            }
        }
    }

    for (i, sub) in def.subdefs.iter().enumerate() {
        path.push(i);
        validate_node(sub, path, out);
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MergeError {
    #[error("rules for {name} disagree on arity ({a} vs {b})")]
    ArityMismatch { name: String, a: usize, b: usize },
}

/// Merges rules sharing a head predicate into one rule whose body is the
/// disjunction of the bodies, rewritten to the first rule's head variables.
/// Rule order is preserved by first occurrence of each head.
pub fn merge_rules(rules: Vec<Rule>) -> Result<Vec<Rule>, MergeError> {
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Rule> = BTreeMap::new();
    for r in rules {
        match grouped.get_mut(&r.head) {
            None => {
                order.push(r.head.clone());
                grouped.insert(r.head.clone(), r);
            }
            Some(first) => {
                if first.vars.len() != r.vars.len() {
                    return Err(MergeError::ArityMismatch {
                        name: r.head,
                        a: first.vars.len(),
                        b: r.vars.len(),
                    });
                }
                let mut map = BTreeMap::new();
                for (from, to) in r.vars.iter().zip(first.vars.iter()) {
                    if from != to {
                        map.insert(from.clone(), Term::Var(to.clone()));
                    }
                }
                let renamed = r.body.substitute(&map);
                let body = std::mem::replace(&mut first.body, Formula::tru());
                first.body = match body {
                    Formula::Or(mut gs) if !gs.is_empty() => {
                        gs.push(renamed);
                        Formula::Or(gs)
                    }
                    other => Formula::Or(vec![other, renamed]),
                };
            }
        }
    }
    Ok(order.into_iter().map(|h| grouped.remove(&h).unwrap()).collect())
}

/// A finite structure: named domain elements, relations as tuple sets of
/// element indices, and constant interpretations. Relations may interpret
/// only part of a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Structure {
    pub domain: Vec<String>,
    rels: BTreeMap<String, BTreeSet<Vec<u32>>>,
    consts: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("unknown domain element {0}")]
    UnknownElement(String),
    #[error("symbol {0} interpreted twice")]
    DuplicateSymbol(String),
}

impl Structure {
    pub fn new(domain: Vec<String>) -> Structure {
        Structure {
            domain,
            rels: BTreeMap::new(),
            consts: BTreeMap::new(),
        }
    }

    pub fn elem(&self, name: &str) -> Option<u32> {
        self.domain.iter().position(|e| e == name).map(|i| i as u32)
    }

    pub fn elem_name(&self, idx: u32) -> &str {
        &self.domain[idx as usize]
    }

    /// Resolves a constant: an explicit interpretation wins, otherwise a
    /// domain element with the same name.
    pub fn constant_element(&self, name: &str) -> Option<u32> {
        self.consts.get(name).copied().or_else(|| self.elem(name))
    }

    pub fn set_const(&mut self, name: &str, elem: u32) {
        self.consts.insert(name.to_string(), elem);
    }

    pub fn consts(&self) -> impl Iterator<Item = (&str, u32)> {
        self.consts.iter().map(|(n, &e)| (n.as_str(), e))
    }

    pub fn set_rel(&mut self, pred: &str, tuples: BTreeSet<Vec<u32>>) {
        self.rels.insert(pred.to_string(), tuples);
    }

    pub fn add_tuple(&mut self, pred: &str, tuple: Vec<u32>) {
        self.rels.entry(pred.to_string()).or_default().insert(tuple);
    }

    pub fn set_rel_named(&mut self, pred: &str, tuples: &[Vec<&str>]) -> Result<(), StructureError> {
        let mut set = BTreeSet::new();
        for t in tuples {
            let mut row = Vec::with_capacity(t.len());
            for e in t {
                row.push(
                    self.elem(e)
                        .ok_or_else(|| StructureError::UnknownElement(e.to_string()))?,
                );
            }
            set.insert(row);
        }
        self.set_rel(pred, set);
        Ok(())
    }

    pub fn interprets(&self, pred: &str) -> bool {
        self.rels.contains_key(pred)
    }

    pub fn rel(&self, pred: &str) -> Option<&BTreeSet<Vec<u32>>> {
        self.rels.get(pred)
    }

    pub fn holds(&self, pred: &str, tuple: &[u32]) -> Option<bool> {
        self.rels.get(pred).map(|r| r.contains(tuple))
    }

    pub fn rels(&self) -> impl Iterator<Item = (&str, &BTreeSet<Vec<u32>>)> {
        self.rels.iter().map(|(n, r)| (n.as_str(), r))
    }

    pub fn interpreted_preds(&self) -> BTreeSet<String> {
        self.rels.keys().cloned().collect()
    }

    /// Disjoint union of interpreted symbols over a shared domain.
    pub fn join(&self, other: &Structure) -> Result<Structure, StructureError> {
        debug_assert_eq!(self.domain, other.domain, "joined structures share a domain");
        let mut out = self.clone();
        for (p, r) in &other.rels {
            if out.rels.insert(p.clone(), r.clone()).is_some() {
                return Err(StructureError::DuplicateSymbol(p.clone()));
            }
        }
        for (c, &e) in &other.consts {
            if out.consts.insert(c.clone(), e).is_some() {
                return Err(StructureError::DuplicateSymbol(c.clone()));
            }
        }
        Ok(out)
    }

    /// Keeps only the named predicate interpretations (constants retained).
    pub fn restrict(&self, preds: &BTreeSet<String>) -> Structure {
        let mut out = Structure::new(self.domain.clone());
        out.consts = self.consts.clone();
        for (p, r) in &self.rels {
            if preds.contains(p) {
                out.rels.insert(p.clone(), r.clone());
            }
        }
        out
    }

    /// Drops the named predicate interpretations.
    pub fn without(&self, preds: &BTreeSet<String>) -> Structure {
        let mut out = self.clone();
        for p in preds {
            out.rels.remove(p);
        }
        out
    }

    /// Pointwise inclusion on the predicates interpreted by both sides.
    pub fn leq_on(&self, other: &Structure, preds: &BTreeSet<String>) -> bool {
        preds.iter().all(|p| {
            match (self.rels.get(p), other.rels.get(p)) {
                (Some(a), Some(b)) => a.is_subset(b),
                _ => false,
            }
        })
    }
}

/// Iterates all tuples of the given arity over a domain of size `n`, in
/// lexicographic order.
pub fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<u32>> {
    let total: usize = if n == 0 && arity > 0 { 0 } else { n.pow(arity as u32) };
    (0..total).map(move |mut i| {
        let mut t = vec![0u32; arity];
        for slot in t.iter_mut().rev() {
            *slot = (i % n) as u32;
            i /= n;
        }
        t
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    /// Nested definition with p, q local and r, s, t in an inner greatest
    /// fixpoint; a is the only open symbol.
    pub(crate) fn nested_example() -> FixpointDef {
        FixpointDef::new(
            DefKind::Lfd,
            vec![
                Rule::new("p", &[], Formula::Or(vec![Formula::prop("q"), Formula::prop("r")])),
                Rule::new("q", &[], Formula::prop("p")),
            ],
            vec![FixpointDef::new(
                DefKind::Gfd,
                vec![
                    Rule::new("r", &[], Formula::prop("p")),
                    Rule::new("s", &[], Formula::Or(vec![Formula::prop("t"), Formula::prop("a")])),
                    Rule::new("t", &[], Formula::prop("s")),
                ],
                vec![],
            )],
        )
    }

    #[test]
    fn defined_and_open_of_nested_example() {
        let d = nested_example();
        let def: Vec<_> = d.defined_predicates().into_iter().collect();
        assert_eq!(def, ["p", "q", "r", "s", "t"]);
        let open: Vec<_> = d.open_preds().into_iter().collect();
        assert_eq!(open, ["a"]);
        assert!(validate(&d).is_empty());
    }

    #[test]
    fn defined_and_open_of_reachability_style_definition() {
        // GFD{ P(x) <- Q(x), LFD{ Q(x) <- R(x) & ?y(T(x,y) & P(y)),
        //                         Q(x) <- ?y(T(x,y) & Q(y)) } }
        let inner_rules = merge_rules(vec![
            Rule::new(
                "Q",
                &["x"],
                Formula::And(vec![
                    Formula::atom("R", vec![v("x")]),
                    Formula::exists(
                        "y",
                        Formula::And(vec![
                            Formula::atom("T", vec![v("x"), v("y")]),
                            Formula::atom("P", vec![v("y")]),
                        ]),
                    ),
                ]),
            ),
            Rule::new(
                "Q",
                &["x"],
                Formula::exists(
                    "y",
                    Formula::And(vec![
                        Formula::atom("T", vec![v("x"), v("y")]),
                        Formula::atom("Q", vec![v("y")]),
                    ]),
                ),
            ),
        ])
        .unwrap();
        assert_eq!(inner_rules.len(), 1);
        let d = FixpointDef::new(
            DefKind::Gfd,
            vec![Rule::new("P", &["x"], Formula::atom("Q", vec![v("x")]))],
            vec![FixpointDef::new(DefKind::Lfd, inner_rules, vec![])],
        );
        let def: Vec<_> = d.defined_predicates().into_iter().collect();
        assert_eq!(def, ["P", "Q"]);
        let open: Vec<_> = d.open_preds().into_iter().collect();
        assert_eq!(open, ["R", "T"]);
        assert!(validate(&d).is_empty());
    }

    #[test]
    fn empty_definition_defines_nothing() {
        let d = FixpointDef::new(DefKind::Lfd, vec![], vec![]);
        assert!(d.defined_predicates().is_empty());
        assert!(d.open_preds().is_empty());
        assert!(validate(&d).is_empty());
    }

    #[test]
    fn negative_defined_occurrence_is_rejected() {
        let d = FixpointDef::new(
            DefKind::Lfd,
            vec![Rule::new("p", &[], Formula::not(Formula::prop("p")))],
            vec![],
        );
        let vs = validate(&d);
        assert_eq!(
            vs,
            vec![Violation::NegativeDefinedOccurrence {
                path: vec![],
                pred: "p".into(),
                rule_head: "p".into(),
            }]
        );
    }

    #[test]
    fn implication_antecedent_counts_as_negative() {
        // q <- (p => a) with p defined: p occurs negatively.
        let d = FixpointDef::new(
            DefKind::Lfd,
            vec![
                Rule::new("p", &[], Formula::prop("a")),
                Rule::new("q", &[], Formula::imp(Formula::prop("p"), Formula::prop("a"))),
            ],
            vec![],
        );
        assert_eq!(validate(&d).len(), 1);
    }

    #[test]
    fn equivalence_on_defined_symbol_is_rejected() {
        let d = FixpointDef::new(
            DefKind::Lfd,
            vec![
                Rule::new("p", &[], Formula::prop("a")),
                Rule::new("q", &[], Formula::iff(Formula::prop("p"), Formula::prop("a"))),
            ],
            vec![],
        );
        assert!(vs_has_negative(&validate(&d), "p"));
    }

    fn vs_has_negative(vs: &[Violation], pred: &str) -> bool {
        vs.iter().any(|v| matches!(v, Violation::NegativeDefinedOccurrence { pred: p, .. } if p == pred))
    }

    #[test]
    fn sibling_defined_symbols_are_rejected() {
        // LFD{ LFD{ p <- q }, LFD{ q <- a } }: first subdefinition opens on q,
        // which the second defines.
        let d = FixpointDef::new(
            DefKind::Lfd,
            vec![],
            vec![
                FixpointDef::new(DefKind::Lfd, vec![Rule::new("p", &[], Formula::prop("q"))], vec![]),
                FixpointDef::new(DefKind::Lfd, vec![Rule::new("q", &[], Formula::prop("a"))], vec![]),
            ],
        );
        let vs = validate(&d);
        assert_eq!(
            vs,
            vec![Violation::SiblingDefinedSymbol {
                path: vec![],
                subdef: 0,
                pred: "q".into(),
            }]
        );
    }

    #[test]
    fn overlapping_definitions_are_rejected() {
        let d = FixpointDef::new(
            DefKind::Lfd,
            vec![Rule::new("p", &[], Formula::prop("a"))],
            vec![FixpointDef::new(
                DefKind::Gfd,
                vec![Rule::new("p", &[], Formula::prop("a"))],
                vec![],
            )],
        );
        let vs = validate(&d);
        assert!(vs
            .iter()
            .any(|v| matches!(v, Violation::OverlappingDefinitions { pred, .. } if pred == "p")));
    }

    #[test]
    fn duplicate_local_rules_are_reported() {
        let d = FixpointDef::new(
            DefKind::Lfd,
            vec![
                Rule::new("p", &[], Formula::prop("a")),
                Rule::new("p", &[], Formula::prop("b")),
            ],
            vec![],
        );
        assert_eq!(
            validate(&d),
            vec![Violation::DuplicateLocalRule {
                path: vec![],
                pred: "p".into()
            }]
        );
    }

    #[test]
    fn merge_keeps_single_rules_untouched() {
        let r = Rule::new("p", &["x"], Formula::atom("q", vec![v("x")]));
        let merged = merge_rules(vec![r.clone()]).unwrap();
        assert_eq!(merged, vec![r]);
        assert!(merge_rules(vec![]).unwrap().is_empty());
    }

    #[test]
    fn merge_renames_to_first_head_variables() {
        let r1 = Rule::new("P", &["x"], Formula::atom("q", vec![v("x")]));
        let r2 = Rule::new("P", &["y"], Formula::atom("r", vec![v("y")]));
        let merged = merge_rules(vec![r1, r2]).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].vars, vec!["x"]);
        assert_eq!(
            merged[0].body,
            Formula::Or(vec![
                Formula::atom("q", vec![v("x")]),
                Formula::atom("r", vec![v("x")]),
            ])
        );
    }

    #[test]
    fn merge_avoids_capture_under_binders() {
        // P(y) <- ?x (T(x, y)) merged into head P(x): the bound x is renamed.
        let r1 = Rule::new("P", &["x"], Formula::atom("q", vec![v("x")]));
        let r2 = Rule::new(
            "P",
            &["y"],
            Formula::exists("x", Formula::atom("T", vec![v("x"), v("y")])),
        );
        let merged = merge_rules(vec![r1, r2]).unwrap();
        let Formula::Or(parts) = &merged[0].body else {
            panic!("expected a disjunction");
        };
        assert_eq!(
            parts[1],
            Formula::exists("x'", Formula::atom("T", vec![v("x'"), v("x")]))
        );
    }

    #[test]
    fn merge_rejects_arity_conflicts() {
        let r1 = Rule::new("P", &["x"], Formula::tru());
        let r2 = Rule::new("P", &["x", "y"], Formula::tru());
        assert!(merge_rules(vec![r1, r2]).is_err());
    }

    #[test]
    fn merge_three_rules_folds_into_one_disjunction() {
        let mk = |b: &str| Rule::new("p", &[], Formula::prop(b));
        let merged = merge_rules(vec![mk("a"), mk("b"), mk("c")]).unwrap();
        assert_eq!(
            merged[0].body,
            Formula::Or(vec![Formula::prop("a"), Formula::prop("b"), Formula::prop("c")])
        );
    }

    #[test]
    fn vocabulary_inference_collects_symbols_and_rejects_clashes() {
        let t = Theory::new(
            vec![Formula::atom("P", vec![Term::Const("c".into())])],
            vec![FixpointDef::new(
                DefKind::Lfd,
                vec![Rule::new("Q", &["x"], Formula::atom("P", vec![v("x")]))],
                vec![],
            )],
        )
        .unwrap();
        assert_eq!(t.vocab.pred_arity("P"), Some(1));
        assert_eq!(t.vocab.pred_arity("Q"), Some(1));
        assert!(t.vocab.has_const("c"));
        assert_eq!(
            t.open_predicates().into_iter().collect::<Vec<_>>(),
            vec!["P".to_string()]
        );

        let bad = Theory::new(
            vec![
                Formula::prop("P"),
                Formula::atom("P", vec![Term::Const("c".into())]),
            ],
            vec![],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn substitution_and_free_vars() {
        let f = Formula::forall(
            "x",
            Formula::Or(vec![
                Formula::atom("P", vec![v("x"), v("y")]),
                Formula::Eq(v("y"), Term::Const("c".into())),
            ]),
        );
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), ["y"]);
        let mut map = BTreeMap::new();
        map.insert("y".to_string(), Term::Var("x".to_string()));
        let g = f.substitute(&map);
        // The binder is renamed so the substituted x stays free.
        assert_eq!(g.free_vars().into_iter().collect::<Vec<_>>(), ["x"]);
        let Formula::Forall(b, _) = &g else { panic!() };
        assert_eq!(b, "x'");
    }

    #[test]
    fn tuple_iteration_is_lexicographic() {
        let all: Vec<_> = tuples(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(tuples(3, 0).collect::<Vec<_>>(), vec![Vec::<u32>::new()]);
        assert_eq!(tuples(0, 2).count(), 0);
    }
}
