//! Grounding: instantiating a theory over a finite domain into a
//! propositional theory. Universal quantifiers become conjunctions over the
//! domain, existentials disjunctions, equalities and frame-interpreted atoms
//! fold to truth constants, and the remaining ground atoms are interned into
//! a table whose ids follow first occurrence.

use crate::logic::{tuples, DefKind, FixpointDef, Formula, Structure, Term, Theory, Vocabulary};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub type AtomId = u32;

/// A ground atom: a predicate applied to domain elements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: String,
    pub tuple: Vec<u32>,
}

/// Interning table from ground atoms to dense ids. Rendered names like
/// `Edge(a, b)` are unique and stable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    atoms: Vec<GroundAtom>,
    names: Vec<String>,
    index: BTreeMap<(String, Vec<u32>), AtomId>,
}

impl AtomTable {
    pub fn intern(&mut self, pred: &str, tuple: Vec<u32>, domain: &[String]) -> AtomId {
        if let Some(&id) = self.index.get(&(pred.to_string(), tuple.clone())) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        let name = if tuple.is_empty() {
            pred.to_string()
        } else {
            format!(
                "{pred}({})",
                tuple
                    .iter()
                    .map(|&e| domain[e as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        self.index.insert((pred.to_string(), tuple.clone()), id);
        self.atoms.push(GroundAtom {
            pred: pred.to_string(),
            tuple,
        });
        self.names.push(name);
        id
    }

    pub fn lookup(&self, pred: &str, tuple: &[u32]) -> Option<AtomId> {
        self.index.get(&(pred.to_string(), tuple.to_vec())).copied()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id as usize]
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &GroundAtom)> {
        self.atoms.iter().enumerate().map(|(i, a)| (i as AtomId, a))
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropFormula {
    Atom(AtomId),
    Not(Box<PropFormula>),
    /// Empty conjunction is truth.
    And(Vec<PropFormula>),
    /// Empty disjunction is falsity.
    Or(Vec<PropFormula>),
}

impl PropFormula {
    pub fn tru() -> PropFormula {
        PropFormula::And(Vec::new())
    }

    pub fn fls() -> PropFormula {
        PropFormula::Or(Vec::new())
    }

    pub fn not(f: PropFormula) -> PropFormula {
        PropFormula::Not(Box::new(f))
    }

    pub fn is_tru(&self) -> bool {
        matches!(self, PropFormula::And(gs) if gs.is_empty())
    }

    pub fn is_fls(&self) -> bool {
        matches!(self, PropFormula::Or(gs) if gs.is_empty())
    }

    /// Conjunction with constant absorption and no singleton wrapper.
    pub fn and_of(gs: Vec<PropFormula>) -> PropFormula {
        let mut out = Vec::new();
        for g in gs {
            if g.is_fls() {
                return PropFormula::fls();
            }
            if !g.is_tru() {
                out.push(g);
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            PropFormula::And(out)
        }
    }

    /// Disjunction with constant absorption and no singleton wrapper.
    pub fn or_of(gs: Vec<PropFormula>) -> PropFormula {
        let mut out = Vec::new();
        for g in gs {
            if g.is_tru() {
                return PropFormula::tru();
            }
            if !g.is_fls() {
                out.push(g);
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            PropFormula::Or(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropRule {
    pub head: AtomId,
    pub body: PropFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropDef {
    pub kind: DefKind,
    pub rules: Vec<PropRule>,
    pub subdefs: Vec<PropDef>,
}

impl PropDef {
    pub fn defined_atoms(&self) -> BTreeSet<AtomId> {
        let mut out: BTreeSet<AtomId> = self.rules.iter().map(|r| r.head).collect();
        for s in &self.subdefs {
            out.extend(s.defined_atoms());
        }
        out
    }

    pub fn local_defined(&self) -> BTreeSet<AtomId> {
        self.rules.iter().map(|r| r.head).collect()
    }

    pub fn walk_rules(&self, f: &mut impl FnMut(&PropRule)) {
        for r in &self.rules {
            f(r);
        }
        for s in &self.subdefs {
            s.walk_rules(f);
        }
    }
}

/// A ground theory. The domain and vocabulary of the source theory are kept
/// for lifting propositional models back to structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropTheory {
    pub atoms: AtomTable,
    pub sentences: Vec<PropFormula>,
    pub defs: Vec<PropDef>,
    pub domain: Vec<String>,
    pub vocab: Vocabulary,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("frame interprets defined predicate {0}")]
    FrameDefinesPred(String),
    #[error("frame domain differs from the grounding domain")]
    DomainMismatch,
    #[error("constant {0} has no interpretation")]
    UnknownConstant(String),
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
}

struct Grounder<'a> {
    domain: &'a [String],
    frame: Option<&'a Structure>,
    atoms: AtomTable,
}

impl<'a> Grounder<'a> {
    fn resolve_const(&self, c: &str) -> Result<u32, GroundError> {
        let direct = match self.frame {
            Some(f) => f.constant_element(c),
            None => self.domain.iter().position(|e| e == c).map(|i| i as u32),
        };
        direct.ok_or_else(|| GroundError::UnknownConstant(c.to_string()))
    }

    fn term(&self, t: &Term, env: &[(String, u32)]) -> Result<u32, GroundError> {
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|&(_, e)| e)
                .ok_or_else(|| GroundError::UnboundVariable(x.clone())),
            Term::Const(c) => self.resolve_const(c),
        }
    }

    fn formula(
        &mut self,
        f: &Formula,
        env: &mut Vec<(String, u32)>,
    ) -> Result<PropFormula, GroundError> {
        Ok(match f {
            Formula::Atom(p, args) => {
                let mut tuple = Vec::with_capacity(args.len());
                for a in args {
                    tuple.push(self.term(a, env)?);
                }
                match self.frame.and_then(|fr| fr.holds(p, &tuple)) {
                    Some(true) => PropFormula::tru(),
                    Some(false) => PropFormula::fls(),
                    None => PropFormula::Atom(self.atoms.intern(p, tuple, self.domain)),
                }
            }
            Formula::Eq(a, b) => {
                if self.term(a, env)? == self.term(b, env)? {
                    PropFormula::tru()
                } else {
                    PropFormula::fls()
                }
            }
            Formula::Not(g) => match self.formula(g, env)? {
                g if g.is_tru() => PropFormula::fls(),
                g if g.is_fls() => PropFormula::tru(),
                g => PropFormula::not(g),
            },
            Formula::And(gs) => {
                let mut out = Vec::with_capacity(gs.len());
                for g in gs {
                    out.push(self.formula(g, env)?);
                }
                PropFormula::and_of(out)
            }
            Formula::Or(gs) => {
                let mut out = Vec::with_capacity(gs.len());
                for g in gs {
                    out.push(self.formula(g, env)?);
                }
                PropFormula::or_of(out)
            }
            Formula::Imp(a, b) => {
                let a = self.formula(a, env)?;
                let b = self.formula(b, env)?;
                PropFormula::or_of(vec![negate(a), b])
            }
            Formula::Iff(a, b) => {
                let a = self.formula(a, env)?;
                let b = self.formula(b, env)?;
                PropFormula::and_of(vec![
                    PropFormula::or_of(vec![negate(a.clone()), b.clone()]),
                    PropFormula::or_of(vec![negate(b), a]),
                ])
            }
            Formula::Forall(x, g) => {
                let mut out = Vec::with_capacity(self.domain.len());
                for e in 0..self.domain.len() as u32 {
                    env.push((x.clone(), e));
                    let r = self.formula(g, env);
                    env.pop();
                    out.push(r?);
                }
                PropFormula::and_of(out)
            }
            Formula::Exists(x, g) => {
                let mut out = Vec::with_capacity(self.domain.len());
                for e in 0..self.domain.len() as u32 {
                    env.push((x.clone(), e));
                    let r = self.formula(g, env);
                    env.pop();
                    out.push(r?);
                }
                PropFormula::or_of(out)
            }
        })
    }

    fn def(&mut self, d: &FixpointDef) -> Result<PropDef, GroundError> {
        let mut rules = Vec::new();
        for r in &d.rules {
            for tuple in tuples(self.domain.len(), r.vars.len()) {
                let head = self.atoms.intern(&r.head, tuple.clone(), self.domain);
                let mut env: Vec<(String, u32)> =
                    r.vars.iter().cloned().zip(tuple.into_iter()).collect();
                let body = self.formula(&r.body, &mut env)?;
                rules.push(PropRule { head, body });
            }
        }
        let mut subdefs = Vec::new();
        for s in &d.subdefs {
            subdefs.push(self.def(s)?);
        }
        Ok(PropDef {
            kind: d.kind,
            rules,
            subdefs,
        })
    }
}

fn negate(f: PropFormula) -> PropFormula {
    if f.is_tru() {
        PropFormula::fls()
    } else if f.is_fls() {
        PropFormula::tru()
    } else {
        PropFormula::not(f)
    }
}

/// Grounds a theory over a domain. A frame, when given, fixes the
/// interpretation of some open predicates: their atoms fold to constants
/// instead of being interned. Sentences folding to truth are dropped;
/// sentences folding to falsity stay as unsatisfiable markers.
pub fn ground(
    theory: &Theory,
    domain: &[String],
    frame: Option<&Structure>,
) -> Result<PropTheory, GroundError> {
    if let Some(f) = frame {
        if f.domain != domain {
            return Err(GroundError::DomainMismatch);
        }
        for d in &theory.defs {
            for p in d.defined_predicates() {
                if f.interprets(&p) {
                    return Err(GroundError::FrameDefinesPred(p));
                }
            }
        }
    }
    let mut g = Grounder {
        domain,
        frame,
        atoms: AtomTable::default(),
    };
    let mut sentences = Vec::new();
    for s in &theory.sentences {
        let f = g.formula(s, &mut Vec::new())?;
        if !f.is_tru() {
            sentences.push(f);
        }
    }
    let mut defs = Vec::new();
    for d in &theory.defs {
        defs.push(g.def(d)?);
    }
    Ok(PropTheory {
        atoms: g.atoms,
        sentences,
        defs,
        domain: domain.to_vec(),
        vocab: theory.vocab.clone(),
    })
}

impl PropTheory {
    /// Embeds the ground theory as a theory of nullary predicates named by
    /// the ground atoms, over an empty domain. Evaluation and model
    /// enumeration then apply unchanged.
    pub fn to_fo_theory(&self) -> Theory {
        fn conv_def(pt: &PropTheory, d: &PropDef) -> FixpointDef {
            FixpointDef::new(
                d.kind,
                d.rules
                    .iter()
                    .map(|r| crate::logic::Rule {
                        head: pt.atoms.name(r.head).to_string(),
                        vars: Vec::new(),
                        body: pt.fo_formula(&r.body),
                    })
                    .collect(),
                d.subdefs.iter().map(|s| conv_def(pt, s)).collect(),
            )
        }
        let sentences = self.sentences.iter().map(|s| self.fo_formula(s)).collect();
        let defs = self.defs.iter().map(|d| conv_def(self, d)).collect();
        let mut t = Theory::new(sentences, defs).expect("ground atom names are arity-consistent");
        // Atoms folded out of every formula still belong to the vocabulary.
        for (id, _) in self.atoms.iter() {
            t.vocab
                .declare_pred(self.atoms.name(id), 0)
                .expect("ground atom names are arity-consistent");
        }
        t
    }

    fn fo_formula(&self, f: &PropFormula) -> Formula {
        match f {
            PropFormula::Atom(id) => Formula::Atom(self.atoms.name(*id).to_string(), Vec::new()),
            PropFormula::Not(g) => Formula::not(self.fo_formula(g)),
            PropFormula::And(gs) => Formula::And(gs.iter().map(|g| self.fo_formula(g)).collect()),
            PropFormula::Or(gs) => Formula::Or(gs.iter().map(|g| self.fo_formula(g)).collect()),
        }
    }
}

fn fmt_prop(f: &PropFormula, atoms: &AtomTable, level: u8, out: &mut String) {
    match f {
        PropFormula::And(gs) if gs.is_empty() => out.push_str("true"),
        PropFormula::Or(gs) if gs.is_empty() => out.push_str("false"),
        PropFormula::Atom(id) => out.push_str(atoms.name(*id)),
        PropFormula::Not(g) => {
            out.push('~');
            fmt_prop(g, atoms, 4, out);
        }
        PropFormula::And(gs) => {
            let paren = level > 3;
            if paren {
                out.push('(');
            }
            for (k, g) in gs.iter().enumerate() {
                if k > 0 {
                    out.push_str(" & ");
                }
                fmt_prop(g, atoms, 4, out);
            }
            if paren {
                out.push(')');
            }
        }
        PropFormula::Or(gs) => {
            let paren = level > 2;
            if paren {
                out.push('(');
            }
            for (k, g) in gs.iter().enumerate() {
                if k > 0 {
                    out.push_str(" | ");
                }
                fmt_prop(g, atoms, 3, out);
            }
            if paren {
                out.push(')');
            }
        }
    }
}

/// Prints a ground theory in the theory syntax, atoms spelled by name.
pub fn print_prop_theory(pt: &PropTheory) -> String {
    let mut out = String::new();
    for s in &pt.sentences {
        fmt_prop(s, &pt.atoms, 0, &mut out);
        out.push_str(".\n");
    }
    fn fmt_def(pt: &PropTheory, d: &PropDef, indent: usize, out: &mut String) {
        out.push_str(&"  ".repeat(indent));
        let _ = write!(out, "{} {{\n", d.kind);
        for r in &d.rules {
            out.push_str(&"  ".repeat(indent + 1));
            out.push_str(pt.atoms.name(r.head));
            out.push_str(" <- ");
            fmt_prop(&r.body, &pt.atoms, 0, out);
            out.push_str(".\n");
        }
        for s in &d.subdefs {
            fmt_def(pt, s, indent + 1, out);
        }
        out.push_str(&"  ".repeat(indent));
        out.push_str("}\n");
    }
    for d in &pt.defs {
        fmt_def(pt, d, 0, &mut out);
    }
    out
}
