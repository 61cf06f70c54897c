//! Definitional normal form for ground theories: every rule body becomes a
//! flat conjunction or disjunction of literals. Deeper connective nodes are
//! split off into auxiliary atoms defined by their own rules in the same
//! definition node, which preserves the models up to projection onto the
//! original atoms.

use crate::ground::{AtomId, AtomTable, PropDef, PropFormula, PropRule, PropTheory};
use crate::logic::{DefKind, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub atom: AtomId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: AtomId) -> Literal {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: AtomId) -> Literal {
        Literal {
            atom,
            positive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyOp {
    Conj,
    Disj,
}

/// A rule whose body is a flat conjunction or disjunction of literals. An
/// empty conjunction is truth, an empty disjunction falsity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfRule {
    pub head: AtomId,
    pub op: BodyOp,
    pub body: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfDef {
    pub kind: DefKind,
    pub rules: Vec<NfRule>,
    pub subdefs: Vec<NfDef>,
}

impl NfDef {
    pub fn defined_atoms(&self) -> std::collections::BTreeSet<AtomId> {
        let mut out: std::collections::BTreeSet<AtomId> =
            self.rules.iter().map(|r| r.head).collect();
        for s in &self.subdefs {
            out.extend(s.defined_atoms());
        }
        out
    }

    pub fn walk_rules<'a>(&'a self, f: &mut impl FnMut(&'a NfRule)) {
        for r in &self.rules {
            f(r);
        }
        for s in &self.subdefs {
            s.walk_rules(f);
        }
    }
}

/// A ground theory in definitional normal form. `original_atoms` counts the
/// atoms of the source theory; ids at or beyond it are auxiliary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfTheory {
    pub atoms: AtomTable,
    pub sentences: Vec<PropFormula>,
    pub defs: Vec<NfDef>,
    pub domain: Vec<String>,
    pub vocab: Vocabulary,
    pub original_atoms: usize,
}

/// Negation normal form with flattening: literals at the leaves, alternating
/// connective nodes, constants folded.
enum Shaped {
    True,
    False,
    Lit(Literal),
    Node(BodyOp, Vec<Shaped>),
}

fn shape(f: &PropFormula, positive: bool) -> Shaped {
    match f {
        PropFormula::Atom(a) => Shaped::Lit(Literal {
            atom: *a,
            positive,
        }),
        PropFormula::Not(g) => shape(g, !positive),
        PropFormula::And(gs) => shape_node(gs, positive, if positive { BodyOp::Conj } else { BodyOp::Disj }),
        PropFormula::Or(gs) => shape_node(gs, positive, if positive { BodyOp::Disj } else { BodyOp::Conj }),
    }
}

fn shape_node(gs: &[PropFormula], positive: bool, op: BodyOp) -> Shaped {
    let mut out = Vec::with_capacity(gs.len());
    for g in gs {
        let child = shape(g, positive);
        match child {
            Shaped::True if op == BodyOp::Conj => continue,
            Shaped::False if op == BodyOp::Disj => continue,
            Shaped::True => return Shaped::True,
            Shaped::False => return Shaped::False,
            Shaped::Node(cop, cs) if cop == op => out.extend(cs),
            other => out.push(other),
        }
    }
    match (out.len(), op) {
        (0, BodyOp::Conj) => Shaped::True,
        (0, BodyOp::Disj) => Shaped::False,
        (1, _) => out.pop().unwrap(),
        _ => Shaped::Node(op, out),
    }
}

struct Normalizer {
    atoms: AtomTable,
    next_aux: usize,
}

impl Normalizer {
    fn fresh_aux(&mut self) -> AtomId {
        loop {
            let candidate = format!("defnf_aux_{}", self.next_aux);
            self.next_aux += 1;
            if self.atoms.lookup(&candidate, &[]).is_none() {
                return self.atoms.intern(&candidate, Vec::new(), &[]);
            }
        }
    }

    /// Reduces a shaped body to a literal, creating auxiliary rules for
    /// connective nodes. Auxiliary rules precede the rule that uses them.
    fn to_literal(&mut self, s: Shaped, out: &mut Vec<NfRule>) -> Literal {
        match s {
            Shaped::Lit(l) => l,
            Shaped::True => {
                let aux = self.fresh_aux();
                out.push(NfRule {
                    head: aux,
                    op: BodyOp::Conj,
                    body: Vec::new(),
                });
                Literal::pos(aux)
            }
            Shaped::False => {
                let aux = self.fresh_aux();
                out.push(NfRule {
                    head: aux,
                    op: BodyOp::Disj,
                    body: Vec::new(),
                });
                Literal::pos(aux)
            }
            Shaped::Node(op, cs) => {
                let body: Vec<Literal> =
                    cs.into_iter().map(|c| self.to_literal(c, out)).collect();
                let aux = self.fresh_aux();
                out.push(NfRule {
                    head: aux,
                    op,
                    body,
                });
                Literal::pos(aux)
            }
        }
    }

    fn rule(&mut self, r: &PropRule, out: &mut Vec<NfRule>) {
        let (op, body) = match shape(&r.body, true) {
            Shaped::True => (BodyOp::Conj, Vec::new()),
            Shaped::False => (BodyOp::Disj, Vec::new()),
            Shaped::Lit(l) => (BodyOp::Conj, vec![l]),
            Shaped::Node(op, cs) => {
                let body = cs.into_iter().map(|c| self.to_literal(c, out)).collect();
                (op, body)
            }
        };
        out.push(NfRule {
            head: r.head,
            op,
            body,
        });
    }

    fn def(&mut self, d: &PropDef) -> NfDef {
        let mut rules = Vec::new();
        for r in &d.rules {
            self.rule(r, &mut rules);
        }
        let subdefs = d.subdefs.iter().map(|s| self.def(s)).collect();
        NfDef {
            kind: d.kind,
            rules,
            subdefs,
        }
    }
}

/// Normalizes every definition of a ground theory. Sentences are untouched.
pub fn to_defnf(pt: &PropTheory) -> NfTheory {
    let mut n = Normalizer {
        atoms: pt.atoms.clone(),
        next_aux: 0,
    };
    let defs = pt.defs.iter().map(|d| n.def(d)).collect();
    NfTheory {
        atoms: n.atoms,
        sentences: pt.sentences.clone(),
        defs,
        domain: pt.domain.clone(),
        vocab: pt.vocab.clone(),
        original_atoms: pt.atoms.len(),
    }
}

impl NfTheory {
    /// Reads the normal form back as a ground theory, for evaluation.
    pub fn to_prop_theory(&self) -> PropTheory {
        fn conv(d: &NfDef) -> PropDef {
            PropDef {
                kind: d.kind,
                rules: d
                    .rules
                    .iter()
                    .map(|r| PropRule {
                        head: r.head,
                        body: body_formula(r),
                    })
                    .collect(),
                subdefs: d.subdefs.iter().map(conv).collect(),
            }
        }
        PropTheory {
            atoms: self.atoms.clone(),
            sentences: self.sentences.clone(),
            defs: self.defs.iter().map(conv).collect(),
            domain: self.domain.clone(),
            vocab: self.vocab.clone(),
        }
    }
}

pub fn body_formula(r: &NfRule) -> PropFormula {
    let lits: Vec<PropFormula> = r
        .body
        .iter()
        .map(|l| {
            if l.positive {
                PropFormula::Atom(l.atom)
            } else {
                PropFormula::not(PropFormula::Atom(l.atom))
            }
        })
        .collect();
    match r.op {
        BodyOp::Conj => PropFormula::And(lits),
        BodyOp::Disj => PropFormula::Or(lits),
    }
}
