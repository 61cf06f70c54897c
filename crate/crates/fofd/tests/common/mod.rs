//! Shared generators and independent oracles for the integration suites.
//! The oracles deliberately avoid the crate's own reasoning paths: model
//! enumeration goes through the first-order evaluator, and difference-logic
//! satisfiability is decided by exhaustive search plus Bellman-Ford.

// Each integration target compiles its own copy and uses its own slice.
#![allow(dead_code)]

use fofd::dlreduce::{DiffOp, DlFormula, DlTheory};
use fofd::eval::enumerate_models;
use fofd::ground::{AtomTable, PropDef, PropFormula, PropRule, PropTheory};
use fofd::logic::{validate, DefKind, Structure, Vocabulary};
use fofd::smt::{discover_solver, SolverConfig};
use rand::prelude::*;
use std::collections::BTreeSet;

/// Locates a difference-logic solver for tests, building the bundled one
/// when nothing is available yet.
pub fn bundled_solver() -> SolverConfig {
    if let Some(cfg) = discover_solver(None) {
        return cfg;
    }
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".to_string());
    let status = std::process::Command::new(cargo)
        .args(["build", "-p", "idlsat", "--quiet"])
        .status()
        .expect("run cargo to build the bundled solver");
    assert!(status.success(), "building the bundled solver failed");
    discover_solver(None).expect("bundled solver still missing after build")
}

/// Builds a random propositional theory with one definition (possibly
/// nested one level) over a handful of nullary atoms. Defined atoms occur
/// only positively inside rule bodies, and subdefinition bodies never
/// mention atoms defined by the parent's local rules without permission:
/// the generator only hands each rule the literals its node may see.
pub fn random_prop_theory(rng: &mut impl Rng) -> PropTheory {
    let n_open = rng.gen_range(1..=2usize);
    let n_def = rng.gen_range(1..=3usize);
    let mut atoms = AtomTable::default();
    let opens: Vec<u32> = (0..n_open)
        .map(|i| atoms.intern(&format!("o{i}"), vec![], &[]))
        .collect();
    let defined: Vec<u32> = (0..n_def)
        .map(|i| atoms.intern(&format!("d{i}"), vec![], &[]))
        .collect();

    let kind = |rng: &mut dyn RngCore| {
        if rng.gen_bool(0.5) {
            DefKind::Lfd
        } else {
            DefKind::Gfd
        }
    };
    // Visible positive atoms for a node's rules: everything the family
    // defines plus the opens; sign choice is free on opens only.
    let body = |rng: &mut dyn RngCore, pos: &[u32], free: &[u32]| -> PropFormula {
        fn leaf(rng: &mut dyn RngCore, pos: &[u32], free: &[u32]) -> PropFormula {
            let roll = rng.gen_range(0..10);
            if roll == 0 {
                return if rng.gen_bool(0.5) {
                    PropFormula::tru()
                } else {
                    PropFormula::fls()
                };
            }
            if roll < 6 || free.is_empty() {
                PropFormula::Atom(*pos.choose(rng).unwrap())
            } else {
                let a = PropFormula::Atom(*free.choose(rng).unwrap());
                if rng.gen_bool(0.5) {
                    PropFormula::not(a)
                } else {
                    a
                }
            }
        }
        fn tree(rng: &mut dyn RngCore, pos: &[u32], free: &[u32], depth: usize) -> PropFormula {
            if depth == 0 || rng.gen_bool(0.4) {
                return leaf(rng, pos, free);
            }
            let kids: Vec<PropFormula> = (0..rng.gen_range(2..=3))
                .map(|_| tree(rng, pos, free, depth - 1))
                .collect();
            if rng.gen_bool(0.5) {
                PropFormula::And(kids)
            } else {
                PropFormula::Or(kids)
            }
        }
        tree(rng, pos, free, 2)
    };

    let split = if n_def >= 2 && rng.gen_bool(0.5) {
        rng.gen_range(1..n_def)
    } else {
        n_def
    };
    let (outer, inner) = defined.split_at(split);
    let all_pos: Vec<u32> = defined.to_vec();
    let root_rules: Vec<PropRule> = outer
        .iter()
        .map(|&h| PropRule {
            head: h,
            body: body(rng, &all_pos, &opens),
        })
        .collect();
    let subdefs = if inner.is_empty() {
        vec![]
    } else {
        // The nested node sees its own atoms, the parent's locals, and the
        // opens; that is exactly the visible set used for the root.
        let rules = inner
            .iter()
            .map(|&h| PropRule {
                head: h,
                body: body(rng, &all_pos, &opens),
            })
            .collect();
        vec![PropDef {
            kind: kind(rng),
            rules,
            subdefs: vec![],
        }]
    };
    let def = PropDef {
        kind: kind(rng),
        rules: root_rules,
        subdefs,
    };

    let mut sentences = Vec::new();
    if rng.gen_bool(0.6) {
        let picks: Vec<PropFormula> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let a = PropFormula::Atom(rng.gen_range(0..atoms.len() as u32));
                if rng.gen_bool(0.5) {
                    PropFormula::not(a)
                } else {
                    a
                }
            })
            .collect();
        sentences.push(PropFormula::or_of(picks));
    }

    let mut vocab = Vocabulary::default();
    for (_, ga) in atoms.iter() {
        vocab.declare_pred(&ga.pred, 0).unwrap();
    }
    let pt = PropTheory {
        atoms,
        sentences,
        defs: vec![def],
        domain: vec![],
        vocab,
    };
    let fo = pt.to_fo_theory();
    for d in &fo.defs {
        assert!(validate(d).is_empty(), "generator produced a bad theory");
    }
    pt
}

/// Enumerates the models of a ground theory through the first-order
/// evaluator and reports them as bit vectors over the atom table.
pub fn prop_models_by_enumeration(pt: &PropTheory) -> BTreeSet<Vec<bool>> {
    let fo = pt.to_fo_theory();
    let frame = Structure::new(vec![]);
    let models = enumerate_models(&fo, &frame, 20).expect("enumeration failed");
    models
        .iter()
        .map(|s| {
            (0..pt.atoms.len())
                .map(|i| s.holds(pt.atoms.name(i as u32), &[]).unwrap())
                .collect()
        })
        .collect()
}

/// Checks feasibility of a difference constraint set `a - b <= c` by
/// Bellman-Ford: infeasible exactly when the constraint graph has a
/// negative cycle.
fn feasible(cons: &[(usize, usize, i64)], n: usize) -> bool {
    let mut dist = vec![0i64; n];
    for round in 0..=n {
        let mut changed = false;
        for &(a, b, c) in cons {
            if dist[b] + c < dist[a] {
                dist[a] = dist[b] + c;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
        if round == n {
            return false;
        }
    }
    true
}

enum Simp {
    True,
    False,
    Keep(DlFormula),
}

/// Partially evaluates a clause under a total boolean assignment, leaving
/// only difference atoms symbolic.
fn simp(f: &DlFormula, bools: &[bool]) -> Simp {
    match f {
        DlFormula::Bool(a) => {
            if bools[*a as usize] {
                Simp::True
            } else {
                Simp::False
            }
        }
        DlFormula::Diff { .. } => Simp::Keep(f.clone()),
        DlFormula::Not(g) => match simp(g, bools) {
            Simp::True => Simp::False,
            Simp::False => Simp::True,
            Simp::Keep(h) => Simp::Keep(DlFormula::not(h)),
        },
        DlFormula::And(gs) => {
            let mut kept = Vec::new();
            for g in gs {
                match simp(g, bools) {
                    Simp::False => return Simp::False,
                    Simp::True => {}
                    Simp::Keep(h) => kept.push(h),
                }
            }
            if kept.is_empty() {
                Simp::True
            } else {
                Simp::Keep(DlFormula::And(kept))
            }
        }
        DlFormula::Or(gs) => {
            let mut kept = Vec::new();
            for g in gs {
                match simp(g, bools) {
                    Simp::True => return Simp::True,
                    Simp::False => {}
                    Simp::Keep(h) => kept.push(h),
                }
            }
            if kept.is_empty() {
                Simp::False
            } else {
                Simp::Keep(DlFormula::Or(kept))
            }
        }
        DlFormula::Implies(a, b) => simp(
            &DlFormula::Or(vec![DlFormula::not((**a).clone()), (**b).clone()]),
            bools,
        ),
        DlFormula::Iff(a, b) => {
            let a = (**a).clone();
            let b = (**b).clone();
            simp(
                &DlFormula::Or(vec![
                    DlFormula::And(vec![a.clone(), b.clone()]),
                    DlFormula::And(vec![DlFormula::not(a), DlFormula::not(b)]),
                ]),
                bools,
            )
        }
    }
}

/// Decides satisfiability of residual formulas over difference atoms by
/// backtracking over disjunctions and checking each accumulated constraint
/// set with Bellman-Ford.
fn residual_sat(agenda: Vec<DlFormula>, cons: Vec<(usize, usize, i64)>, n: usize) -> bool {
    let mut agenda = agenda;
    let mut cons = cons;
    while let Some(f) = agenda.pop() {
        match f {
            DlFormula::And(gs) => agenda.extend(gs),
            DlFormula::Diff {
                minuend,
                subtrahend,
                op,
                constant,
            } => {
                let (a, b) = (minuend as usize, subtrahend as usize);
                match op {
                    DiffOp::Le => cons.push((a, b, constant)),
                    DiffOp::Lt => cons.push((a, b, constant - 1)),
                    DiffOp::Eq => {
                        cons.push((a, b, constant));
                        cons.push((b, a, -constant));
                    }
                }
            }
            DlFormula::Not(g) => match *g {
                DlFormula::Diff {
                    minuend,
                    subtrahend,
                    op,
                    constant,
                } => {
                    let (a, b) = (minuend as usize, subtrahend as usize);
                    match op {
                        DiffOp::Le => cons.push((b, a, -constant - 1)),
                        DiffOp::Lt => cons.push((b, a, -constant)),
                        DiffOp::Eq => agenda.push(DlFormula::Or(vec![
                            DlFormula::Diff {
                                minuend,
                                subtrahend,
                                op: DiffOp::Lt,
                                constant,
                            },
                            DlFormula::Not(Box::new(DlFormula::Diff {
                                minuend,
                                subtrahend,
                                op: DiffOp::Le,
                                constant,
                            })),
                        ])),
                    }
                }
                DlFormula::Not(h) => agenda.push(*h),
                DlFormula::And(gs) => {
                    agenda.push(DlFormula::Or(gs.into_iter().map(DlFormula::not).collect()))
                }
                DlFormula::Or(gs) => {
                    agenda.push(DlFormula::And(gs.into_iter().map(DlFormula::not).collect()))
                }
                other => panic!("boolean leaf in residual: {other:?}"),
            },
            DlFormula::Or(gs) => {
                if !feasible(&cons, n) {
                    return false;
                }
                return gs.into_iter().any(|arm| {
                    let mut branch = agenda.clone();
                    branch.push(arm);
                    residual_sat(branch, cons.clone(), n)
                });
            }
            other => panic!("boolean leaf in residual: {other:?}"),
        }
    }
    feasible(&cons, n)
}

/// Enumerates every model of a difference-logic theory by brute force and
/// projects it onto the original atoms. Intended for small instances only.
pub fn dl_projected_models(dl: &DlTheory) -> BTreeSet<Vec<bool>> {
    let n = dl.atoms.len();
    assert!(n <= 16, "too many atoms for brute enumeration: {n}");
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << n {
        let bools: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let mut residual = Vec::new();
        let mut alive = true;
        for c in &dl.clauses {
            match simp(c, &bools) {
                Simp::False => {
                    alive = false;
                    break;
                }
                Simp::True => {}
                Simp::Keep(f) => residual.push(f),
            }
        }
        if alive && residual_sat(residual, Vec::new(), dl.levels.len()) {
            out.insert(bools[..dl.original_atoms].to_vec());
        }
    }
    out
}
