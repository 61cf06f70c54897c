//! Reduction of a normal-form ground theory to satisfiability modulo
//! integer difference logic. Every rule contributes its completion; rules
//! caught in recursion additionally constrain per-atom level variables that
//! witness how a fixpoint justifies truth (least definitions) or falsity
//! (greatest definitions).
//!
//! Levels are grouped into families, one per definition node: the family of
//! a node covers every atom its subtree defines, and the node's own kind
//! decides which side needs justification. Rules local to the node compare
//! levels strictly; rules from nested subdefinitions only weakly, since a
//! deeper fixpoint may settle an entire stratum at one level. A strongly
//! connected component analysis keeps level variables to the atoms that
//! actually sit on cycles; atoms outside every cycle need no witness beyond
//! their completion.

use crate::defnf::{body_formula, BodyOp, Literal, NfDef, NfRule, NfTheory};
use crate::ground::{AtomId, AtomTable, PropFormula};
use crate::logic::{DefKind, Vocabulary};
use std::collections::BTreeMap;

pub type LevelId = u32;

/// Comparison operators for difference constraints. Generation emits `Le`
/// only; the other forms are accepted for completeness of the format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    Le,
    Lt,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DlFormula {
    Bool(AtomId),
    /// `minuend - subtrahend <op> constant` over integer level variables.
    Diff {
        minuend: LevelId,
        subtrahend: LevelId,
        op: DiffOp,
        constant: i64,
    },
    Not(Box<DlFormula>),
    And(Vec<DlFormula>),
    Or(Vec<DlFormula>),
    Implies(Box<DlFormula>, Box<DlFormula>),
    Iff(Box<DlFormula>, Box<DlFormula>),
}

impl DlFormula {
    pub fn not(f: DlFormula) -> DlFormula {
        DlFormula::Not(Box::new(f))
    }

    pub fn implies(a: DlFormula, b: DlFormula) -> DlFormula {
        DlFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: DlFormula, b: DlFormula) -> DlFormula {
        DlFormula::Iff(Box::new(a), Box::new(b))
    }

    fn le(minuend: LevelId, subtrahend: LevelId, constant: i64) -> DlFormula {
        DlFormula::Diff {
            minuend,
            subtrahend,
            op: DiffOp::Le,
            constant,
        }
    }

    fn lit(l: Literal) -> DlFormula {
        if l.positive {
            DlFormula::Bool(l.atom)
        } else {
            DlFormula::not(DlFormula::Bool(l.atom))
        }
    }
}

/// The level variable everything is measured against; always index 0.
pub const GROUND_LEVEL: LevelId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    /// Sound elimination constraints: every model of the reduction projects
    /// to a model of the theory.
    Weak,
    /// Adds rank-pinning clauses so each model of the theory extends to
    /// exactly one witness, which lets model counting carry over.
    Strong,
}

impl std::fmt::Display for Strength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strength::Weak => "weak",
            Strength::Strong => "strong",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReduceOptions {
    pub strength: Strength,
    /// Restrict level variables to atoms on cycles of their family.
    pub scc: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            strength: Strength::Strong,
            scc: true,
        }
    }
}

/// A theory of boolean atoms and integer difference constraints, asserted
/// as one big conjunction of `clauses`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlTheory {
    pub atoms: AtomTable,
    /// Level variable names; index 0 is the ground level.
    pub levels: Vec<String>,
    pub clauses: Vec<DlFormula>,
    pub original_atoms: usize,
    pub domain: Vec<String>,
    pub vocab: Vocabulary,
}

impl DlTheory {
    /// Evaluates every clause under total assignments to booleans and
    /// levels, indexed by id.
    pub fn check(&self, bools: &[bool], levels: &[i64]) -> bool {
        self.clauses.iter().all(|c| eval_dl(c, bools, levels))
    }

    /// Renders each clause in a readable prefix form, for inspection.
    pub fn clause_strings(&self) -> Vec<String> {
        self.clauses
            .iter()
            .map(|c| render(c, &self.atoms, &self.levels))
            .collect()
    }
}

pub fn eval_dl(f: &DlFormula, bools: &[bool], levels: &[i64]) -> bool {
    match f {
        DlFormula::Bool(a) => bools[*a as usize],
        DlFormula::Diff {
            minuend,
            subtrahend,
            op,
            constant,
        } => {
            let d = levels[*minuend as usize] - levels[*subtrahend as usize];
            match op {
                DiffOp::Le => d <= *constant,
                DiffOp::Lt => d < *constant,
                DiffOp::Eq => d == *constant,
            }
        }
        DlFormula::Not(g) => !eval_dl(g, bools, levels),
        DlFormula::And(gs) => gs.iter().all(|g| eval_dl(g, bools, levels)),
        DlFormula::Or(gs) => gs.iter().any(|g| eval_dl(g, bools, levels)),
        DlFormula::Implies(a, b) => !eval_dl(a, bools, levels) || eval_dl(b, bools, levels),
        DlFormula::Iff(a, b) => eval_dl(a, bools, levels) == eval_dl(b, bools, levels),
    }
}

fn render(f: &DlFormula, atoms: &AtomTable, levels: &[String]) -> String {
    match f {
        DlFormula::Bool(a) => atoms.name(*a).to_string(),
        DlFormula::Diff {
            minuend,
            subtrahend,
            op,
            constant,
        } => {
            let op = match op {
                DiffOp::Le => "<=",
                DiffOp::Lt => "<",
                DiffOp::Eq => "=",
            };
            format!(
                "({op} (- {} {}) {constant})",
                levels[*minuend as usize], levels[*subtrahend as usize]
            )
        }
        DlFormula::Not(g) => format!("(not {})", render(g, atoms, levels)),
        DlFormula::And(gs) if gs.is_empty() => "true".into(),
        DlFormula::Or(gs) if gs.is_empty() => "false".into(),
        DlFormula::And(gs) => format!(
            "(and {})",
            gs.iter().map(|g| render(g, atoms, levels)).collect::<Vec<_>>().join(" ")
        ),
        DlFormula::Or(gs) => format!(
            "(or {})",
            gs.iter().map(|g| render(g, atoms, levels)).collect::<Vec<_>>().join(" ")
        ),
        DlFormula::Implies(a, b) => format!(
            "(=> {} {})",
            render(a, atoms, levels),
            render(b, atoms, levels)
        ),
        DlFormula::Iff(a, b) => format!(
            "(= {} {})",
            render(a, atoms, levels),
            render(b, atoms, levels)
        ),
    }
}

fn prop_to_dl(f: &PropFormula) -> DlFormula {
    match f {
        PropFormula::Atom(a) => DlFormula::Bool(*a),
        PropFormula::Not(g) => DlFormula::not(prop_to_dl(g)),
        PropFormula::And(gs) => DlFormula::And(gs.iter().map(prop_to_dl).collect()),
        PropFormula::Or(gs) => DlFormula::Or(gs.iter().map(prop_to_dl).collect()),
    }
}

/// Reduces a normal-form ground theory to a difference-logic theory whose
/// models, projected onto the original atoms, are the models of the input.
/// Output is deterministic: sentences, then completions in definition
/// preorder with rules ordered by head, then level constraints family by
/// family, then the ground-level floor.
pub fn reduce(nf: &NfTheory, opts: ReduceOptions) -> DlTheory {
    let mut out = DlTheory {
        atoms: nf.atoms.clone(),
        levels: vec!["@ground".to_string()],
        clauses: Vec::new(),
        original_atoms: nf.original_atoms,
        domain: nf.domain.clone(),
        vocab: nf.vocab.clone(),
    };
    for s in &nf.sentences {
        out.clauses.push(prop_to_dl(s));
    }
    for d in &nf.defs {
        completion(d, &mut out.clauses);
    }
    for (i, d) in nf.defs.iter().enumerate() {
        family_constraints(d, &i.to_string(), opts, &mut out);
    }
    for v in 1..out.levels.len() as LevelId {
        out.clauses.push(DlFormula::le(GROUND_LEVEL, v, 0));
    }
    out
}

fn completion(d: &NfDef, clauses: &mut Vec<DlFormula>) {
    let mut rules: Vec<&NfRule> = d.rules.iter().collect();
    rules.sort_by_key(|r| r.head);
    for r in rules {
        clauses.push(DlFormula::iff(
            DlFormula::Bool(r.head),
            prop_to_dl(&body_formula(r)),
        ));
    }
    for s in &d.subdefs {
        completion(s, clauses);
    }
}

/// Strongly connected components by Tarjan's algorithm, iteratively.
/// Returns a component id per node; ids carry no ordering guarantees.
fn sccs(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&(v, pi)) = call.last() {
            if pi == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if pi < adj[v].len() {
                call.last_mut().unwrap().1 += 1;
                let w = adj[v][pi];
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

fn family_constraints(node: &NfDef, path: &str, opts: ReduceOptions, out: &mut DlTheory) {
    let fam: Vec<AtomId> = node.defined_atoms().into_iter().collect();
    let fam_index: BTreeMap<AtomId, usize> =
        fam.iter().enumerate().map(|(i, &a)| (a, i)).collect();

    // The family's one rule per defined atom, marked local or nested.
    let mut rule_of: BTreeMap<AtomId, (&NfRule, bool)> = BTreeMap::new();
    for r in &node.rules {
        rule_of.insert(r.head, (r, true));
    }
    for sub in &node.subdefs {
        sub.walk_rules(&mut |r| {
            rule_of.insert(r.head, (r, false));
        });
    }

    // Dependency graph over the family's atoms.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); fam.len()];
    let mut self_loop = vec![false; fam.len()];
    for (&h, &(r, _)) in &rule_of {
        let hi = fam_index[&h];
        for l in &r.body {
            if let Some(&di) = fam_index.get(&l.atom) {
                adj[hi].push(di);
                if di == hi {
                    self_loop[hi] = true;
                }
            }
        }
    }
    let comp = sccs(&adj);
    let comp_size = {
        let mut sizes = vec![0usize; fam.len()];
        for &c in &comp {
            sizes[c] += 1;
        }
        sizes
    };
    let needs = |i: usize| -> bool {
        if opts.scc {
            comp_size[comp[i]] >= 2 || self_loop[i]
        } else {
            true
        }
    };

    if (0..fam.len()).any(needs) {
        let mut level_of: BTreeMap<AtomId, LevelId> = BTreeMap::new();
        for (i, &a) in fam.iter().enumerate() {
            if needs(i) {
                let id = out.levels.len() as LevelId;
                out.levels.push(format!("lev@{path}:{}", out.atoms.name(a)));
                level_of.insert(a, id);
            }
        }

        for (i, &h) in fam.iter().enumerate() {
            if !needs(i) {
                continue;
            }
            let (rule, local) = rule_of[&h];
            let lev_h = level_of[&h];
            let h_bool = DlFormula::Bool(h);

            // In a least family a false atom needs no witness; in a
            // greatest family a true atom needs none. Pinning their levels
            // to the ground keeps the witness unique.
            let pin_guard = match node.kind {
                DefKind::Lfd => DlFormula::not(h_bool.clone()),
                DefKind::Gfd => h_bool.clone(),
            };
            out.clauses.push(DlFormula::implies(
                pin_guard,
                DlFormula::le(lev_h, GROUND_LEVEL, 0),
            ));

            // Body literals recursing through this family versus the rest.
            let (bld, blo): (Vec<Literal>, Vec<Literal>) =
                rule.body.iter().partition(|l| match fam_index.get(&l.atom) {
                    Some(&di) => !opts.scc || comp[di] == comp[i],
                    None => false,
                });
            // Nested rules compare weakly: a deeper fixpoint settles whole
            // strata at a single level of this family.
            let bound = if local { -1 } else { 0 };
            let guard = match node.kind {
                DefKind::Lfd => h_bool.clone(),
                DefKind::Gfd => DlFormula::not(h_bool.clone()),
            };
            // For least families a recursive literal supports the head by
            // being true; for greatest families by being false.
            let support = |l: &Literal| match node.kind {
                DefKind::Lfd => DlFormula::Bool(l.atom),
                DefKind::Gfd => DlFormula::not(DlFormula::Bool(l.atom)),
            };
            let defeat = |l: &Literal| match node.kind {
                DefKind::Lfd => DlFormula::not(DlFormula::Bool(l.atom)),
                DefKind::Gfd => DlFormula::Bool(l.atom),
            };
            // Whether the rule's body demands every literal to support the
            // head (from the justified side's point of view).
            let demanding = match (node.kind, rule.op) {
                (DefKind::Lfd, BodyOp::Conj) | (DefKind::Gfd, BodyOp::Disj) => true,
                (DefKind::Lfd, BodyOp::Disj) | (DefKind::Gfd, BodyOp::Conj) => false,
            };
            // An open literal helps the justified side when it makes the
            // body hold: as written for least, negated for greatest.
            let open_support = |l: &Literal| match node.kind {
                DefKind::Lfd => DlFormula::lit(*l),
                DefKind::Gfd => DlFormula::lit(Literal {
                    atom: l.atom,
                    positive: !l.positive,
                }),
            };

            if !bld.is_empty() {
                let clause = if demanding {
                    // Every recursive support sits strictly below the head
                    // (or fails, letting the completion handle the head).
                    DlFormula::And(
                        bld.iter()
                            .map(|l| {
                                DlFormula::Or(vec![
                                    DlFormula::le(level_of[&l.atom], lev_h, bound),
                                    defeat(l),
                                ])
                            })
                            .collect(),
                    )
                } else {
                    // Some support sits below the head, or an open literal
                    // carries the body by itself.
                    let mut arms: Vec<DlFormula> = bld
                        .iter()
                        .map(|l| {
                            DlFormula::And(vec![
                                DlFormula::le(level_of[&l.atom], lev_h, bound),
                                support(l),
                            ])
                        })
                        .collect();
                    arms.extend(blo.iter().map(|l| open_support(l)));
                    DlFormula::Or(arms)
                };
                out.clauses.push(DlFormula::implies(guard.clone(), clause));
            }

            if opts.strength == Strength::Strong && local {
                // Rank pinning: the justified head sits exactly one above
                // some supporting literal, or at the ground when nothing
                // recursive is needed.
                let eq_arm = |l: &Literal| {
                    DlFormula::And(vec![
                        DlFormula::le(lev_h, level_of[&l.atom], 1),
                        DlFormula::le(level_of[&l.atom], lev_h, -1),
                        support(l),
                    ])
                };
                let at_ground = DlFormula::le(lev_h, GROUND_LEVEL, 0);
                let clause = if bld.is_empty() {
                    at_ground
                } else if demanding {
                    DlFormula::Or(bld.iter().map(eq_arm).collect())
                } else {
                    let mut arms: Vec<DlFormula> = Vec::new();
                    if !blo.is_empty() {
                        arms.push(DlFormula::And(vec![
                            DlFormula::Or(blo.iter().map(|l| open_support(l)).collect()),
                            at_ground,
                        ]));
                    }
                    arms.extend(bld.iter().map(eq_arm));
                    DlFormula::Or(arms)
                };
                out.clauses.push(DlFormula::implies(guard, clause));
            }
        }
    }

    for (k, sub) in node.subdefs.iter().enumerate() {
        family_constraints(sub, &format!("{path}.{k}"), opts, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defnf::to_defnf;
    use crate::ground::ground;
    use crate::parser::parse_theory;

    fn reduce_src(src: &str, opts: ReduceOptions) -> DlTheory {
        let (t, _) = parse_theory(src).unwrap();
        let pt = ground(&t, &[], None).unwrap();
        reduce(&to_defnf(&pt), opts)
    }

    /// Exhaustive search for a level assignment satisfying the theory under
    /// fixed booleans, over a small grid of level values.
    fn some_levels_work(dl: &DlTheory, bools: &[bool]) -> bool {
        let k = dl.levels.len();
        let span = (k + 1) as i64;
        let mut levels = vec![0i64; k];
        fn go(dl: &DlTheory, bools: &[bool], levels: &mut Vec<i64>, i: usize, span: i64) -> bool {
            if i == levels.len() {
                return dl.check(bools, levels);
            }
            for v in 0..span {
                levels[i] = v;
                if go(dl, bools, levels, i + 1, span) {
                    return true;
                }
            }
            false
        }
        // The ground level can stay at zero: constraints only mention
        // differences, and the floor keeps everything at or above it.
        go(dl, bools, &mut levels, 1, span)
    }

    fn bools_by_name(dl: &DlTheory, names: &[(&str, bool)]) -> Vec<bool> {
        let mut out = vec![false; dl.atoms.len()];
        for &(n, v) in names {
            let id = dl
                .atoms
                .lookup(n, &[])
                .unwrap_or_else(|| panic!("no atom {n}"));
            out[id as usize] = v;
        }
        out
    }

    #[test]
    fn completion_alone_is_not_enough_on_a_cycle() {
        // p <- q | r, q <- p, r <- p: the completion admits the all-true
        // assignment, the level constraints reject it.
        let dl = reduce_src(
            "LFD {\n  p <- q | r.\n  q <- p.\n  r <- p.\n}\n",
            ReduceOptions {
                strength: Strength::Weak,
                scc: true,
            },
        );
        assert_eq!(dl.levels.len(), 4);
        let all_false = bools_by_name(&dl, &[]);
        assert!(some_levels_work(&dl, &all_false));
        let all_true = bools_by_name(&dl, &[("p", true), ("q", true), ("r", true)]);
        // The completion holds for all-true, yet no levels can justify it.
        assert!(!some_levels_work(&dl, &all_true));
    }

    #[test]
    fn acyclic_chains_need_no_levels_with_scc_on() {
        let on = reduce_src(
            "LFD {\n  p <- a.\n  q <- p.\n}\n",
            ReduceOptions::default(),
        );
        assert_eq!(on.levels.len(), 1);
        // Clauses: one per sentence (none), two completions, no pins.
        assert_eq!(on.clauses.len(), 2);

        let off = reduce_src(
            "LFD {\n  p <- a.\n  q <- p.\n}\n",
            ReduceOptions {
                strength: Strength::Strong,
                scc: false,
            },
        );
        assert_eq!(off.levels.len(), 3);
        // Both variants accept exactly the intended models.
        for (a, p, q) in [(false, false, false), (true, true, true)] {
            let bools = |dl: &DlTheory| bools_by_name(dl, &[("a", a), ("p", p), ("q", q)]);
            assert!(some_levels_work(&on, &bools(&on)));
            assert!(some_levels_work(&off, &bools(&off)));
        }
        for (a, p, q) in [(true, true, false), (false, true, true), (true, false, false)] {
            let bools = |dl: &DlTheory| bools_by_name(dl, &[("a", a), ("p", p), ("q", q)]);
            assert!(!some_levels_work(&on, &bools(&on)));
            assert!(!some_levels_work(&off, &bools(&off)));
        }
    }

    #[test]
    fn nested_families_use_weak_comparisons_for_inner_rules() {
        // The inner greatest definition sustains c and d; the outer least
        // family must not demand a strict descent across that cycle.
        let src = "LFD {\n  a <- c.\n  GFD {\n    c <- d.\n    d <- c.\n  }\n}\n";
        let dl = reduce_src(src, ReduceOptions::default());

        // Root family: a stays level-free (not on a cycle), c and d get
        // levels; the inner family levels c and d again.
        let names: Vec<&str> = dl.levels.iter().map(|s| s.as_str()).collect();
        assert_eq!(
            names,
            ["@ground", "lev@0:c", "lev@0:d", "lev@0.0:c", "lev@0.0:d"]
        );

        let strings = dl.clause_strings().join("\n");
        // Outer family compares weakly across the nested cycle.
        assert!(strings.contains("(<= (- lev@0:d lev@0:c) 0)"), "{strings}");
        // Inner family compares strictly around its own cycle.
        assert!(
            strings.contains("(<= (- lev@0.0:d lev@0.0:c) -1)"),
            "{strings}"
        );

        // All-true is the unique model; all-false dies on the inner family.
        let all_true = bools_by_name(&dl, &[("a", true), ("c", true), ("d", true)]);
        assert!(some_levels_work(&dl, &all_true));
        let all_false = bools_by_name(&dl, &[]);
        assert!(!some_levels_work(&dl, &all_false));
        // A mixed assignment falls to the completion before levels matter.
        let mixed = bools_by_name(&dl, &[("c", true), ("d", true)]);
        assert!(!some_levels_work(&dl, &mixed));
    }

    #[test]
    fn greatest_definitions_justify_falsity() {
        // In a greatest definition the cycle keeps p and q true; the level
        // constraints must reject the spurious all-false completion model.
        let dl = reduce_src(
            "GFD {\n  p <- q.\n  q <- p.\n}\n",
            ReduceOptions {
                strength: Strength::Weak,
                scc: true,
            },
        );
        let all_true = bools_by_name(&dl, &[("p", true), ("q", true)]);
        assert!(some_levels_work(&dl, &all_true));
        let all_false = bools_by_name(&dl, &[]);
        assert!(!some_levels_work(&dl, &all_false));
    }

    #[test]
    fn strong_reduction_pins_ranks_uniquely() {
        // Chain under scc off: p at the ground, q exactly one above.
        let dl = reduce_src(
            "LFD {\n  p <- a.\n  q <- p.\n}\n",
            ReduceOptions {
                strength: Strength::Strong,
                scc: false,
            },
        );
        let bools = bools_by_name(&dl, &[("a", true), ("p", true), ("q", true)]);
        // lev p = 0, lev q = 1 works.
        assert!(dl.check(&bools, &[0, 0, 1]));
        // Any other spacing violates the rank pins.
        assert!(!dl.check(&bools, &[0, 0, 2]));
        assert!(!dl.check(&bools, &[0, 1, 1]));
        assert!(!dl.check(&bools, &[0, 1, 0]));
    }

    #[test]
    fn reduction_is_deterministic() {
        let src = "?x: P(x).\nLFD {\n  P(x) <- Q(x) | ?y: E(x, y) & P(y).\n  Q(x) <- ?y: E(y, x) & Q(y).\n}\n";
        let (t, _) = parse_theory(src).unwrap();
        let domain: Vec<String> = ["e0", "e1"].map(String::from).to_vec();
        let a = reduce(&to_defnf(&ground(&t, &domain, None).unwrap()), ReduceOptions::default());
        let b = reduce(&to_defnf(&ground(&t, &domain, None).unwrap()), ReduceOptions::default());
        assert_eq!(a, b);
        assert_eq!(a.clause_strings(), b.clause_strings());
        // The floor closes the clause list: one bound per level variable.
        let n = a.clauses.len();
        let floors = a.levels.len() - 1;
        for (i, c) in a.clauses[n - floors..].iter().enumerate() {
            assert_eq!(
                c,
                &DlFormula::le(GROUND_LEVEL, (i + 1) as LevelId, 0),
                "floor clause {i}"
            );
        }
    }

    #[test]
    fn pins_keep_the_witness_unique_on_both_kinds() {
        for (src, truth) in [
            ("LFD {\n  p <- p.\n}\n", false),
            ("GFD {\n  p <- p.\n}\n", true),
        ] {
            let dl = reduce_src(src, ReduceOptions::default());
            assert_eq!(dl.levels.len(), 2);
            let bools = bools_by_name(&dl, &[("p", truth)]);
            // The pinned side must sit at the ground level; nothing else.
            assert!(dl.check(&bools, &[0, 0]));
            assert!(!dl.check(&bools, &[0, 1]));
            let wrong = bools_by_name(&dl, &[("p", !truth)]);
            assert!(!some_levels_work(&dl, &wrong));
        }
    }
}
