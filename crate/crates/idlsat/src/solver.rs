//! Conflict-driven clause learning with a difference-logic theory.
//!
//! The boolean search is standard: two watched literals, first-UIP
//! learning, activity-ordered decisions with phase saving, Luby restarts.
//! Difference atoms are checked eagerly: asserting one adds an edge to a
//! constraint graph kept feasible through a potential function; a failed
//! repair yields the negative cycle as a conflict clause. Everything is
//! deterministic: ties break on variable index and nothing draws
//! randomness.

use crate::front::{Cnf, Lit};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Sat,
    Unsat,
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn is_neg(l: Lit) -> bool {
    l & 1 == 1
}

fn lit_value(assign: &[i8], l: Lit) -> i8 {
    let a = assign[var(l)];
    if is_neg(l) {
        -a
    } else {
        a
    }
}

/// Max-activity variable queue with index tie-breaking, as a binary heap
/// with lazy deletion.
struct VarOrder {
    heap: BinaryHeap<(u64, Reverse<usize>)>,
    activity: Vec<f64>,
    inc: f64,
}

impl VarOrder {
    fn new(n: usize) -> VarOrder {
        let mut heap = BinaryHeap::with_capacity(n);
        for v in 0..n {
            heap.push((0, Reverse(v)));
        }
        VarOrder {
            heap,
            activity: vec![0.0; n],
            inc: 1.0,
        }
    }

    /// Activities are nonnegative finite floats, so their bit patterns
    /// order the same way the values do.
    fn key(a: f64) -> u64 {
        a.to_bits()
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.inc *= 1e-100;
        }
        self.heap.push((Self::key(self.activity[v]), Reverse(v)));
    }

    fn decay(&mut self) {
        self.inc /= 0.95;
    }

    fn reinsert(&mut self, v: usize) {
        self.heap.push((Self::key(self.activity[v]), Reverse(v)));
    }

    fn pop_unassigned(&mut self, assign: &[i8]) -> Option<usize> {
        while let Some((key, Reverse(v))) = self.heap.pop() {
            if key != Self::key(self.activity[v]) {
                continue;
            }
            if assign[v] == 0 {
                return Some(v);
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    weight: i64,
    lit: Lit,
    active: bool,
}

/// Incremental feasibility of difference constraints `x - y <= c`, kept
/// as edges `y -> x` of weight `c` with a potential function satisfying
/// `pot(to) <= pot(from) + weight` on every active edge.
struct DiffGraph {
    pot: Vec<i64>,
    edges: Vec<Edge>,
    out: Vec<Vec<u32>>,
    /// Edge index asserted per trail-synced step, for backtracking.
    asserted: Vec<(usize, u32)>,
    /// Per boolean variable, the edge for each polarity, created lazily.
    by_var: Vec<[i32; 2]>,
    gamma: Vec<i64>,
    parent: Vec<u32>,
    settled: Vec<bool>,
}

impl DiffGraph {
    fn new(nints: usize, nvars: usize) -> DiffGraph {
        DiffGraph {
            pot: vec![0; nints],
            edges: Vec::new(),
            out: vec![Vec::new(); nints],
            asserted: Vec::new(),
            by_var: vec![[-1, -1]; nvars],
            gamma: vec![0; nints],
            parent: vec![0; nints],
            settled: vec![false; nints],
        }
    }

    /// Asserts the constraint attached to `l`, whose variable stands for
    /// `x - y <= c`. Returns the literals of a negative cycle on failure.
    fn assert_lit(
        &mut self,
        l: Lit,
        x: usize,
        y: usize,
        c: i64,
        trail_pos: usize,
    ) -> Result<(), Vec<Lit>> {
        let slot = is_neg(l) as usize;
        let idx = if self.by_var[var(l)][slot] >= 0 {
            self.by_var[var(l)][slot] as u32
        } else {
            // Positive: x - y <= c gives y -> x at c. Negative:
            // y - x <= -c-1 gives x -> y at -c-1.
            let (from, to, weight) = if slot == 0 { (y, x, c) } else { (x, y, -c - 1) };
            let idx = self.edges.len() as u32;
            self.edges.push(Edge {
                from,
                to,
                weight,
                lit: l,
                active: false,
            });
            self.out[from].push(idx);
            self.by_var[var(l)][slot] = idx as i32;
            idx
        };
        let e = self.edges[idx as usize];
        if e.active {
            // Already asserted below the current trail position.
            return Ok(());
        }
        self.asserted.push((trail_pos, idx));
        self.edges[idx as usize].active = true;
        if self.pot[e.to] <= self.pot[e.from] + e.weight {
            return Ok(());
        }
        self.repair(idx)
    }

    /// Restores the potential invariant after activating edge `idx`, by a
    /// Dijkstra pass over reduced costs; reaching the edge's source again
    /// means a negative cycle.
    fn repair(&mut self, idx: u32) -> Result<(), Vec<Lit>> {
        let new = self.edges[idx as usize];
        let mut touched: Vec<usize> = Vec::new();
        let mut heap: BinaryHeap<(Reverse<i64>, Reverse<usize>)> = BinaryHeap::new();
        self.gamma[new.to] = self.pot[new.from] + new.weight - self.pot[new.to];
        self.parent[new.to] = idx;
        touched.push(new.to);
        heap.push((Reverse(self.gamma[new.to]), Reverse(new.to)));
        let mut result = Ok(());
        while let Some((Reverse(g), Reverse(n))) = heap.pop() {
            if self.settled[n] || g != self.gamma[n] {
                continue;
            }
            if n == new.from {
                // Negative cycle: the relaxation chain from the new edge's
                // target reached its source, closing a loop through it.
                let mut lits = Vec::new();
                let mut at = n;
                while at != new.to {
                    let e = self.edges[self.parent[at] as usize];
                    lits.push(e.lit);
                    at = e.from;
                }
                lits.push(new.lit);
                result = Err(lits);
                break;
            }
            self.settled[n] = true;
            let base = self.pot[n] + g;
            for &ei in &self.out[n] {
                let e = self.edges[ei as usize];
                if !e.active || self.settled[e.to] {
                    continue;
                }
                let cand = base + e.weight - self.pot[e.to];
                if cand < 0 && (self.gamma[e.to] >= 0 || cand < self.gamma[e.to]) {
                    if self.gamma[e.to] >= 0 {
                        touched.push(e.to);
                    }
                    self.gamma[e.to] = cand;
                    self.parent[e.to] = ei;
                    heap.push((Reverse(cand), Reverse(e.to)));
                }
            }
        }
        if result.is_ok() {
            for &n in &touched {
                if self.settled[n] {
                    self.pot[n] += self.gamma[n];
                }
            }
        }
        for &n in &touched {
            self.gamma[n] = 0;
            self.settled[n] = false;
        }
        result
    }

    /// Deactivates every edge asserted at or beyond the trail position.
    fn backtrack_to(&mut self, trail_len: usize) {
        while let Some(&(pos, idx)) = self.asserted.last() {
            if pos < trail_len {
                break;
            }
            self.edges[idx as usize].active = false;
            self.asserted.pop();
        }
    }
}

pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<i8>,
    phase: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<i32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    theory_qhead: usize,
    order: VarOrder,
    theory: Vec<Option<(usize, usize, i64)>>,
    graph: DiffGraph,
    seen: Vec<bool>,
    conflicts: u64,
    unsat: bool,
}

impl Solver {
    pub fn new(cnf: Cnf) -> Solver {
        let n = cnf.nvars;
        let mut s = Solver {
            clauses: Vec::with_capacity(cnf.clauses.len()),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![0; n],
            phase: vec![false; n],
            level: vec![0; n],
            reason: vec![-1; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            theory_qhead: 0,
            order: VarOrder::new(n),
            graph: DiffGraph::new(cnf.nints, n),
            theory: cnf.theory,
            seen: vec![false; n],
            conflicts: 0,
            unsat: cnf.contradiction,
        };
        for clause in cnf.clauses {
            s.add_clause(clause);
        }
        s
    }

    fn value_lit(&self, l: Lit) -> i8 {
        lit_value(&self.assign, l)
    }

    fn add_clause(&mut self, mut lits: Vec<Lit>) {
        if self.unsat {
            return;
        }
        lits.sort_unstable();
        lits.dedup();
        // A clause holding l and not l is vacuous.
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return;
        }
        match lits.len() {
            0 => self.unsat = true,
            1 => {
                match self.value_lit(lits[0]) {
                    -1 => self.unsat = true,
                    0 => self.enqueue(lits[0], -1),
                    _ => {}
                };
            }
            _ => {
                let ci = self.clauses.len() as u32;
                self.watches[lits[0] as usize].push(ci);
                self.watches[lits[1] as usize].push(ci);
                self.clauses.push(lits);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: i32) {
        let v = var(l);
        debug_assert_eq!(self.assign[v], 0);
        self.assign[v] = if is_neg(l) { -1 } else { 1 };
        self.phase[v] = !is_neg(l);
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let fl = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[fl as usize]);
            let mut kept = 0;
            let mut i = 0;
            let mut conflict = None;
            'clauses: while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci as usize];
                if clause[0] == fl {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if lit_value(&self.assign, first) == 1 {
                    ws[kept] = ci;
                    kept += 1;
                    continue;
                }
                for k in 2..clause.len() {
                    if lit_value(&self.assign, clause[k]) != -1 {
                        clause.swap(1, k);
                        self.watches[clause[1] as usize].push(ci);
                        continue 'clauses;
                    }
                }
                ws[kept] = ci;
                kept += 1;
                if lit_value(&self.assign, first) == -1 {
                    while i < ws.len() {
                        ws[kept] = ws[i];
                        kept += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                    conflict = Some(ci);
                    break;
                }
                self.enqueue(first, ci as i32);
            }
            ws.truncate(kept);
            self.watches[fl as usize] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// Feeds newly assigned difference atoms to the graph; a negative
    /// cycle becomes a learned conflict clause.
    fn theory_check(&mut self) -> Option<u32> {
        while self.theory_qhead < self.trail.len() {
            let pos = self.theory_qhead;
            let l = self.trail[pos];
            self.theory_qhead += 1;
            if let Some((x, y, c)) = self.theory[var(l)] {
                if let Err(cycle) = self.graph.assert_lit(l, x, y, c, pos) {
                    let mut clause: Vec<Lit> = cycle.into_iter().map(|cl| cl ^ 1).collect();
                    // Watch the two deepest literals so the clause wakes up
                    // again once the conflict level is undone.
                    clause.sort_by_key(|&q| std::cmp::Reverse(self.level[var(q)]));
                    let ci = self.clauses.len() as u32;
                    self.watches[clause[0] as usize].push(ci);
                    self.watches[clause.get(1).copied().unwrap_or(clause[0]) as usize]
                        .push(ci);
                    self.clauses.push(clause);
                    return Some(ci);
                }
            }
        }
        None
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target as usize];
        self.graph.backtrack_to(bound);
        for i in (bound..self.trail.len()).rev() {
            let v = var(self.trail[i]);
            self.assign[v] = 0;
            self.reason[v] = -1;
            self.order.reinsert(v);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target as usize);
        self.qhead = bound;
        self.theory_qhead = self.theory_qhead.min(bound);
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first) and the level to jump back to.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let clause = &self.clauses[confl as usize];
            let start = if p.is_none() { 0 } else { 1 };
            for &q in &clause[start..] {
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.order.bump(v);
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let pl = self.trail[idx];
            let v = var(pl);
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = pl ^ 1;
                break;
            }
            p = Some(pl);
            confl = self.reason[v] as u32;
        }
        for &q in &learnt[1..] {
            self.seen[var(q)] = false;
        }
        // Jump to the deepest level below the conflict; put a literal of
        // that level in the second watch slot.
        let mut back = 0;
        let mut at = 1;
        for k in 1..learnt.len() {
            if self.level[var(learnt[k])] > back {
                back = self.level[var(learnt[k])];
                at = k;
            }
        }
        if learnt.len() > 1 {
            learnt.swap(1, at);
        }
        (learnt, back)
    }

    fn learn(&mut self, learnt: Vec<Lit>) {
        let asserting = learnt[0];
        if learnt.len() == 1 {
            self.enqueue(asserting, -1);
            return;
        }
        let ci = self.clauses.len() as u32;
        self.watches[learnt[0] as usize].push(ci);
        self.watches[learnt[1] as usize].push(ci);
        self.clauses.push(learnt);
        self.enqueue(asserting, ci as i32);
    }

    fn luby(i: u64) -> u64 {
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < i + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        let mut i = i;
        while size - 1 != i {
            size = (size - 1) / 2;
            seq -= 1;
            i %= size;
        }
        1 << seq
    }

    pub fn solve(&mut self) -> Outcome {
        if self.unsat {
            return Outcome::Unsat;
        }
        let mut restart_round = 0u64;
        let mut budget = Self::luby(restart_round) * 128;
        loop {
            let conflict = self.propagate().or_else(|| self.theory_check());
            match conflict {
                Some(ci) => {
                    self.conflicts += 1;
                    // A theory conflict can surface while catching up on a
                    // lower part of the trail; analysis wants the level the
                    // conflicting clause actually lives at.
                    let cmax = self.clauses[ci as usize]
                        .iter()
                        .map(|&l| self.level[var(l)])
                        .max()
                        .unwrap();
                    self.cancel_until(cmax);
                    if self.decision_level() == 0 {
                        return Outcome::Unsat;
                    }
                    let (learnt, back) = self.analyze(ci);
                    self.cancel_until(back);
                    self.learn(learnt);
                    self.order.decay();
                    if self.conflicts >= budget {
                        restart_round += 1;
                        budget = self.conflicts + Self::luby(restart_round) * 128;
                        self.cancel_until(0);
                    }
                }
                None => match self.order.pop_unassigned(&self.assign) {
                    Some(v) => {
                        self.trail_lim.push(self.trail.len());
                        let l = (v as u32) << 1 | !self.phase[v] as u32;
                        self.enqueue(l, -1);
                    }
                    None => return Outcome::Sat,
                },
            }
        }
    }

    /// Truth value of a variable in the found model.
    pub fn model_bool(&self, v: usize) -> bool {
        self.assign[v] == 1
    }

    /// Integer value of a level variable in the found model: the potential
    /// function is a solution of the active constraints.
    pub fn model_int(&self, x: usize) -> i64 {
        self.graph.pot[x]
    }
}
