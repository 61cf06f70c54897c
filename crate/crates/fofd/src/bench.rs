//! Fairness model checking at parameterized sizes. A state of a transition
//! system is fair when every run from it keeps meeting `a`-labeled states;
//! the property is a greatest fixpoint wrapped around a least one. The
//! generators build total transition systems, and the bench drives each
//! instance through grounding, reduction, and the solver, reporting problem
//! sizes and wall times per row.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::defnf::to_defnf;
use crate::dlreduce::{reduce, ReduceOptions, Strength};
use crate::ground::ground;
use crate::logic::{Structure, Theory};
use crate::parser::parse_theory;
use crate::smt::{emit_name_map, emit_smt, lift_model, solve, SolverConfig, Verdict};

/// The fairness theory: a state satisfies P when every run from it keeps
/// passing states labeled by `a`.
pub const FAIRNESS: &str = "GFD {
  P(x) <- Q(x).
  LFD {
    Q(x) <- !y: Edge(x, y) => (L(y, a) & P(y)) | Q(y).
  }
}
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// A cycle through all states plus a few random chords.
    Ring,
    /// Layers of roughly equal width, each feeding the next, the last
    /// wrapping back to the first.
    Layered,
    /// One to three random successors per state.
    Random,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Ring => "ring",
            Shape::Layered => "layered",
            Shape::Random => "random",
        })
    }
}

/// A generated model-checking instance: the fairness theory plus a
/// transition system with states s0..s{n-1}, the label element `a`, a total
/// edge relation, and a random subset of `a`-labeled states.
#[derive(Debug, Clone)]
pub struct FairnessInstance {
    pub n: usize,
    pub shape: Shape,
    pub seed: u64,
    pub theory: Theory,
    pub structure: Structure,
}

/// Builds an instance, deterministic per (n, shape, seed). Every state gets
/// at least one outgoing edge, so infinite runs exist from every state. The
/// label element carries an unlabeled self-loop, which keeps it unfair
/// without special-casing it anywhere.
pub fn gen_fairness(n: usize, shape: Shape, seed: u64) -> FairnessInstance {
    assert!(n >= 1, "an instance needs at least one state");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = n as u32;
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    match shape {
        Shape::Ring => {
            for i in 0..states {
                edges.insert((i, (i + 1) % states));
            }
            for _ in 0..n / 3 {
                let from = rng.gen_range(0..states);
                let to = rng.gen_range(0..states);
                edges.insert((from, to));
            }
        }
        Shape::Layered => {
            let width = (1..=n).find(|w| w * w >= n).unwrap() as u32;
            let layers = (states + width - 1) / width;
            for i in 0..states {
                let next = (i / width + 1) % layers;
                let start = next * width;
                let end = (start + width).min(states);
                for _ in 0..rng.gen_range(1..=2u32) {
                    edges.insert((i, rng.gen_range(start..end)));
                }
            }
        }
        Shape::Random => {
            for i in 0..states {
                for _ in 0..rng.gen_range(1..=3u32) {
                    edges.insert((i, rng.gen_range(0..states)));
                }
            }
        }
    }
    let mut labeled: BTreeSet<u32> = BTreeSet::new();
    for i in 0..states {
        if rng.gen_bool(0.3) {
            labeled.insert(i);
        }
    }

    let mut domain: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    domain.push("a".to_string());
    let mut structure = Structure::new(domain);
    let label = states;
    structure.set_const("a", label);
    edges.insert((label, label));
    structure.set_rel("Edge", edges.into_iter().map(|(x, y)| vec![x, y]).collect());
    structure.set_rel("L", labeled.into_iter().map(|i| vec![i, label]).collect());
    let (theory, _) = parse_theory(FAIRNESS).expect("the fairness theory parses");
    FairnessInstance {
        n,
        shape,
        seed,
        theory,
        structure,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowStatus {
    Sat,
    Unsat,
    Unknown,
    Error(String),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Sat => "sat",
            RowStatus::Unsat => "unsat",
            RowStatus::Unknown => "unknown",
            RowStatus::Error(_) => "error",
        })
    }
}

/// One report row: reduction sizes, solver outcome, and the wall time of
/// the whole run from generation through lifting.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub strength: Strength,
    pub atoms: usize,
    pub clauses: usize,
    pub levels: usize,
    pub status: RowStatus,
    pub seconds: f64,
}

/// A row plus the artifacts behind it: the emitted problem, its name map,
/// and the lifted model when the solver produced one.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub row: BenchRow,
    pub smt2: String,
    pub names: String,
    pub model: Option<Structure>,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub shape: Shape,
    pub seed: u64,
    pub scc: bool,
    pub strengths: Vec<Strength>,
    pub solver: SolverConfig,
}

/// Runs one size under one strength through the full pipeline. Failures
/// along the way mark the row instead of aborting it.
pub fn run_instance(n: usize, strength: Strength, opts: &BenchOptions) -> RowOutcome {
    let start = Instant::now();
    let inst = gen_fairness(n, opts.shape, opts.seed);
    let domain = inst.structure.domain.clone();
    let row = |atoms, clauses, levels, status, start: Instant| BenchRow {
        size: n,
        strength,
        atoms,
        clauses,
        levels,
        status,
        seconds: start.elapsed().as_secs_f64(),
    };
    let pt = match ground(&inst.theory, &domain, Some(&inst.structure)) {
        Ok(pt) => pt,
        Err(e) => {
            return RowOutcome {
                row: row(0, 0, 0, RowStatus::Error(e.to_string()), start),
                smt2: String::new(),
                names: String::new(),
                model: None,
            }
        }
    };
    let dl = reduce(
        &to_defnf(&pt),
        ReduceOptions {
            strength,
            scc: opts.scc,
        },
    );
    let smt2 = emit_smt(&dl);
    let names = emit_name_map(&dl);
    let (status, model) = match solve(&dl, &opts.solver) {
        Ok(Verdict::Sat(m)) => match lift_model(&dl, &m, Some(&inst.structure)) {
            Ok(s) => (RowStatus::Sat, Some(s)),
            Err(e) => (RowStatus::Error(e.to_string()), None),
        },
        Ok(Verdict::Unsat) => (RowStatus::Unsat, None),
        Ok(Verdict::Unknown) => (RowStatus::Unknown, None),
        Err(e) => (RowStatus::Error(e.to_string()), None),
    };
    RowOutcome {
        row: row(
            dl.original_atoms,
            dl.clauses.len(),
            dl.levels.len(),
            status,
            start,
        ),
        smt2,
        names,
        model,
    }
}

/// Runs every size under every strength. Rows run concurrently, one solver
/// subprocess each; the report keeps input order, sizes major.
pub fn run_bench(sizes: &[usize], opts: &BenchOptions) -> Vec<RowOutcome> {
    let jobs: Vec<(usize, Strength)> = sizes
        .iter()
        .flat_map(|&n| opts.strengths.iter().map(move |&s| (n, s)))
        .collect();
    let mut out: Vec<Option<RowOutcome>> = jobs.iter().map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(n, s)| scope.spawn(move || run_instance(n, s, opts)))
            .collect();
        for (slot, h) in out.iter_mut().zip(handles) {
            *slot = Some(h.join().expect("a bench row panicked"));
        }
    });
    out.into_iter().map(Option::unwrap).collect()
}

fn row_cells(r: &BenchRow) -> [String; 7] {
    [
        r.size.to_string(),
        r.strength.to_string(),
        r.atoms.to_string(),
        r.clauses.to_string(),
        r.levels.to_string(),
        r.status.to_string(),
        format!("{:.3}", r.seconds),
    ]
}

/// The report as CSV: `size,strength,atoms,clauses,levels,status,seconds`.
pub fn csv_report(rows: &[RowOutcome]) -> String {
    let mut out = String::from("size,strength,atoms,clauses,levels,status,seconds\n");
    for o in rows {
        let _ = writeln!(out, "{}", row_cells(&o.row).join(","));
    }
    out
}

/// The report as an aligned text table, numeric columns right-justified.
pub fn text_report(rows: &[RowOutcome]) -> String {
    const HEADER: [&str; 7] = [
        "size", "strength", "atoms", "clauses", "levels", "status", "seconds",
    ];
    const RIGHT: [bool; 7] = [true, false, true, true, true, false, true];
    let cells: Vec<[String; 7]> = rows.iter().map(|o| row_cells(&o.row)).collect();
    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |row: &[String]| {
        let text = row
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if RIGHT[i] {
                    format!("{c:>w$}", w = widths[i])
                } else {
                    format!("{c:<w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ");
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(&HEADER.map(str::to_string));
    for row in &cells {
        line(row);
    }
    out
}
