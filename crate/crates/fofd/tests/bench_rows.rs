//! End-to-end checks for the fairness benchmark harness: rows must solve
//! through the real pipeline, agree with the evaluator, and repeat
//! byte-for-byte on the same seed.

mod common;

use common::bundled_solver;
use fofd::bench::{gen_fairness, run_bench, BenchOptions, RowStatus, Shape};
use fofd::dlreduce::Strength;
use fofd::eval::expand_definitions;
use fofd::logic::Structure;

fn evaluator_fair_states(n: usize, shape: Shape, seed: u64) -> Structure {
    let inst = gen_fairness(n, shape, seed);
    expand_definitions(&inst.theory, &inst.structure).expect("expand the fairness theory")
}

#[test]
fn rows_solve_and_agree_with_the_evaluator() {
    let opts = BenchOptions {
        shape: Shape::Random,
        seed: 3,
        scc: true,
        strengths: vec![Strength::Weak, Strength::Strong],
        solver: bundled_solver(),
    };
    let sizes = [4usize, 9];
    let outcomes = run_bench(&sizes, &opts);
    assert_eq!(outcomes.len(), 4);

    let expected_order = [
        (4usize, Strength::Weak),
        (4, Strength::Strong),
        (9, Strength::Weak),
        (9, Strength::Strong),
    ];
    for (outcome, (size, strength)) in outcomes.iter().zip(expected_order) {
        assert_eq!(outcome.row.size, size);
        assert_eq!(outcome.row.strength, strength);
        assert!(
            matches!(outcome.row.status, RowStatus::Sat),
            "row n={size} {strength} ended as {}",
            outcome.row.status
        );
        let expanded = evaluator_fair_states(size, opts.shape, opts.seed);
        let model = outcome.model.as_ref().expect("sat rows carry a model");
        assert_eq!(model.rel("P"), expanded.rel("P"), "P differs at n={size}");
        assert_eq!(model.rel("Q"), expanded.rel("Q"), "Q differs at n={size}");
        assert!(outcome.row.atoms > 0);
        assert!(outcome.row.clauses > 0);
    }

    // Artifacts are deterministic; only the timing column may move.
    let again = run_bench(&sizes, &opts);
    for (a, b) in outcomes.iter().zip(&again) {
        assert_eq!(a.smt2, b.smt2);
        assert_eq!(a.names, b.names);
    }
    let strip_seconds = |csv: &str| -> String {
        csv.lines()
            .map(|line| line.rsplit_once(',').expect("csv column").0.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let csv_a = fofd::bench::csv_report(&outcomes);
    let csv_b = fofd::bench::csv_report(&again);
    assert_eq!(strip_seconds(&csv_a), strip_seconds(&csv_b));
}
