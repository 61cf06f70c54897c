//! Decides satisfiability of quantifier-free integer difference logic,
//! read as an SMT-LIB script from a file argument or standard input.
//! Prints `sat` or `unsat`, and a model of `define-fun` lines when the
//! script asks for one.

mod front;
mod sexp;
mod solver;

use solver::Outcome;
use std::io::Read;
use std::process::ExitCode;

fn run() -> Result<ExitCode, String> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let input = match args.as_slice() {
        [] => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| e.to_string())?;
            buf
        }
        [path] => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        _ => return Err("usage: idlsat [FILE]".into()),
    };
    let cmds = sexp::parse_all(&input)?;
    let script = front::read_script(&cmds)?;
    let cnf = front::compile(&script);
    let mut solver = solver::Solver::new(cnf);
    let outcome = solver.solve();
    if script.check_sat {
        match outcome {
            Outcome::Sat => println!("sat"),
            Outcome::Unsat => println!("unsat"),
        }
    }
    if script.get_model {
        match outcome {
            Outcome::Sat => {
                println!("(");
                for (i, name) in script.bools.iter().enumerate() {
                    println!(
                        "  (define-fun {name} () Bool {})",
                        if solver.model_bool(i) { "true" } else { "false" }
                    );
                }
                for (i, name) in script.ints.iter().enumerate() {
                    let v = solver.model_int(i);
                    if v < 0 {
                        println!("  (define-fun {name} () Int (- {}))", -v);
                    } else {
                        println!("  (define-fun {name} () Int {v})");
                    }
                }
                println!(")");
            }
            Outcome::Unsat => println!("(error \"model is not available\")"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
