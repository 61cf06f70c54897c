//! Command-line front end. Every subcommand is a thin composition of the
//! library modules; exit codes are 0 for success or a satisfiable result,
//! 1 for unsatisfiable or not-a-model, 2 for usage and input errors, and
//! 3 for solver failures.

use clap::{Parser, Subcommand, ValueEnum};
use fofd::bench::{self, BenchOptions, RowStatus, Shape};
use fofd::defnf::to_defnf;
use fofd::dlreduce::{reduce, ReduceOptions, Strength};
use fofd::eval::{check_model, expand_definitions};
use fofd::ground::{ground, print_prop_theory};
use fofd::logic::{Structure, Theory};
use fofd::parser::{
    describe_violations, parse_gid_theory, parse_structure, parse_theory, print_structure,
    print_theory,
};
use fofd::smt::{discover_solver, emit_name_map, emit_smt, lift_model, solve, Verdict};
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Parser)]
#[command(name = "fofd", version, about = "Model expansion for nested fixpoint definitions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrengthOpt {
    Weak,
    Strong,
}

impl From<StrengthOpt> for Strength {
    fn from(s: StrengthOpt) -> Strength {
        match s {
            StrengthOpt::Weak => Strength::Weak,
            StrengthOpt::Strong => Strength::Strong,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SccOpt {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeOpt {
    Ring,
    Layered,
    Random,
}

impl From<ShapeOpt> for Shape {
    fn from(s: ShapeOpt) -> Shape {
        match s {
            ShapeOpt::Ring => Shape::Ring,
            ShapeOpt::Layered => Shape::Layered,
            ShapeOpt::Random => Shape::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainOpt {
    /// Singleton domain for theories without a structure file.
    Unit,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a theory against a structure: report the model verdict, or
    /// compute the defined relations when the structure leaves them out.
    Check {
        theory: PathBuf,
        structure: PathBuf,
    },
    /// Ground a theory over a finite domain into a propositional theory.
    Ground {
        theory: PathBuf,
        structure: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: Option<DomainOpt>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground and reduce to difference logic; writes an SMT-LIB script and
    /// a name map next to it.
    Reduce {
        theory: PathBuf,
        structure: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: Option<DomainOpt>,
        #[arg(long, value_enum, default_value = "strong")]
        strength: StrengthOpt,
        #[arg(long, value_enum, default_value = "on")]
        scc: SccOpt,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole pipeline and print a model structure or "unsat".
    Solve {
        theory: PathBuf,
        structure: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: Option<DomainOpt>,
        #[arg(long, value_enum, default_value = "strong")]
        strength: StrengthOpt,
        #[arg(long, value_enum, default_value = "on")]
        scc: SccOpt,
        #[arg(long)]
        solver: Option<String>,
        /// Solver deadline in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a rule-set theory with negation into nested fixpoint form.
    TransformId {
        theory: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate fairness instances, run the pipeline, and print a report.
    Bench {
        /// State counts, one row per size and strength.
        #[arg(required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value = "ring")]
        shape: ShapeOpt,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to one reduction strength; default runs both.
        #[arg(long, value_enum)]
        strength: Option<StrengthOpt>,
        #[arg(long, value_enum, default_value = "on")]
        scc: SccOpt,
        #[arg(long)]
        solver: Option<String>,
        /// Solver deadline per row in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
        /// Directory for the generated theory, structures, scripts, and CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    msg: String,
}

fn fail(code: i32, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn load_theory(path: &Path) -> Result<Theory, Failure> {
    let src = read(path)?;
    let (theory, spans) =
        parse_theory(&src).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let violations = describe_violations(&theory, &spans);
    if !violations.is_empty() {
        return Err(fail(
            2,
            format!("{}:\n  {}", path.display(), violations.join("\n  ")),
        ));
    }
    Ok(theory)
}

fn load_structure(path: &Path) -> Result<Structure, Failure> {
    let src = read(path)?;
    parse_structure(&src).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

/// The grounding context a subcommand was given: an interpreted structure,
/// a bare domain, or nothing (constants-only domain).
fn grounding_frame(
    structure: &Option<PathBuf>,
    domain: Option<DomainOpt>,
) -> Result<(Vec<String>, Option<Structure>), Failure> {
    match (structure, domain) {
        (Some(_), Some(_)) => Err(fail(2, "--domain conflicts with a structure file")),
        (Some(path), None) => {
            let s = load_structure(path)?;
            Ok((s.domain.clone(), Some(s)))
        }
        (None, Some(DomainOpt::Unit)) => Ok((vec!["u".to_string()], None)),
        (None, None) => Ok((Vec::new(), None)),
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| fail(2, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solver_config(explicit: Option<&str>, timeout: u64) -> Result<fofd::smt::SolverConfig, Failure> {
    let mut cfg = discover_solver(explicit)
        .ok_or_else(|| fail(3, "no difference-logic solver found; pass --solver"))?;
    cfg.timeout = Duration::from_secs(timeout);
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Check { theory, structure } => {
            let t = load_theory(&theory)?;
            let s = load_structure(&structure)?;
            let defined: Vec<String> = t
                .defs
                .iter()
                .flat_map(|d| d.defined_predicates())
                .collect();
            let interpreted = defined.iter().filter(|p| s.interprets(p)).count();
            if interpreted == defined.len() {
                let ok = check_model(&t, &s).map_err(|e| fail(2, e.to_string()))?;
                if ok {
                    println!("model");
                    Ok(0)
                } else {
                    println!("not a model");
                    Ok(1)
                }
            } else if interpreted == 0 {
                let expanded = expand_definitions(&t, &s).map_err(|e| fail(2, e.to_string()))?;
                let ok = check_model(&t, &expanded).map_err(|e| fail(2, e.to_string()))?;
                if ok {
                    print!("{}", print_structure(&expanded));
                    Ok(0)
                } else {
                    println!("not a model");
                    Ok(1)
                }
            } else {
                Err(fail(
                    2,
                    "structure interprets some defined predicates but not all; \
                     interpret every defined predicate or none",
                ))
            }
        }
        Cmd::Ground {
            theory,
            structure,
            domain,
            out,
        } => {
            let t = load_theory(&theory)?;
            let (dom, frame) = grounding_frame(&structure, domain)?;
            let pt = ground(&t, &dom, frame.as_ref()).map_err(|e| fail(2, e.to_string()))?;
            emit(&print_prop_theory(&pt), &out)?;
            Ok(0)
        }
        Cmd::Reduce {
            theory,
            structure,
            domain,
            strength,
            scc,
            out,
        } => {
            let t = load_theory(&theory)?;
            let (dom, frame) = grounding_frame(&structure, domain)?;
            let pt = ground(&t, &dom, frame.as_ref()).map_err(|e| fail(2, e.to_string()))?;
            let dl = reduce(
                &to_defnf(&pt),
                ReduceOptions {
                    strength: strength.into(),
                    scc: matches!(scc, SccOpt::On),
                },
            );
            emit(&emit_smt(&dl), &Some(out.clone()))?;
            emit(&emit_name_map(&dl), &Some(out.with_extension("names")))?;
            Ok(0)
        }
        Cmd::Solve {
            theory,
            structure,
            domain,
            strength,
            scc,
            solver,
            timeout,
            out,
        } => {
            let t = load_theory(&theory)?;
            let (dom, frame) = grounding_frame(&structure, domain)?;
            let pt = ground(&t, &dom, frame.as_ref()).map_err(|e| fail(2, e.to_string()))?;
            let dl = reduce(
                &to_defnf(&pt),
                ReduceOptions {
                    strength: strength.into(),
                    scc: matches!(scc, SccOpt::On),
                },
            );
            let cfg = solver_config(solver.as_deref(), timeout)?;
            match solve(&dl, &cfg).map_err(|e| fail(3, e.to_string()))? {
                Verdict::Sat(model) => {
                    let lifted = lift_model(&dl, &model, frame.as_ref())
                        .map_err(|e| fail(3, e.to_string()))?;
                    emit(&print_structure(&lifted), &out)?;
                    Ok(0)
                }
                Verdict::Unsat => {
                    println!("unsat");
                    Ok(1)
                }
                Verdict::Unknown => Err(fail(3, "solver returned unknown")),
            }
        }
        Cmd::TransformId { theory, out } => {
            let src = read(&theory)?;
            let gid =
                parse_gid_theory(&src).map_err(|e| fail(2, format!("{}: {e}", theory.display())))?;
            let transform =
                fofd::foid::transform_theory(&gid).map_err(|e| fail(2, e.to_string()))?;
            emit(&print_theory(&transform.theory), &out)?;
            Ok(0)
        }
        Cmd::Bench {
            sizes,
            shape,
            seed,
            strength,
            scc,
            solver,
            timeout,
            out,
        } => {
            let strengths = match strength {
                Some(s) => vec![s.into()],
                None => vec![Strength::Weak, Strength::Strong],
            };
            let opts = BenchOptions {
                shape: shape.into(),
                seed,
                scc: matches!(scc, SccOpt::On),
                strengths,
                solver: solver_config(solver.as_deref(), timeout)?,
            };
            let outcomes = bench::run_bench(&sizes, &opts);
            print!("{}", bench::text_report(&outcomes));
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir)
                    .map_err(|e| fail(2, format!("{}: {e}", dir.display())))?;
                let write = |name: String, text: &str| -> Result<(), Failure> {
                    let path = dir.join(name);
                    std::fs::write(&path, text)
                        .map_err(|e| fail(2, format!("{}: {e}", path.display())))
                };
                write("fairness.fofd".to_string(), bench::FAIRNESS)?;
                for &n in &sizes {
                    let inst = bench::gen_fairness(n, opts.shape, opts.seed);
                    write(
                        format!("fairness_n{n}.struct"),
                        &print_structure(&inst.structure),
                    )?;
                }
                for o in &outcomes {
                    let stem = format!("fairness_n{}_{}", o.row.size, o.row.strength);
                    write(format!("{stem}.smt2"), &o.smt2)?;
                    write(format!("{stem}.names"), &o.names)?;
                }
                write("report.csv".to_string(), &bench::csv_report(&outcomes))?;
            }
            let clean = outcomes
                .iter()
                .all(|o| matches!(o.row.status, RowStatus::Sat | RowStatus::Unsat));
            Ok(if clean { 0 } else { 3 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            std::process::exit(f.code);
        }
    }
}
