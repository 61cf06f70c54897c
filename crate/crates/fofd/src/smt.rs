//! SMT-LIB emission for difference-logic theories and the round trip
//! through an external solver: write the script, run the solver with a
//! deadline, parse its verdict and model, and lift the model back to a
//! first-order structure.

use crate::dlreduce::{DiffOp, DlFormula, DlTheory, GROUND_LEVEL};
use crate::ground::AtomId;
use crate::logic::Structure;
use std::fmt::Write as _;
use std::io::{Read, Seek, SeekFrom, Write as _};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

/// Boolean atoms become `b<id>`, level variables `l<id>`; the ground level
/// is always `l0`.
fn bool_name(a: AtomId) -> String {
    format!("b{a}")
}

fn level_name(v: u32) -> String {
    format!("l{v}")
}

fn smt_formula(f: &DlFormula, out: &mut String) {
    match f {
        DlFormula::Bool(a) => out.push_str(&bool_name(*a)),
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
            let c = if *constant < 0 {
                format!("(- {})", -constant)
            } else {
                constant.to_string()
            };
            let _ = write!(
                out,
                "({op} (- {} {}) {c})",
                level_name(*minuend),
                level_name(*subtrahend)
            );
        }
        DlFormula::Not(g) => {
            out.push_str("(not ");
            smt_formula(g, out);
            out.push(')');
        }
        DlFormula::And(gs) if gs.is_empty() => out.push_str("true"),
        DlFormula::Or(gs) if gs.is_empty() => out.push_str("false"),
        DlFormula::And(gs) | DlFormula::Or(gs) => {
            out.push_str(if matches!(f, DlFormula::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for g in gs {
                out.push(' ');
                smt_formula(g, out);
            }
            out.push(')');
        }
        DlFormula::Implies(a, b) => {
            out.push_str("(=> ");
            smt_formula(a, out);
            out.push(' ');
            smt_formula(b, out);
            out.push(')');
        }
        DlFormula::Iff(a, b) => {
            out.push_str("(= ");
            smt_formula(a, out);
            out.push(' ');
            smt_formula(b, out);
            out.push(')');
        }
    }
}

/// Renders the theory as an SMT-LIB script, one assertion per clause, with
/// a final check-sat and get-model.
pub fn emit_smt(dl: &DlTheory) -> String {
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n(set-logic QF_IDL)\n");
    for (id, _) in dl.atoms.iter() {
        let _ = writeln!(out, "(declare-fun {} () Bool)", bool_name(id));
    }
    for v in 0..dl.levels.len() as u32 {
        let _ = writeln!(out, "(declare-fun {} () Int)", level_name(v));
    }
    for c in &dl.clauses {
        out.push_str("(assert ");
        smt_formula(c, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Tab-separated map from script symbols back to atom and level names.
pub fn emit_name_map(dl: &DlTheory) -> String {
    let mut out = String::new();
    for (id, _) in dl.atoms.iter() {
        let _ = writeln!(out, "{}\t{}", bool_name(id), dl.atoms.name(id));
    }
    for (v, name) in dl.levels.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}", level_name(v as u32), name);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtModel {
    /// Truth values indexed by atom id; unmentioned atoms default false.
    pub bools: Vec<bool>,
    /// Level values indexed by level id; unmentioned levels default 0.
    pub levels: Vec<i64>,
    /// Original atoms the solver left out of its model.
    pub defaulted: Vec<AtomId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(SmtModel),
    Unsat,
    Unknown,
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("failed to run {path}: {source}")]
    Spawn {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("solver exceeded the {0:?} deadline")]
    Timeout(Duration),
    #[error("solver reported: {0}")]
    Reported(String),
    #[error("could not parse solver output: {0}")]
    Unparseable(String),
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut toks = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find(|c: char| !c.is_whitespace()) {
        rest = &rest[i..];
        let len = match rest.as_bytes()[0] {
            b'(' | b')' => 1,
            b'"' => rest[1..].find('"').map(|j| j + 2).unwrap_or(rest.len()),
            _ => rest
                .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                .unwrap_or(rest.len()),
        };
        toks.push(&rest[..len]);
        rest = &rest[len..];
    }
    toks
}

/// Parses solver output: a verdict line followed, for satisfiable
/// problems, by `define-fun` values in any of the common layouts.
pub fn parse_output(text: &str, dl: &DlTheory) -> Result<Verdict, SolverError> {
    let toks = tokenize(text);
    let mut verdict: Option<&str> = None;
    let mut i = 0;
    while i < toks.len() {
        match toks[i] {
            "sat" | "unsat" | "unknown" => {
                verdict = Some(toks[i]);
                i += 1;
                break;
            }
            "error" => {
                let msg = toks.get(i + 1).copied().unwrap_or("").trim_matches('"');
                return Err(SolverError::Reported(msg.to_string()));
            }
            _ => i += 1,
        }
    }
    match verdict {
        Some("unsat") => return Ok(Verdict::Unsat),
        Some("unknown") => return Ok(Verdict::Unknown),
        Some("sat") => {}
        _ => return Err(SolverError::Unparseable(text.trim().to_string())),
    }

    let mut model = SmtModel {
        bools: vec![false; dl.atoms.len()],
        levels: vec![0; dl.levels.len()],
        defaulted: Vec::new(),
    };
    let mut seen = vec![false; dl.atoms.len()];
    while i < toks.len() {
        if toks[i] != "define-fun" {
            i += 1;
            continue;
        }
        let name = *toks.get(i + 1).ok_or_else(|| {
            SolverError::Unparseable("truncated define-fun".into())
        })?;
        // Skip the empty argument list and the sort.
        let mut j = i + 2;
        if toks.get(j) == Some(&"(") && toks.get(j + 1) == Some(&")") {
            j += 2;
        }
        j += 1;
        let value = match toks.get(j) {
            Some(&"true") => Ok(true),
            Some(&"false") => Ok(false),
            Some(&"(") => {
                // A negative numeral (- k).
                let k: i64 = toks
                    .get(j + 2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| SolverError::Unparseable(format!("bad value for {name}")))?;
                j += 3;
                Err(-k)
            }
            Some(t) => Err(t
                .parse::<i64>()
                .map_err(|_| SolverError::Unparseable(format!("bad value for {name}")))?),
            None => return Err(SolverError::Unparseable("truncated define-fun".into())),
        };
        match (name.strip_prefix('b'), name.strip_prefix('l'), value) {
            (Some(id), _, Ok(v)) => {
                if let Ok(id) = id.parse::<usize>() {
                    if id < model.bools.len() {
                        model.bools[id] = v;
                        seen[id] = true;
                    }
                }
            }
            (_, Some(id), Err(v)) => {
                if let Ok(id) = id.parse::<usize>() {
                    if id < model.levels.len() {
                        model.levels[id] = v;
                    }
                }
            }
            _ => {}
        }
        i = j + 1;
    }
    for (id, flag) in seen.iter().enumerate() {
        if !flag && id < dl.original_atoms {
            model.defaulted.push(id as AtomId);
        }
    }
    // The script fixes the ground level only relative to others; shift the
    // whole assignment so it sits at zero for readability.
    let shift = model.levels.get(GROUND_LEVEL as usize).copied().unwrap_or(0);
    for v in &mut model.levels {
        *v -= shift;
    }
    Ok(Verdict::Sat(model))
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    /// Configuration for a solver binary, with arguments chosen by its
    /// file name.
    pub fn for_binary(path: PathBuf) -> SolverConfig {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("")
            .to_string();
        let args = match stem.as_str() {
            "z3" => vec!["-smt2".to_string()],
            _ => Vec::new(),
        };
        SolverConfig {
            path,
            args,
            timeout: Duration::from_secs(60),
        }
    }
}

/// Finds a solver: an explicit path or command name wins, then well-known
/// solvers on PATH, then the bundled one next to the running executable.
pub fn discover_solver(explicit: Option<&str>) -> Option<SolverConfig> {
    if let Some(name) = explicit {
        let path = PathBuf::from(name);
        if path.components().count() > 1 {
            return Some(SolverConfig::for_binary(path));
        }
        return find_on_path(name)
            .map(SolverConfig::for_binary)
            .or(Some(SolverConfig::for_binary(path)));
    }
    for name in ["yices-smt2", "z3", "cvc5"] {
        if let Some(path) = find_on_path(name) {
            return Some(SolverConfig::for_binary(path));
        }
    }
    let exe = std::env::current_exe().ok()?;
    let file = format!("idlsat{}", std::env::consts::EXE_SUFFIX);
    for dir in [exe.parent(), exe.parent().and_then(Path::parent)]
        .into_iter()
        .flatten()
    {
        let candidate = dir.join(&file);
        if candidate.is_file() {
            return Some(SolverConfig::for_binary(candidate));
        }
    }
    None
}

fn find_on_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path) {
        let candidate = dir.join(name);
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

/// Runs the solver on the emitted script, enforcing the deadline by
/// polling and killing the process when it expires.
pub fn solve(dl: &DlTheory, cfg: &SolverConfig) -> Result<Verdict, SolverError> {
    let mut script = tempfile::Builder::new()
        .prefix("reduction")
        .suffix(".smt2")
        .tempfile()?;
    script.write_all(emit_smt(dl).as_bytes())?;
    script.flush()?;

    let mut stdout_file = tempfile::tempfile()?;
    let mut stderr_file = tempfile::tempfile()?;
    let mut child = std::process::Command::new(&cfg.path)
        .args(&cfg.args)
        .arg(script.path())
        .stdin(std::process::Stdio::null())
        .stdout(stdout_file.try_clone()?)
        .stderr(stderr_file.try_clone()?)
        .spawn()
        .map_err(|source| SolverError::Spawn {
            path: cfg.path.clone(),
            source,
        })?;

    let started = Instant::now();
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if started.elapsed() > cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SolverError::Timeout(cfg.timeout));
        }
        std::thread::sleep(Duration::from_millis(5));
    }

    let mut out = String::new();
    stdout_file.seek(SeekFrom::Start(0))?;
    stdout_file.read_to_string(&mut out)?;
    match parse_output(&out, dl) {
        Err(SolverError::Unparseable(_)) => {
            let mut err = String::new();
            stderr_file.seek(SeekFrom::Start(0))?;
            stderr_file.read_to_string(&mut err)?;
            if err.trim().is_empty() {
                Err(SolverError::Unparseable(out.trim().to_string()))
            } else {
                Err(SolverError::Reported(err.trim().to_string()))
            }
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("frame domain does not match the ground theory")]
    DomainMismatch,
}

/// Turns a propositional model back into a structure over the theory's
/// vocabulary: true atoms populate relations, frame relations and
/// constants are carried over, and every remaining predicate becomes the
/// empty relation.
pub fn lift_model(
    dl: &DlTheory,
    model: &SmtModel,
    frame: Option<&Structure>,
) -> Result<Structure, LiftError> {
    let mut s = Structure::new(dl.domain.clone());
    if let Some(frame) = frame {
        if frame.domain != dl.domain {
            return Err(LiftError::DomainMismatch);
        }
        for (pred, rel) in frame.rels() {
            s.set_rel(pred, rel.clone());
        }
        for (name, elem) in frame.consts() {
            s.set_const(name, elem);
        }
    }
    for (pred, _) in dl.vocab.preds() {
        if s.interprets(pred) {
            continue;
        }
        s.set_rel(pred, Default::default());
    }
    for (id, atom) in dl.atoms.iter() {
        let id = id as usize;
        if id >= dl.original_atoms || !model.bools[id] {
            continue;
        }
        // Atoms of frame predicates were folded to constants during
        // grounding; the frame's relation is the truth.
        if frame.map(|f| f.interprets(&atom.pred)).unwrap_or(false) {
            continue;
        }
        s.add_tuple(&atom.pred, atom.tuple.clone());
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defnf::to_defnf;
    use crate::dlreduce::{reduce, ReduceOptions};
    use crate::ground::ground;
    use crate::parser::{parse_structure, parse_theory};

    fn tiny_dl() -> DlTheory {
        let (t, _) = parse_theory("p | q.\nLFD {\n  p <- p.\n}\n").unwrap();
        let pt = ground(&t, &[], None).unwrap();
        reduce(&to_defnf(&pt), ReduceOptions::default())
    }

    #[test]
    fn emitted_script_is_deterministic_and_declares_everything() {
        let dl = tiny_dl();
        let script = emit_smt(&dl);
        assert_eq!(script, emit_smt(&dl));
        assert!(script.starts_with(
            "(set-option :produce-models true)\n(set-logic QF_IDL)\n"
        ));
        assert!(script.contains("(declare-fun b0 () Bool)"));
        assert!(script.contains("(declare-fun l0 () Int)"));
        assert!(script.contains("(declare-fun l1 () Int)"));
        assert!(script.contains("(assert (or b0 b1))"));
        assert!(script.ends_with("(check-sat)\n(get-model)\n"));

        let map = emit_name_map(&dl);
        assert!(map.contains("b0\tp\n"), "{map}");
        assert!(map.contains("l0\t@ground\n"), "{map}");
        assert!(map.contains("l1\tlev@0:p\n"), "{map}");
    }

    #[test]
    fn negative_constants_use_prefix_minus() {
        let (t, _) = parse_theory("LFD {\n  p <- q.\n  q <- p.\n}\n").unwrap();
        let pt = ground(&t, &[], None).unwrap();
        let dl = reduce(&to_defnf(&pt), ReduceOptions::default());
        let script = emit_smt(&dl);
        assert!(script.contains("(- 1)"), "{script}");
        assert!(!script.contains("-1"), "{script}");
    }

    #[test]
    fn single_line_models_parse() {
        let dl = tiny_dl();
        let out = "sat\n(\n  (define-fun b0 () Bool false)\n  (define-fun b1 () Bool true)\n  (define-fun l0 () Int 0)\n  (define-fun l1 () Int 0)\n)\n";
        match parse_output(out, &dl).unwrap() {
            Verdict::Sat(m) => {
                assert_eq!(m.bools, vec![false, true]);
                assert_eq!(m.levels, vec![0, 0]);
                assert!(m.defaulted.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multi_line_models_with_wrappers_parse() {
        let dl = tiny_dl();
        // The layout some solvers produce: a model keyword, line breaks
        // inside define-fun, negative numerals.
        let out = "sat\n(model\n  (define-fun b1 () Bool\n    true)\n  (define-fun b0 () Bool\n    false)\n  (define-fun l1 () Int\n    (- 2))\n  (define-fun l0 () Int\n    0)\n)\n";
        match parse_output(out, &dl).unwrap() {
            Verdict::Sat(m) => {
                assert_eq!(m.bools, vec![false, true]);
                assert_eq!(m.levels, vec![0, -2]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn verdicts_without_models_parse() {
        let dl = tiny_dl();
        assert_eq!(parse_output("unsat\n", &dl).unwrap(), Verdict::Unsat);
        assert_eq!(parse_output("unknown\n", &dl).unwrap(), Verdict::Unknown);
        assert!(matches!(
            parse_output("(error \"bad logic\")\n", &dl),
            Err(SolverError::Reported(msg)) if msg == "bad logic"
        ));
        assert!(matches!(
            parse_output("segfault\n", &dl),
            Err(SolverError::Unparseable(_))
        ));
    }

    #[test]
    fn missing_atoms_are_defaulted_false() {
        let dl = tiny_dl();
        let out = "sat\n((define-fun b1 () Bool true))\n";
        match parse_output(out, &dl).unwrap() {
            Verdict::Sat(m) => {
                assert_eq!(m.bools, vec![false, true]);
                assert_eq!(m.defaulted, vec![0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ground_level_is_shifted_to_zero() {
        let dl = tiny_dl();
        let out =
            "sat\n((define-fun b1 () Bool true) (define-fun l0 () Int 7) (define-fun l1 () Int 9))\n";
        match parse_output(out, &dl).unwrap() {
            Verdict::Sat(m) => assert_eq!(m.levels, vec![0, 2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lifting_restores_relations_frames_and_empties() {
        let src = "!x: ?y: Reach(x) | Edge(x, y).\nLFD {\n  Reach(x) <- x = root | ?y: Edge(y, x) & Reach(y).\n}\n";
        let (t, _) = parse_theory(src).unwrap();
        let frame = parse_structure(
            "domain = { n0, n1 }.\nroot = n0.\nEdge = { (n0, n1) }.\n",
        )
        .unwrap();
        let domain: Vec<String> = frame.domain.clone();
        let pt = ground(&t, &domain, Some(&frame)).unwrap();
        let dl = reduce(&to_defnf(&pt), ReduceOptions::default());
        // Mark every Reach atom true.
        let mut bools = vec![false; dl.atoms.len()];
        for (id, atom) in dl.atoms.iter() {
            if atom.pred == "Reach" {
                bools[id as usize] = true;
            }
        }
        let model = SmtModel {
            bools,
            levels: vec![0; dl.levels.len()],
            defaulted: vec![],
        };
        let lifted = lift_model(&dl, &model, Some(&frame)).unwrap();
        assert_eq!(lifted.rel("Reach").unwrap().len(), 2);
        assert_eq!(lifted.rel("Edge").unwrap().len(), 1);
        assert_eq!(lifted.constant_element("root"), Some(0));

        let mismatched = Structure::new(vec!["other".into()]);
        assert_eq!(
            lift_model(&dl, &model, Some(&mismatched)),
            Err(LiftError::DomainMismatch)
        );
    }

    #[test]
    fn discovery_prefers_explicit_paths() {
        let cfg = discover_solver(Some("/nonexistent/custom-z3")).unwrap();
        assert_eq!(cfg.path, PathBuf::from("/nonexistent/custom-z3"));
        let cfg = SolverConfig::for_binary(PathBuf::from("z3"));
        assert_eq!(cfg.args, vec!["-smt2".to_string()]);
        let cfg = SolverConfig::for_binary(PathBuf::from("idlsat"));
        assert!(cfg.args.is_empty());
    }
}
