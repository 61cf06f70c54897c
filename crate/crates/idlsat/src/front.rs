//! Front end: turns a script of declarations and assertions into clauses
//! over solver variables. Boolean structure is translated by the usual
//! gate encoding; difference atoms `x - y <= c` are interned and carry
//! their constraint into the theory.

use crate::sexp::Sexp;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    True,
    False,
    BVar(usize),
    /// `x - y <= c` over integer variable indices.
    Diff { x: usize, y: usize, c: i64 },
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Iff(Box<Term>, Box<Term>),
}

#[derive(Debug, Default)]
pub struct Script {
    pub bools: Vec<String>,
    pub ints: Vec<String>,
    pub asserts: Vec<Term>,
    pub check_sat: bool,
    pub get_model: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sort {
    Bool,
    Int,
}

pub fn read_script(cmds: &[Sexp]) -> Result<Script, String> {
    let mut s = Script::default();
    let mut names: BTreeMap<String, (Sort, usize)> = BTreeMap::new();
    for cmd in cmds {
        let items = match cmd {
            Sexp::List(items) if !items.is_empty() => items,
            _ => return Err(format!("bad command: {cmd:?}")),
        };
        let head = items[0].as_sym().ok_or("command head must be a symbol")?;
        match head {
            "set-logic" | "set-option" | "set-info" | "exit" | "push" | "pop" => {}
            "declare-fun" | "declare-const" => {
                let (name, sort) = match (head, items.len()) {
                    ("declare-fun", 4) => {
                        if !matches!(&items[2], Sexp::List(args) if args.is_empty()) {
                            return Err("only constant declarations are supported".into());
                        }
                        (&items[1], &items[3])
                    }
                    ("declare-const", 3) => (&items[1], &items[2]),
                    _ => return Err(format!("malformed declaration: {cmd:?}")),
                };
                let name = name.as_sym().ok_or("declaration name must be a symbol")?;
                let sort = match sort.as_sym() {
                    Some("Bool") => Sort::Bool,
                    Some("Int") => Sort::Int,
                    other => return Err(format!("unsupported sort: {other:?}")),
                };
                if names.contains_key(name) {
                    return Err(format!("{name} declared twice"));
                }
                let idx = match sort {
                    Sort::Bool => {
                        s.bools.push(name.to_string());
                        s.bools.len() - 1
                    }
                    Sort::Int => {
                        s.ints.push(name.to_string());
                        s.ints.len() - 1
                    }
                };
                names.insert(name.to_string(), (sort, idx));
            }
            "assert" => {
                if items.len() != 2 {
                    return Err("assert takes one term".into());
                }
                s.asserts.push(term(&items[1], &names)?);
            }
            "check-sat" => s.check_sat = true,
            "get-model" => s.get_model = true,
            other => return Err(format!("unsupported command: {other}")),
        }
    }
    Ok(s)
}

fn constant(e: &Sexp) -> Option<i64> {
    match e {
        Sexp::Int(k) => Some(*k),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Sym(m), Sexp::Int(k)] if m == "-" => Some(-k),
            _ => None,
        },
        _ => None,
    }
}

/// An integer-sorted operand: either a bare variable (value `x - 0 with
/// no offset`) represented as (Some x, 0), or a difference `(- x y)`.
fn int_operand(
    e: &Sexp,
    names: &BTreeMap<String, (Sort, usize)>,
) -> Result<(usize, Option<usize>), String> {
    match e {
        Sexp::Sym(n) => match names.get(n) {
            Some((Sort::Int, i)) => Ok((*i, None)),
            _ => Err(format!("not an integer variable: {n}")),
        },
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Sym(m), a, b] if m == "-" => {
                let (x, nx) = int_operand(a, names)?;
                let (y, ny) = int_operand(b, names)?;
                if nx.is_some() || ny.is_some() {
                    return Err("nested differences are not supported".into());
                }
                Ok((x, Some(y)))
            }
            _ => Err(format!("unsupported integer term: {e:?}")),
        },
        _ => Err(format!("unsupported integer term: {e:?}")),
    }
}

/// Builds `lhs - rhs <= c` style atoms from a comparison, accepting both
/// `(op (- x y) c)` and `(op x y)` argument shapes.
fn comparison(
    op: &str,
    a: &Sexp,
    b: &Sexp,
    names: &BTreeMap<String, (Sort, usize)>,
) -> Result<Term, String> {
    let (x, y, c) = if let Some(c) = constant(b) {
        let (x, y) = int_operand(a, names)?;
        let y = y.ok_or("comparison with a constant needs a difference")?;
        (x, y, c)
    } else if constant(a).is_some() {
        // (op c (- x y)) reads the same as the mirrored comparison.
        let flipped = match op {
            "<=" => ">=",
            "<" => ">",
            ">=" => "<=",
            ">" => "<",
            other => other,
        };
        return comparison(flipped, b, a, names);
    } else {
        let (x, nx) = int_operand(a, names)?;
        let (y, ny) = int_operand(b, names)?;
        if nx.is_some() || ny.is_some() {
            return Err("only variable-to-variable comparisons are supported".into());
        }
        (x, y, 0)
    };
    let le = |x, y, c| Term::Diff { x, y, c };
    Ok(match op {
        "<=" => le(x, y, c),
        "<" => le(x, y, c - 1),
        ">=" => le(y, x, -c),
        ">" => le(y, x, -c - 1),
        "=" => Term::And(vec![le(x, y, c), le(y, x, -c)]),
        _ => return Err(format!("unsupported comparison: {op}")),
    })
}

fn term(e: &Sexp, names: &BTreeMap<String, (Sort, usize)>) -> Result<Term, String> {
    match e {
        Sexp::Sym(n) if n == "true" => Ok(Term::True),
        Sexp::Sym(n) if n == "false" => Ok(Term::False),
        Sexp::Sym(n) => match names.get(n) {
            Some((Sort::Bool, i)) => Ok(Term::BVar(*i)),
            Some((Sort::Int, _)) => Err(format!("integer variable used as a formula: {n}")),
            None => Err(format!("undeclared symbol: {n}")),
        },
        Sexp::Int(_) => Err("numeral used as a formula".into()),
        Sexp::List(items) => {
            let head = items
                .first()
                .and_then(|h| h.as_sym())
                .ok_or("application head must be a symbol")?;
            let args = &items[1..];
            match head {
                "not" => {
                    if args.len() != 1 {
                        return Err("not takes one argument".into());
                    }
                    Ok(Term::Not(Box::new(term(&args[0], names)?)))
                }
                "and" => Ok(Term::And(
                    args.iter().map(|a| term(a, names)).collect::<Result<_, _>>()?,
                )),
                "or" => Ok(Term::Or(
                    args.iter().map(|a| term(a, names)).collect::<Result<_, _>>()?,
                )),
                "=>" => {
                    if args.is_empty() {
                        return Err("=> needs arguments".into());
                    }
                    let mut parts: Vec<Term> = args
                        .iter()
                        .map(|a| term(a, names))
                        .collect::<Result<_, _>>()?;
                    let last = parts.pop().unwrap();
                    let mut negs: Vec<Term> =
                        parts.into_iter().map(|p| Term::Not(Box::new(p))).collect();
                    negs.push(last);
                    Ok(Term::Or(negs))
                }
                "<=" | "<" | ">=" | ">" => {
                    if args.len() != 2 {
                        return Err(format!("{head} takes two arguments"));
                    }
                    comparison(head, &args[0], &args[1], names)
                }
                "=" => {
                    if args.len() != 2 {
                        return Err("= takes two arguments".into());
                    }
                    // Equality is boolean equivalence or an integer
                    // difference pinned from both sides.
                    let bool_side = |e: &Sexp| match e {
                        Sexp::Sym(n) => {
                            matches!(names.get(n), Some((Sort::Bool, _)))
                                || n == "true"
                                || n == "false"
                        }
                        Sexp::Int(_) => false,
                        Sexp::List(items) => !matches!(
                            items.first().and_then(|h| h.as_sym()),
                            Some("-") | None
                        ),
                    };
                    if bool_side(&args[0]) && bool_side(&args[1]) {
                        Ok(Term::Iff(
                            Box::new(term(&args[0], names)?),
                            Box::new(term(&args[1], names)?),
                        ))
                    } else {
                        comparison("=", &args[0], &args[1], names)
                    }
                }
                other => Err(format!("unsupported operator: {other}")),
            }
        }
    }
}

/// Clauses over packed literals: variable `v` as `2 v` (positive) or
/// `2 v + 1` (negative).
pub type Lit = u32;

pub fn lit(var: usize, neg: bool) -> Lit {
    (var as u32) << 1 | neg as u32
}

#[derive(Debug, Default)]
pub struct Cnf {
    pub nvars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// For each variable, the difference constraint it stands for when
    /// assigned true, if any.
    pub theory: Vec<Option<(usize, usize, i64)>>,
    pub nints: usize,
    /// Trivially unsatisfiable input (a false assertion).
    pub contradiction: bool,
}

struct Compiler {
    cnf: Cnf,
    diff_index: BTreeMap<(usize, usize, i64), usize>,
}

impl Compiler {
    fn fresh(&mut self) -> usize {
        self.cnf.nvars += 1;
        self.cnf.theory.push(None);
        self.cnf.nvars - 1
    }

    fn diff_var(&mut self, x: usize, y: usize, c: i64) -> usize {
        if let Some(&v) = self.diff_index.get(&(x, y, c)) {
            return v;
        }
        let v = self.fresh();
        self.cnf.theory[v] = Some((x, y, c));
        self.diff_index.insert((x, y, c), v);
        v
    }

    /// Encodes a term as a literal, adding gate clauses as needed.
    /// Constants must have been folded away by the caller.
    fn encode(&mut self, t: &Term) -> Lit {
        match t {
            Term::True | Term::False => unreachable!("constants are folded before encoding"),
            Term::BVar(v) => lit(*v, false),
            Term::Diff { x, y, c } => {
                // A trivial self comparison never reaches the theory.
                if x == y {
                    let g = self.fresh();
                    let gl = lit(g, false);
                    self.cnf.clauses.push(vec![if *c >= 0 { gl } else { gl ^ 1 }]);
                    return gl;
                }
                lit(self.diff_var(*x, *y, *c), false)
            }
            Term::Not(inner) => self.encode(inner) ^ 1,
            Term::And(parts) => {
                let ls: Vec<Lit> = parts.iter().map(|p| self.encode(p)).collect();
                let g = lit(self.fresh(), false);
                let mut long = vec![g];
                for &l in &ls {
                    self.cnf.clauses.push(vec![g ^ 1, l]);
                    long.push(l ^ 1);
                }
                self.cnf.clauses.push(long);
                g
            }
            Term::Or(parts) => {
                let ls: Vec<Lit> = parts.iter().map(|p| self.encode(p)).collect();
                let g = lit(self.fresh(), false);
                let mut long = vec![g ^ 1];
                for &l in &ls {
                    self.cnf.clauses.push(vec![g, l ^ 1]);
                    long.push(l);
                }
                self.cnf.clauses.push(long);
                g
            }
            Term::Iff(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let g = lit(self.fresh(), false);
                self.cnf.clauses.push(vec![g ^ 1, la ^ 1, lb]);
                self.cnf.clauses.push(vec![g ^ 1, la, lb ^ 1]);
                self.cnf.clauses.push(vec![g, la, lb]);
                self.cnf.clauses.push(vec![g, la ^ 1, lb ^ 1]);
                g
            }
        }
    }

    /// Asserts a folded term at the top level, splitting conjunctions and
    /// emitting plain disjunctions as single clauses.
    fn assert_top(&mut self, t: &Term) {
        match t {
            Term::True => {}
            Term::False => self.cnf.contradiction = true,
            Term::And(parts) => {
                for p in parts {
                    self.assert_top(p);
                }
            }
            Term::Or(parts) => {
                let mut clause = Vec::with_capacity(parts.len());
                for p in parts {
                    clause.push(self.encode(p));
                }
                self.cnf.clauses.push(clause);
            }
            other => {
                let l = self.encode(other);
                self.cnf.clauses.push(vec![l]);
            }
        }
    }
}

/// Removes boolean constants. The result contains True or False only as
/// the whole term.
fn fold(t: &Term) -> Term {
    match t {
        Term::True | Term::False | Term::BVar(_) | Term::Diff { .. } => t.clone(),
        Term::Not(inner) => match fold(inner) {
            Term::True => Term::False,
            Term::False => Term::True,
            Term::Not(g) => *g,
            g => Term::Not(Box::new(g)),
        },
        Term::And(parts) => {
            let mut kept = Vec::new();
            for p in parts {
                match fold(p) {
                    Term::True => {}
                    Term::False => return Term::False,
                    g => kept.push(g),
                }
            }
            match kept.len() {
                0 => Term::True,
                1 => kept.pop().unwrap(),
                _ => Term::And(kept),
            }
        }
        Term::Or(parts) => {
            let mut kept = Vec::new();
            for p in parts {
                match fold(p) {
                    Term::False => {}
                    Term::True => return Term::True,
                    g => kept.push(g),
                }
            }
            match kept.len() {
                0 => Term::False,
                1 => kept.pop().unwrap(),
                _ => Term::Or(kept),
            }
        }
        Term::Iff(a, b) => match (fold(a), fold(b)) {
            (Term::True, g) | (g, Term::True) => g,
            (Term::False, g) | (g, Term::False) => fold(&Term::Not(Box::new(g))),
            (ga, gb) => Term::Iff(Box::new(ga), Box::new(gb)),
        },
    }
}

/// Compiles a script to clauses. Declared booleans occupy variables
/// `0..bools.len()` so models read off directly.
pub fn compile(s: &Script) -> Cnf {
    let mut c = Compiler {
        cnf: Cnf {
            nvars: s.bools.len(),
            theory: vec![None; s.bools.len()],
            nints: s.ints.len(),
            ..Cnf::default()
        },
        diff_index: BTreeMap::new(),
    };
    for a in &s.asserts {
        let folded = fold(a);
        c.assert_top(&folded);
    }
    c.cnf
}
