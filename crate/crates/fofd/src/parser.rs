//! Text format for theories, inductive-definition theories, and finite
//! structures, with printers that invert the parser.
//!
//! Theories are sentences and `LFD { ... }` / `GFD { ... }` blocks, each
//! terminated rule written `Head(x, y) <- formula.`. Connectives by rising
//! precedence: `<=>`, `=>` (right associative), `|`, `&`, `~`; quantifiers
//! `!x:` / `?x:` (also spelled `forall x:` / `exists x:`) extend to the end
//! of the enclosing formula. An identifier in term position is a variable
//! exactly when a quantifier or rule head binds it, otherwise a constant.
//! `//` starts a line comment.
//!
//! Structure files interpret symbols over a named domain:
//!
//! ```text
//! domain = { a, b, c }.
//! start = a.
//! Edge = { (a, b), (b, c) }.
//! Lab = { a, c }.
//! ```

use crate::logic::{
    merge_rules, validate, DefKind, FixpointDef, Formula, GidTheory, Rule, Structure, Term, Theory,
    Violation, Vocabulary,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Source positions for the rules and definition blocks of a parsed theory,
/// keyed by definition index, subdefinition path, and head predicate.
#[derive(Debug, Clone, Default)]
pub struct SpanTable {
    rule_spans: BTreeMap<(usize, Vec<usize>, String), (usize, usize)>,
    def_spans: BTreeMap<(usize, Vec<usize>), (usize, usize)>,
}

impl SpanTable {
    pub fn rule_span(&self, def: usize, path: &[usize], pred: &str) -> Option<(usize, usize)> {
        self.rule_spans
            .get(&(def, path.to_vec(), pred.to_string()))
            .copied()
    }

    pub fn def_span(&self, def: usize, path: &[usize]) -> Option<(usize, usize)> {
        self.def_spans.get(&(def, path.to_vec())).copied()
    }

    fn any_rule_span(&self, def: usize, pred: &str) -> Option<(usize, usize)> {
        self.rule_spans
            .iter()
            .find(|((d, _, p), _)| *d == def && p == pred)
            .map(|(_, &s)| s)
    }
}

/// Runs well-formedness validation over every definition of a parsed theory
/// and renders each violation with its source position.
pub fn describe_violations(theory: &Theory, spans: &SpanTable) -> Vec<String> {
    let mut out = Vec::new();
    for (i, d) in theory.defs.iter().enumerate() {
        for v in validate(d) {
            let pos = match &v {
                Violation::DuplicateLocalRule { path, pred } => spans.rule_span(i, path, pred),
                Violation::OverlappingDefinitions { pred, .. } => spans.any_rule_span(i, pred),
                Violation::NegativeDefinedOccurrence { rule_head, .. } => {
                    spans.any_rule_span(i, rule_head)
                }
                Violation::SiblingDefinedSymbol { path, subdef, .. } => {
                    let mut p = path.clone();
                    p.push(*subdef);
                    spans.def_span(i, &p)
                }
            };
            match pos {
                Some((l, c)) => out.push(format!("{l}:{c}: {v}")),
                None => out.push(v.to_string()),
            }
        }
    }
    out
}

const RESERVED: [&str; 10] = [
    "LFD", "GFD", "ID", "forall", "exists", "true", "false", "vocab", "pred", "const",
];

fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Slash,
    Arrow,
    Imp,
    Iff,
    Eq,
    Neq,
    Bang,
    Question,
    Tilde,
    Amp,
    Pipe,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Colon => "':'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Arrow => "'<-'".into(),
            Tok::Imp => "'=>'".into(),
            Tok::Iff => "'<=>'".into(),
            Tok::Eq => "'='".into(),
            Tok::Neq => "'!='".into(),
            Tok::Bang => "'!'".into(),
            Tok::Question => "'?'".into(),
            Tok::Tilde => "'~'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: l0,
                col: c0,
            });
            *i += len;
            *col += len;
        };
        if c.is_alphanumeric() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
            {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let len = j - i;
            push(Tok::Ident(word), len, &mut i, &mut col);
            continue;
        }
        match c {
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '~' => push(Tok::Tilde, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '?' => push(Tok::Question, 1, &mut i, &mut col),
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Neq, 2, &mut i, &mut col)
                } else {
                    push(Tok::Bang, 1, &mut i, &mut col)
                }
            }
            '=' => {
                if chars.get(i + 1) == Some(&'>') {
                    push(Tok::Imp, 2, &mut i, &mut col)
                } else {
                    push(Tok::Eq, 1, &mut i, &mut col)
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') {
                    push(Tok::Arrow, 2, &mut i, &mut col)
                } else if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') {
                    push(Tok::Iff, 3, &mut i, &mut col)
                } else {
                    return Err(ParseError {
                        line,
                        col,
                        msg: "expected '<-' or '<=>'".into(),
                    });
                }
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    scopes: Vec<String>,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            i: 0,
            scopes: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> (usize, usize) {
        (self.toks[self.i].line, self.toks[self.i].col)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.pos();
        Err(ParseError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek() == &tok {
            Ok(self.bump())
        } else {
            self.fail(format!("expected {what}, found {}", self.peek().describe()))
        }
    }

    /// Consumes any identifier, keywords included.
    fn ident(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let t = self.bump();
                Ok((s, t.line, t.col))
            }
            other => self.fail(format!("expected {what}, found {}", other.describe())),
        }
    }

    /// Consumes an identifier that names something; keywords are rejected.
    fn name(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        let (s, l, c) = self.ident(what)?;
        if is_reserved(&s) {
            return Err(ParseError {
                line: l,
                col: c,
                msg: format!("'{s}' is a reserved word"),
            });
        }
        Ok((s, l, c))
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (s, _, _) = self.name("a term")?;
        Ok(if self.scopes.contains(&s) {
            Term::Var(s)
        } else {
            Term::Const(s)
        })
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let a = self.imp_level()?;
        if self.peek() == &Tok::Iff {
            self.bump();
            let b = self.formula()?;
            Ok(Formula::iff(a, b))
        } else {
            Ok(a)
        }
    }

    fn imp_level(&mut self) -> Result<Formula, ParseError> {
        let a = self.or_level()?;
        if self.peek() == &Tok::Imp {
            self.bump();
            let b = self.imp_level()?;
            Ok(Formula::imp(a, b))
        } else {
            Ok(a)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let first = self.and_level()?;
        if self.peek() != &Tok::Pipe {
            return Ok(first);
        }
        let mut gs = vec![first];
        while self.peek() == &Tok::Pipe {
            self.bump();
            gs.push(self.and_level()?);
        }
        Ok(Formula::Or(gs))
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let first = self.unary()?;
        if self.peek() != &Tok::Amp {
            return Ok(first);
        }
        let mut gs = vec![first];
        while self.peek() == &Tok::Amp {
            self.bump();
            gs.push(self.unary()?);
        }
        Ok(Formula::And(gs))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Bang => {
                self.bump();
                self.quantified(true)
            }
            Tok::Question => {
                self.bump();
                self.quantified(false)
            }
            Tok::Ident(s) if s == "forall" => {
                self.bump();
                self.quantified(true)
            }
            Tok::Ident(s) if s == "exists" => {
                self.bump();
                self.quantified(false)
            }
            _ => self.primary(),
        }
    }

    fn quantified(&mut self, universal: bool) -> Result<Formula, ParseError> {
        let (x, _, _) = self.name("a quantified variable")?;
        self.expect(Tok::Colon, "':' after the quantified variable")?;
        self.scopes.push(x.clone());
        let body = self.formula();
        self.scopes.pop();
        let body = Box::new(body?);
        Ok(if universal {
            Formula::Forall(x, body)
        } else {
            Formula::Exists(x, body)
        })
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::tru())
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::fls())
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                let (name, line, col) = self.ident("an atom")?;
                match self.peek() {
                    Tok::LParen => {
                        self.bump();
                        let mut args = Vec::new();
                        if self.peek() != &Tok::RParen {
                            args.push(self.term()?);
                            while self.peek() == &Tok::Comma {
                                self.bump();
                                args.push(self.term()?);
                            }
                        }
                        self.expect(Tok::RParen, "')' after atom arguments")?;
                        Ok(Formula::Atom(name, args))
                    }
                    Tok::Eq => {
                        self.bump();
                        let lhs = self.resolve_term(name);
                        let rhs = self.term()?;
                        Ok(Formula::Eq(lhs, rhs))
                    }
                    Tok::Neq => {
                        self.bump();
                        let lhs = self.resolve_term(name);
                        let rhs = self.term()?;
                        Ok(Formula::not(Formula::Eq(lhs, rhs)))
                    }
                    _ => {
                        if self.scopes.contains(&name) {
                            Err(ParseError {
                                line,
                                col,
                                msg: format!("'{name}' is bound as a variable here"),
                            })
                        } else {
                            Ok(Formula::Atom(name, Vec::new()))
                        }
                    }
                }
            }
            other => self.fail(format!("expected a formula, found {}", other.describe())),
        }
    }

    fn resolve_term(&self, name: String) -> Term {
        if self.scopes.contains(&name) {
            Term::Var(name)
        } else {
            Term::Const(name)
        }
    }

    fn rule(&mut self) -> Result<(Rule, usize, usize), ParseError> {
        let (head, line, col) = self.name("a rule head")?;
        let mut vars = Vec::new();
        if self.peek() == &Tok::LParen {
            self.bump();
            if self.peek() != &Tok::RParen {
                loop {
                    let (x, l, c) = self.name("a head variable")?;
                    if vars.contains(&x) {
                        return Err(ParseError {
                            line: l,
                            col: c,
                            msg: format!("head variable '{x}' repeats"),
                        });
                    }
                    vars.push(x);
                    if self.peek() == &Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')' after head variables")?;
        }
        self.expect(Tok::Arrow, "'<-'")?;
        let depth = self.scopes.len();
        self.scopes.extend(vars.iter().cloned());
        let body = self.formula();
        self.scopes.truncate(depth);
        let body = body?;
        self.expect(Tok::Dot, "'.' after the rule body")?;
        if let Some(x) = body.free_vars().iter().find(|x| !vars.contains(x)) {
            return Err(ParseError {
                line,
                col,
                msg: format!("rule body variable '{x}' is not bound by the head"),
            });
        }
        Ok((
            Rule {
                head,
                vars,
                body,
            },
            line,
            col,
        ))
    }

    fn def(
        &mut self,
        def_idx: usize,
        path: &mut Vec<usize>,
        spans: &mut SpanTable,
    ) -> Result<FixpointDef, ParseError> {
        let (kw, line, col) = self.ident("LFD or GFD")?;
        let kind = match kw.as_str() {
            "LFD" => DefKind::Lfd,
            "GFD" => DefKind::Gfd,
            other => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("expected LFD or GFD, found '{other}'"),
                })
            }
        };
        spans.def_spans.insert((def_idx, path.clone()), (line, col));
        self.expect(Tok::LBrace, "'{'")?;
        let mut rules = Vec::new();
        let mut subdefs = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(s) if s == "LFD" || s == "GFD" => {
                    path.push(subdefs.len());
                    let d = self.def(def_idx, path, spans);
                    path.pop();
                    subdefs.push(d?);
                }
                Tok::Ident(_) => {
                    let (r, l, c) = self.rule()?;
                    spans
                        .rule_spans
                        .entry((def_idx, path.clone(), r.head.clone()))
                        .or_insert((l, c));
                    rules.push(r);
                }
                _ => {
                    return self.fail(format!(
                        "expected a rule, a nested definition, or '}}', found {}",
                        self.peek().describe()
                    ))
                }
            }
        }
        let rules = merge_rules(rules).map_err(|e| ParseError {
            line,
            col,
            msg: e.to_string(),
        })?;
        Ok(FixpointDef::new(kind, rules, subdefs))
    }

    fn vocab_block(
        &mut self,
        preds: &mut Vec<(String, usize, usize, usize)>,
        consts: &mut Vec<String>,
    ) -> Result<(), ParseError> {
        self.bump();
        self.expect(Tok::LBrace, "'{'")?;
        loop {
            if self.peek() == &Tok::RBrace {
                self.bump();
                return Ok(());
            }
            if self.at_ident("pred") {
                self.bump();
                let (name, l, c) = self.name("a predicate name")?;
                self.expect(Tok::Slash, "'/' before the arity")?;
                let (digits, dl, dc) = self.ident("an arity")?;
                let arity: usize = digits.parse().map_err(|_| ParseError {
                    line: dl,
                    col: dc,
                    msg: format!("expected a number, found '{digits}'"),
                })?;
                self.expect(Tok::Dot, "'.'")?;
                preds.push((name, arity, l, c));
            } else if self.at_ident("const") {
                self.bump();
                let (name, _, _) = self.name("a constant name")?;
                self.expect(Tok::Dot, "'.'")?;
                consts.push(name);
            } else {
                return self.fail(format!(
                    "expected pred, const, or '}}', found {}",
                    self.peek().describe()
                ));
            }
        }
    }
}

/// Parses a theory: optional vocab blocks, sentences, and definitions.
/// Rules sharing a head inside one block are merged into a disjunction.
pub fn parse_theory(src: &str) -> Result<(Theory, SpanTable), ParseError> {
    let mut p = Parser::new(src)?;
    let mut declared_preds = Vec::new();
    let mut declared_consts = Vec::new();
    let mut sentences = Vec::new();
    let mut defs = Vec::new();
    let mut spans = SpanTable::default();
    loop {
        match p.peek() {
            Tok::Eof => break,
            Tok::Ident(s) if s == "vocab" => {
                p.vocab_block(&mut declared_preds, &mut declared_consts)?
            }
            Tok::Ident(s) if s == "LFD" || s == "GFD" => {
                let idx = defs.len();
                let d = p.def(idx, &mut Vec::new(), &mut spans)?;
                defs.push(d);
            }
            Tok::Ident(s) if s == "ID" || s == "GID" => {
                return p.fail("ID blocks belong in inductive-definition input");
            }
            _ => {
                let (line, col) = p.pos();
                let f = p.formula()?;
                p.expect(Tok::Dot, "'.' after the sentence")?;
                if let Some(x) = f.free_vars().iter().next() {
                    return Err(ParseError {
                        line,
                        col,
                        msg: format!("sentence has a free variable '{x}'"),
                    });
                }
                sentences.push(f);
            }
        }
    }
    let mut theory = Theory::new(sentences, defs).map_err(|e| ParseError {
        line: 1,
        col: 1,
        msg: e.to_string(),
    })?;
    for (name, arity, line, col) in declared_preds {
        theory.vocab.declare_pred(&name, arity).map_err(|e| ParseError {
            line,
            col,
            msg: e.to_string(),
        })?;
    }
    for c in declared_consts {
        theory.vocab.declare_const(&c);
    }
    Ok((theory, spans))
}

/// Parses an inductive-definition theory: sentences plus flat `GID { ... }`
/// blocks (`ID` is accepted as a synonym) whose rules keep well-founded
/// semantics. Rules are not merged.
pub fn parse_gid_theory(src: &str) -> Result<GidTheory, ParseError> {
    let mut p = Parser::new(src)?;
    let mut declared_preds = Vec::new();
    let mut declared_consts = Vec::new();
    let mut sentences = Vec::new();
    let mut gids = Vec::new();
    loop {
        match p.peek() {
            Tok::Eof => break,
            Tok::Ident(s) if s == "vocab" => {
                p.vocab_block(&mut declared_preds, &mut declared_consts)?
            }
            Tok::Ident(s) if s == "LFD" || s == "GFD" => {
                return p.fail("expected ID blocks in inductive-definition input");
            }
            Tok::Ident(s) if s == "ID" || s == "GID" => {
                p.bump();
                p.expect(Tok::LBrace, "'{'")?;
                let mut rules = Vec::new();
                loop {
                    match p.peek() {
                        Tok::RBrace => {
                            p.bump();
                            break;
                        }
                        Tok::Ident(s) if s == "ID" || s == "GID" || s == "LFD" || s == "GFD" => {
                            return p.fail("ID blocks do not nest");
                        }
                        Tok::Ident(_) => rules.push(p.rule()?.0),
                        _ => {
                            return p.fail(format!(
                                "expected a rule or '}}', found {}",
                                p.peek().describe()
                            ))
                        }
                    }
                }
                gids.push(rules);
            }
            _ => {
                let (line, col) = p.pos();
                let f = p.formula()?;
                p.expect(Tok::Dot, "'.' after the sentence")?;
                if let Some(x) = f.free_vars().iter().next() {
                    return Err(ParseError {
                        line,
                        col,
                        msg: format!("sentence has a free variable '{x}'"),
                    });
                }
                sentences.push(f);
            }
        }
    }
    let mut theory = GidTheory::new(sentences, gids).map_err(|e| ParseError {
        line: 1,
        col: 1,
        msg: e.to_string(),
    })?;
    for (name, arity, line, col) in declared_preds {
        theory.vocab.declare_pred(&name, arity).map_err(|e| ParseError {
            line,
            col,
            msg: e.to_string(),
        })?;
    }
    for c in declared_consts {
        theory.vocab.declare_const(&c);
    }
    Ok(theory)
}

/// Parses a single closed formula.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return p.fail(format!(
            "expected end of input, found {}",
            p.peek().describe()
        ));
    }
    if let Some(x) = f.free_vars().iter().next() {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: format!("formula has a free variable '{x}'"),
        });
    }
    Ok(f)
}

/// Parses a finite structure.
pub fn parse_structure(src: &str) -> Result<Structure, ParseError> {
    let mut p = Parser::new(src)?;
    let (kw, line, col) = p.ident("a domain declaration")?;
    if kw != "domain" {
        return Err(ParseError {
            line,
            col,
            msg: "structure files start with 'domain = { ... }.'".into(),
        });
    }
    p.expect(Tok::Eq, "'='")?;
    p.expect(Tok::LBrace, "'{'")?;
    let mut elems: Vec<String> = Vec::new();
    if p.peek() != &Tok::RBrace {
        loop {
            let (e, l, c) = p.name("a domain element")?;
            if elems.contains(&e) {
                return Err(ParseError {
                    line: l,
                    col: c,
                    msg: format!("domain element '{e}' repeats"),
                });
            }
            elems.push(e);
            if p.peek() == &Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect(Tok::RBrace, "'}'")?;
    p.expect(Tok::Dot, "'.'")?;
    let mut s = Structure::new(elems);

    let elem_of = |s: &Structure, name: &str, l: usize, c: usize| -> Result<u32, ParseError> {
        s.elem(name).ok_or_else(|| ParseError {
            line: l,
            col: c,
            msg: format!("unknown domain element '{name}'"),
        })
    };

    while p.peek() != &Tok::Eof {
        let (name, line, col) = p.name("a relation or constant interpretation")?;
        if name == "domain" {
            return Err(ParseError {
                line,
                col,
                msg: "the domain is already declared".into(),
            });
        }
        p.expect(Tok::Eq, "'='")?;
        if p.peek() == &Tok::LBrace {
            p.bump();
            if s.interprets(&name) {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("'{name}' is interpreted twice"),
                });
            }
            let mut tuples = std::collections::BTreeSet::new();
            let mut arity: Option<usize> = None;
            if p.peek() != &Tok::RBrace {
                loop {
                    let row: Vec<u32> = if p.peek() == &Tok::LParen {
                        p.bump();
                        let mut row = Vec::new();
                        if p.peek() != &Tok::RParen {
                            loop {
                                let (e, l, c) = p.name("a domain element")?;
                                row.push(elem_of(&s, &e, l, c)?);
                                if p.peek() == &Tok::Comma {
                                    p.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        p.expect(Tok::RParen, "')'")?;
                        row
                    } else {
                        let (e, l, c) = p.name("a domain element")?;
                        vec![elem_of(&s, &e, l, c)?]
                    };
                    match arity {
                        None => arity = Some(row.len()),
                        Some(a) if a != row.len() => {
                            return Err(ParseError {
                                line,
                                col,
                                msg: format!("tuples of '{name}' differ in arity"),
                            })
                        }
                        _ => {}
                    }
                    tuples.insert(row);
                    if p.peek() == &Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
            }
            p.expect(Tok::RBrace, "'}'")?;
            p.expect(Tok::Dot, "'.'")?;
            s.set_rel(&name, tuples);
        } else {
            let (e, l, c) = p.name("a domain element")?;
            p.expect(Tok::Dot, "'.'")?;
            if s.consts().any(|(n, _)| n == name) {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("'{name}' is interpreted twice"),
                });
            }
            let idx = elem_of(&s, &e, l, c)?;
            s.set_const(&name, idx);
        }
    }
    Ok(s)
}

pub fn print_term(t: &Term) -> &str {
    match t {
        Term::Var(x) => x,
        Term::Const(c) => c,
    }
}

/// Precedence bands for printing, highest binding first: atoms and negation,
/// conjunction, disjunction, implication, equivalence. Quantifiers print bare
/// only where they can swallow the rest of the formula.
fn fmt_formula(f: &Formula, level: u8, out: &mut String) {
    let paren = |need: bool, out: &mut String, inner: &dyn Fn(&mut String)| {
        if need {
            out.push('(');
            inner(out);
            out.push(')');
        } else {
            inner(out);
        }
    };
    match f {
        Formula::And(gs) if gs.is_empty() => out.push_str("true"),
        Formula::Or(gs) if gs.is_empty() => out.push_str("false"),
        Formula::And(gs) if gs.len() == 1 => fmt_formula(&gs[0], level, out),
        Formula::Or(gs) if gs.len() == 1 => fmt_formula(&gs[0], level, out),
        Formula::Atom(p, args) => {
            out.push_str(p);
            if !args.is_empty() {
                out.push('(');
                for (k, t) in args.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(print_term(t));
                }
                out.push(')');
            }
        }
        Formula::Eq(a, b) => {
            let _ = write!(out, "{} = {}", print_term(a), print_term(b));
        }
        Formula::Not(g) => {
            if let Formula::Eq(a, b) = &**g {
                let _ = write!(out, "{} != {}", print_term(a), print_term(b));
            } else {
                out.push('~');
                fmt_formula(g, 4, out);
            }
        }
        Formula::And(gs) => paren(level > 3, out, &|out| {
            for (k, g) in gs.iter().enumerate() {
                if k > 0 {
                    out.push_str(" & ");
                }
                fmt_formula(g, 4, out);
            }
        }),
        Formula::Or(gs) => paren(level > 2, out, &|out| {
            for (k, g) in gs.iter().enumerate() {
                if k > 0 {
                    out.push_str(" | ");
                }
                fmt_formula(g, 3, out);
            }
        }),
        Formula::Imp(a, b) => paren(level > 1, out, &|out| {
            fmt_formula(a, 2, out);
            out.push_str(" => ");
            fmt_formula(b, 1, out);
        }),
        Formula::Iff(a, b) => paren(level > 0, out, &|out| {
            fmt_formula(a, 1, out);
            out.push_str(" <=> ");
            fmt_formula(b, 0, out);
        }),
        Formula::Forall(x, g) => paren(level > 0, out, &|out| {
            let _ = write!(out, "!{x}: ");
            fmt_formula(g, 0, out);
        }),
        Formula::Exists(x, g) => paren(level > 0, out, &|out| {
            let _ = write!(out, "?{x}: ");
            fmt_formula(g, 0, out);
        }),
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    fmt_formula(f, 0, &mut out);
    out
}

fn fmt_rule(r: &Rule, indent: usize, out: &mut String) {
    out.push_str(&"  ".repeat(indent));
    out.push_str(&r.head);
    if !r.vars.is_empty() {
        let _ = write!(out, "({})", r.vars.join(", "));
    }
    out.push_str(" <- ");
    fmt_formula(&r.body, 0, out);
    out.push_str(".\n");
}

fn fmt_def(d: &FixpointDef, indent: usize, out: &mut String) {
    out.push_str(&"  ".repeat(indent));
    let _ = write!(out, "{} {{\n", d.kind);
    for r in &d.rules {
        fmt_rule(r, indent + 1, out);
    }
    for s in &d.subdefs {
        fmt_def(s, indent + 1, out);
    }
    out.push_str(&"  ".repeat(indent));
    out.push_str("}\n");
}

/// Prints a theory in the input format. A vocab block appears only when the
/// vocabulary declares symbols beyond those occurring in the text.
pub fn print_theory(t: &Theory) -> String {
    let mut out = String::new();
    let inferred = Vocabulary::infer(&t.sentences, &t.defs);
    if inferred.as_ref() != Ok(&t.vocab) {
        out.push_str("vocab {\n");
        for (p, a) in t.vocab.preds() {
            let _ = writeln!(out, "  pred {p}/{a}.");
        }
        for c in t.vocab.consts() {
            let _ = writeln!(out, "  const {c}.");
        }
        out.push_str("}\n");
    }
    for f in &t.sentences {
        fmt_formula(f, 0, &mut out);
        out.push_str(".\n");
    }
    for d in &t.defs {
        fmt_def(d, 0, &mut out);
    }
    out
}

/// Prints a structure in the input format: domain, constants, relations.
pub fn print_structure(s: &Structure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "domain = {{ {} }}.", s.domain.join(", "));
    for (c, e) in s.consts() {
        let _ = writeln!(out, "{c} = {}.", s.elem_name(e));
    }
    for (p, rel) in s.rels() {
        let rows: Vec<String> = rel
            .iter()
            .map(|row| {
                if row.len() == 1 {
                    s.elem_name(row[0]).to_string()
                } else {
                    format!(
                        "({})",
                        row.iter()
                            .map(|&e| s.elem_name(e))
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                }
            })
            .collect();
        if rows.is_empty() {
            let _ = writeln!(out, "{p} = {{}}.");
        } else {
            let _ = writeln!(out, "{p} = {{ {} }}.", rows.join(", "));
        }
    }
    out
}
