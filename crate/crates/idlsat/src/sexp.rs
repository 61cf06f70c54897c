//! S-expression reader for the SMT-LIB subset the solver accepts.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Sym(String),
    Int(i64),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s) => Some(s),
            _ => None,
        }
    }
}

/// Parses a whole input into a sequence of top-level expressions.
/// Comments run from `;` to the end of the line.
pub fn parse_all(input: &str) -> Result<Vec<Sexp>, String> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Sexp>> = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    let push = |stack: &mut Vec<Vec<Sexp>>, out: &mut Vec<Sexp>, e: Sexp| {
        match stack.last_mut() {
            Some(top) => top.push(e),
            None => out.push(e),
        }
    };
    while i < bytes.len() {
        match bytes[i] {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'(' => {
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                let items = stack.pop().ok_or("unbalanced ')'")?;
                push(&mut stack, &mut out, Sexp::List(items));
                i += 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err("unterminated string".into());
                }
                i += 1;
                push(
                    &mut stack,
                    &mut out,
                    Sexp::Sym(input[start..i].to_string()),
                );
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                    && bytes[i] != b';'
                {
                    i += 1;
                }
                let tok = &input[start..i];
                if tok.bytes().all(|b| b.is_ascii_digit()) {
                    push(
                        &mut stack,
                        &mut out,
                        Sexp::Int(tok.parse::<i64>().map_err(|e| e.to_string())?),
                    );
                } else {
                    push(&mut stack, &mut out, Sexp::Sym(tok.to_string()));
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err("unbalanced '('".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_and_comments() {
        let got = parse_all("; header\n(assert (<= (- l1 l0) 3)) (check-sat)").unwrap();
        assert_eq!(got.len(), 2);
        match &got[0] {
            Sexp::List(items) => {
                assert_eq!(items[0], Sexp::Sym("assert".into()));
                match &items[1] {
                    Sexp::List(cmp) => {
                        assert_eq!(cmp[0], Sexp::Sym("<=".into()));
                        assert_eq!(cmp[2], Sexp::Int(3));
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unbalanced_input() {
        assert!(parse_all("(assert (and a b)").is_err());
        assert!(parse_all("(assert a))").is_err());
    }

    #[test]
    fn negative_numerals_arrive_as_lists() {
        let got = parse_all("(- 4)").unwrap();
        assert_eq!(
            got[0],
            Sexp::List(vec![Sexp::Sym("-".into()), Sexp::Int(4)])
        );
    }
}
