//! Minimal s-expression reader that keeps source positions for diagnostics.

use std::fmt;

use super::{ParseDiagnostic, Severity};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            Sexpr::Atom(..) => None,
        }
    }

    /// Head keyword of a list, if the first element is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(Sexpr::as_atom)
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(s, _) => write!(f, "{s}"),
            Sexpr::List(items, _) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Reads every top-level expression of `text`. Atoms are lower-cased unless
/// `keep_case` is set. `;` starts a comment running to end of line.
pub fn read_all(text: &str, file: &str, keep_case: bool) -> Result<Vec<Sexpr>, ParseDiagnostic> {
    let mut stack: Vec<(Vec<Sexpr>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    let err = |pos: Pos, msg: String| ParseDiagnostic {
        file: file.to_string(),
        line: pos.line,
        column: pos.column,
        message: msg,
        severity: Severity::Error,
    };

    while let Some(&c) = chars.peek() {
        let here = Pos { line, column };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' => {
                chars.next();
                column += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                column += 1;
                let (items, start) = stack
                    .pop()
                    .ok_or_else(|| err(here, "unbalanced ')'".to_string()))?;
                let list = Sexpr::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let mut tok = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                    column += 1;
                }
                if !keep_case {
                    tok = tok.to_lowercase();
                }
                let atom = Sexpr::Atom(tok, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return Err(err(start, "unclosed '('".to_string()));
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_case() {
        let out = read_all("; c\n(Define (X y))", "t", false).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].pos(), Pos { line: 2, column: 1 });
        assert_eq!(out[0].to_string(), "(define (x y))");
    }

    #[test]
    fn unbalanced() {
        let e = read_all("(a (b)", "t", false).unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = read_all("a)", "t", false).unwrap_err();
        assert_eq!((e.line, e.column), (1, 2));
    }
}
