//! S-expression reader with source positions.

use std::fmt;

use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Symbol { text: String, pos: Pos },
    List { items: Vec<Sexpr>, pos: Pos },
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Symbol { pos, .. } | Sexpr::List { pos, .. } => *pos,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Sexpr::Symbol { text, .. } => Some(text),
            Sexpr::List { .. } => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            Sexpr::Symbol { .. } => None,
        }
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexpr::symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "-_?:=.<>+*/!@".contains(c)
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            chars.next();
            col += 1;
        } else if c == ';' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
        } else if c == '(' {
            chars.next();
            col += 1;
            out.push(Token::Open(pos));
        } else if c == ')' {
            chars.next();
            col += 1;
            out.push(Token::Close(pos));
        } else if symbol_char(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !symbol_char(c) {
                    break;
                }
                s.push(c.to_ascii_lowercase());
                chars.next();
                col += 1;
            }
            out.push(Token::Symbol(s, pos));
        } else {
            return Err(ParseError::at(pos, ParseErrorKind::Lexical(c)));
        }
    }
    Ok(out)
}

/// Reads every top-level expression in `text`. Symbols are lowercased.
pub fn read_all(text: &str) -> Result<Vec<Sexpr>, ParseError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<(Pos, Vec<Sexpr>)> = Vec::new();
    let mut top = Vec::new();
    for t in tokens {
        match t {
            Token::Open(pos) => stack.push((pos, Vec::new())),
            Token::Close(pos) => {
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| ParseError::at(pos, ParseErrorKind::Unbalanced))?;
                let e = Sexpr::List { items, pos: open };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(e),
                    None => top.push(e),
                }
            }
            Token::Symbol(text, pos) => {
                let e = Sexpr::Symbol { text, pos };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(e),
                    None => top.push(e),
                }
            }
        }
    }
    if let Some((pos, _)) = stack.last() {
        return Err(ParseError::at(*pos, ParseErrorKind::Unbalanced));
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let e = read_all("; header\n(define (Domain d)\n  (:predicates (p ?x)))").unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].pos(), Pos { line: 2, col: 1 });
        let items = e[0].list().unwrap();
        assert_eq!(items[1].head(), Some("domain"));
        assert_eq!(items[2].pos(), Pos { line: 3, col: 3 });
    }

    #[test]
    fn unbalanced_and_lexical_errors() {
        let err = read_all("(a (b)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unbalanced);
        assert_eq!((err.line, err.col), (1, 1));
        let err = read_all("(a))").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unbalanced);
        assert_eq!((err.line, err.col), (1, 4));
        let err = read_all("(a\n  #b)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Lexical('#'));
        assert_eq!((err.line, err.col), (2, 3));
    }
}
