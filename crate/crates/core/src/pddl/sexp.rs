//! Tokenizer and s-expression reader with source positions.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{PddlError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Sym { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Sym { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sexp::Sym { text, .. } => alloc::format!("`{text}`"),
            Sexp::List { .. } => "a list".into(),
        }
    }
}

struct Reader<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    col: u32,
}

impl<'a> Reader<'a> {
    fn pos(&self) -> Pos {
        Pos {
            offset: self.offset,
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn symbol(&mut self) -> Sexp {
        let pos = self.pos();
        let start = self.offset;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                break;
            }
            self.bump();
        }
        Sexp::Sym {
            // PDDL is case-insensitive; normalise once here.
            text: self.src[start..self.offset].to_ascii_lowercase(),
            pos,
        }
    }
}

fn syntax(pos: Pos, expected: &[&str], found: &str) -> PddlError {
    PddlError::Syntax {
        pos,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.into(),
    }
}

/// Reads exactly one top-level list. Never panics.
pub fn read_one(src: &str) -> Result<Sexp, PddlError> {
    let mut r = Reader {
        src,
        offset: 0,
        line: 1,
        col: 1,
    };
    r.skip_trivia();
    match r.peek() {
        None => return Err(syntax(r.pos(), &["`(`"], "end of input")),
        Some('(') => {}
        Some(_) => {
            let p = r.pos();
            let s = r.symbol();
            return Err(syntax(p, &["`(`"], &s.describe()));
        }
    }
    // iterative to avoid recursion depth issues on hostile input
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
    loop {
        r.skip_trivia();
        let p = r.pos();
        match r.peek() {
            None => {
                return Err(syntax(p, &["`)`"], "end of input"));
            }
            Some('(') => {
                r.bump();
                stack.push((p, vec![]));
            }
            Some(')') => {
                r.bump();
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| syntax(p, &["`(`"], "`)`"))?;
                let list = Sexp::List { items, pos: open };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => {
                        r.skip_trivia();
                        if r.peek().is_some() {
                            let p = r.pos();
                            return Err(syntax(p, &["end of input"], "trailing content"));
                        }
                        return Ok(list);
                    }
                }
            }
            Some(_) => {
                let s = r.symbol();
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(s),
                    None => return Err(syntax(p, &["`(`"], &s.describe())),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_error_at_start() {
        let err = read_one("").unwrap_err();
        assert_eq!(err.pos(), Pos::START);
        let err = read_one("   ; only a comment\n").unwrap_err();
        assert_eq!(err.pos().line, 2);
    }

    #[test]
    fn positions_are_tracked() {
        let s = read_one("(a\n  (b c))").unwrap();
        let Sexp::List { items, .. } = s else { panic!() };
        let Sexp::List { items: inner, pos } = &items[1] else { panic!() };
        assert_eq!((pos.line, pos.col, pos.offset), (2, 3, 5));
        assert_eq!(inner[1].pos().col, 6);
    }

    #[test]
    fn unbalanced() {
        assert!(matches!(read_one("(a (b)"), Err(PddlError::Syntax { .. })));
        assert!(matches!(read_one("(a))"), Err(PddlError::Syntax { .. })));
        assert!(matches!(read_one("a"), Err(PddlError::Syntax { .. })));
    }
}
