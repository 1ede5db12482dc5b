//! Minimal s-expression layer under the PDDL reader: a lexer that tracks
//! line:column positions and a recursive parser producing position-tagged
//! trees. Identifiers are case-folded to lower case here, per PDDL
//! convention.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub enum Sexpr {
    Sym(String, Position),
    List(Vec<Sexpr>, Position),
}

impl Sexpr {
    pub fn pos(&self) -> Position {
        match self {
            Sexpr::Sym(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_sym(&self) -> Option<(&str, Position)> {
        match self {
            Sexpr::Sym(s, p) => Some((s.as_str(), *p)),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<(&[Sexpr], Position)> {
        match self {
            Sexpr::List(items, p) => Some((items.as_slice(), *p)),
            Sexpr::Sym(..) => None,
        }
    }

    /// Short description used in diagnostics.
    pub fn describe(&self) -> String {
        match self {
            Sexpr::Sym(s, _) => format!("`{s}`"),
            Sexpr::List(..) => "a list".to_string(),
        }
    }
}

#[derive(Debug)]
enum Token {
    LParen(Position),
    RParen(Position),
    Sym(String, Position),
}

#[derive(Debug)]
pub struct LexError {
    pub pos: Position,
    pub message: String,
}

fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Position { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                tokens.push(Token::LParen(pos));
            }
            ')' => {
                chars.next();
                col += 1;
                tokens.push(Token::RParen(pos));
            }
            c if c == '(' || c == ')' => unreachable!(),
            c if is_symbol_char(c) => {
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_symbol_char(c) {
                        break;
                    }
                    sym.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                tokens.push(Token::Sym(sym, pos));
            }
            c => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(tokens)
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '?' | ':' | '-' | '_' | '=' | '*' | '.' | '!' | '<' | '>' | '+' | '/')
}

/// Parses the full input into a sequence of top-level s-expressions.
pub fn parse(text: &str) -> Result<Vec<Sexpr>, LexError> {
    let tokens = lex(text)?;
    let mut stack: Vec<(Vec<Sexpr>, Position)> = Vec::new();
    let mut top = Vec::new();
    let mut last_pos = Position { line: 1, col: 1 };
    for token in tokens {
        match token {
            Token::LParen(pos) => {
                stack.push((Vec::new(), pos));
                last_pos = pos;
            }
            Token::RParen(pos) => {
                last_pos = pos;
                let (items, open_pos) = stack.pop().ok_or(LexError {
                    pos,
                    message: "unmatched `)`".to_string(),
                })?;
                let list = Sexpr::List(items, open_pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            Token::Sym(s, pos) => {
                last_pos = pos;
                let sym = Sexpr::Sym(s, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(sym),
                    None => top.push(sym),
                }
            }
        }
    }
    if let Some((_, open_pos)) = stack.last() {
        return Err(LexError {
            pos: *open_pos,
            message: format!("unclosed `(` (input ends at {last_pos})"),
        });
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_tracked() {
        let exprs = parse("(a\n  (b c))").unwrap();
        assert_eq!(exprs.len(), 1);
        let (items, pos) = exprs[0].as_list().unwrap();
        assert_eq!((pos.line, pos.col), (1, 1));
        let (inner, pos) = items[1].as_list().unwrap();
        assert_eq!((pos.line, pos.col), (2, 3));
        assert_eq!(inner[1].as_sym().unwrap().0, "c");
    }

    #[test]
    fn comments_and_case_folding() {
        let exprs = parse("(Foo ; comment\n BAR)").unwrap();
        let (items, _) = exprs[0].as_list().unwrap();
        assert_eq!(items[0].as_sym().unwrap().0, "foo");
        assert_eq!(items[1].as_sym().unwrap().0, "bar");
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        assert!(parse("(a (b)").is_err());
        assert!(parse(")").is_err());
    }
}
