//! Manchester-syntax reader and writer for [`ClassExpression`].
//!
//! Grammar (keywords are case-sensitive):
//!
//! ```text
//! Expr := Conj ('or' Conj)*
//! Conj := Prim ('and' Prim)*
//! Prim := 'Thing' | '(' Expr ')' | Role 'some' Prim | Prop 'value' ('true'|'false') | Class
//! ```

use super::expr::ClassExpression;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown token {found:?} at byte {offset}")]
    UnknownToken { offset: usize, found: char },
}

const KEYWORDS: [&str; 7] = ["and", "or", "some", "value", "true", "false", "Thing"];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Identifier that may be used as a class, role or property name.
pub fn is_valid_name(s: &str) -> bool {
    is_identifier(s) && !KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok<'_>)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b == b'(' {
            out.push((i, Tok::LParen));
            i += 1;
        } else if b == b')' {
            out.push((i, Tok::RParen));
            i += 1;
        } else if b.is_ascii_alphanumeric() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            if word.as_bytes()[0].is_ascii_digit() {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("name {word:?} must not start with a digit"),
                });
            }
            out.push((start, Tok::Word(word)));
        } else {
            let found = text[i..].chars().next().unwrap_or('\u{fffd}');
            return Err(ParseError::UnknownToken { offset: i, found });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { offset: self.offset(), message: message.into() })
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek() == Some(&Tok::Word(kw)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ClassExpression, ParseError> {
        let mut parts = vec![self.conj()?];
        while self.eat_keyword("or") {
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { ClassExpression::Or(parts) })
    }

    fn conj(&mut self) -> Result<ClassExpression, ParseError> {
        let mut parts = vec![self.prim()?];
        while self.eat_keyword("and") {
            parts.push(self.prim()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { ClassExpression::And(parts) })
    }

    fn prim(&mut self) -> Result<ClassExpression, ParseError> {
        match self.peek().cloned() {
            None => self.error("unexpected end of input"),
            Some(Tok::RParen) => self.error("unexpected ')'"),
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Word("Thing")) => {
                self.pos += 1;
                Ok(ClassExpression::Top)
            }
            Some(Tok::Word(word)) => {
                if KEYWORDS.contains(&word) {
                    return self.error(format!("unexpected keyword {word:?}"));
                }
                self.pos += 1;
                if self.eat_keyword("some") {
                    let filler = self.prim()?;
                    Ok(ClassExpression::Exists(word.to_string(), Box::new(filler)))
                } else if self.eat_keyword("value") {
                    let value = match self.peek() {
                        Some(Tok::Word("true")) => true,
                        Some(Tok::Word("false")) => false,
                        _ => return self.error("expected 'true' or 'false' after 'value'"),
                    };
                    self.pos += 1;
                    Ok(ClassExpression::Value(word.to_string(), value))
                } else {
                    Ok(ClassExpression::Atomic(word.to_string()))
                }
            }
        }
    }
}

/// Parses a Manchester-syntax class expression and returns its canonical form.
pub fn parse_manchester(text: &str) -> Result<ClassExpression, ParseError> {
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, pos: 0, end: text.len() };
    let expr = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.error("trailing input");
    }
    Ok(expr.canonical())
}

/// Renders an expression. `Or` inside `And` and any connective used as a
/// `some` filler are parenthesized.
pub fn print_manchester(expr: &ClassExpression) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn write_expr(expr: &ClassExpression, out: &mut String) {
    match expr {
        ClassExpression::Top => out.push_str("Thing"),
        ClassExpression::Atomic(name) => out.push_str(name),
        ClassExpression::Value(prop, value) => {
            out.push_str(prop);
            out.push_str(if *value { " value true" } else { " value false" });
        }
        ClassExpression::Exists(role, filler) => {
            out.push_str(role);
            out.push_str(" some ");
            match **filler {
                ClassExpression::And(_) | ClassExpression::Or(_) => {
                    out.push('(');
                    write_expr(filler, out);
                    out.push(')');
                }
                _ => write_expr(filler, out),
            }
        }
        ClassExpression::And(children) => {
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" and ");
                }
                if matches!(child, ClassExpression::Or(_)) {
                    out.push('(');
                    write_expr(child, out);
                    out.push(')');
                } else {
                    write_expr(child, out);
                }
            }
        }
        ClassExpression::Or(children) => {
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" or ");
                }
                write_expr(child, out);
            }
        }
    }
}
