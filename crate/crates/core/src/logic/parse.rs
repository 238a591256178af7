use std::collections::HashMap;

use thiserror::Error;

use super::{Comparison, PathFormula, StateFormula};
use crate::rational::{in_unit_interval, parse_rational, Rational};

/// Named path formulas that may stand alone inside `P~r [ name ]`.
pub type Bindings = HashMap<String, PathFormula>;

const RESERVED: [&str; 4] = ["true", "P", "X", "U"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub fn parse_formula(text: &str) -> Result<StateFormula, ParseError> {
    parse_formula_with(text, &Bindings::new())
}

pub fn parse_formula_with(text: &str, bindings: &Bindings) -> Result<StateFormula, ParseError> {
    let mut p = Parser::new(text, bindings, 1);
    let f = p.state()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

/// Parses a formula file: optional `let NAME = <path formula>` lines followed
/// by one state formula (which may span several lines). `#` starts a comment.
pub fn parse_formula_file(text: &str) -> Result<(StateFormula, Bindings), ParseError> {
    let mut bindings = Bindings::new();
    let mut body = String::new();
    let mut body_line = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("let ") {
            if body_line.is_some() {
                return Err(ParseError {
                    line: line_no,
                    column: 1,
                    message: "`let` after the formula body".into(),
                });
            }
            let (name, _) = rest.split_once('=').ok_or_else(|| ParseError {
                line: line_no,
                column: 1,
                message: "expected `let NAME = <path formula>`".into(),
            })?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(is_ident_char) || RESERVED.contains(&name) {
                return Err(ParseError {
                    line: line_no,
                    column: 5,
                    message: format!("invalid binding name `{name}`"),
                });
            }
            let offset = line.find('=').unwrap() + 1;
            let mut p = Parser::new(&line[offset..], &bindings, line_no);
            p.column_offset = line[..offset].chars().count();
            let path = p.path()?;
            p.skip_ws();
            if !p.at_end() {
                return Err(p.error("unexpected trailing input"));
            }
            bindings.insert(name.to_string(), path);
        } else {
            body_line.get_or_insert(line_no);
            body.push_str(line);
            body.push(' ');
        }
    }
    let Some(line_no) = body_line else {
        return Err(ParseError {
            line: text.lines().count().max(1),
            column: 1,
            message: "missing formula".into(),
        });
    };
    let mut p = Parser::new(&body, &bindings, line_no);
    let f = p.state()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok((f, bindings))
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '•')
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    bindings: &'a Bindings,
    line: usize,
    column_offset: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &str, bindings: &'a Bindings, line: usize) -> Self {
        Self {
            chars: text.chars().collect(),
            pos: 0,
            bindings,
            line,
            column_offset: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column_offset + self.pos + 1,
            message: message.into(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    /// Identifier, optionally followed by an attached `(a,b)` group.
    fn word(&mut self) -> Result<Option<String>, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        if self.pos == start {
            return Ok(None);
        }
        if self.peek() == Some('(') {
            let group_start = self.pos;
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) if is_ident_char(c) || c == ',' => self.pos += 1,
                    _ => {
                        // not a symbol group, e.g. `X(a & b)`
                        self.pos = group_start;
                        break;
                    }
                }
            }
        }
        Ok(Some(self.chars[start..self.pos].iter().collect()))
    }

    fn state(&mut self) -> Result<StateFormula, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('!') => {
                self.pos += 1;
                Ok(StateFormula::not(self.state()?))
            }
            Some('(') => {
                self.pos += 1;
                let a = self.state()?;
                self.expect('&')?;
                let b = self.state()?;
                self.expect(')')?;
                Ok(StateFormula::and(a, b))
            }
            Some(_) => {
                let start = self.pos;
                let Some(w) = self.word()? else {
                    return Err(self.error("expected a state formula"));
                };
                match w.as_str() {
                    "true" => Ok(StateFormula::True),
                    "P" => self.prob(),
                    "X" | "U" => {
                        self.pos = start;
                        Err(self.error(format!("`{w}` is reserved")))
                    }
                    _ => Ok(StateFormula::Atom(w)),
                }
            }
        }
    }

    fn prob(&mut self) -> Result<StateFormula, ParseError> {
        self.skip_ws();
        let cmp = match self.peek() {
            Some('>') if self.chars.get(self.pos + 1) == Some(&'=') => {
                return Err(self.error("comparison `>=` is not supported (use `>` or `=`)"))
            }
            Some('>') => Comparison::Greater,
            Some('=') => Comparison::Equal,
            Some(c @ ('<' | '≥' | '≤')) => {
                return Err(self.error(format!("comparison `{c}` is not supported (use `>` or `=`)")))
            }
            _ => return Err(self.error("expected `>` or `=` after `P`")),
        };
        self.pos += 1;
        let bound = self.probability()?;
        self.expect('[')?;
        let path = self.path()?;
        self.expect(']')?;
        Ok(StateFormula::prob(cmp, bound, path))
    }

    fn digits(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn probability(&mut self) -> Result<Rational, ParseError> {
        let at = self.pos;
        let mut text = self.digits()?;
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            text.push('/');
            text.push_str(&self.digits()?);
        }
        let r = parse_rational(&text).map_err(|e| {
            let mut err = self.error(e.to_string());
            err.column = self.column_offset + at + 1;
            err
        })?;
        if !in_unit_interval(&r) {
            let mut err = self.error(format!("probability bound {r} outside [0,1]"));
            err.column = self.column_offset + at + 1;
            return Err(err);
        }
        Ok(r)
    }

    fn path(&mut self) -> Result<PathFormula, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if let Some(w) = self.word()? {
            if w == "X" {
                return Ok(PathFormula::next(self.state()?));
            }
            if let Some(bound) = self.bindings.get(&w) {
                self.skip_ws();
                if self.peek() == Some(']') || self.at_end() {
                    return Ok(bound.clone());
                }
            }
        }
        self.pos = start;
        let lhs = self.state()?;
        self.skip_ws();
        let at = self.pos;
        match self.word()? {
            Some(w) if w == "U" => {}
            _ => {
                self.pos = at;
                return Err(self.error("expected `U` or `U<=k`"));
            }
        }
        if self.peek() == Some('<') {
            if self.chars.get(self.pos + 1) != Some(&'=') {
                return Err(self.error("expected `U<=`"));
            }
            self.pos += 2;
            let digits = self.digits()?;
            let k: u32 = digits
                .parse()
                .map_err(|_| self.error(format!("step bound `{digits}` out of range")))?;
            let rhs = self.state()?;
            Ok(PathFormula::bounded_until(lhs, rhs, k))
        } else {
            let rhs = self.state()?;
            Ok(PathFormula::until(lhs, rhs))
        }
    }
}
