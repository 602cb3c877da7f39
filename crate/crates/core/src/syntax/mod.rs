//! Tokenizer and cursor shared by the constraint, type, process and document
//! grammars.

use std::fmt;

use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Unsigned numeric literal, integer or decimal. `p/q` is assembled by
    /// the parsers from `Number Slash Number`.
    Number(Rational),
    Str(String),
    Bang,
    Question,
    Dot,
    Comma,
    Semi,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Le,
    Gt,
    Ge,
    EqTok,
    Ne,
    Minus,
    Plus,
    Star,
    Slash,
    Pipe,
    Arrow,
    Infinity,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Number(n) => return write!(f, "number `{n}`"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::Bang => "`!`",
            Tok::Question => "`?`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::EqTok => "`=`",
            Tok::Ne => "`!=`",
            Tok::Minus => "`-`",
            Tok::Plus => "`+`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`->`",
            Tok::Infinity => "`inf`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                advance!();
            }
            let tok = if s == "inf" { Tok::Infinity } else { Tok::Ident(s) };
            out.push(Token { tok, pos });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) && !matches!(out.last(), Some(Token { tok: Tok::Ident(_) | Tok::RParen | Tok::RBrace, .. }))) {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance!();
            }
            // A dot followed by a digit continues a decimal literal; a dot
            // followed by anything else is the sequencing operator.
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                s.push('.');
                advance!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    advance!();
                }
            }
            let value: Rational = s
                .parse()
                .map_err(|_| ParseError::new(pos, format!("invalid number `{s}`")))?;
            out.push(Token { tok: Tok::Number(value), pos });
            continue;
        }
        if c == '"' {
            advance!();
            let mut s = String::new();
            while i < chars.len() && chars[i] != '"' {
                s.push(chars[i]);
                advance!();
            }
            if i >= chars.len() {
                return Err(ParseError::new(pos, "unterminated string literal"));
            }
            advance!();
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('=', Some('=')) => (Tok::EqTok, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('≤', _) => (Tok::Le, 1),
            ('≥', _) => (Tok::Ge, 1),
            ('≠', _) => (Tok::Ne, 1),
            ('∞', _) => (Tok::Infinity, 1),
            ('→', _) => (Tok::Arrow, 1),
            ('!', _) => (Tok::Bang, 1),
            ('?', _) => (Tok::Question, 1),
            ('.', _) => (Tok::Dot, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::EqTok, 1),
            ('-', _) => (Tok::Minus, 1),
            ('−', _) => (Tok::Minus, 1),
            ('+', _) => (Tok::Plus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('|', _) => (Tok::Pipe, 1),
            _ => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
        };
        for _ in 0..width {
            advance!();
        }
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

/// Token cursor with one-token lookahead helpers.
#[derive(Debug, Clone)]
pub struct Cursor {
    tokens: Vec<Token>,
    idx: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            tokens: tokenize(src)?,
            idx: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.idx + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub fn pos(&self) -> Pos {
        self.tokens[self.idx].pos
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.tokens[self.idx].tok.clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    pub fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    pub fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found {}", self.peek())))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    /// Unsigned rational literal: `n`, `n.m` or `p/q`.
    pub fn number(&mut self) -> Result<Rational, ParseError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                if self.at(&Tok::Slash) {
                    if let Tok::Number(d) = self.peek_at(1).clone() {
                        self.bump();
                        self.bump();
                        if d.is_zero() {
                            return Err(self.error("zero denominator"));
                        }
                        return Ok(n / d);
                    }
                }
                Ok(n)
            }
            other => Err(self.error(format!("expected number, found {other}"))),
        }
    }

    /// Optionally negated rational literal.
    pub fn signed_number(&mut self) -> Result<Rational, ParseError> {
        if self.eat(&Tok::Minus) {
            Ok(-self.number()?)
        } else {
            self.number()
        }
    }

    pub fn is_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.is_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected trailing {}", self.peek())))
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.pos(), message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn dot_after_identifier_is_sequencing() {
        assert_eq!(
            toks("a.b"),
            vec![Tok::Ident("a".into()), Tok::Dot, Tok::Ident("b".into()), Tok::Eof]
        );
        assert_eq!(
            toks("x>1.5"),
            vec![Tok::Ident("x".into()), Tok::Gt, Tok::Number(Rational::new(3, 2)), Tok::Eof]
        );
        // `2).end`: the dot belongs to the continuation, not the number.
        assert_eq!(
            toks("2).end"),
            vec![Tok::Number(Rational::integer(2)), Tok::RParen, Tok::Dot, Tok::Ident("end".into()), Tok::Eof]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  end").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("end".into()));
        assert_eq!(t[0].pos, Pos { line: 2, column: 3 });
    }

    #[test]
    fn fraction_literal() {
        let mut c = Cursor::new("3/2").unwrap();
        assert_eq!(c.number().unwrap(), Rational::new(3, 2));
    }
}
