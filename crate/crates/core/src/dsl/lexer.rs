use std::fmt;

use super::parser::ParseError;
use super::KEYWORDS;
use crate::arch::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Keyword(&'static str),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    Arrow,
    Assign,
    EqEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(_) => "identifier",
            Tok::Keyword(k) => return write!(f, "`{k}`"),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Arrow => "`->`",
            Tok::Assign => "`:=`",
            Tok::EqEq => "`==`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.text[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan { start: self.pos, end: self.pos, line: self.line, column: self.col }
    }
}

/// Splits the input into tokens, dropping whitespace and `//` comments. The
/// last token is always `Eof`.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut c = Cursor { text, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        while let Some(ch) = c.peek() {
            if ch.is_whitespace() {
                c.bump();
            } else if ch == '/' && c.peek2() == Some('/') {
                while let Some(ch) = c.peek() {
                    if ch == '\n' {
                        break;
                    }
                    c.bump();
                }
            } else {
                break;
            }
        }
        let mut span = c.here();
        let Some(ch) = c.bump() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = match ch {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ':' if c.peek() == Some('=') => {
                c.bump();
                Tok::Assign
            }
            ':' => Tok::Colon,
            '-' if c.peek() == Some('>') => {
                c.bump();
                Tok::Arrow
            }
            '=' if c.peek() == Some('=') => {
                c.bump();
                Tok::EqEq
            }
            ch if ch.is_ascii_alphabetic() || ch == '_' => {
                while matches!(c.peek(), Some(n) if n.is_ascii_alphanumeric() || n == '_') {
                    c.bump();
                }
                let word = &text[span.start..c.pos];
                match KEYWORDS.iter().find(|k| **k == word) {
                    Some(k) => Tok::Keyword(k),
                    None => Tok::Ident(word.to_string()),
                }
            }
            other => {
                span.end = c.pos;
                return Err(ParseError {
                    message: format!("unexpected character `{}`", other.escape_debug()),
                    span,
                    expected: Vec::new(),
                });
            }
        };
        span.end = c.pos;
        out.push(Token { tok, span });
    }
}
