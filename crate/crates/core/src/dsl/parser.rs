//! Recursive-descent parser. Each production consumes a bounded number of
//! tokens per step, so parsing is linear in the input length.

use std::fmt;

use thiserror::Error;

use super::lexer::{tokenize, Tok, Token};
use crate::arch::{
    Architecture, ComponentKind, Endpoint, Expr, Instance, Net, SourceMap, SourceSpan,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    /// Descriptions of the tokens that would have been accepted.
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Parses a `.fsl` file. Semantic problems (unknown ports, cycles, ...) are
/// not parse errors; run [`crate::validate`] on the result.
pub fn parse(text: &str) -> Result<Architecture, ParseError> {
    let tokens = tokenize(text)?;
    Parser { tokens, pos: 0, map: SourceMap::default() }.file()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    map: SourceMap,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_end(&self) -> usize {
        self.pos.checked_sub(1).map_or(0, |p| self.tokens[p].span.end)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(name) => format!("identifier `{name}`"),
            other => other.to_string(),
        };
        ParseError {
            message: format!("unexpected {found}"),
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[&tok.to_string()]))
        }
    }

    fn keyword(&mut self, kw: &'static str) -> Result<Token, ParseError> {
        self.expect(Tok::Keyword(kw))
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn close(&self, mut span: SourceSpan) -> SourceSpan {
        span.end = self.prev_end();
        span
    }

    fn file(mut self) -> Result<Architecture, ParseError> {
        let mut kinds = Vec::new();
        loop {
            match self.peek() {
                Tok::Keyword("component") => kinds.push(self.kind()?),
                Tok::Keyword("product") => break,
                _ => return Err(self.unexpected(&["`component`", "`product`"])),
            }
        }
        let mut arch = self.product()?;
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected(&["end of input"]));
        }
        arch.kinds = kinds;
        arch.spans = Some(self.map);
        Ok(arch)
    }

    fn ports(&mut self, section: &'static str) -> Result<Vec<String>, ParseError> {
        self.keyword(section)?;
        self.expect(Tok::Colon)?;
        let mut ports = vec![self.ident()?];
        while self.eat(Tok::Comma) {
            ports.push(self.ident()?);
        }
        self.expect(Tok::Semi)?;
        Ok(ports)
    }

    fn kind(&mut self) -> Result<ComponentKind, ParseError> {
        let start = self.keyword("component")?.span;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let inputs = self.ports("inputs")?;
        let outputs = self.ports("outputs")?;
        let mut behavior = Vec::new();
        let mut spans = Vec::new();
        while !self.eat(Tok::RBrace) {
            if !matches!(self.peek(), Tok::Ident(_)) {
                return Err(self.unexpected(&["identifier", "`}`"]));
            }
            let aspan = self.span();
            let out = self.ident()?;
            self.expect(Tok::Assign)?;
            let expr = self.expr()?;
            self.expect(Tok::Semi)?;
            behavior.push((out, expr));
            spans.push(self.close(aspan));
        }
        self.map.kinds.push(self.close(start));
        self.map.assignments.push(spans);
        Ok(ComponentKind { name, inputs, outputs, behavior })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Keyword("null") => {
                self.advance();
                Ok(Expr::Null)
            }
            Tok::Keyword("if") => {
                self.advance();
                let left = self.expr()?;
                self.expect(Tok::EqEq)?;
                let right = self.expr()?;
                self.keyword("then")?;
                let then_branch = self.expr()?;
                self.keyword("else")?;
                let else_branch = self.expr()?;
                Ok(Expr::if_eq(left, right, then_branch, else_branch))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(Tok::LParen) {
                    let mut args = vec![self.expr()?];
                    while self.eat(Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Ctor(name, args))
                } else {
                    Ok(Expr::Port(name))
                }
            }
            _ => Err(self.unexpected(&["identifier", "`null`", "`if`"])),
        }
    }

    fn product(&mut self) -> Result<Architecture, ParseError> {
        let start = self.keyword("product")?.span;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let product_inputs = self.ports("inputs")?;
        let product_outputs = self.ports("outputs")?;
        let mut instances = Vec::new();
        while *self.peek() == Tok::Keyword("use") {
            let s = self.advance().span;
            let inst = self.ident()?;
            self.expect(Tok::Colon)?;
            let kind = self.ident()?;
            self.expect(Tok::Semi)?;
            instances.push(Instance { name: inst, kind });
            self.map.instances.push(self.close(s));
        }
        let mut nets = Vec::new();
        loop {
            match self.peek() {
                Tok::Keyword("connect") => {
                    let s = self.advance().span;
                    let driver = self.endpoint(true)?;
                    self.expect(Tok::Arrow)?;
                    let mut readers = vec![self.endpoint(false)?];
                    while self.eat(Tok::Comma) {
                        readers.push(self.endpoint(false)?);
                    }
                    self.expect(Tok::Semi)?;
                    nets.push(Net { driver, readers });
                    self.map.nets.push(self.close(s));
                }
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                _ if nets.is_empty() => {
                    return Err(self.unexpected(&["`use`", "`connect`", "`}`"]))
                }
                _ => return Err(self.unexpected(&["`connect`", "`}`"])),
            }
        }
        self.map.product = Some(self.close(start));
        Ok(Architecture {
            name,
            product_inputs,
            product_outputs,
            kinds: Vec::new(),
            instances,
            nets,
            spans: None,
        })
    }

    /// Position decides the role: left of `->` is a driver, right is a reader.
    fn endpoint(&mut self, driver: bool) -> Result<Endpoint, ParseError> {
        let first = self.ident()?;
        if self.eat(Tok::Dot) {
            let port = self.ident()?;
            Ok(if driver {
                Endpoint::CompOut { instance: first, port }
            } else {
                Endpoint::CompIn { instance: first, port }
            })
        } else if driver {
            Ok(Endpoint::ProductInput(first))
        } else {
            Ok(Endpoint::ProductOutput(first))
        }
    }
}
