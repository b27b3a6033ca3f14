//! Symbolic values carried on nets.
//!
//! Values are free constructor terms over the product input atoms. Two values
//! are equal exactly when they are structurally identical; constructors are
//! uninterpreted, so `enc(key, msg)` never equals `key`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// A symbolic datum: an input atom, `null`, or a constructor application.
///
/// Cloning is cheap; subterms are shared behind `Arc`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    /// The value entering the product on the named input port.
    Atom(Arc<str>),
    Null,
    /// Constructor applied to at least one argument.
    Term(Arc<str>, Arc<[Value]>),
}

impl Value {
    pub fn atom(source: impl Into<Arc<str>>) -> Self {
        Value::Atom(source.into())
    }

    /// Builds `ctor(args...)`.
    ///
    /// Panics if `args` is empty: terms always have at least one argument.
    pub fn term(ctor: impl Into<Arc<str>>, args: Vec<Value>) -> Self {
        assert!(!args.is_empty(), "constructor terms need at least one argument");
        Value::Term(ctor.into(), args.into())
    }

    /// Structural equality.
    pub fn equals(&self, other: &Value) -> bool {
        self == other
    }

    /// Canonical spelling, e.g. `key`, `null`, `enc(key, msg)`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Every atom source occurring anywhere inside the value.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Value::Atom(a) => {
                out.insert(a.to_string());
            }
            Value::Null => {}
            Value::Term(_, args) => args.iter().for_each(|a| a.collect_atoms(out)),
        }
    }

    /// Number of nodes in the term tree.
    pub fn size(&self) -> usize {
        match self {
            Value::Atom(_) | Value::Null => 1,
            Value::Term(_, args) => 1 + args.iter().map(Value::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => f.write_str(a),
            Value::Null => f.write_str("null"),
            Value::Term(c, args) => {
                write!(f, "{c}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed value at byte {offset}: {message}")]
pub struct ValueSyntaxError {
    pub offset: usize,
    pub message: String,
}

/// Parses the rendered form back into a value. Used when replaying reports.
impl FromStr for Value {
    type Err = ValueSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ValueReader { src: s.as_bytes(), pos: 0 };
        let v = p.value()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(v)
    }
}

struct ValueReader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ValueReader<'_> {
    fn error(&self, message: &str) -> ValueSyntaxError {
        ValueSyntaxError { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<&str, ValueSyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return Err(self.error("expected identifier"));
        }
        // only ASCII bytes were consumed
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn value(&mut self) -> Result<Value, ValueSyntaxError> {
        let name = self.ident()?.to_string();
        if self.eat(b'(') {
            let mut args = vec![self.value()?];
            while self.eat(b',') {
                args.push(self.value()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected `,` or `)`"));
            }
            Ok(Value::term(name, args))
        } else if name == "null" {
            Ok(Value::Null)
        } else {
            Ok(Value::atom(name))
        }
    }
}
