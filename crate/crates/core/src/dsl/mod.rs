//! Text front end for `.fsl` architecture descriptions.
//!
//! ```text
//! component Comparator {
//!   inputs: a, b;  outputs: out;
//!   out := if a == b then a else null;
//! }
//! product P { inputs: x, y; outputs: out; use cmp: Comparator;
//!   connect x -> cmp.a; connect y -> cmp.b; connect cmp.out -> out; }
//! ```

mod lexer;
mod parser;
mod pretty;

pub use parser::{parse, ParseError};
pub use pretty::{pretty_print, print_expr};

/// Words that cannot be used as identifiers.
pub const KEYWORDS: &[&str] = &[
    "component", "product", "inputs", "outputs", "use", "connect", "if", "then", "else", "null",
];

/// `[A-Za-z_][A-Za-z0-9_]*`, excluding keywords.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&s)
}
