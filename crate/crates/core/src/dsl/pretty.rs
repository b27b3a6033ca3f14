use std::fmt::Write;

use crate::arch::{Architecture, Expr};

/// Canonical text form: one statement per line, two-space indentation,
/// declaration order preserved. Nets without readers are omitted since the
/// grammar has no spelling for them; they carry no behavior.
pub fn pretty_print(arch: &Architecture) -> String {
    let mut s = String::new();
    for kind in &arch.kinds {
        let _ = writeln!(s, "component {} {{", kind.name);
        let _ = writeln!(s, "  inputs: {};", kind.inputs.join(", "));
        let _ = writeln!(s, "  outputs: {};", kind.outputs.join(", "));
        for (out, expr) in &kind.behavior {
            let _ = writeln!(s, "  {out} := {};", print_expr(expr));
        }
        s.push_str("}\n\n");
    }
    let _ = writeln!(s, "product {} {{", arch.name);
    let _ = writeln!(s, "  inputs: {};", arch.product_inputs.join(", "));
    let _ = writeln!(s, "  outputs: {};", arch.product_outputs.join(", "));
    for inst in &arch.instances {
        let _ = writeln!(s, "  use {}: {};", inst.name, inst.kind);
    }
    for net in arch.nets.iter().filter(|n| !n.readers.is_empty()) {
        let readers: Vec<String> = net.readers.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(s, "  connect {} -> {};", net.driver, readers.join(", "));
    }
    s.push_str("}\n");
    s
}

pub fn print_expr(expr: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, expr);
    s
}

fn write_expr(s: &mut String, expr: &Expr) {
    match expr {
        Expr::Port(p) => s.push_str(p),
        Expr::Null => s.push_str("null"),
        Expr::Ctor(c, args) => {
            s.push_str(c);
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_expr(s, a);
            }
            s.push(')');
        }
        Expr::IfEq { left, right, then_branch, else_branch } => {
            s.push_str("if ");
            write_expr(s, left);
            s.push_str(" == ");
            write_expr(s, right);
            s.push_str(" then ");
            write_expr(s, then_branch);
            s.push_str(" else ");
            write_expr(s, else_branch);
        }
    }
}
