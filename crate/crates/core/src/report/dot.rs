use std::fmt::Write;

use crate::analyze::Breach;
use crate::arch::{Architecture, Endpoint};

const FAILED_FILL: &str = "#f4a582";

fn node_id(ep: &Endpoint) -> String {
    match ep {
        Endpoint::ProductInput(p) => format!("\"in:{p}\""),
        Endpoint::ProductOutput(p) => format!("\"out:{p}\""),
        Endpoint::CompIn { instance, .. } | Endpoint::CompOut { instance, .. } => {
            format!("\"{instance}\"")
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of the architecture. With a breach, failed instances
/// are filled and every edge is labeled `net = value`.
pub fn emit_dot(arch: &Architecture, breach: Option<&Breach>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph \"{}\" {{", escape(&arch.name));
    s.push_str("  rankdir=LR;\n");
    s.push_str("  node [fontname=\"Helvetica\"];\n");
    s.push_str("  edge [fontname=\"Helvetica\", fontsize=10];\n");
    for p in &arch.product_inputs {
        let _ = writeln!(s, "  \"in:{p}\" [shape=ellipse, label=\"{p}\"];");
    }
    for p in &arch.product_outputs {
        let _ = writeln!(s, "  \"out:{p}\" [shape=ellipse, label=\"{p}\"];");
    }
    for inst in &arch.instances {
        let routes = breach.and_then(|b| b.scenario.routing.get(&inst.name));
        match routes {
            Some(r) => {
                let r: Vec<String> = r.iter().map(|(o, i)| format!("{o} <- {i}")).collect();
                let _ = writeln!(
                    s,
                    "  \"{0}\" [shape=box, style=\"rounded,filled\", fillcolor=\"{FAILED_FILL}\", label=\"{0}: {1}\\nFAILED {2}\"];",
                    inst.name,
                    inst.kind,
                    r.join(", ")
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "  \"{0}\" [shape=box, style=rounded, label=\"{0}: {1}\"];",
                    inst.name, inst.kind
                );
            }
        }
    }
    for (id, net) in arch.nets.iter().enumerate() {
        let label = breach.map(|b| format!("{} = {}", net.name(), b.valuation.get(id)));
        for r in &net.readers {
            let _ = write!(s, "  {} -> {}", node_id(&net.driver), node_id(r));
            match &label {
                Some(l) => {
                    let _ = writeln!(s, " [label=\"{}\"];", escape(l));
                }
                None => s.push_str(";\n"),
            }
        }
    }
    s.push_str("}\n");
    s
}
