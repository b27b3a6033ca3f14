//! Report emission: text, JSON and Graphviz DOT.

mod dot;
mod json;

pub use dot::emit_dot;
pub use json::{breach_from_json, emit_json, JsonBreach, JsonLeak, JsonReport, ReplayError};

use std::fmt::Write;

use crate::analyze::{AllBreaches, Analysis, Breach, Verdict};
use crate::model::Model;

pub const TOOL: &str = "failsec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    FailSecure,
    Breach(Box<Breach>),
    /// Every breach at the minimal breaching fault count (`check --all`).
    AllBreaches(Vec<Breach>),
}

/// Result of one `check` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub file: String,
    pub max_faults: usize,
    pub scenarios_checked: u64,
    /// Wall-clock time; not covered by any determinism guarantee.
    pub elapsed_ms: u64,
    pub outcome: Outcome,
}

impl Report {
    pub fn from_analysis(file: impl Into<String>, a: Analysis, elapsed_ms: u64) -> Self {
        Report {
            file: file.into(),
            max_faults: a.max_faults,
            scenarios_checked: a.scenarios_checked,
            elapsed_ms,
            outcome: match a.verdict {
                Verdict::FailSecureUpTo(_) => Outcome::FailSecure,
                Verdict::Breach(b) => Outcome::Breach(b),
            },
        }
    }

    pub fn from_all(file: impl Into<String>, a: AllBreaches, elapsed_ms: u64) -> Self {
        Report {
            file: file.into(),
            max_faults: a.max_faults,
            scenarios_checked: a.scenarios_checked,
            elapsed_ms,
            outcome: if a.breaches.is_empty() {
                Outcome::FailSecure
            } else {
                Outcome::AllBreaches(a.breaches)
            },
        }
    }

    pub fn breaches(&self) -> &[Breach] {
        match &self.outcome {
            Outcome::FailSecure => &[],
            Outcome::Breach(b) => std::slice::from_ref(b),
            Outcome::AllBreaches(all) => all,
        }
    }

    pub fn is_breach(&self) -> bool {
        !self.breaches().is_empty()
    }
}

fn paint(s: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

/// Human-readable report.
pub fn emit_text(model: &Model, report: &Report, color: bool) -> String {
    let name = &model.architecture().name;
    let mut s = String::new();
    let breaches = report.breaches();
    if breaches.is_empty() {
        let _ = writeln!(
            s,
            "{name}: {} up to {} fault(s) ({} scenarios checked)",
            paint("FAIL-SECURE", "1;32", color),
            report.max_faults,
            report.scenarios_checked
        );
        return s;
    }
    let _ = writeln!(
        s,
        "{name}: {} with {} fault(s) ({} scenarios checked, max {})",
        paint("BREACH", "1;31", color),
        breaches[0].scenario.fault_count(),
        report.scenarios_checked,
        report.max_faults
    );
    for (i, b) in breaches.iter().enumerate() {
        if breaches.len() > 1 {
            let _ = writeln!(s, "counterexample {}:", i + 1);
        }
        write_breach(&mut s, model, b);
    }
    s
}

fn write_breach(s: &mut String, model: &Model, b: &Breach) {
    let faults: Vec<&str> = b.scenario.faulty.iter().map(String::as_str).collect();
    let _ = writeln!(s, "  failed: {}", if faults.is_empty() { "(none)".to_string() } else { faults.join(", ") });
    if !b.scenario.routing.is_empty() {
        s.push_str("  routing:\n");
        for (inst, routes) in &b.scenario.routing {
            let r: Vec<String> = routes.iter().map(|(o, i)| format!("{o} <- {i}")).collect();
            let _ = writeln!(s, "    {inst}: {}", r.join(", "));
        }
    }
    s.push_str("  leaks:\n");
    for leak in &b.leaks {
        let _ = writeln!(s, "    {} = {} (product input `{}`)", leak.output, leak.value, leak.matched_input);
    }
    s.push_str("  valuation:\n");
    for (net, v) in b.valuation.named(model) {
        let _ = writeln!(s, "    {net} = {v}");
    }
    // Terms built from inputs are not leaks; list them for the reader.
    let arch = model.architecture();
    for (out, &net) in arch.product_outputs.iter().zip(model.output_nets()) {
        let v = b.valuation.get(net);
        if matches!(v, crate::Value::Term(..)) {
            let atoms: Vec<String> = v.atoms().into_iter().collect();
            if !atoms.is_empty() {
                let _ = writeln!(s, "  note: {out} = {v} is derived from {}", atoms.join(", "));
            }
        }
    }
}
