//! Well-formedness checks and the evaluation schedule.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::arch::{Architecture, ComponentKind, Endpoint, Expr, SourceSpan};
use crate::dsl::is_identifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    MultiDriver,
    UnconnectedInput,
    Cycle,
    ZeroPortKind,
    BadPortRef,
    DupName,
    UnknownKind,
    MissingBehavior,
    BadName,
    BadExpr,
    DanglingInput,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::MultiDriver => "E_MULTI_DRIVER",
            Code::UnconnectedInput => "E_UNCONNECTED_INPUT",
            Code::Cycle => "E_CYCLE",
            Code::ZeroPortKind => "E_ZERO_PORT_KIND",
            Code::BadPortRef => "E_BAD_PORT_REF",
            Code::DupName => "E_DUP_NAME",
            Code::UnknownKind => "E_UNKNOWN_KIND",
            Code::MissingBehavior => "E_MISSING_BEHAVIOR",
            Code::BadName => "E_BAD_NAME",
            Code::BadExpr => "E_BAD_EXPR",
            Code::DanglingInput => "W_DANGLING_INPUT",
        }
    }

    pub fn is_error(self) -> bool {
        !matches!(self, Code::DanglingInput)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.code.is_error()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(span) => write!(f, "{span}: {}: {}", self.code, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("dataflow graph has a cycle through: {}", instances.join(", "))]
pub struct CycleError {
    pub instances: Vec<String>,
}

struct Checker<'a> {
    arch: &'a Architecture,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn push(&mut self, code: Code, span: Option<SourceSpan>, message: String) {
        self.out.push(Diagnostic { code, message, span });
    }

    fn name(&mut self, what: &str, name: &str, span: Option<SourceSpan>) {
        if !is_identifier(name) {
            self.push(Code::BadName, span, format!("{what} name `{name}` is not a valid identifier"));
        }
    }

    fn names(&mut self) {
        let arch = self.arch;
        let pspan = arch.product_span();
        self.name("product", &arch.name, pspan);
        for p in arch.product_inputs.iter().chain(&arch.product_outputs) {
            self.name("product port", p, pspan);
        }
        for (i, k) in arch.kinds.iter().enumerate() {
            let span = arch.kind_span(i);
            self.name("component", &k.name, span);
            for p in k.inputs.iter().chain(&k.outputs) {
                self.name("port", p, span);
            }
            for (j, (_, e)) in k.behavior.iter().enumerate() {
                let span = arch.assignment_span(i, j);
                e.walk(&mut |sub| {
                    if let Expr::Ctor(c, _) = sub {
                        if !is_identifier(c) {
                            self.out.push(Diagnostic {
                                code: Code::BadName,
                                message: format!("constructor name `{c}` is not a valid identifier"),
                                span,
                            });
                        }
                    }
                });
            }
        }
        for (i, inst) in arch.instances.iter().enumerate() {
            self.name("instance", &inst.name, arch.instance_span(i));
        }
    }

    fn kinds(&mut self) {
        let arch = self.arch;
        let mut seen = HashSet::new();
        for (i, kind) in arch.kinds.iter().enumerate() {
            let span = arch.kind_span(i);
            if !seen.insert(kind.name.as_str()) {
                self.push(Code::DupName, span, format!("component `{}` is defined twice", kind.name));
            }
            self.kind(i, kind, span);
        }
    }

    fn kind(&mut self, index: usize, kind: &ComponentKind, span: Option<SourceSpan>) {
        if kind.inputs.is_empty() || kind.outputs.is_empty() {
            self.push(
                Code::ZeroPortKind,
                span,
                format!("component `{}` needs at least one input and one output", kind.name),
            );
        }
        let mut ports = HashSet::new();
        for p in kind.inputs.iter().chain(&kind.outputs) {
            if !ports.insert(p.as_str()) {
                self.push(Code::DupName, span, format!("port `{p}` is declared twice in `{}`", kind.name));
            }
        }
        let mut assigned = HashSet::new();
        for (j, (out, expr)) in kind.behavior.iter().enumerate() {
            let aspan = self.arch.assignment_span(index, j);
            if kind.output_index(out).is_none() {
                self.push(
                    Code::BadPortRef,
                    aspan,
                    format!("`{out}` is not an output of `{}`", kind.name),
                );
            } else if !assigned.insert(out.as_str()) {
                self.push(
                    Code::DupName,
                    aspan,
                    format!("output `{out}` of `{}` is assigned twice", kind.name),
                );
            }
            let mut problems = Vec::new();
            expr.walk(&mut |e| match e {
                Expr::Port(p) if kind.input_index(p).is_none() => problems.push((
                    Code::BadPortRef,
                    format!("`{p}` is not an input of `{}`", kind.name),
                )),
                Expr::Ctor(c, args) if args.is_empty() => problems.push((
                    Code::BadExpr,
                    format!("constructor `{c}` has no arguments"),
                )),
                _ => {}
            });
            for (code, msg) in problems {
                self.push(code, aspan, msg);
            }
        }
        for out in &kind.outputs {
            if kind.behavior_of(out).is_none() {
                self.push(
                    Code::MissingBehavior,
                    span,
                    format!("output `{out}` of `{}` has no behavior", kind.name),
                );
            }
        }
    }

    fn product(&mut self) {
        let arch = self.arch;
        let pspan = arch.product_span();
        let mut ports = HashSet::new();
        for p in arch.product_inputs.iter().chain(&arch.product_outputs) {
            if !ports.insert(p.as_str()) {
                self.push(Code::DupName, pspan, format!("product port `{p}` is declared twice"));
            }
        }
        let mut names = HashSet::new();
        for (i, inst) in arch.instances.iter().enumerate() {
            let span = arch.instance_span(i);
            if !names.insert(inst.name.as_str()) {
                self.push(Code::DupName, span, format!("instance `{}` is declared twice", inst.name));
            }
            if arch.kind(&inst.kind).is_none() {
                self.push(
                    Code::UnknownKind,
                    span,
                    format!("instance `{}` uses unknown component `{}`", inst.name, inst.kind),
                );
            }
        }
    }

    /// Checks that an endpoint names an existing port in the right role.
    fn endpoint(&mut self, ep: &Endpoint, as_driver: bool, span: Option<SourceSpan>) -> bool {
        let arch = self.arch;
        let role_ok = ep.is_driver_role() == as_driver;
        let problem = match ep {
            Endpoint::ProductInput(p) | Endpoint::ProductOutput(p) => {
                let is_in = arch.product_inputs.contains(p);
                let is_out = arch.product_outputs.contains(p);
                if !is_in && !is_out {
                    Some(format!("`{p}` is not a product port"))
                } else if !role_ok
                    || (matches!(ep, Endpoint::ProductInput(_)) && !is_in)
                    || (matches!(ep, Endpoint::ProductOutput(_)) && !is_out)
                {
                    Some(format!(
                        "product port `{p}` cannot be a net {}",
                        if as_driver { "driver" } else { "reader" }
                    ))
                } else {
                    None
                }
            }
            Endpoint::CompIn { instance, port } | Endpoint::CompOut { instance, port } => {
                match arch.instance(instance) {
                    None => Some(format!("unknown instance `{instance}`")),
                    Some(inst) => match arch.kind(&inst.kind) {
                        // already reported as E_UNKNOWN_KIND
                        None => return false,
                        Some(kind) => {
                            let is_in = kind.input_index(port).is_some();
                            let is_out = kind.output_index(port).is_some();
                            if !is_in && !is_out {
                                Some(format!("`{}` has no port `{port}`", kind.name))
                            } else if !role_ok
                                || (matches!(ep, Endpoint::CompIn { .. }) && !is_in)
                                || (matches!(ep, Endpoint::CompOut { .. }) && !is_out)
                            {
                                Some(format!(
                                    "port `{instance}.{port}` cannot be a net {}",
                                    if as_driver { "driver" } else { "reader" }
                                ))
                            } else {
                                None
                            }
                        }
                    },
                }
            }
        };
        match problem {
            Some(msg) => {
                self.push(Code::BadPortRef, span, msg);
                false
            }
            None => true,
        }
    }

    fn nets(&mut self) {
        let arch = self.arch;
        let mut drivers: HashMap<&Endpoint, usize> = HashMap::new();
        let mut readers: HashMap<&Endpoint, usize> = HashMap::new();
        for (i, net) in arch.nets.iter().enumerate() {
            let span = arch.net_span(i);
            if self.endpoint(&net.driver, true, span) {
                if let Some(first) = drivers.insert(&net.driver, i) {
                    self.push(
                        Code::MultiDriver,
                        span,
                        format!("`{}` drives more than one net (first at net {first})", net.driver),
                    );
                    drivers.insert(&net.driver, first);
                }
            }
            if net.readers.is_empty() && matches!(net.driver, Endpoint::ProductInput(_)) {
                self.push(
                    Code::DanglingInput,
                    span,
                    format!("product input `{}` is not read by anything", net.driver),
                );
            }
            for r in &net.readers {
                if self.endpoint(r, false, span) {
                    if let Some(prev) = readers.insert(r, i) {
                        let other = &arch.nets[prev].driver;
                        self.push(
                            Code::MultiDriver,
                            span,
                            format!("`{r}` is driven by both `{other}` and `{}`", net.driver),
                        );
                        readers.insert(r, prev);
                    }
                }
            }
        }
        let pspan = arch.product_span();
        for p in &arch.product_inputs {
            if !drivers.contains_key(&Endpoint::ProductInput(p.clone())) {
                self.push(Code::DanglingInput, pspan, format!("product input `{p}` is not connected"));
            }
        }
        for p in &arch.product_outputs {
            if !readers.contains_key(&Endpoint::ProductOutput(p.clone())) {
                self.push(
                    Code::UnconnectedInput,
                    pspan,
                    format!("product output `{p}` is not connected"),
                );
            }
        }
        for (i, inst) in arch.instances.iter().enumerate() {
            let Some(kind) = arch.kind(&inst.kind) else { continue };
            for p in &kind.inputs {
                if !readers.contains_key(&Endpoint::comp_in(&inst.name, p)) {
                    self.push(
                        Code::UnconnectedInput,
                        arch.instance_span(i),
                        format!("input `{}.{p}` is not connected", inst.name),
                    );
                }
            }
        }
    }

    fn cycles(&mut self) {
        if let Err(e) = dataflow_order(self.arch) {
            let span = self
                .arch
                .instance_index(&e.instances[0])
                .and_then(|i| self.arch.instance_span(i));
            self.push(Code::Cycle, span, e.to_string());
        }
    }
}

/// Checks every well-formedness rule. An empty result means the architecture
/// is valid; warnings (`W_…`) do not make it invalid.
pub fn validate(arch: &Architecture) -> Vec<Diagnostic> {
    let mut c = Checker { arch, out: Vec::new() };
    c.names();
    c.kinds();
    c.product();
    c.nets();
    c.cycles();
    c.out
}

/// Instance-level successor lists: `u -> v` when a net driven by an output of
/// `u` is read by an input of `v`. Unresolvable endpoints are skipped.
fn instance_graph(arch: &Architecture) -> Vec<Vec<usize>> {
    let index: HashMap<&str, usize> =
        arch.instances.iter().enumerate().map(|(i, x)| (x.name.as_str(), i)).collect();
    let mut succ = vec![Vec::new(); arch.instances.len()];
    for net in &arch.nets {
        let Endpoint::CompOut { instance, .. } = &net.driver else { continue };
        let Some(&u) = index.get(instance.as_str()) else { continue };
        for r in &net.readers {
            if let Endpoint::CompIn { instance, .. } = r {
                if let Some(&v) = index.get(instance.as_str()) {
                    if !succ[u].contains(&v) {
                        succ[u].push(v);
                    }
                }
            }
        }
    }
    succ
}

/// Topological order of instance indices. Among ready instances the one
/// declared first goes first.
pub fn dataflow_order(arch: &Architecture) -> Result<Vec<usize>, CycleError> {
    let succ = instance_graph(arch);
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for vs in &succ {
        for &v in vs {
            indeg[v] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every leftover node has a leftover predecessor; walking predecessors
    // must revisit a node, which closes a cycle.
    let mut pred: BTreeMap<usize, usize> = BTreeMap::new();
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            if indeg[u] > 0 && indeg[v] > 0 {
                pred.entry(v).or_insert(u);
            }
        }
    }
    let start = (0..n).find(|&i| indeg[i] > 0).expect("leftover node");
    let mut path = vec![start];
    let mut cur = start;
    loop {
        cur = pred[&cur];
        if let Some(pos) = path.iter().position(|&p| p == cur) {
            let mut cycle: Vec<usize> = path[pos..].to_vec();
            cycle.reverse();
            return Err(CycleError {
                instances: cycle.into_iter().map(|i| arch.instances[i].name.clone()).collect(),
            });
        }
        path.push(cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{ComponentKind, Expr};

    fn pass_kind() -> ComponentKind {
        ComponentKind::new("Pass", &["i"], &["o"]).with_behavior("o", Expr::port("i"))
    }

    fn codes(arch: &Architecture) -> Vec<Code> {
        validate(arch).into_iter().map(|d| d.code).collect()
    }

    fn chain(decl: &[&str]) -> Architecture {
        let mut a = Architecture::new("Chain", &["x"], &["y"]).with_kind(pass_kind());
        for n in decl {
            a = a.with_instance(n, "Pass");
        }
        a.with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::comp_in("a", "i")])
            .with_net(Endpoint::comp_out("a", "o"), vec![Endpoint::comp_in("b", "i")])
            .with_net(Endpoint::comp_out("b", "o"), vec![Endpoint::comp_in("c", "i")])
            .with_net(Endpoint::comp_out("c", "o"), vec![Endpoint::ProductOutput("y".into())])
    }

    #[test]
    fn chain_order_follows_dataflow() {
        let a = chain(&["c", "b", "a"]);
        assert!(validate(&a).is_empty());
        let names: Vec<_> =
            dataflow_order(&a).unwrap().into_iter().map(|i| a.instances[i].name.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
    }

    #[test]
    fn two_cycle_detected() {
        let a = Architecture::new("Loop", &["x"], &["y"])
            .with_kind(ComponentKind::new("J", &["i", "j"], &["o"]).with_behavior("o", Expr::port("i")))
            .with_instance("a", "J")
            .with_instance("b", "J")
            .with_net(
                Endpoint::ProductInput("x".into()),
                vec![Endpoint::comp_in("a", "i"), Endpoint::comp_in("b", "i")],
            )
            .with_net(
                Endpoint::comp_out("a", "o"),
                vec![Endpoint::comp_in("b", "j"), Endpoint::ProductOutput("y".into())],
            )
            .with_net(Endpoint::comp_out("b", "o"), vec![Endpoint::comp_in("a", "j")]);
        assert_eq!(codes(&a), [Code::Cycle]);
        let err = dataflow_order(&a).unwrap_err();
        assert_eq!(err.instances.len(), 2);
    }

    #[test]
    fn self_loop_detected() {
        let a = Architecture::new("Self", &["x"], &["y"])
            .with_kind(ComponentKind::new("J", &["i", "j"], &["o"]).with_behavior("o", Expr::port("i")))
            .with_instance("a", "J")
            .with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::comp_in("a", "i")])
            .with_net(
                Endpoint::comp_out("a", "o"),
                vec![Endpoint::comp_in("a", "j"), Endpoint::ProductOutput("y".into())],
            );
        assert_eq!(codes(&a), [Code::Cycle]);
        assert_eq!(dataflow_order(&a).unwrap_err().instances, ["a"]);
    }

    #[test]
    fn input_read_from_two_nets() {
        let a = Architecture::new("Two", &["x", "z"], &["y"])
            .with_kind(pass_kind())
            .with_instance("a", "Pass")
            .with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::comp_in("a", "i")])
            .with_net(Endpoint::ProductInput("z".into()), vec![Endpoint::comp_in("a", "i")])
            .with_net(Endpoint::comp_out("a", "o"), vec![Endpoint::ProductOutput("y".into())]);
        assert_eq!(codes(&a), [Code::MultiDriver]);
    }

    #[test]
    fn unconnected_and_dangling() {
        let a = Architecture::new("Open", &["x", "unused"], &["y"])
            .with_kind(ComponentKind::new("J", &["i", "j"], &["o"]).with_behavior("o", Expr::port("i")))
            .with_instance("a", "J")
            .with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::comp_in("a", "i")]);
        assert_eq!(
            codes(&a),
            [Code::DanglingInput, Code::UnconnectedInput, Code::UnconnectedInput]
        );
    }

    #[test]
    fn dangling_component_output_is_fine() {
        let a = Architecture::new("D", &["x"], &["y"])
            .with_kind(
                ComponentKind::new("Two", &["i"], &["o", "p"])
                    .with_behavior("o", Expr::port("i"))
                    .with_behavior("p", Expr::Null),
            )
            .with_instance("a", "Two")
            .with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::comp_in("a", "i")])
            .with_net(Endpoint::comp_out("a", "o"), vec![Endpoint::ProductOutput("y".into())])
            .with_net(Endpoint::comp_out("a", "p"), vec![]);
        assert!(validate(&a).is_empty());
    }

    #[test]
    fn kind_rules() {
        let a = Architecture::new("K", &["x"], &["y"])
            .with_kind(ComponentKind::new("Src", &[], &["o"]).with_behavior("o", Expr::Null))
            .with_kind(
                ComponentKind::new("Bad", &["i", "i"], &["o", "q"])
                    .with_behavior("o", Expr::port("nope"))
                    .with_behavior("o", Expr::ctor("f", vec![]))
                    .with_behavior("i", Expr::Null),
            )
            .with_kind(ComponentKind::new("Src", &["i"], &["o"]).with_behavior("o", Expr::Null))
            .with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::ProductOutput("y".into())]);
        assert_eq!(
            codes(&a),
            [
                Code::ZeroPortKind,
                Code::DupName,
                Code::BadPortRef,
                Code::DupName,
                Code::BadExpr,
                Code::BadPortRef,
                Code::MissingBehavior,
                Code::DupName,
            ]
        );
    }

    #[test]
    fn bad_refs_and_roles() {
        let a = Architecture::new("R", &["x"], &["y"])
            .with_kind(pass_kind())
            .with_instance("a", "Pass")
            .with_instance("a", "Pass")
            .with_instance("b", "Nope")
            .with_net(Endpoint::ProductInput("x".into()), vec![Endpoint::comp_in("a", "i")])
            .with_net(Endpoint::comp_in("a", "i"), vec![Endpoint::comp_in("ghost", "i")])
            .with_net(Endpoint::comp_out("a", "o"), vec![Endpoint::ProductOutput("x".into())])
            .with_net(Endpoint::comp_out("a", "typo"), vec![Endpoint::ProductOutput("y".into())]);
        let c = codes(&a);
        assert_eq!(c.iter().filter(|&&c| c == Code::DupName).count(), 1);
        assert_eq!(c.iter().filter(|&&c| c == Code::UnknownKind).count(), 1);
        assert_eq!(c.iter().filter(|&&c| c == Code::BadPortRef).count(), 4);
    }

    #[test]
    fn reserved_and_malformed_names() {
        let a = Architecture::new("P", &["null"], &["out put"])
            .with_net(
                Endpoint::ProductInput("null".into()),
                vec![Endpoint::ProductOutput("out put".into())],
            );
        assert_eq!(codes(&a), [Code::BadName, Code::BadName]);
    }

    #[test]
    fn validate_is_pure() {
        let a = chain(&["a", "a", "c"]);
        assert_eq!(validate(&a), validate(&a));
    }
}
