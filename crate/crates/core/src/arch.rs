//! In-memory architecture description: component kinds with behavior
//! expressions, instances, and single-driver nets between the product
//! boundary and instance ports.
//!
//! Everything here is plain data and may be constructed in an invalid state;
//! [`crate::validate`] reports what is wrong and [`crate::Model`] is the
//! validated, evaluation-ready form.

use std::fmt;

/// Location of a parsed construct. Offsets are bytes; line and column are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Behavior expression of one component output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Value of the named input port.
    Port(String),
    Null,
    /// Uninterpreted constructor application.
    Ctor(String, Vec<Expr>),
    /// `if left == right then then_branch else else_branch`
    IfEq {
        left: Box<Expr>,
        right: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
}

impl Expr {
    pub fn port(name: impl Into<String>) -> Self {
        Expr::Port(name.into())
    }

    pub fn ctor(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::Ctor(name.into(), args)
    }

    pub fn if_eq(left: Expr, right: Expr, then_branch: Expr, else_branch: Expr) -> Self {
        Expr::IfEq {
            left: Box::new(left),
            right: Box::new(right),
            then_branch: Box::new(then_branch),
            else_branch: Box::new(else_branch),
        }
    }

    /// Visits every sub-expression, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Port(_) | Expr::Null => {}
            Expr::Ctor(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::IfEq { left, right, then_branch, else_branch } => {
                left.walk(f);
                right.walk(f);
                then_branch.walk(f);
                else_branch.walk(f);
            }
        }
    }
}

/// A reusable component type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentKind {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// One `(output port, expression)` pair per output, in declaration order.
    pub behavior: Vec<(String, Expr)>,
}

impl ComponentKind {
    pub fn new(name: impl Into<String>, inputs: &[&str], outputs: &[&str]) -> Self {
        ComponentKind {
            name: name.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            behavior: Vec::new(),
        }
    }

    pub fn with_behavior(mut self, output: impl Into<String>, expr: Expr) -> Self {
        self.behavior.push((output.into(), expr));
        self
    }

    pub fn input_index(&self, port: &str) -> Option<usize> {
        self.inputs.iter().position(|p| p == port)
    }

    pub fn output_index(&self, port: &str) -> Option<usize> {
        self.outputs.iter().position(|p| p == port)
    }

    pub fn behavior_of(&self, output: &str) -> Option<&Expr> {
        self.behavior.iter().find(|(o, _)| o == output).map(|(_, e)| e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub kind: String,
}

impl Instance {
    pub fn new(name: impl Into<String>, kind: impl Into<String>) -> Self {
        Instance { name: name.into(), kind: kind.into() }
    }
}

/// One end of a net.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    ProductInput(String),
    ProductOutput(String),
    CompIn { instance: String, port: String },
    CompOut { instance: String, port: String },
}

impl Endpoint {
    pub fn comp_in(instance: &str, port: &str) -> Self {
        Endpoint::CompIn { instance: instance.into(), port: port.into() }
    }

    pub fn comp_out(instance: &str, port: &str) -> Self {
        Endpoint::CompOut { instance: instance.into(), port: port.into() }
    }

    pub fn instance(&self) -> Option<&str> {
        match self {
            Endpoint::CompIn { instance, .. } | Endpoint::CompOut { instance, .. } => Some(instance),
            _ => None,
        }
    }

    pub fn is_driver_role(&self) -> bool {
        matches!(self, Endpoint::ProductInput(_) | Endpoint::CompOut { .. })
    }
}

/// Spelling used in reports and in the DSL: `key` or `enc1.out`.
impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::ProductInput(p) | Endpoint::ProductOutput(p) => f.write_str(p),
            Endpoint::CompIn { instance, port } | Endpoint::CompOut { instance, port } => {
                write!(f, "{instance}.{port}")
            }
        }
    }
}

/// A connector: one driver, any number of readers. Its id is its index in
/// [`Architecture::nets`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub driver: Endpoint,
    pub readers: Vec<Endpoint>,
}

impl Net {
    pub fn new(driver: Endpoint, readers: Vec<Endpoint>) -> Self {
        Net { driver, readers }
    }

    /// Report name of the net: its driver's spelling.
    pub fn name(&self) -> String {
        self.driver.to_string()
    }
}

/// Source locations recorded by the parser, indexed like the vectors they
/// annotate.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub product: Option<SourceSpan>,
    pub kinds: Vec<SourceSpan>,
    pub instances: Vec<SourceSpan>,
    pub nets: Vec<SourceSpan>,
    /// Per kind, one span per behavior assignment.
    pub assignments: Vec<Vec<SourceSpan>>,
}

#[derive(Debug, Clone)]
pub struct Architecture {
    pub name: String,
    pub product_inputs: Vec<String>,
    pub product_outputs: Vec<String>,
    pub kinds: Vec<ComponentKind>,
    pub instances: Vec<Instance>,
    pub nets: Vec<Net>,
    /// Present when the architecture came from source text.
    pub spans: Option<SourceMap>,
}

/// Structural equality; source locations are ignored.
impl PartialEq for Architecture {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.product_inputs == other.product_inputs
            && self.product_outputs == other.product_outputs
            && self.kinds == other.kinds
            && self.instances == other.instances
            && self.nets == other.nets
    }
}

impl Eq for Architecture {}

impl Architecture {
    pub fn new(name: impl Into<String>, inputs: &[&str], outputs: &[&str]) -> Self {
        Architecture {
            name: name.into(),
            product_inputs: inputs.iter().map(|s| s.to_string()).collect(),
            product_outputs: outputs.iter().map(|s| s.to_string()).collect(),
            kinds: Vec::new(),
            instances: Vec::new(),
            nets: Vec::new(),
            spans: None,
        }
    }

    pub fn with_kind(mut self, kind: ComponentKind) -> Self {
        self.kinds.push(kind);
        self
    }

    pub fn with_instance(mut self, name: &str, kind: &str) -> Self {
        self.instances.push(Instance::new(name, kind));
        self
    }

    pub fn with_net(mut self, driver: Endpoint, readers: Vec<Endpoint>) -> Self {
        self.nets.push(Net::new(driver, readers));
        self
    }

    pub fn kind(&self, name: &str) -> Option<&ComponentKind> {
        self.kinds.iter().find(|k| k.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.name == name)
    }

    pub fn kind_of(&self, instance: &str) -> Option<&ComponentKind> {
        self.instance(instance).and_then(|i| self.kind(&i.kind))
    }

    pub(crate) fn kind_span(&self, i: usize) -> Option<SourceSpan> {
        self.spans.as_ref().and_then(|s| s.kinds.get(i).copied())
    }

    pub(crate) fn instance_span(&self, i: usize) -> Option<SourceSpan> {
        self.spans.as_ref().and_then(|s| s.instances.get(i).copied())
    }

    pub(crate) fn net_span(&self, i: usize) -> Option<SourceSpan> {
        self.spans.as_ref().and_then(|s| s.nets.get(i).copied())
    }

    pub(crate) fn assignment_span(&self, kind: usize, assign: usize) -> Option<SourceSpan> {
        self.spans
            .as_ref()
            .and_then(|s| s.assignments.get(kind))
            .and_then(|a| a.get(assign).copied())
            .or_else(|| self.kind_span(kind))
    }

    pub(crate) fn product_span(&self) -> Option<SourceSpan> {
        self.spans.as_ref().and_then(|s| s.product)
    }
}
