//! Fail-secure analysis of component/connector architectures.
//!
//! An architecture wires component instances between product inputs and
//! outputs. Every connector carries one symbolic value. A failed component
//! may forward any of its inputs to each of its outputs. The analyzer checks,
//! exhaustively for up to `n` simultaneous failures, that no product output
//! ever carries a product input verbatim, and otherwise reports the first
//! counterexample in a fixed canonical order.
//!
//! ```
//! use failsec::{check_fail_secure, dsl, Model, Verdict};
//!
//! let text = include_str!("../../../corpus/redundant_enc.fsl");
//! let model = Model::new(dsl::parse(text).unwrap()).unwrap();
//! assert_eq!(check_fail_secure(&model, 1).verdict, Verdict::FailSecureUpTo(1));
//! assert!(matches!(check_fail_secure(&model, 2).verdict, Verdict::Breach(_)));
//! ```

pub mod analyze;
pub mod arch;
pub mod cli;
pub mod dsl;
pub mod eval;
pub mod model;
pub mod report;
pub mod validate;
pub mod value;

pub use analyze::{
    check_fail_secure, is_secure, min_fault_count, scenario_count, scenarios, verify_counterexample,
    AllBreaches, Analysis, Analyzer, Breach, Leak, Verdict,
};
pub use arch::{Architecture, ComponentKind, Endpoint, Expr, Instance, Net, SourceSpan};
pub use eval::{enumerate_routings, eval_expr, evaluate, FaultScenario, ScenarioError, Valuation};
pub use model::{InvalidArchitecture, Model};
pub use validate::{dataflow_order, validate, Code, Diagnostic};
pub use value::Value;
