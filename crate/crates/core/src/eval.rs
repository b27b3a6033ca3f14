//! Evaluation of one fault scenario.
//!
//! Nominal instances compute their behavior expressions. A failed instance
//! ignores its behavior and copies, for every output, the value of one of its
//! inputs; which input is part of the scenario.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::arch::{ComponentKind, Expr};
use crate::model::Model;
use crate::value::Value;

/// Failed instances plus, for each, the input every output copies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaultScenario {
    pub faulty: BTreeSet<String>,
    /// instance → (output port → input port)
    pub routing: BTreeMap<String, BTreeMap<String, String>>,
}

impl FaultScenario {
    pub fn nominal() -> Self {
        Self::default()
    }

    /// Marks `instance` as failed with the given `(output, input)` routes.
    pub fn fail(mut self, instance: &str, routes: &[(&str, &str)]) -> Self {
        self.faulty.insert(instance.to_string());
        self.routing.insert(
            instance.to_string(),
            routes.iter().map(|(o, i)| (o.to_string(), i.to_string())).collect(),
        );
        self
    }

    pub fn fault_count(&self) -> usize {
        self.faulty.len()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance `{0}` must appear both in the fault set and in the routing")]
    RoutingMismatch(String),
    #[error("`{instance}` has no output `{port}`")]
    UnknownOutput { instance: String, port: String },
    #[error("`{instance}` has no input `{port}`")]
    UnknownInput { instance: String, port: String },
    #[error("output `{instance}.{port}` has no route")]
    MissingRoute { instance: String, port: String },
}

/// Per-instance routes, indexed by instance: `Some(r)` means failed, and
/// `r[o]` is the input index copied to output `o`.
pub(crate) type Routes = Vec<Option<Vec<usize>>>;

/// The value on every net, indexed by net id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation(pub Vec<Value>);

impl Valuation {
    pub fn get(&self, net: usize) -> &Value {
        &self.0[net]
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    /// `(net name, value)` pairs in net order.
    pub fn named<'a>(&'a self, model: &'a Model) -> impl Iterator<Item = (&'a str, &'a Value)> + 'a {
        self.0.iter().enumerate().map(|(i, v)| (model.net_name(i), v))
    }
}

/// Evaluates an expression under an environment of input-port values.
///
/// Panics if the expression reads a port missing from `env`.
pub fn eval_expr(expr: &Expr, env: &BTreeMap<String, Value>) -> Value {
    eval_with(expr, &|p| env.get(p).cloned().unwrap_or_else(|| panic!("no value for port `{p}`")))
}

fn eval_with(expr: &Expr, lookup: &impl Fn(&str) -> Value) -> Value {
    match expr {
        Expr::Port(p) => lookup(p),
        Expr::Null => Value::Null,
        Expr::Ctor(c, args) => {
            Value::term(c.as_str(), args.iter().map(|a| eval_with(a, lookup)).collect())
        }
        Expr::IfEq { left, right, then_branch, else_branch } => {
            if eval_with(left, lookup).equals(&eval_with(right, lookup)) {
                eval_with(then_branch, lookup)
            } else {
                eval_with(else_branch, lookup)
            }
        }
    }
}

/// All pass-through routings of a kind. Each output independently takes one
/// input; the first output varies slowest, inputs in declaration order.
pub fn enumerate_routings(kind: &ComponentKind) -> Vec<BTreeMap<String, String>> {
    (0..routing_count(kind))
        .map(|r| {
            decode_routing(kind, r)
                .into_iter()
                .enumerate()
                .map(|(o, i)| (kind.outputs[o].clone(), kind.inputs[i].clone()))
                .collect()
        })
        .collect()
}

/// `|inputs| ^ |outputs|`
pub(crate) fn routing_count(kind: &ComponentKind) -> u64 {
    (kind.inputs.len() as u64).pow(kind.outputs.len() as u32)
}

/// Input index per output for the `r`-th routing in enumeration order.
pub(crate) fn decode_routing(kind: &ComponentKind, mut r: u64) -> Vec<usize> {
    let base = kind.inputs.len() as u64;
    let mut out = vec![0; kind.outputs.len()];
    for slot in out.iter_mut().rev() {
        *slot = (r % base) as usize;
        r /= base;
    }
    out
}

impl Model {
    /// Resolves a named scenario to per-instance routes.
    pub(crate) fn resolve(&self, s: &FaultScenario) -> Result<Routes, ScenarioError> {
        let arch = self.architecture();
        for name in s.faulty.iter().chain(s.routing.keys()) {
            if arch.instance_index(name).is_none() {
                return Err(ScenarioError::UnknownInstance(name.clone()));
            }
            if !(s.faulty.contains(name) && s.routing.contains_key(name)) {
                return Err(ScenarioError::RoutingMismatch(name.clone()));
            }
        }
        let mut routes: Routes = vec![None; self.instance_count()];
        for (name, map) in &s.routing {
            let idx = arch.instance_index(name).expect("checked above");
            let kind = self.kind_of(idx);
            for out in map.keys() {
                if kind.output_index(out).is_none() {
                    return Err(ScenarioError::UnknownOutput { instance: name.clone(), port: out.clone() });
                }
            }
            let r = kind
                .outputs
                .iter()
                .map(|o| {
                    let input = map.get(o).ok_or_else(|| ScenarioError::MissingRoute {
                        instance: name.clone(),
                        port: o.clone(),
                    })?;
                    kind.input_index(input).ok_or_else(|| ScenarioError::UnknownInput {
                        instance: name.clone(),
                        port: input.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            routes[idx] = Some(r);
        }
        Ok(routes)
    }

    /// Names a resolved scenario.
    pub(crate) fn name_routes(&self, faulty: &[usize], routes: &[Vec<usize>]) -> FaultScenario {
        let mut s = FaultScenario::nominal();
        for (&i, r) in faulty.iter().zip(routes) {
            let kind = self.kind_of(i);
            let name = self.instance(i).name.clone();
            s.faulty.insert(name.clone());
            s.routing.insert(
                name,
                r.iter()
                    .enumerate()
                    .map(|(o, &inp)| (kind.outputs[o].clone(), kind.inputs[inp].clone()))
                    .collect(),
            );
        }
        s
    }

    pub(crate) fn eval_routes(&self, routes: &[Option<&[usize]>]) -> Valuation {
        let mut values: Vec<Option<Value>> = vec![None; self.net_count()];
        for (p, net) in self.architecture().product_inputs.iter().zip(&self.input_nets) {
            if let Some(net) = net {
                values[*net] = Some(Value::atom(p.as_str()));
            }
        }
        for &i in self.dataflow_order() {
            let plan = &self.plans[i];
            let read = |net: usize| values[net].clone().expect("driver evaluated before reader");
            let outs: Vec<(usize, Value)> = match routes[i] {
                Some(route) => plan
                    .outputs
                    .iter()
                    .zip(route)
                    .filter_map(|(net, &inp)| net.map(|n| (n, read(plan.inputs[inp]))))
                    .collect(),
                None => {
                    let kind = self.kind_of(i);
                    let lookup = |p: &str| read(plan.inputs[kind.input_index(p).expect("validated port")]);
                    plan.outputs
                        .iter()
                        .zip(&kind.outputs)
                        .filter_map(|(net, o)| {
                            net.map(|n| {
                                (n, eval_with(kind.behavior_of(o).expect("validated behavior"), &lookup))
                            })
                        })
                        .collect()
                }
            };
            for (n, v) in outs {
                values[n] = Some(v);
            }
        }
        Valuation(values.into_iter().map(|v| v.expect("every net has a driver")).collect())
    }
}

/// Computes the value on every net under `scenario`.
pub fn evaluate(model: &Model, scenario: &FaultScenario) -> Result<Valuation, ScenarioError> {
    let routes = model.resolve(scenario)?;
    let refs: Vec<Option<&[usize]>> = routes.iter().map(|r| r.as_deref()).collect();
    Ok(model.eval_routes(&refs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn model() -> Model {
        Model::new(parse(include_str!("../../../corpus/redundant_enc.fsl")).unwrap()).unwrap()
    }

    fn key() -> Value {
        Value::atom("key")
    }

    fn enc_km() -> Value {
        Value::term("enc", vec![key(), Value::atom("msg")])
    }

    #[test]
    fn comparator_expression() {
        let m = model();
        let body = m.architecture().kind("Comparator").unwrap().behavior_of("out").unwrap().clone();
        let env = BTreeMap::from([("a".to_string(), key()), ("b".to_string(), key())]);
        assert_eq!(eval_expr(&body, &env), key());
        let env = BTreeMap::from([("a".to_string(), enc_km()), ("b".to_string(), key())]);
        assert_eq!(eval_expr(&body, &env), Value::Null);
    }

    #[test]
    fn encryptor_expression() {
        let m = model();
        let body = m.architecture().kind("Encryptor").unwrap().behavior_of("out").unwrap().clone();
        let env = BTreeMap::from([("key".to_string(), key()), ("msg".to_string(), Value::atom("msg"))]);
        assert_eq!(eval_expr(&body, &env), enc_km());
    }

    #[test]
    fn redundant_enc_scenarios() {
        let m = model();
        let out = m.net_id("cmp.out").unwrap();

        let v = evaluate(&m, &FaultScenario::nominal()).unwrap();
        assert_eq!(v.get(out), &enc_km());
        assert_eq!(v.get(m.net_id("key").unwrap()), &key());

        let v = evaluate(&m, &FaultScenario::nominal().fail("enc1", &[("out", "key")])).unwrap();
        assert_eq!(v.get(m.net_id("enc1.out").unwrap()), &key());
        assert_eq!(v.get(out), &Value::Null);

        let s = FaultScenario::nominal().fail("enc1", &[("out", "key")]).fail("cmp", &[("out", "a")]);
        assert_eq!(evaluate(&m, &s).unwrap().get(out), &key());
    }

    #[test]
    fn malformed_scenarios() {
        let m = model();
        let cases = [
            (FaultScenario::nominal().fail("ghost", &[("out", "a")]), "unknown instance"),
            (FaultScenario::nominal().fail("cmp", &[("nope", "a")]), "no output"),
            (FaultScenario::nominal().fail("cmp", &[("out", "zz")]), "no input"),
            (FaultScenario::nominal().fail("cmp", &[]), "no route"),
        ];
        for (s, msg) in cases {
            let e = evaluate(&m, &s).unwrap_err();
            assert!(e.to_string().contains(msg), "{e}");
        }
        let mut s = FaultScenario::nominal();
        s.faulty.insert("cmp".into());
        assert_eq!(evaluate(&m, &s).unwrap_err(), ScenarioError::RoutingMismatch("cmp".into()));
    }

    #[test]
    fn routing_enumeration() {
        let cmp = ComponentKind::new("Comparator", &["a", "b"], &["out"]);
        let r = enumerate_routings(&cmp);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0]["out"], "a");
        assert_eq!(r[1]["out"], "b");

        let wide = ComponentKind::new("W", &["x", "y", "z"], &["p", "q"]);
        let r = enumerate_routings(&wide);
        assert_eq!(r.len(), 9);
        let flat: Vec<(String, String)> =
            r.iter().map(|m| (m["p"].clone(), m["q"].clone())).collect();
        assert_eq!(flat[0], ("x".into(), "x".into()));
        assert_eq!(flat[1], ("x".into(), "y".into()));
        assert_eq!(flat[3], ("y".into(), "x".into()));
        assert_eq!(flat[8], ("z".into(), "z".into()));
    }
}
