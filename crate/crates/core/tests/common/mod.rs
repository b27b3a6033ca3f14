//! Test support: corpus loading, a random architecture generator and a naive
//! oracle that shares no search or evaluation code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use failsec::{dsl, Architecture, ComponentKind, Endpoint, Expr, FaultScenario, Model, Value};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_file(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

/// Every `.fsl` file of the corpus, sorted by file name.
pub fn corpus() -> Vec<(String, Model)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "fsl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let model = Model::new(dsl::parse(&text).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, model)
        })
        .collect()
}

pub fn redundant_enc() -> Model {
    let text = std::fs::read_to_string(corpus_file("redundant_enc.fsl")).unwrap();
    Model::new(dsl::parse(&text).unwrap()).unwrap()
}

/// Nets read by each instance's inputs, and driven by its outputs.
pub fn instance_nets(model: &Model, i: usize) -> (Vec<usize>, Vec<usize>) {
    let arch = model.architecture();
    let name = &model.instance(i).name;
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for (id, net) in arch.nets.iter().enumerate() {
        if net.driver.instance() == Some(name) {
            outs.push(id);
        }
        if net.readers.iter().any(|r| matches!(r, Endpoint::CompIn { instance, .. } if instance == name)) {
            ins.push(id);
        }
    }
    (ins, outs)
}

// ---------------------------------------------------------------------------
// Random architectures

fn random_expr(rng: &mut impl Rng, inputs: &[String], depth: u32) -> Expr {
    let port = |rng: &mut _| Expr::Port(inputs.choose(rng).unwrap().clone());
    if depth == 0 {
        return if rng.gen_bool(0.1) { Expr::Null } else { port(rng) };
    }
    match rng.gen_range(0..10) {
        0..=3 => port(rng),
        4 => Expr::Null,
        5..=7 => {
            let n = rng.gen_range(1..=2);
            let ctor = ["enc", "h", "f"].choose(rng).unwrap().to_string();
            Expr::Ctor(ctor, (0..n).map(|_| random_expr(rng, inputs, depth - 1)).collect())
        }
        _ => Expr::if_eq(
            random_expr(rng, inputs, depth - 1),
            random_expr(rng, inputs, depth - 1),
            random_expr(rng, inputs, depth - 1),
            random_expr(rng, inputs, depth - 1),
        ),
    }
}

fn random_kind(rng: &mut impl Rng, name: String, max_in: usize, max_out: usize) -> ComponentKind {
    let inputs: Vec<String> = (0..rng.gen_range(1..=max_in)).map(|i| format!("a{i}")).collect();
    let outputs: Vec<String> = (0..rng.gen_range(1..=max_out)).map(|i| format!("o{i}")).collect();
    let behavior = outputs
        .iter()
        .map(|o| {
            let depth = rng.gen_range(0..=3);
            let e = random_expr(rng, &inputs, depth);
            // mostly opaque outputs, so that leaks usually need failures
            let e = if rng.gen_bool(0.75) { Expr::Ctor("g".into(), vec![e]) } else { e };
            (o.clone(), e)
        })
        .collect();
    ComponentKind { name, inputs, outputs, behavior }
}

/// A random valid acyclic architecture with up to `max_instances` instances.
/// Instances and nets are declared in shuffled order.
pub fn random_architecture(rng: &mut impl Rng, max_instances: usize) -> Architecture {
    let n_in = rng.gen_range(1..=3);
    let n_out = rng.gen_range(1..=2);
    let pins: Vec<String> = (0..n_in).map(|i| format!("p{i}")).collect();
    let pouts: Vec<String> = (0..n_out).map(|i| format!("q{i}")).collect();
    let kinds: Vec<ComponentKind> = (0..rng.gen_range(1..=3))
        .map(|i| random_kind(rng, format!("K{i}"), 3, 2))
        .collect();

    let m = rng.gen_range(1..=max_instances);
    let mut names: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
    names.shuffle(rng);
    // names[j] is the j-th instance in dataflow order
    let inst_kinds: Vec<usize> = (0..m).map(|_| rng.gen_range(0..kinds.len())).collect();

    let mut readers: BTreeMap<Endpoint, Vec<Endpoint>> = BTreeMap::new();
    let mut sources: Vec<Endpoint> = pins.iter().map(|p| Endpoint::ProductInput(p.clone())).collect();
    for j in 0..m {
        let kind = &kinds[inst_kinds[j]];
        for a in &kind.inputs {
            let src = sources.choose(rng).unwrap().clone();
            readers.entry(src).or_default().push(Endpoint::comp_in(&names[j], a));
        }
        for o in &kind.outputs {
            sources.push(Endpoint::comp_out(&names[j], o));
        }
    }
    for q in &pouts {
        // bias product outputs toward late instances
        let src = if rng.gen_bool(0.7) {
            sources[sources.len() - rng.gen_range(1..=sources.len().min(3))].clone()
        } else {
            sources.choose(rng).unwrap().clone()
        };
        readers.entry(src).or_default().push(Endpoint::ProductOutput(q.clone()));
    }

    let mut arch = Architecture {
        name: "Rand".into(),
        product_inputs: pins,
        product_outputs: pouts,
        kinds: kinds.clone(),
        instances: Vec::new(),
        nets: Vec::new(),
        spans: None,
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    for j in order {
        arch.instances.push(failsec::Instance::new(names[j].clone(), kinds[inst_kinds[j]].name.clone()));
    }
    let mut nets: Vec<failsec::Net> =
        readers.into_iter().map(|(d, r)| failsec::Net::new(d, r)).collect();
    nets.shuffle(rng);
    arch.nets = nets;
    arch
}

/// A random architecture that passes validation (warnings allowed).
pub fn random_model(rng: &mut impl Rng, max_instances: usize) -> Model {
    let arch = random_architecture(rng, max_instances);
    Model::new(arch).unwrap_or_else(|e| panic!("generator produced an invalid architecture: {e}"))
}

// ---------------------------------------------------------------------------
// Naive oracle

/// Failed instance name → (output port → input port).
pub type NaiveScenario = BTreeMap<String, BTreeMap<String, String>>;

struct NaiveEval<'a> {
    arch: &'a Architecture,
    scenario: &'a NaiveScenario,
    driver_of: HashMap<&'a Endpoint, &'a Endpoint>,
    memo: HashMap<Endpoint, Value>,
}

impl NaiveEval<'_> {
    fn driver_value(&mut self, driver: &Endpoint) -> Value {
        if let Some(v) = self.memo.get(driver) {
            return v.clone();
        }
        let v = match driver {
            Endpoint::ProductInput(p) => Value::atom(p.as_str()),
            Endpoint::CompOut { instance, port } => match self.scenario.get(instance) {
                Some(routes) => self.read(&Endpoint::comp_in(instance, &routes[port])),
                None => {
                    let kind = self.arch.kind_of(instance).unwrap();
                    let (_, expr) = kind.behavior.iter().find(|(o, _)| o == port).unwrap();
                    self.expr(instance, expr)
                }
            },
            other => panic!("not a driver: {other:?}"),
        };
        self.memo.insert(driver.clone(), v.clone());
        v
    }

    fn read(&mut self, reader: &Endpoint) -> Value {
        let d = self.driver_of[reader];
        self.driver_value(d)
    }

    fn expr(&mut self, instance: &str, e: &Expr) -> Value {
        match e {
            Expr::Port(p) => self.read(&Endpoint::comp_in(instance, p)),
            Expr::Null => Value::Null,
            Expr::Ctor(c, args) => {
                let args = args.iter().map(|a| self.expr(instance, a)).collect();
                Value::term(c.as_str(), args)
            }
            Expr::IfEq { left, right, then_branch, else_branch } => {
                if self.expr(instance, left) == self.expr(instance, right) {
                    self.expr(instance, then_branch)
                } else {
                    self.expr(instance, else_branch)
                }
            }
        }
    }
}

/// Value seen by each product output, by recursive demand-driven evaluation.
pub fn naive_outputs(arch: &Architecture, scenario: &NaiveScenario) -> Vec<Value> {
    let mut driver_of = HashMap::new();
    for net in &arch.nets {
        for r in &net.readers {
            driver_of.insert(r, &net.driver);
        }
    }
    let mut ev = NaiveEval { arch, scenario, driver_of, memo: HashMap::new() };
    arch.product_outputs
        .iter()
        .map(|q| ev.read(&Endpoint::ProductOutput(q.clone())))
        .collect()
}

pub fn naive_insecure(arch: &Architecture, scenario: &NaiveScenario) -> bool {
    let connected: Vec<&String> = arch
        .product_inputs
        .iter()
        .filter(|p| arch.nets.iter().any(|n| n.driver == Endpoint::ProductInput((*p).clone())))
        .collect();
    naive_outputs(arch, scenario)
        .iter()
        .any(|v| connected.iter().any(|p| *v == Value::atom(p.as_str())))
}

/// All per-output input choices for one kind.
fn naive_routings(kind: &ComponentKind) -> Vec<BTreeMap<String, String>> {
    let mut acc: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for o in &kind.outputs {
        let mut next = Vec::new();
        for partial in &acc {
            for i in &kind.inputs {
                let mut m = partial.clone();
                m.insert(o.clone(), i.clone());
                next.push(m);
            }
        }
        acc = next;
    }
    acc
}

/// One insecure scenario with its canonical sort key.
#[derive(Debug, Clone)]
pub struct NaiveBreach {
    pub key: (usize, Vec<String>, Vec<usize>),
    pub scenario: NaiveScenario,
}

/// Exhaustive result over every subset of instances and every routing.
pub struct NaiveResult {
    /// Scenario count per fault-set size.
    pub counts: Vec<u64>,
    /// Insecure scenarios, sorted canonically.
    pub breaches: Vec<NaiveBreach>,
}

/// Enumerates all `2^m` fault subsets (up to `max_k` faults) and all their
/// routings.
pub fn naive_enumerate(arch: &Architecture, max_k: usize) -> NaiveResult {
    let m = arch.instances.len();
    let mut counts = vec![0u64; m + 1];
    let mut breaches = Vec::new();
    for mask in 0u32..(1 << m) {
        let k = mask.count_ones() as usize;
        if k > max_k {
            continue;
        }
        let mut failed: Vec<&failsec::Instance> =
            (0..m).filter(|i| mask & (1 << i) != 0).map(|i| &arch.instances[i]).collect();
        failed.sort_by(|a, b| a.name.cmp(&b.name));
        let options: Vec<Vec<BTreeMap<String, String>>> =
            failed.iter().map(|i| naive_routings(arch.kind(&i.kind).unwrap())).collect();
        // odometer over routing choices, first failed instance most significant
        let mut digits = vec![0usize; failed.len()];
        loop {
            counts[k] += 1;
            let scenario: NaiveScenario = failed
                .iter()
                .zip(&digits)
                .zip(&options)
                .map(|((inst, &d), opts)| (inst.name.clone(), opts[d].clone()))
                .collect();
            if naive_insecure(arch, &scenario) {
                breaches.push(NaiveBreach {
                    key: (k, failed.iter().map(|i| i.name.clone()).collect(), digits.clone()),
                    scenario,
                });
            }
            let mut i = digits.len();
            let mut carry = true;
            while carry && i > 0 {
                i -= 1;
                digits[i] += 1;
                if digits[i] < options[i].len() {
                    carry = false;
                } else {
                    digits[i] = 0;
                }
            }
            if carry {
                break;
            }
        }
    }
    breaches.sort_by(|a, b| a.key.cmp(&b.key));
    NaiveResult { counts, breaches }
}

pub fn to_fault_scenario(s: &NaiveScenario) -> FaultScenario {
    FaultScenario { faulty: s.keys().cloned().collect(), routing: s.clone() }
}

/// Checks `check`, `check_all` and `min_fault_count` against the naive
/// enumerator for every bound from 0 to the instance count.
pub fn compare_with_oracle(model: &Model) -> Result<(), String> {
    use failsec::{check_fail_secure, min_fault_count, Analyzer, Verdict};

    let arch = model.architecture();
    let m = arch.instances.len();
    let naive = naive_enumerate(arch, m);
    let first = naive.breaches.first();
    for n in 0..=m {
        let a = check_fail_secure(model, n);
        let expected = first.filter(|b| b.key.0 <= n);
        match (&a.verdict, expected) {
            (Verdict::FailSecureUpTo(k), None) => {
                let total: u64 = naive.counts[..=n].iter().sum();
                if *k != n || a.scenarios_checked != total {
                    return Err(format!(
                        "n={n}: fail-secure with {} scenarios, oracle counts {total}",
                        a.scenarios_checked
                    ));
                }
            }
            (Verdict::Breach(b), Some(nb)) => {
                if b.scenario != to_fault_scenario(&nb.scenario) {
                    return Err(format!("n={n}: breach {:?}, oracle {:?}", b.scenario, nb.scenario));
                }
            }
            (v, e) => {
                return Err(format!("n={n}: verdict {v:?}, oracle breach {:?}", e.map(|b| &b.scenario)))
            }
        }
    }
    let min = min_fault_count(model, m);
    if min != first.map(|b| b.key.0) {
        return Err(format!("min faults {min:?}, oracle {:?}", first.map(|b| b.key.0)));
    }
    let all = Analyzer::new(model).check_all(m);
    let expected: Vec<FaultScenario> = naive
        .breaches
        .iter()
        .filter(|b| Some(b.key.0) == min)
        .map(|b| to_fault_scenario(&b.scenario))
        .collect();
    let got: Vec<FaultScenario> = all.breaches.iter().map(|b| b.scenario.clone()).collect();
    if got != expected {
        return Err(format!("check_all found {} breaches, oracle {}", got.len(), expected.len()));
    }
    Ok(())
}
