//! Bounded fail-secure analysis.
//!
//! The search enumerates every fault set of size `k = 0, 1, ..., n` together
//! with every pass-through routing of the failed instances, evaluates each
//! scenario and checks that no product output carries a product input value
//! verbatim. Staging by `k` makes the first breach found a minimal one.
//!
//! Canonical order: fault sets are combinations of the instances sorted by
//! name, in lexicographic order; within a fault set, routings vary like an
//! odometer whose most significant digit is the first instance by name, each
//! digit following [`enumerate_routings`](crate::eval::enumerate_routings).
//! Parallel runs reduce by this order, so reports do not depend on the
//! number of workers.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

use crate::eval::{decode_routing, routing_count, FaultScenario, Valuation};
use crate::model::Model;
use crate::value::Value;

/// A product output carrying a product input value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leak {
    pub output: String,
    pub value: Value,
    pub matched_input: String,
}

/// A counterexample: an insecure scenario with the evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breach {
    pub scenario: FaultScenario,
    pub valuation: Valuation,
    pub leaks: Vec<Leak>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No scenario with at most this many faults is insecure.
    FailSecureUpTo(usize),
    Breach(Box<Breach>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    /// Fault bound actually searched (the request clamped to the instance count).
    pub max_faults: usize,
    /// Scenarios up to and including the reported breach, in canonical order.
    pub scenarios_checked: u64,
    pub verdict: Verdict,
}

/// Every breach at the smallest breaching fault count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllBreaches {
    pub max_faults: usize,
    pub scenarios_checked: u64,
    pub breaches: Vec<Breach>,
}

/// Secure iff no output value equals any product-input net value. Leaks are
/// listed in product-output order.
pub fn is_secure(model: &Model, valuation: &Valuation) -> (bool, Vec<Leak>) {
    let arch = model.architecture();
    let mut leaks = Vec::new();
    for (out, &net) in arch.product_outputs.iter().zip(model.output_nets()) {
        let v = valuation.get(net);
        for (input, inet) in arch.product_inputs.iter().zip(&model.input_nets) {
            if let Some(inet) = inet {
                if v.equals(valuation.get(*inet)) {
                    leaks.push(Leak { output: out.clone(), value: v.clone(), matched_input: input.clone() });
                }
            }
        }
    }
    (leaks.is_empty(), leaks)
}

/// A scenario in index form: failed instances in name order, and the routing
/// number of each.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Indexed {
    faulty: Vec<usize>,
    routings: Vec<u64>,
}

/// Canonical stream of all scenarios with exactly `k` failed instances.
struct ScenarioStream<'m> {
    model: &'m Model,
    k: usize,
    /// Positions into `model.instances_by_name()`.
    combo: Vec<usize>,
    counts: Vec<u64>,
    digits: Vec<u64>,
    done: bool,
}

impl<'m> ScenarioStream<'m> {
    fn new(model: &'m Model, k: usize) -> Self {
        let mut s = ScenarioStream {
            model,
            k,
            combo: (0..k).collect(),
            counts: Vec::new(),
            digits: vec![0; k],
            done: k > model.instance_count(),
        };
        if !s.done {
            s.load_counts();
        }
        s
    }

    fn load_counts(&mut self) {
        let by_name = self.model.instances_by_name();
        self.counts = self.combo.iter().map(|&p| routing_count(self.model.kind_of(by_name[p]))).collect();
        if self.counts.contains(&0) {
            self.done = true;
        }
    }

    fn advance_combo(&mut self) -> bool {
        let m = self.model.instance_count();
        let k = self.k;
        let Some(i) = (0..k).rev().find(|&i| self.combo[i] < m - k + i) else {
            return false;
        };
        self.combo[i] += 1;
        for j in i + 1..k {
            self.combo[j] = self.combo[j - 1] + 1;
        }
        true
    }

    fn advance(&mut self) {
        for i in (0..self.k).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.counts[i] {
                return;
            }
            self.digits[i] = 0;
        }
        if self.advance_combo() {
            self.load_counts();
        } else {
            self.done = true;
        }
    }
}

impl Iterator for ScenarioStream<'_> {
    type Item = Indexed;

    fn next(&mut self) -> Option<Indexed> {
        if self.done {
            return None;
        }
        let by_name = self.model.instances_by_name();
        let item = Indexed {
            faulty: self.combo.iter().map(|&p| by_name[p]).collect(),
            routings: self.digits.clone(),
        };
        self.advance();
        Some(item)
    }
}

/// All scenarios with exactly `k` failed instances, in canonical order.
/// Empty when `k` exceeds the instance count.
pub fn scenarios(model: &Model, k: usize) -> impl Iterator<Item = FaultScenario> + '_ {
    ScenarioStream::new(model, k).map(move |s| name(model, &s))
}

/// Number of scenarios with exactly `k` faults: the sum over fault sets of the
/// product of routing counts.
pub fn scenario_count(model: &Model, k: usize) -> u64 {
    fn go(model: &Model, from: usize, k: usize) -> u64 {
        if k == 0 {
            return 1;
        }
        let by_name = model.instances_by_name();
        (from..by_name.len())
            .map(|p| routing_count(model.kind_of(by_name[p])) * go(model, p + 1, k - 1))
            .sum()
    }
    go(model, 0, k)
}

fn routes_of(model: &Model, s: &Indexed) -> Vec<Vec<usize>> {
    s.faulty.iter().zip(&s.routings).map(|(&i, &r)| decode_routing(model.kind_of(i), r)).collect()
}

fn name(model: &Model, s: &Indexed) -> FaultScenario {
    model.name_routes(&s.faulty, &routes_of(model, s))
}

fn valuation(model: &Model, s: &Indexed) -> Valuation {
    let routes = routes_of(model, s);
    let mut refs: Vec<Option<&[usize]>> = vec![None; model.instance_count()];
    for (&i, r) in s.faulty.iter().zip(&routes) {
        refs[i] = Some(r);
    }
    model.eval_routes(&refs)
}

fn insecure(model: &Model, s: &Indexed) -> bool {
    !is_secure(model, &valuation(model, s)).0
}

fn breach(model: &Model, s: &Indexed) -> Breach {
    let valuation = valuation(model, s);
    let (_, leaks) = is_secure(model, &valuation);
    Breach { scenario: name(model, s), valuation, leaks }
}

const CHUNK: usize = 1024;

/// Runs analyses over one model, optionally on a worker pool.
pub struct Analyzer<'m> {
    model: &'m Model,
    pool: Option<ThreadPool>,
}

impl<'m> Analyzer<'m> {
    pub fn new(model: &'m Model) -> Self {
        Analyzer { model, pool: None }
    }

    /// Uses `jobs` worker threads; 0 or 1 means single-threaded.
    pub fn with_jobs(model: &'m Model, jobs: usize) -> Result<Self, ThreadPoolBuildError> {
        let pool = if jobs > 1 { Some(ThreadPoolBuilder::new().num_threads(jobs).build()?) } else { None };
        Ok(Analyzer { model, pool })
    }

    /// Index within `chunk` of the first insecure scenario.
    fn first_insecure(&self, chunk: &[Indexed]) -> Option<usize> {
        let model = self.model;
        match &self.pool {
            Some(pool) => pool.install(|| chunk.par_iter().position_first(|s| insecure(model, s))),
            None => chunk.iter().position(|s| insecure(model, s)),
        }
    }

    fn insecure_flags(&self, chunk: &[Indexed]) -> Vec<bool> {
        let model = self.model;
        match &self.pool {
            Some(pool) => pool.install(|| chunk.par_iter().map(|s| insecure(model, s)).collect()),
            None => chunk.iter().map(|s| insecure(model, s)).collect(),
        }
    }

    fn chunks(&self, k: usize) -> impl Iterator<Item = Vec<Indexed>> + 'm {
        let mut stream = ScenarioStream::new(self.model, k);
        std::iter::from_fn(move || {
            let chunk: Vec<Indexed> = stream.by_ref().take(CHUNK).collect();
            (!chunk.is_empty()).then_some(chunk)
        })
    }

    /// Searches all scenarios with at most `n` faults and returns the
    /// canonically first breach, if any. `n` is clamped to the instance count.
    pub fn check(&self, n: usize) -> Analysis {
        let n = n.min(self.model.instance_count());
        let mut checked = 0u64;
        for k in 0..=n {
            for chunk in self.chunks(k) {
                if let Some(pos) = self.first_insecure(&chunk) {
                    checked += pos as u64 + 1;
                    return Analysis {
                        max_faults: n,
                        scenarios_checked: checked,
                        verdict: Verdict::Breach(Box::new(breach(self.model, &chunk[pos]))),
                    };
                }
                checked += chunk.len() as u64;
            }
        }
        Analysis { max_faults: n, scenarios_checked: checked, verdict: Verdict::FailSecureUpTo(n) }
    }

    /// Like [`check`](Self::check) but returns every breach at the smallest
    /// breaching fault count, in canonical order.
    pub fn check_all(&self, n: usize) -> AllBreaches {
        let n = n.min(self.model.instance_count());
        let mut checked = 0u64;
        for k in 0..=n {
            let mut found = Vec::new();
            for chunk in self.chunks(k) {
                let flags = self.insecure_flags(&chunk);
                checked += chunk.len() as u64;
                found.extend(
                    chunk.iter().zip(flags).filter(|(_, bad)| *bad).map(|(s, _)| breach(self.model, s)),
                );
            }
            if !found.is_empty() {
                return AllBreaches { max_faults: n, scenarios_checked: checked, breaches: found };
            }
        }
        AllBreaches { max_faults: n, scenarios_checked: checked, breaches: Vec::new() }
    }

    /// Smallest number of failures, at most `bound`, that allows a leak.
    pub fn min_fault_count(&self, bound: usize) -> (Option<usize>, u64) {
        let a = self.check(bound);
        let min = match &a.verdict {
            Verdict::Breach(b) => Some(b.scenario.fault_count()),
            Verdict::FailSecureUpTo(_) => None,
        };
        (min, a.scenarios_checked)
    }
}

pub fn check_fail_secure(model: &Model, n: usize) -> Analysis {
    Analyzer::new(model).check(n)
}

pub fn min_fault_count(model: &Model, bound: usize) -> Option<usize> {
    Analyzer::new(model).min_fault_count(bound).0
}

/// Re-evaluates a breach from scratch and checks that it reproduces exactly
/// the recorded valuation and leaks.
pub fn verify_counterexample(model: &Model, b: &Breach) -> bool {
    let Ok(valuation) = crate::eval::evaluate(model, &b.scenario) else {
        return false;
    };
    if valuation != b.valuation {
        return false;
    }
    let (secure, leaks) = is_secure(model, &valuation);
    !secure && leaks == b.leaks
}
