use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Outcome, Report, TOOL, VERSION};
use crate::analyze::{Breach, Leak};
use crate::eval::{FaultScenario, Valuation};
use crate::model::Model;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonLeak {
    pub output: String,
    pub value: String,
    pub matches_input: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonBreach {
    pub faults: Vec<String>,
    pub routing: BTreeMap<String, BTreeMap<String, String>>,
    pub valuation: IndexMap<String, String>,
    pub leaks: Vec<JsonLeak>,
}

/// Wire form of a `check` report. Field order is the output key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonReport {
    pub tool: String,
    pub version: String,
    pub file: String,
    pub verdict: String,
    pub max_faults: usize,
    pub scenarios_checked: u64,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faults: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<IndexMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaks: Option<Vec<JsonLeak>>,
    /// Only with `--all`: every breach at the minimal fault count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breaches: Option<Vec<JsonBreach>>,
}

fn json_breach(model: &Model, b: &Breach) -> JsonBreach {
    JsonBreach {
        faults: b.scenario.faulty.iter().cloned().collect(),
        routing: b.scenario.routing.clone(),
        valuation: b.valuation.named(model).map(|(n, v)| (n.to_string(), v.render())).collect(),
        leaks: b
            .leaks
            .iter()
            .map(|l| JsonLeak {
                output: l.output.clone(),
                value: l.value.render(),
                matches_input: l.matched_input.clone(),
            })
            .collect(),
    }
}

impl JsonReport {
    pub fn new(model: &Model, report: &Report) -> Self {
        let breaches: Vec<JsonBreach> = report.breaches().iter().map(|b| json_breach(model, b)).collect();
        let first = breaches.first().cloned();
        JsonReport {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            file: report.file.clone(),
            verdict: if first.is_some() { "breach" } else { "fail-secure" }.to_string(),
            max_faults: report.max_faults,
            scenarios_checked: report.scenarios_checked,
            elapsed_ms: report.elapsed_ms,
            faults: first.as_ref().map(|b| b.faults.clone()),
            routing: first.as_ref().map(|b| b.routing.clone()),
            valuation: first.as_ref().map(|b| b.valuation.clone()),
            leaks: first.map(|b| b.leaks),
            breaches: matches!(report.outcome, Outcome::AllBreaches(_)).then_some(breaches),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// One-line JSON object for a `check` report.
pub fn emit_json(model: &Model, report: &Report) -> String {
    JsonReport::new(model, report).to_json()
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("not a report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report verdict is `{0}`, not `breach`")]
    NotABreach(String),
    #[error("report lacks `{0}`")]
    Missing(&'static str),
    #[error("bad value for `{name}`: {source}")]
    Value {
        name: String,
        source: crate::value::ValueSyntaxError,
    },
}

/// Rebuilds the breach recorded in a `check` JSON report.
///
/// Returns `Ok(None)` when the report's valuation does not name exactly the
/// model's nets; such a report cannot describe a counterexample of `model`.
pub fn breach_from_json(model: &Model, text: &str) -> Result<Option<Breach>, ReplayError> {
    let report: JsonReport = serde_json::from_str(text)?;
    if report.verdict != "breach" {
        return Err(ReplayError::NotABreach(report.verdict));
    }
    let faults = report.faults.ok_or(ReplayError::Missing("faults"))?;
    let routing = report.routing.ok_or(ReplayError::Missing("routing"))?;
    let valuation = report.valuation.ok_or(ReplayError::Missing("valuation"))?;
    let leaks = report.leaks.ok_or(ReplayError::Missing("leaks"))?;

    let parse = |name: &str, text: &str| {
        text.parse::<Value>().map_err(|source| ReplayError::Value { name: name.to_string(), source })
    };
    if valuation.len() != model.net_count() {
        return Ok(None);
    }
    let mut values = Vec::with_capacity(model.net_count());
    for id in 0..model.net_count() {
        let name = model.net_name(id);
        match valuation.get(name) {
            Some(v) => values.push(parse(name, v)?),
            None => return Ok(None),
        }
    }
    let leaks = leaks
        .iter()
        .map(|l| {
            Ok(Leak {
                output: l.output.clone(),
                value: parse(&l.output, &l.value)?,
                matched_input: l.matches_input.clone(),
            })
        })
        .collect::<Result<Vec<_>, ReplayError>>()?;
    Ok(Some(Breach {
        scenario: FaultScenario { faulty: faults.into_iter().collect(), routing },
        valuation: Valuation(values),
        leaks,
    }))
}
