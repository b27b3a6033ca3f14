//! Validated, evaluation-ready architecture.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::arch::{Architecture, ComponentKind, Endpoint, Instance};
use crate::validate::{dataflow_order, validate, Diagnostic};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub struct InvalidArchitecture {
    /// All diagnostics, warnings included.
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for InvalidArchitecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let errors: Vec<String> =
            self.diagnostics.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
        write!(f, "invalid architecture: {}", errors.join("; "))
    }
}

/// Net wiring of one instance, resolved to net ids.
#[derive(Debug, Clone)]
pub(crate) struct InstancePlan {
    pub kind: usize,
    /// Net read by each input port, in port order.
    pub inputs: Vec<usize>,
    /// Net driven by each output port, if any.
    pub outputs: Vec<Option<usize>>,
}

/// An architecture that passed validation, with its evaluation schedule.
#[derive(Debug, Clone)]
pub struct Model {
    arch: Architecture,
    warnings: Vec<Diagnostic>,
    order: Vec<usize>,
    by_name: Vec<usize>,
    pub(crate) plans: Vec<InstancePlan>,
    pub(crate) input_nets: Vec<Option<usize>>,
    pub(crate) output_nets: Vec<usize>,
    net_names: Vec<String>,
}

impl Model {
    pub fn new(arch: Architecture) -> Result<Model, InvalidArchitecture> {
        let diagnostics = validate(&arch);
        if diagnostics.iter().any(Diagnostic::is_error) {
            return Err(InvalidArchitecture { diagnostics });
        }
        let order = dataflow_order(&arch).expect("validated architecture is acyclic");

        let mut driven: HashMap<&Endpoint, usize> = HashMap::new();
        let mut read: HashMap<&Endpoint, usize> = HashMap::new();
        for (id, net) in arch.nets.iter().enumerate() {
            driven.insert(&net.driver, id);
            for r in &net.readers {
                read.insert(r, id);
            }
        }
        let plans = arch
            .instances
            .iter()
            .map(|inst| {
                let kind = arch.kinds.iter().position(|k| k.name == inst.kind).expect("known kind");
                let k = &arch.kinds[kind];
                InstancePlan {
                    kind,
                    inputs: k
                        .inputs
                        .iter()
                        .map(|p| read[&Endpoint::comp_in(&inst.name, p)])
                        .collect(),
                    outputs: k
                        .outputs
                        .iter()
                        .map(|p| driven.get(&Endpoint::comp_out(&inst.name, p)).copied())
                        .collect(),
                }
            })
            .collect();
        let input_nets = arch
            .product_inputs
            .iter()
            .map(|p| driven.get(&Endpoint::ProductInput(p.clone())).copied())
            .collect();
        let output_nets = arch
            .product_outputs
            .iter()
            .map(|p| read[&Endpoint::ProductOutput(p.clone())])
            .collect();
        let mut by_name: Vec<usize> = (0..arch.instances.len()).collect();
        by_name.sort_by(|&a, &b| arch.instances[a].name.cmp(&arch.instances[b].name));
        let net_names = arch.nets.iter().map(|n| n.name()).collect();

        Ok(Model {
            arch,
            warnings: diagnostics,
            order,
            by_name,
            plans,
            input_nets,
            output_nets,
            net_names,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    /// Instance indices in evaluation order.
    pub fn dataflow_order(&self) -> &[usize] {
        &self.order
    }

    /// Instance indices sorted by instance name.
    pub fn instances_by_name(&self) -> &[usize] {
        &self.by_name
    }

    pub fn instance(&self, i: usize) -> &Instance {
        &self.arch.instances[i]
    }

    pub fn instance_count(&self) -> usize {
        self.arch.instances.len()
    }

    pub fn kind_of(&self, i: usize) -> &ComponentKind {
        &self.arch.kinds[self.plans[i].kind]
    }

    pub fn net_count(&self) -> usize {
        self.arch.nets.len()
    }

    pub fn net_name(&self, id: usize) -> &str {
        &self.net_names[id]
    }

    pub fn net_id(&self, name: &str) -> Option<usize> {
        self.net_names.iter().position(|n| n == name)
    }

    /// Net feeding each product output, in declaration order.
    pub fn output_nets(&self) -> &[usize] {
        &self.output_nets
    }
}
