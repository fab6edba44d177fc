//! Qubit and gate counts of the gate-level iteration, from closed-form
//! formulas and from the trace of an actual run.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::IterationConfig;
use super::iteration::{ceil_log2, stage};
use crate::qsim::{inverse_qft_gate_count, Trace};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTally {
    pub stage: String,
    /// One- and two-qubit gates, controlled or not.
    pub elementary_gates: usize,
    /// Basis-permutation oracle applications (table reads and arithmetic).
    pub oracle_calls: usize,
    /// Conditional-evolution blocks.
    pub controlled_unitary_calls: usize,
    /// Adder/multiplier-level blocks inside the arithmetic oracles.
    pub arithmetic_blocks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredResources {
    pub state_prep_qubits: usize,
    pub total_qubits: usize,
    pub stages: Vec<StageTally>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub n: usize,
    pub k: usize,
    /// `⌈log₂(nk)⌉`.
    pub q: usize,
    /// `p + q`: the Reg. A qubits plus the angle register.
    pub state_prep_qubits: usize,
    /// `2b`.
    pub eigenvalue_qubits: usize,
    /// Newton output plus the `y` and angle registers.
    pub arithmetic_qubits: usize,
    pub total_qubits: usize,
    pub stages: Vec<StageTally>,
    pub total_elementary_gates: usize,
    pub measured: Option<MeasuredResources>,
}

/// Arithmetic blocks per oracle: the product and initial guess plus `s'`
/// Newton steps, one multiply-add for `y`, one block per arcsin term.
fn blocks_for(oracle: &str, config: &IterationConfig) -> usize {
    match oracle {
        "newton" => config.s_prime as usize + 2,
        "y" => 1,
        "arcsin" => config.n_terms,
        _ => 0,
    }
}

fn rotation_blocks(config: &IterationConfig) -> usize {
    ["newton", "y", "arcsin"].iter().map(|o| blocks_for(o, config)).sum()
}

/// Hadamards, the inverse QFT and one conditional evolution.
pub fn phase_estimation_gate_count(b: usize) -> usize {
    b + inverse_qft_gate_count(b)
}

pub fn resource_report(config: &IterationConfig, n: usize, k: usize) -> ResourceReport {
    let (b, d, p) = (config.b as usize, config.d as usize, config.p as usize);
    let q = ceil_log2(n * k);
    let z = config.z_format().total() as usize;
    let pe = |name: &str| StageTally {
        stage: name.into(),
        elementary_gates: phase_estimation_gate_count(b),
        controlled_unitary_calls: 1,
        ..Default::default()
    };
    let stages = vec![
        StageTally {
            stage: stage::STATE_PREP.into(),
            elementary_gates: q * (p + 3),
            oracle_calls: 2 * q,
            ..Default::default()
        },
        pe(stage::PE_C),
        pe(stage::PE_B),
        StageTally {
            stage: stage::ROTATION.into(),
            elementary_gates: d,
            oracle_calls: 3,
            arithmetic_blocks: rotation_blocks(config),
            ..Default::default()
        },
        StageTally {
            stage: stage::ROTATION_UNCOMPUTE.into(),
            oracle_calls: 3,
            arithmetic_blocks: rotation_blocks(config),
            ..Default::default()
        },
        pe(stage::PE_B_UNCOMPUTE),
        pe(stage::PE_C_UNCOMPUTE),
    ];
    let total_elementary_gates = stages.iter().map(|s| s.elementary_gates).sum();
    ResourceReport {
        n,
        k,
        q,
        state_prep_qubits: p + q,
        eigenvalue_qubits: 2 * b,
        arithmetic_qubits: z + 2 * d,
        total_qubits: 1 + 2 * b + z + 2 * d + p + q,
        stages,
        total_elementary_gates,
        measured: None,
    }
}

/// Counts taken from a gate-level trace.
pub fn measure_trace(trace: &Trace, config: &IterationConfig, total_qubits: usize) -> MeasuredResources {
    let mut prep_qubits = BTreeSet::new();
    for e in trace.stage(stage::STATE_PREP) {
        prep_qubits.extend(e.targets.iter().chain(&e.controls).copied());
    }
    let stages = stage::GATE_LEVEL
        .iter()
        .map(|&name| {
            let mut t = StageTally {
                stage: name.into(),
                ..Default::default()
            };
            for e in trace.stage(name) {
                if let Some(oracle) = e.kind.strip_prefix("ORACLE:") {
                    t.oracle_calls += 1;
                    t.arithmetic_blocks += blocks_for(oracle, config);
                } else if e.kind == "EVOL" {
                    t.controlled_unitary_calls += 1;
                } else {
                    t.elementary_gates += 1;
                }
            }
            t
        })
        .collect();
    MeasuredResources {
        state_prep_qubits: prep_qubits.len(),
        total_qubits,
        stages,
    }
}

impl ResourceReport {
    pub fn with_measured(mut self, measured: MeasuredResources) -> Self {
        self.measured = Some(measured);
        self
    }

    /// Stages whose measured tallies differ from the formulas. The sign
    /// layer depends on the data and has no formula, so it is skipped.
    pub fn mismatches(&self) -> Vec<String> {
        let Some(m) = &self.measured else {
            return vec![];
        };
        let mut out = Vec::new();
        if m.state_prep_qubits != self.state_prep_qubits {
            out.push(format!(
                "state-prep qubits: formula {} measured {}",
                self.state_prep_qubits, m.state_prep_qubits
            ));
        }
        if m.total_qubits != self.total_qubits {
            out.push(format!("total qubits: formula {} measured {}", self.total_qubits, m.total_qubits));
        }
        for f in &self.stages {
            match m.stages.iter().find(|s| s.stage == f.stage) {
                Some(s) if s == f => {}
                Some(s) => out.push(format!("{}: formula {f:?} measured {s:?}", f.stage)),
                None => out.push(format!("{}: not measured", f.stage)),
            }
        }
        out
    }
}
