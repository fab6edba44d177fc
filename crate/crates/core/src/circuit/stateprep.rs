//! Amplitude loading from a binary tree of rotation angles.
//!
//! Qubit `i` is rotated by `ω(prefix)` where `prefix` is the value of qubits
//! `0..i` and `cos²(2πω) = α²_{prefix·0} / α²_{prefix}`. The angle is read
//! from a classical table into an ancilla register (the QRAM readout), turned
//! into `cos(2πω)|0⟩ + sin(2πω)|1⟩` by `V·H·Π_l c-R_l·H`, and the table read
//! is undone. Negative amplitudes are restored afterwards by sign flips.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exec::Exec;
use crate::error::{Error, Result};
use crate::qsim::{BasisPermutation, Gate, GateKind, RegisterLayout, StateVector, Trace};

pub const STAGE: &str = "state_prep";
pub const SIGN_STAGE: &str = "state_prep_sign";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaTable {
    pub qubits: usize,
    pub p: u32,
    /// `levels[i][prefix]` is `ω · 2^p` for qubit `i`.
    pub levels: Vec<Vec<u64>>,
    /// Basis states whose target amplitude is negative.
    pub negative: Vec<u64>,
}

impl OmegaTable {
    pub fn omega(&self, qubit: usize, prefix: u64) -> f64 {
        self.levels[qubit][prefix as usize] as f64 / 2f64.powi(self.p as i32)
    }

    /// Real amplitudes the rounded table produces, before sign flips.
    pub fn amplitudes(&self) -> Vec<f64> {
        let mut amps = vec![1.0];
        for level in &self.levels {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for (prefix, a) in amps.iter().enumerate() {
                let w = 2.0 * std::f64::consts::PI * level[prefix] as f64 / 2f64.powi(self.p as i32);
                next.push(a * w.cos());
                next.push(a * w.sin());
            }
            amps = next;
        }
        for &i in &self.negative {
            amps[i as usize] = -amps[i as usize];
        }
        amps
    }
}

/// Angle table for a real unit vector of length `2^q`.
pub fn compute_omega_table(target: &[f64], p: u32) -> Result<OmegaTable> {
    let len = target.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!("target length {len} is not a power of two")));
    }
    if target.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("target has non-finite amplitudes".into()));
    }
    let norm: f64 = target.iter().map(|x| x * x).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("target squared norm {norm} differs from 1")));
    }
    if !(1..=62).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must be in 1..=62, got {p}")));
    }
    let q = len.trailing_zeros() as usize;
    let scale = 2f64.powi(p as i32);
    // weight[level][prefix]: squared mass under `prefix` at depth `level`.
    let mut weights = vec![target.iter().map(|x| x * x).collect::<Vec<f64>>()];
    for _ in 0..q {
        let prev = weights.last().unwrap();
        let up: Vec<f64> = prev.chunks(2).map(|c| c[0] + c[1]).collect();
        weights.push(up);
    }
    weights.reverse();
    let levels = (0..q)
        .map(|i| {
            let parent = &weights[i];
            let child = &weights[i + 1];
            (0..parent.len())
                .map(|prefix| {
                    let total = parent[prefix];
                    if total <= 0.0 {
                        return 0;
                    }
                    let ratio = (child[2 * prefix] / total).sqrt().clamp(0.0, 1.0);
                    let omega = ratio.acos() / (2.0 * std::f64::consts::PI);
                    (omega * scale).round() as u64
                })
                .collect()
        })
        .collect();
    let negative = target
        .iter()
        .enumerate()
        .filter(|(_, &x)| x < 0.0)
        .map(|(i, _)| i as u64)
        .collect();
    Ok(OmegaTable {
        qubits: q,
        p,
        levels,
        negative,
    })
}

/// Applies the loading circuit for `table` on `a_qubits`, using `w_qubits`
/// (which must start and end in |0⟩) for the angle readout.
pub(crate) fn apply_state_prep(exec: &mut Exec, table: &OmegaTable, a_qubits: &[usize], w_qubits: &[usize]) -> Result<()> {
    if a_qubits.len() != table.qubits || w_qubits.len() != table.p as usize {
        return Err(Error::InvalidInput(format!(
            "table for {} qubits / {} bits used with {} / {} qubits",
            table.qubits,
            table.p,
            a_qubits.len(),
            w_qubits.len()
        )));
    }
    for (i, &target) in a_qubits.iter().enumerate() {
        let level = Arc::new(table.levels[i].clone());
        let qram = BasisPermutation::xor_into(
            &format!("qram{i}"),
            vec![a_qubits[..i].to_vec()],
            w_qubits.to_vec(),
            move |v| level[v[0] as usize],
        )?;
        exec.oracle(STAGE, &qram)?;
        exec.gate(STAGE, Gate::single(GateKind::H, target))?;
        for (l, &w) in w_qubits.iter().enumerate() {
            exec.gate(STAGE, Gate::controlled(GateKind::PhaseR(l as u32 + 1), target, vec![w])?)?;
        }
        exec.gate(STAGE, Gate::single(GateKind::H, target))?;
        exec.gate(STAGE, Gate::single(GateKind::V, target))?;
        exec.oracle(STAGE, &qram)?;
    }
    apply_sign_layer(exec, &table.negative, a_qubits)
}

/// `-1` on each listed basis state of `a_qubits`: a multi-controlled Z
/// conjugated by X on the zero bits.
fn apply_sign_layer(exec: &mut Exec, negative: &[u64], a_qubits: &[usize]) -> Result<()> {
    let q = a_qubits.len();
    let Some((&last, rest)) = a_qubits.split_last() else {
        return Ok(());
    };
    for &x in negative {
        let zeros: Vec<usize> = (0..q)
            .filter(|&k| (x >> (q - 1 - k)) & 1 == 0)
            .map(|k| a_qubits[k])
            .collect();
        for &z in &zeros {
            exec.gate(SIGN_STAGE, Gate::single(GateKind::X, z))?;
        }
        exec.gate(SIGN_STAGE, Gate::controlled(GateKind::Z, last, rest.to_vec())?)?;
        for &z in &zeros {
            exec.gate(SIGN_STAGE, Gate::single(GateKind::X, z))?;
        }
    }
    Ok(())
}

/// Runs the loading circuit on a fresh `[A, W]` layout. The angle register
/// `W` is back in |0⟩ at the end.
pub fn prepare_state(table: &OmegaTable) -> Result<(StateVector, Trace)> {
    let layout = RegisterLayout::new(&[("A", table.qubits), ("W", table.p as usize)])?;
    let a = layout.qubits("A")?;
    let w = layout.qubits("W")?;
    let mut exec = Exec::new(StateVector::zero(layout));
    apply_state_prep(&mut exec, table, &a, &w)?;
    Ok((exec.state, exec.trace))
}

/// Dense amplitudes of register `A` of a [`prepare_state`] output.
pub fn register_amplitudes(state: &StateVector) -> Result<Vec<Complex64>> {
    state.restrict(&["A"], 1e-10)?.to_dense()
}
