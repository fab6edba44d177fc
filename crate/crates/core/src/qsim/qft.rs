use std::f64::consts::PI;

use super::gate::{Gate, GateKind};

/// Gate list for the inverse QFT on `qubits` (first qubit most significant):
///
/// ```text
/// |y⟩ ↦ 2^{-t/2} Σ_x e^{-2πi x y / 2^t} |x⟩
/// ```
///
/// Bit-reversal swaps first, then for each qubit from last to first its
/// controlled phases followed by a Hadamard.
pub fn inverse_qft_gates(qubits: &[usize]) -> Vec<Gate> {
    let t = qubits.len();
    let mut gates = Vec::new();
    for i in 0..t / 2 {
        gates.push(Gate::new(GateKind::Swap, vec![qubits[i], qubits[t - 1 - i]], vec![]).unwrap());
    }
    for i in (0..t).rev() {
        for m in (i + 1..t).rev() {
            let angle = -2.0 * PI / 2f64.powi((m - i + 1) as i32);
            gates.push(Gate::controlled(GateKind::Phase(angle), qubits[i], vec![qubits[m]]).unwrap());
        }
        gates.push(Gate::single(GateKind::H, qubits[i]));
    }
    gates
}

/// Forward QFT: the inverse circuit reversed and daggered.
pub fn qft_gates(qubits: &[usize]) -> Vec<Gate> {
    inverse_qft_gates(qubits).iter().rev().map(Gate::inverse).collect()
}

/// Elementary gate count of [`inverse_qft_gates`] on `t` qubits.
pub fn inverse_qft_gate_count(t: usize) -> usize {
    t / 2 + t * (t - 1) / 2 + t
}
