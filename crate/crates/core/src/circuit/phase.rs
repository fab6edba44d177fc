//! Phase estimation with one conditional-evolution block.
//!
//! `Σ_τ |τ⟩⟨τ| ⊗ e^{iOτt0}` is applied exactly through the eigenbasis of `O`,
//! so an eigenvalue `λ` produces the register value `λ·t0·2^b/(2π)`, exact
//! whenever that number is an integer.

use std::f64::consts::PI;
use std::sync::Arc;

use super::exec::Exec;
use crate::error::{Error, Result};
use crate::numkit::{symmetric_eigen, DenseMatrix};
use crate::qsim::{inverse_qft_gates, Evolution, Gate, GateKind, StateVector};

/// Eigenvalues below this are treated as zero when checking wraparound.
const PHASE_SLACK: f64 = 1e-12;

/// Pads `op` with zero rows and columns to `dim x dim`.
pub fn pad_operator(op: &DenseMatrix, dim: usize) -> Result<DenseMatrix> {
    if op.rows() > dim || !op.is_square() {
        return Err(Error::InvalidInput(format!(
            "operator {:?} does not fit a {dim}-dimensional register",
            op.shape()
        )));
    }
    let mut out = DenseMatrix::zeros(dim, dim);
    for r in 0..op.rows() {
        for c in 0..op.cols() {
            out[(r, c)] = op[(r, c)];
        }
    }
    Ok(out)
}

/// Checks `0 <= λ t0 / 2π < 1` for every eigenvalue.
pub fn check_wraparound(eigenvalues: &[f64], t0: f64) -> Result<()> {
    for &l in eigenvalues {
        let phase = l * t0 / (2.0 * PI);
        if phase >= 1.0 || phase < -PHASE_SLACK {
            return Err(Error::Configuration(format!(
                "eigenvalue {l} with t0 = {t0} has phase {phase}, outside [0, 1)"
            )));
        }
    }
    Ok(())
}

/// Forward phase-estimation gates: Hadamards on `out`, the conditional
/// evolution on `target`, then the inverse QFT on `out`.
pub fn phase_estimation_gates(operator: &DenseMatrix, t0: f64, target: &[usize], out: &[usize]) -> Result<Vec<Gate>> {
    if !operator.is_symmetric(1e-12 * (1.0 + operator.frobenius_norm())) {
        return Err(Error::InvalidInput("phase estimation needs a symmetric operator".into()));
    }
    let dim = 1usize << target.len();
    let op = pad_operator(operator, dim)?;
    let (vals, _) = symmetric_eigen(&op)?;
    check_wraparound(&vals, t0)?;
    let ev = Arc::new(Evolution::new(&op, t0)?);
    let mut gates: Vec<Gate> = out.iter().map(|&q| Gate::single(GateKind::H, q)).collect();
    gates.push(Gate::evolution(ev, target.to_vec(), out.to_vec())?);
    gates.extend(inverse_qft_gates(out));
    Ok(gates)
}

/// The adjoint of a gate sequence.
pub fn adjoint(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

/// Writes the eigenvalue of `operator` (acting on `target`) into `out`.
pub fn phase_estimate(mut state: StateVector, operator: &DenseMatrix, target: &[usize], out: &[usize], t0: f64) -> Result<StateVector> {
    state.apply_all(&phase_estimation_gates(operator, t0, target, out)?)?;
    Ok(state)
}

pub(crate) fn apply_phase_estimation(exec: &mut Exec, stage: &str, gates: &[Gate]) -> Result<()> {
    exec.gates(stage, gates.iter().cloned())
}

/// Register value for eigenvalue `lambda`: `λ t0 2^b / (2π)`.
pub fn register_value(lambda: f64, t0: f64, b: u32) -> f64 {
    lambda * t0 * 2f64.powi(b as i32) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::RegisterLayout;

    #[test]
    fn dyadic_phase_is_exact() {
        // λ t0 / 2π = 1/4 with b = 2 gives |01⟩.
        let l = RegisterLayout::new(&[("out", 2), ("t", 1)]).unwrap();
        let s = phase_estimate(StateVector::zero(l), &DenseMatrix::diag(&[0.25]), &[2], &[0, 1], 2.0 * PI).unwrap();
        assert!((s.amplitude(0b01_0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_branches() {
        let l = RegisterLayout::new(&[("out", 4), ("t", 1)]).unwrap();
        let op = DenseMatrix::diag(&[0.5, 0.25]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::from_real(l, &{
            let mut v = vec![0.0; 32];
            v[0] = h;
            v[1] = h;
            v
        })
        .unwrap();
        let out = phase_estimate(s, &op, &[4], &[0, 1, 2, 3], PI).unwrap();
        // t0 = π halves the phases: 1/4 → 4, 1/8 → 2 on 4 bits.
        assert!((out.amplitude(0b0100_0).norm() - h).abs() < 1e-12);
        assert!((out.amplitude(0b0010_1).norm() - h).abs() < 1e-12);
        let kept = out.amplitude(0b0100_0).norm_sqr() + out.amplitude(0b0010_1).norm_sqr();
        assert!((kept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_is_left_alone() {
        let l = RegisterLayout::new(&[("out", 3), ("t", 1)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let op = DenseMatrix::from_rows(&[vec![0.5, 0.25], vec![0.25, 0.5]]).unwrap();
        let s = StateVector::from_real(l, &{
            let mut v = vec![0.0; 16];
            v[0] = h;
            v[1] = h;
            v
        })
        .unwrap();
        let out = phase_estimate(s, &op, &[3], &[0, 1, 2], 2.0 * PI).unwrap();
        // Eigenvalue 3/4 → register 6, target still (|0⟩ + |1⟩)/√2.
        assert!((out.amplitude(0b110_0).norm() - h).abs() < 1e-12);
        assert!((out.amplitude(0b110_1).norm() - h).abs() < 1e-12);
    }

    #[test]
    fn wraparound_is_refused() {
        let l = RegisterLayout::new(&[("out", 2), ("t", 1)]).unwrap();
        let r = phase_estimate(StateVector::zero(l), &DenseMatrix::diag(&[1.0, 0.5]), &[2], &[0, 1], 2.0 * PI);
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    #[test]
    fn adjoint_uncomputes() {
        let l = RegisterLayout::new(&[("out", 3), ("t", 1)]).unwrap();
        let op = DenseMatrix::from_rows(&[vec![0.3, 0.1], vec![0.1, 0.6]]).unwrap();
        let s0 = StateVector::from_real(l, &{
            let mut v = vec![0.0; 16];
            v[0] = 0.6;
            v[1] = 0.8;
            v
        })
        .unwrap();
        let g = phase_estimation_gates(&op, 2.0, &[3], &[0, 1, 2]).unwrap();
        let mut s = s0.clone();
        s.apply_all(&g).unwrap();
        s.apply_all(&adjoint(&g)).unwrap();
        assert!(s.leakage(&["out"]).unwrap() < 1e-24);
        assert!((s.inner(&s0).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}
