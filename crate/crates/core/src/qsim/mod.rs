//! Statevector simulator with named registers.
//!
//! Qubits are ordered register by register, most significant bit first, so
//! qubit 0 is the leading bit of a basis index. Reversible arithmetic is
//! modelled as [`BasisPermutation`] oracles that move amplitudes between
//! basis states rather than as gate-level adder networks.

mod density;
mod gate;
mod layout;
mod oracle;
mod qft;
mod state;
mod trace;

pub use density::DensityMatrix;
pub use gate::{Evolution, Gate, GateKind};
pub use layout::{Register, RegisterLayout, MAX_QUBITS};
pub use oracle::{BasisPermutation, EXHAUSTIVE_CHECK_BITS};
pub use qft::{inverse_qft_gate_count, inverse_qft_gates, qft_gates};
pub use state::{StateVector, MAX_DENSE_QUBITS, MAX_SUPPORT, MIN_PROBABILITY, NORM_TOL};
pub use trace::{Trace, TraceEntry};

use crate::error::Result;
use num_complex::Complex64;

pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn apply_basis_permutation(mut state: StateVector, perm: &BasisPermutation) -> Result<StateVector> {
    state.apply_permutation(perm)?;
    Ok(state)
}

pub fn inverse_qft(mut state: StateVector, qubits: &[usize]) -> Result<StateVector> {
    state.apply_all(&inverse_qft_gates(qubits))?;
    Ok(state)
}

pub fn qft(mut state: StateVector, qubits: &[usize]) -> Result<StateVector> {
    state.apply_all(&qft_gates(qubits))?;
    Ok(state)
}

pub fn postselect(state: &StateVector, qubit: usize, outcome: u8) -> Result<(StateVector, f64)> {
    state.postselect(qubit, outcome)
}

pub fn partial_trace(state: &StateVector, keep: &str) -> Result<DensityMatrix> {
    state.partial_trace(keep)
}

pub fn fidelity(state: &StateVector, target: &[Complex64]) -> Result<f64> {
    state.fidelity(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::numkit::DenseMatrix;
    use crate::spectral::{density_formula, init_spectral, target_state};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one(name: &str, w: usize) -> RegisterLayout {
        RegisterLayout::new(&[(name, w)]).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn hadamard_and_ry() {
        let s = apply_gate(StateVector::zero(one("q", 1)), &Gate::single(GateKind::H, 0)).unwrap();
        assert!(close(&s.to_dense().unwrap(), &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15));
        let s = apply_gate(StateVector::zero(one("q", 1)), &Gate::single(GateKind::Ry(PI), 0)).unwrap();
        assert!(close(&s.to_dense().unwrap(), &[c(0.0, 0.0), c(1.0, 0.0)], 1e-15));
        let s = apply_gate(StateVector::zero(one("q", 1)), &Gate::single(GateKind::Ry(0.6), 0)).unwrap();
        assert!(close(&s.to_dense().unwrap(), &[c(0.3f64.cos(), 0.0), c(0.3f64.sin(), 0.0)], 1e-15));
    }

    #[test]
    fn controlled_r1_flips_sign() {
        let l = RegisterLayout::new(&[("c", 1), ("t", 1)]).unwrap();
        let s = StateVector::basis(l, 0b11).unwrap();
        let g = Gate::controlled(GateKind::PhaseR(1), 1, vec![0]).unwrap();
        let s = apply_gate(s, &g).unwrap();
        assert!((s.amplitude(0b11) - c(-1.0, 0.0)).norm() < 1e-15);
        // Control off leaves the state alone; on |0⟩ the phase is e^{iπ} too.
        let off = apply_gate(StateVector::basis(s.layout().clone(), 0b01).unwrap(), &g).unwrap();
        assert_eq!(off.amplitude(0b01), c(1.0, 0.0));
    }

    #[test]
    fn r_gate_matches_definition() {
        for l in 1..6u32 {
            let m = GateKind::PhaseR(l).matrix().unwrap();
            let a = 2.0 * PI / 2f64.powi(l as i32);
            assert!((m[0] - Complex64::from_polar(1.0, a)).norm() < 1e-15);
            assert!((m[3] - Complex64::from_polar(1.0, -a)).norm() < 1e-15);
        }
        let v = GateKind::V.matrix().unwrap();
        assert_eq!((v[0], v[3]), (c(1.0, 0.0), c(0.0, -1.0)));
    }

    #[test]
    fn gate_inverse_undoes_gate() {
        let l = RegisterLayout::new(&[("a", 1), ("b", 1), ("c", 1)]).unwrap();
        let amps: Vec<f64> = (1..=8).map(|x| x as f64).collect();
        let n = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s0 = StateVector::from_real(l, &amps.iter().map(|x| x / n).collect::<Vec<_>>()).unwrap();
        let gates = vec![
            Gate::single(GateKind::H, 0),
            Gate::controlled(GateKind::PhaseR(3), 2, vec![0]).unwrap(),
            Gate::single(GateKind::V, 1),
            Gate::controlled(GateKind::Ry(0.7), 1, vec![0, 2]).unwrap(),
            Gate::new(GateKind::Swap, vec![0, 2], vec![]).unwrap(),
        ];
        let mut s = s0.clone();
        s.apply_all(&gates).unwrap();
        for g in gates.iter().rev() {
            s.apply(&g.inverse()).unwrap();
        }
        assert!(close(&s.to_dense().unwrap(), &s0.to_dense().unwrap(), 1e-14));
    }

    #[test]
    fn basis_permutation_examples() {
        let l = RegisterLayout::new(&[("r1", 2), ("r2", 2)]).unwrap();
        let id = BasisPermutation::from_table("id", vec![vec![0, 1], vec![2, 3]], |v| v.to_vec()).unwrap();
        let s = StateVector::basis(l.clone(), 0b11_01).unwrap();
        let same = apply_basis_permutation(s.clone(), &id).unwrap();
        assert_eq!(same.entries(), s.entries());

        let xor = BasisPermutation::xor_into("xor", vec![vec![0, 1]], vec![2, 3], |v| v[0]).unwrap();
        let out = apply_basis_permutation(s, &xor).unwrap();
        assert_eq!(out.entries(), vec![(0b11_10, c(1.0, 0.0))]);
    }

    #[test]
    fn inverse_qft_examples() {
        let l = one("r", 2);
        let amps: Vec<Complex64> = (0..4)
            .map(|tau| Complex64::from_polar(0.5, 2.0 * PI * tau as f64 / 4.0))
            .collect();
        let s = inverse_qft(StateVector::from_amplitudes(l.clone(), &amps).unwrap(), &[0, 1]).unwrap();
        assert!((s.amplitude(0b01).norm() - 1.0).abs() < 1e-14);

        let u = inverse_qft(StateVector::zero(one("r", 3)), &[0, 1, 2]).unwrap();
        for a in u.to_dense().unwrap() {
            assert!((a - c(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_qft_matches_dft_matrix() {
        for t in 1..=5usize {
            let d = 1usize << t;
            let q: Vec<usize> = (0..t).collect();
            for y in 0..d {
                let s = inverse_qft(StateVector::basis(one("r", t), y as u128).unwrap(), &q).unwrap();
                let dense = s.to_dense().unwrap();
                for (x, a) in dense.iter().enumerate() {
                    let want = Complex64::from_polar(
                        1.0 / (d as f64).sqrt(),
                        -2.0 * PI * (x * y) as f64 / d as f64,
                    );
                    assert!((a - want).norm() < 1e-13, "t={t} y={y} x={x}");
                }
            }
        }
        assert_eq!(inverse_qft_gates(&[0, 1, 2, 3]).len(), inverse_qft_gate_count(4));
    }

    #[test]
    fn postselect_examples() {
        let l = RegisterLayout::new(&[("a", 1), ("phi", 1)]).unwrap();
        // (√.25|0⟩ + √.75|1⟩) ⊗ (0.6|0⟩ + 0.8|1⟩)
        let (p0, p1) = (0.25f64.sqrt(), 0.75f64.sqrt());
        let amps = [p0 * 0.6, p0 * 0.8, p1 * 0.6, p1 * 0.8];
        let s = StateVector::from_real(l.clone(), &amps).unwrap();
        let (post, p) = postselect(&s, 0, 1).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
        assert!((post.amplitude(0b10).re - 0.6).abs() < 1e-15);
        assert!((post.amplitude(0b11).re - 0.8).abs() < 1e-15);

        let (_, p) = postselect(&StateVector::basis(one("a", 1), 1).unwrap(), 0, 1).unwrap();
        assert_eq!(p, 1.0);

        let bell = StateVector::from_real(l, &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let (post, p) = postselect(&bell, 0, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((post.amplitude(0).norm() - 1.0).abs() < 1e-15);

        assert!(matches!(
            postselect(&StateVector::zero(one("a", 1)), 0, 1),
            Err(Error::ImpossibleOutcome { qubit: 0, outcome: 1, .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let l = RegisterLayout::new(&[("x", 1), ("y", 1)]).unwrap();
        let bell = StateVector::from_real(l.clone(), &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let rho = partial_trace(&bell, "x").unwrap();
        assert!(close(rho.as_slice(), &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)], 1e-15));

        let prod = StateVector::from_real(l, &[0.6 * 0.8, 0.6 * -0.6, 0.8 * 0.8, 0.8 * -0.6]).unwrap();
        let rho = partial_trace(&prod, "x").unwrap();
        assert!(close(rho.as_slice(), &[c(0.36, 0.0), c(0.48, 0.0), c(0.48, 0.0), c(0.64, 0.0)], 1e-15));
    }

    #[test]
    fn partial_trace_of_spectral_target_is_normalized_gram() {
        let xt = DenseMatrix::from_rows(&[
            vec![1.0, 0.2, -0.3, 0.0],
            vec![0.4, 2.0, 0.1, -0.5],
            vec![0.0, 0.3, 0.7, 0.2],
            vec![-0.2, 0.1, 0.0, 1.5],
        ])
        .unwrap();
        let model = init_spectral(&xt, 2, 0.1).unwrap().with_beta(vec![1.3, 0.4], 1);
        let l = RegisterLayout::new(&[("u", 2), ("v", 2)]).unwrap();
        let s = StateVector::from_real(l, &target_state(&model)).unwrap();
        let rho = partial_trace(&s, "u").unwrap().to_real(1e-15).unwrap();
        assert!(rho.max_abs_diff(&density_formula(&model)) < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let l = one("q", 1);
        let plus = StateVector::from_real(l.clone(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        assert!((fidelity(&plus, &plus.to_dense().unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&StateVector::basis(l, 1).unwrap(), &zero).unwrap(), 0.0);
        assert!((fidelity(&plus, &zero).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conditional_evolution_phases() {
        // τ register of 2 qubits controls exp(iτφ diag(1, 0.5)).
        let l = RegisterLayout::new(&[("tau", 2), ("t", 1)]).unwrap();
        let ev = std::sync::Arc::new(Evolution::new(&DenseMatrix::diag(&[1.0, 0.5]), 0.4).unwrap());
        let g = Gate::evolution(ev, vec![2], vec![0, 1]).unwrap();
        let s = apply_gate(StateVector::basis(l.clone(), 0b11_0).unwrap(), &g).unwrap();
        assert!((s.amplitude(0b11_0) - Complex64::from_polar(1.0, 3.0 * 0.4)).norm() < 1e-14);
        let s = apply_gate(StateVector::basis(l, 0b10_1).unwrap(), &g).unwrap();
        assert!((s.amplitude(0b10_1) - Complex64::from_polar(1.0, 2.0 * 0.4 * 0.5)).norm() < 1e-14);
    }

    #[test]
    fn dump_round_trip() {
        let l = RegisterLayout::new(&[("x", 1), ("y", 2)]).unwrap();
        let s = StateVector::from_amplitudes(
            l.clone(),
            &[c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -0.8), c(1e-13, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let text = s.dump();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("000 "));
        assert!(text.lines().nth(1).unwrap().starts_with("101 "));
        let back = StateVector::from_dump(l, &text).unwrap();
        assert!((back.amplitude(0b101) - c(0.0, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn restrict_drops_clean_registers() {
        let l = RegisterLayout::new(&[("anc", 2), ("x", 1)]).unwrap();
        let s = StateVector::from_real(l, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let r = s.restrict(&["x"], 1e-12).unwrap();
        assert_eq!(r.num_qubits(), 1);
        assert!((r.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-15);
        let mut dirty = s.clone();
        dirty.apply(&Gate::single(GateKind::X, 0)).unwrap();
        assert!(dirty.restrict(&["x"], 1e-12).is_err());
    }

    fn random_state(q: usize, seed: &[f64]) -> StateVector {
        let d = 1usize << q;
        let amps: Vec<Complex64> = (0..d).map(|i| c(seed[2 * i % seed.len()], seed[(2 * i + 1) % seed.len()])).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.iter().map(|a| a / n).collect();
        let regs: Vec<(String, usize)> = (0..q).map(|i| (format!("q{i}"), 1)).collect();
        StateVector::from_amplitudes(RegisterLayout::new(&regs).unwrap(), &amps).unwrap()
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(seed in prop::collection::vec(0.1f64..1.0, 16), theta in -6.0f64..6.0, l in 1u32..8) {
            let mut s = random_state(3, &seed);
            let gates = [
                Gate::single(GateKind::H, 1),
                Gate::controlled(GateKind::Ry(theta), 2, vec![0]).unwrap(),
                Gate::controlled(GateKind::PhaseR(l), 0, vec![1, 2]).unwrap(),
                Gate::single(GateKind::V, 2),
                Gate::new(GateKind::Swap, vec![0, 1], vec![2]).unwrap(),
            ];
            for g in &gates {
                s.apply(g).unwrap();
                prop_assert!((s.norm_sq() - 1.0).abs() < 1e-12);
            }
            let (vals_q, sub) = (vec![0usize, 1, 2], s.clone());
            let s2 = qft(inverse_qft(sub.clone(), &vals_q).unwrap(), &vals_q).unwrap();
            prop_assert!(close(&s2.to_dense().unwrap(), &sub.to_dense().unwrap(), 1e-12));
        }

        #[test]
        fn permutation_then_inverse_is_identity(seed in prop::collection::vec(0.1f64..1.0, 32), k in 1u64..16) {
            let s = random_state(4, &seed);
            let add = BasisPermutation::new(
                "add",
                vec![vec![0, 1], vec![2, 3]],
                move |v| vec![v[0], (v[1] + v[0] * k) % 4],
                move |v| vec![v[0], (v[1] + 4 * 16 - (v[0] * k) % 4) % 4],
            ).unwrap();
            let t = apply_basis_permutation(s.clone(), &add).unwrap();
            prop_assert!((t.norm_sq() - 1.0).abs() < 1e-12);
            let back = apply_basis_permutation(t, &add.inverse()).unwrap();
            prop_assert!(close(&back.to_dense().unwrap(), &s.to_dense().unwrap(), 1e-15));
        }

        #[test]
        fn partial_trace_is_a_density_matrix(seed in prop::collection::vec(-1.0f64..1.0, 40)) {
            let s = random_state(4, &seed);
            let rho = partial_trace(&s, "q1").unwrap();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
            prop_assert!(rho.eigenvalues()[0] > -1e-10);
        }
    }
}
