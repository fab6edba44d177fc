//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured figures and exits non-zero if any criterion fails.
//!
//! Reference values (one-step formulas, densities, series sums, qubit
//! counts) are recomputed here from first principles rather than taken
//! from the library.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qaop::circuit::{
    arcsin_angle, compute_omega_table, controlled_ry_cascade, extract_density, load_model_state, measure_trace,
    newton_oracle, newton_reciprocal, newton_reciprocal_raw, prepare_state, resource_report, run_iteration,
    FixedPointFormat, IterationConfig, Mode, ANCILLA, REG_B, REG_C, REG_L,
};
use qaop::classical::{fit_iterative, objective_aux, update_a, update_b};
use qaop::numkit::{svd_default, DenseMatrix};
use qaop::qsim::{RegisterLayout, StateVector};
use qaop::spectral::{assemble_projection, beta_step, fit_spectral, init_spectral, Companion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDAS: [f64; 3] = [1e-3, 0.1, 1.0];

// Pinned tolerances.
const C1_REL_FROB: f64 = 1e-8;
const C1_SECONDS: f64 = 10.0;
const C2_SIGMA: f64 = 1e-10;
const C3_REL_GRAD: f64 = 1e-5;
const C4_FIDELITY_DEFICIT: f64 = 1e-10;
const C4_PROBABILITY: f64 = 1e-9;
const C5_FIDELITY: f64 = 0.99;
const C5_LEAKAGE: f64 = 1e-10;
const C5_SECONDS: f64 = 60.0;
const C6_DEFICIT: f64 = 1e-4;
/// Slack for "monotone within noise": an increase of the mean deficit by at
/// most this factor still counts as non-increasing.
const C6_NOISE: f64 = 0.1;
const C8_REL: f64 = 1e-6;
const C9_DENSITY: f64 = 1e-10;
const C11_DIRECTION: f64 = 1e-6;
const C11_ITERATIONS: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// Independent helpers

/// Orthonormal `n x n` matrix by Gram-Schmidt on Gaussian-ish columns.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    cols
}

/// `Σ_j σ_j u_j v_jᵀ` with the given singular values.
fn with_spectrum(n: usize, m: usize, sigma: &[f64], rng: &mut ChaCha8Rng) -> DenseMatrix {
    let u = random_orthogonal(n, rng);
    let v = random_orthogonal(m, rng);
    let mut x = DenseMatrix::zeros(n, m);
    for (j, s) in sigma.iter().enumerate() {
        for r in 0..n {
            for c in 0..m {
                x[(r, c)] += s * u[j][r] * v[j][c];
            }
        }
    }
    x
}

/// Descending singular values in `[lo, hi)` separated by at least `gap`.
fn distinct_sigma(count: usize, lo: f64, hi: f64, gap: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut s: Vec<f64> = (0..count).map(|_| rng.random_range(lo..hi)).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        if s.windows(2).all(|w| w[0] - w[1] >= gap) {
            return s;
        }
    }
}

/// Exact one-step map `β' = ((σβ)² + λ2) / (σ²β)`.
fn beta_formula(sigma: f64, beta: f64, lambda2: f64) -> f64 {
    ((sigma * beta).powi(2) + lambda2) / (sigma * sigma * beta)
}

fn align_signs(a: &DenseMatrix, reference: &DenseMatrix) -> DenseMatrix {
    let mut out = a.clone();
    for j in 0..a.cols() {
        let dot: f64 = (0..a.rows()).map(|i| a[(i, j)] * reference[(i, j)]).sum();
        if dot < 0.0 {
            for i in 0..a.rows() {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    out
}

fn rel_frob(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let num: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.as_slice().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn ceil_log2(x: usize) -> usize {
    let mut q = 0;
    while (1usize << q) < x {
        q += 1;
    }
    q
}

/// Central-difference gradient norm of `f` at `x`.
fn fd_gradient_norm(x: &DenseMatrix, f: impl Fn(&DenseMatrix) -> f64) -> f64 {
    let h = 1e-6;
    let mut sum = 0.0;
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let mut p = x.clone();
            let mut q = x.clone();
            p[(r, c)] += h;
            q[(r, c)] -= h;
            sum += ((f(&p) - f(&q)) / (2.0 * h)).powi(2);
        }
    }
    sum.sqrt()
}

/// `σ² ∝ (63, 42, 21, 7)`: eigenvalue registers of 6 bits read these exactly.
fn dyadic_instance(seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = [63.0f64, 42.0, 21.0, 7.0].map(|x| (x / 63.0).sqrt());
    with_spectrum(4, 4, &sigma, &mut rng)
}

// ---------------------------------------------------------------------------
// Criteria

fn c01_closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let count = 120;
    for t in 0..count {
        let n = rng.random_range(2..=16);
        let m = rng.random_range(2..=24);
        let r = n.min(m);
        let k = rng.random_range(1..=r.min(4));
        let sigma = distinct_sigma(r, 0.2, 3.0, 0.02, &mut rng);
        let xt = with_spectrum(n, m, &sigma, &mut rng);
        let lambda2 = LAMBDAS[t % 3];
        let i = 1 + (t / 3) % 3;
        let iterative = fit_iterative(&xt, k, lambda2, None, i, 0.0).unwrap();
        assert_eq!(iterative.last().iteration, i);
        let spectral = assemble_projection(fit_spectral(&xt, k, lambda2, i).unwrap().last().unwrap());
        let a = align_signs(&iterative.last().a, &spectral);
        worst = worst.max(rel_frob(&a, &spectral));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < C1_REL_FROB && secs < C1_SECONDS,
        format!("{count} instances, max relative Frobenius error {worst:.2e} (< {C1_REL_FROB:e}), {secs:.2} s (< {C1_SECONDS} s)"),
    )
}

fn c02_one_step_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let count = 60;
    for t in 0..count {
        let n = rng.random_range(1..=8);
        let m = n + rng.random_range(0..=4);
        let k = rng.random_range(1..=n);
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let mut xt = DenseMatrix::zeros(n, m);
        for (i, s) in sigma.iter().enumerate() {
            xt[(i, i)] = *s;
        }
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..3.0)).collect();
        let mut a = DenseMatrix::zeros(n, k);
        for (j, b) in beta.iter().enumerate() {
            a[(j, j)] = *b;
        }
        let lambda2 = LAMBDAS[t % 3];
        let b = update_b(&xt, &a, lambda2).unwrap().b;
        let next = update_a(&xt, &b).unwrap();
        let got = svd_default(&next).unwrap().sigma;
        let mut want: Vec<f64> = (0..k).map(|j| beta_formula(sigma[j], beta[j], lambda2)).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    outcome(
        worst < C2_SIGMA,
        format!("{count} diagonal instances, max |σ(A') − formula| {worst:.2e} (< {C2_SIGMA:e})"),
    )
}

fn c03_stationarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_b, mut worst_a): (f64, f64) = (0.0, 0.0);
    let count = 40;
    for t in 0..count {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(2..=8);
        let k = rng.random_range(1..=n.min(m).min(3));
        let xt = DenseMatrix::from_row_major(n, m, (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let a = DenseMatrix::from_row_major(n, k, (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let lambda2 = LAMBDAS[t % 3];

        let b = update_b(&xt, &a, lambda2).unwrap().b;
        let value = objective_aux(&a, &b, &xt, lambda2).unwrap();
        let g = fd_gradient_norm(&b, |bb| objective_aux(&a, bb, &xt, lambda2).unwrap());
        worst_b = worst_b.max(g / value);

        let a2 = update_a(&xt, &b).unwrap();
        let value = objective_aux(&a2, &b, &xt, lambda2).unwrap();
        let g = fd_gradient_norm(&a2, |aa| objective_aux(aa, &b, &xt, lambda2).unwrap());
        worst_a = worst_a.max(g / value);
    }
    outcome(
        worst_b < C3_REL_GRAD && worst_a < C3_REL_GRAD,
        format!(
            "{count} instances, max relative gradient at the B update {worst_b:.2e}, at the A update {worst_a:.2e} (< {C3_REL_GRAD:e})"
        ),
    )
}

fn c04_matrix_level_iteration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_f, mut worst_p, mut worst_beta): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let count = 60;
    for t in 0..count {
        let n = rng.random_range(2..=8);
        let m = rng.random_range(2..=8);
        let r = n.min(m);
        let k = rng.random_range(1..=r.min(3));
        let sigma = distinct_sigma(r, 0.1, 1.5, 0.01, &mut rng);
        let xt = with_spectrum(n, m, &sigma, &mut rng);
        let lambda2 = LAMBDAS[t % 3];
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..3.0)).collect();
        let model = init_spectral(&xt, k, lambda2).unwrap().with_beta(beta.clone(), 0);
        let cfg = IterationConfig {
            lambda2,
            companion: if t % 2 == 0 { Companion::ColumnIndex } else { Companion::RightSingular },
            ..Default::default()
        };
        let out = run_iteration(&model, &cfg).unwrap();

        let rho = out.rho;
        let norm: f64 = beta.iter().map(|b| b * b).sum();
        let analytic: f64 = (0..k)
            .map(|j| {
                let y = rho * (1.0 + lambda2 / (sigma[j] * beta[j]).powi(2));
                beta[j] * beta[j] * y * y
            })
            .sum::<f64>()
            / norm;
        worst_f = worst_f.max(1.0 - out.fidelity);
        worst_p = worst_p.max((out.success_probability - analytic).abs());
        for j in 0..k {
            let want = beta_formula(sigma[j], beta[j], lambda2);
            worst_beta = worst_beta.max((out.model.beta[j] - want).abs() / want);
        }
    }
    outcome(
        worst_f <= C4_FIDELITY_DEFICIT && worst_p <= C4_PROBABILITY,
        format!(
            "{count} spectra, max fidelity deficit {worst_f:.2e} (<= {C4_FIDELITY_DEFICIT:e}), max |P − Σβ²y²/Σβ²| {worst_p:.2e} (<= {C4_PROBABILITY:e}), max relative β error {worst_beta:.2e}"
        ),
    )
}

fn c05_gate_level_end_to_end() -> Outcome {
    let start = Instant::now();
    let xt = dyadic_instance(7);
    let model = init_spectral(&xt, 2, 0.5).unwrap();
    let cfg = IterationConfig {
        b: 6,
        d: 6,
        p: 12,
        s: 1,
        lambda2: 0.5,
        mode: Mode::GateLevel,
        companion: Companion::ColumnIndex,
        ..Default::default()
    };
    let out = run_iteration(&model, &cfg).unwrap();
    let qa = ceil_log2(4) + ceil_log2(2);
    // `out.leakage` is the weight outside |0⟩ on every work register (C, B,
    // Z, L, TH, W) just before post-selection, a superset of C/B/L.
    let leak = out.leakage;
    let cbl = out.state.leakage(&[REG_C, REG_B, REG_L]).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        qa <= 4 && out.fidelity >= C5_FIDELITY && leak < C5_LEAKAGE && cbl < C5_LEAKAGE && secs < C5_SECONDS,
        format!(
            "Reg A {qa} qubits, fidelity {:.6} (>= {C5_FIDELITY}), C/B/L leakage {cbl:.2e}, all work registers {leak:.2e} (< {C5_LEAKAGE:e}), success probability {:.4}, {secs:.2} s (< {C5_SECONDS} s)",
            out.fidelity, out.success_probability
        ),
    )
}

fn c06_state_preparation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let targets: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            let v: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let mut means = Vec::new();
    let mut worst_16: f64 = 0.0;
    for p in 6..=16u32 {
        let mut total = 0.0;
        for t in &targets {
            let (state, _) = prepare_state(&compute_omega_table(t, p).unwrap()).unwrap();
            assert!(state.leakage(&["W"]).unwrap() < 1e-20);
            // |⟨t|ψ⟩|² over register A with W = 0, from raw amplitudes.
            let layout = state.layout().clone();
            let a = layout.qubits("A").unwrap();
            let overlap: f64 = state
                .entries()
                .iter()
                .map(|(i, amp)| {
                    assert!(amp.im.abs() < 1e-12);
                    t[layout.read(*i, &a) as usize] * amp.re
                })
                .sum();
            let deficit = 1.0 - overlap * overlap;
            total += deficit;
            if p == 16 {
                worst_16 = worst_16.max(deficit);
            }
        }
        means.push(total / targets.len() as f64);
    }
    let monotone = means.windows(2).all(|w| w[1] <= w[0] * (1.0 + C6_NOISE));
    let curve: Vec<String> = means.iter().map(|m| format!("{m:.1e}")).collect();
    outcome(
        worst_16 <= C6_DEFICIT && monotone,
        format!(
            "20 targets, worst deficit at p=16 {worst_16:.2e} (<= {C6_DEFICIT:e}); mean deficit p=6..16 [{}], non-increasing within {:.0}%: {monotone}",
            curve.join(", "),
            C6_NOISE * 100.0
        ),
    )
}

fn c07_newton_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let mut samples = 0;
    let mut worst_ratio: f64 = 0.0;
    for d in [8u32, 16] {
        for s in [2u32, 3, 4] {
            let a_fmt = FixedPointFormat::new(2, d);
            let z_fmt = FixedPointFormat::new(1, d);
            let bound = 2f64.powf(-(2f64.powi(s as i32))) + s as f64 * 2f64.powi(-(d as i32));
            for _ in 0..1000 {
                // Uniform over the representable a in (1, 2].
                let raw = rng.random_range((1u128 << d) + 1..=(1u128 << (d + 1)));
                let a = a_fmt.from_raw(raw).unwrap();
                let z = newton_reciprocal(a, s, z_fmt).unwrap();
                let err = (z.value() - 1.0 / a.value()).abs();
                samples += 1;
                worst_ratio = worst_ratio.max(err / bound);
                if err > bound {
                    violations += 1;
                }
            }
        }
    }

    // Exhaustive 6-bit sweep of the circuit oracle: two 3-bit factors as in
    // the rotation stage, then one 6-bit operand.
    let mut mismatches = 0;
    let mut checked = 0;
    for s in [2u32, 3, 4] {
        let z_fmt = FixedPointFormat::new(1, 12);
        let zw = z_fmt.total() as usize;
        for (widths, name) in [(vec![3usize, 3], "product"), (vec![6usize], "single")] {
            let mut regs: Vec<(String, usize)> = widths.iter().enumerate().map(|(i, w)| (format!("f{i}"), *w)).collect();
            regs.push(("z".into(), zw));
            let regs_ref: Vec<(&str, usize)> = regs.iter().map(|(n, w)| (n.as_str(), *w)).collect();
            let layout = RegisterLayout::new(&regs_ref).unwrap();
            let factors: Vec<Vec<usize>> = (0..widths.len()).map(|i| layout.qubits(&format!("f{i}")).unwrap()).collect();
            let zq = layout.qubits("z").unwrap();
            let oracle = newton_oracle(factors.clone(), zq.clone(), s, z_fmt).unwrap();
            for x in 0u64..64 {
                let vals: Vec<u64> = if name == "product" { vec![x >> 3, x & 7] } else { vec![x] };
                let mut idx = 0u128;
                for (f, v) in factors.iter().zip(&vals) {
                    idx = layout.write(idx, f, *v);
                }
                let mut st = StateVector::basis(layout.clone(), idx).unwrap();
                st.apply_permutation(&oracle).unwrap();
                let (out_idx, _) = st.entries()[0];
                let got = layout.read(out_idx, &zq) as u128;
                let a: u128 = vals.iter().map(|&v| v as u128).product();
                let scalar = newton_reciprocal_raw(a, 0, s, z_fmt);
                checked += 1;
                if got != scalar {
                    mismatches += 1;
                }
                if a >= 2 {
                    let fixed = newton_reciprocal(FixedPointFormat::new(6, 0).from_raw(a).unwrap(), s, z_fmt).unwrap();
                    if fixed.raw != got {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0 && mismatches == 0,
        format!(
            "{samples} samples, {violations} bound violations, worst error/bound {worst_ratio:.3}; oracle sweep {checked} inputs, {mismatches} mismatches"
        ),
    )
}

fn c08_arcsin_truncation() -> Outcome {
    // Oracle: arcsin(1/2) = π/6 and the first four series terms as exact
    // rationals, 1/2 + 1/48 + 3/1280 + 5/14336.
    let partial = 0.5 + 1.0 / 48.0 + 3.0 / 1280.0 + 5.0 / 14336.0;
    let want = PI / 6.0 - partial;

    let y_fmt = FixedPointFormat::new(0, 24);
    let th_fmt = FixedPointFormat::new(1, 40);
    let theta = arcsin_angle(y_fmt.floor(0.5).unwrap(), 4, th_fmt).unwrap();
    let got = PI / 6.0 - theta.value();
    let rel = (got - want).abs() / want;

    // The rotation cascade on d-bit angle registers.
    let mut worst_cascade: f64 = 0.0;
    let mut cascade_ok = true;
    for d in [6u32, 8, 10] {
        let y_fmt = FixedPointFormat::new(0, d);
        let th_fmt = FixedPointFormat::new(1, d - 1);
        let fine = FixedPointFormat::new(1, 40);
        let layout = RegisterLayout::new(&[(ANCILLA, 1), ("th", d as usize)]).unwrap();
        let th = layout.qubits("th").unwrap();
        let top = (0.9 * 2f64.powi(d as i32)) as u128;
        for y_raw in 0..=top {
            let y = y_fmt.from_raw(y_raw).unwrap();
            let coarse = arcsin_angle(y, 4, th_fmt).unwrap();
            let exact = arcsin_angle(y, 4, fine).unwrap().value();
            let st = StateVector::basis(layout.clone(), coarse.raw).unwrap();
            let st = controlled_ry_cascade(st, &th, th_fmt.int_bits, 0).unwrap();
            let amp = st.amplitude((1u128 << d) | coarse.raw).norm();
            let err = (amp - exact.sin()).abs();
            worst_cascade = worst_cascade.max(err / 2f64.powi(-(d as i32) + 2));
            if err > 2f64.powi(-(d as i32) + 2) {
                cascade_ok = false;
            }
        }
    }
    outcome(
        rel < C8_REL && cascade_ok,
        format!(
            "4-term error at y=0.5 {got:.6e}, oracle {want:.6e}, relative difference {rel:.1e} (< {C8_REL:e}); cascade worst error/2^(-d+2) {worst_cascade:.3} over d in {{6,8,10}}"
        ),
    )
}

fn c09_partial_trace() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let count = 60;
    for t in 0..count {
        let n = rng.random_range(2..=8);
        let m = rng.random_range(2..=8);
        let r = n.min(m);
        let k = rng.random_range(1..=r.min(4));
        let sigma = distinct_sigma(r, 0.1, 2.0, 0.01, &mut rng);
        let xt = with_spectrum(n, m, &sigma, &mut rng);
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
        let model = init_spectral(&xt, k, 0.1).unwrap().with_beta(beta.clone(), 0);
        let companion = if t % 2 == 0 { Companion::ColumnIndex } else { Companion::RightSingular };
        let state = load_model_state(&model, companion).unwrap();
        let rho = extract_density(&state, n).unwrap();
        let norm: f64 = beta.iter().map(|b| b * b).sum();
        for r in 0..n {
            for c in 0..n {
                let want: f64 = (0..k)
                    .map(|j| beta[j] * beta[j] * model.svd.u[(r, j)] * model.svd.u[(c, j)])
                    .sum::<f64>()
                    / norm;
                let got = rho.get(r, c);
                worst = worst.max((got.re - want).abs()).max(got.im.abs());
            }
        }
    }
    outcome(
        worst < C9_DENSITY,
        format!("{count} models, max |ρ − Σβ²uuᵀ/Σβ²| {worst:.2e} (< {C9_DENSITY:e})"),
    )
}

fn c10_resource_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let k = 2;
    let cfg = IterationConfig {
        lambda2: 0.1,
        mode: Mode::GateLevel,
        companion: Companion::ColumnIndex,
        ..Default::default()
    };
    let mut ok = true;
    let mut measured_prep = Vec::new();
    let mut notes = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let sigma = distinct_sigma(4, 0.3, 1.0, 0.05, &mut rng);
        let xt = with_spectrum(n, 4, &sigma, &mut rng);
        let model = init_spectral(&xt, k, cfg.lambda2).unwrap();
        let out = run_iteration(&model, &cfg).unwrap();
        let report = resource_report(&cfg, n, k).with_measured(measure_trace(&out.trace, &cfg, out.state.num_qubits()));
        let measured = report.measured.as_ref().unwrap();
        let want = cfg.p as usize + ceil_log2(n * k);
        if measured.state_prep_qubits != want {
            ok = false;
        }
        let mism = report.mismatches();
        if !mism.is_empty() {
            ok = false;
            notes.extend(mism);
        }
        measured_prep.push(measured.state_prep_qubits);
    }
    let steps_ok = measured_prep.windows(2).all(|w| w[1] == w[0] + 1);
    outcome(
        ok && steps_ok,
        format!(
            "state-prep qubits for n=4,8,16,32 (k=2, p={}): {measured_prep:?}, +1 per doubling: {steps_ok}; per-stage tally mismatches: {}",
            cfg.p,
            if notes.is_empty() { "none".to_string() } else { notes.join("; ") }
        ),
    )
}

fn c11_divergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut step_err: f64 = 0.0;
    let mut all_increase = true;
    let mut converged = 0;
    let mut worst_final: f64 = 0.0;
    let count = 30;
    for t in 0..count {
        let k = 3;
        let sigma = distinct_sigma(k, 0.1, 1.0, 0.02, &mut rng);
        let xt = with_spectrum(k, k + 1, &sigma, &mut rng);
        let lambda2 = LAMBDAS[t % 3];
        let mut model = init_spectral(&xt, k, lambda2).unwrap();
        let mut reached = false;
        let mut last_change = f64::INFINITY;
        for _ in 0..C11_ITERATIONS {
            let next = beta_step(&model).unwrap();
            for j in 0..k {
                let s = model.sigma()[j];
                let want = lambda2 / (s * s * model.beta[j]);
                let diff = next.beta[j] - model.beta[j];
                if !(diff > 0.0) {
                    all_increase = false;
                }
                step_err = step_err.max((diff - want).abs() / want);
            }
            let unit = |b: &[f64]| {
                let n = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                b.iter().map(|x| x / n).collect::<Vec<_>>()
            };
            let (u0, u1) = (unit(&model.beta), unit(&next.beta));
            last_change = u0.iter().zip(&u1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if last_change < C11_DIRECTION {
                reached = true;
            }
            model = next;
        }
        if reached {
            converged += 1;
        }
        worst_final = worst_final.max(last_change);
    }
    let divergence = all_increase && step_err < 1e-9;
    outcome(
        divergence && converged == count,
        format!(
            "raw β: every step positive and equal to λ2/(σ²β) (max relative deviation {step_err:.1e}): {divergence}; \
             normalized direction below {C11_DIRECTION:e} change within {C11_ITERATIONS} iterations on {converged}/{count} spectra, \
             worst change at iteration {C11_ITERATIONS} {worst_final:.2e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form equivalence", c01_closed_form_equivalence),
        ("one-step formula", c02_one_step_formula),
        ("stationarity", c03_stationarity),
        ("matrix-level quantum iteration", c04_matrix_level_iteration),
        ("gate-level end to end", c05_gate_level_end_to_end),
        ("state preparation", c06_state_preparation),
        ("Newton bound", c07_newton_bound),
        ("arcsin truncation", c08_arcsin_truncation),
        ("partial trace", c09_partial_trace),
        ("resource scaling", c10_resource_scaling),
        ("divergence documentation", c11_divergence),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    // Panics are reported on the criterion's FAIL line.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {id:>2} {name}: {} [{:.2} s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
