//! One rescaling step `β ← β + λ2 / (σ² β)` carried out on a quantum state.
//!
//! The input `Σ_j β_j |u_j⟩|c_j⟩` (normalized) is entangled with the
//! eigenvalues `σ_j²` and `β_j²/Σβ²` by two phase estimations; an ancilla is
//! rotated so that its |1⟩ amplitude is `y_j = ρ(1 + λ2/(σ_j β_j)²)`; the
//! eigenvalue registers are uncomputed and the ancilla is post-selected on
//! |1⟩, leaving `Σ_j β_j y_j |u_j⟩|c_j⟩ ∝ Σ_j β'_j |u_j⟩|c_j⟩`.
//!
//! `Σβ²` is needed to turn the second phase estimation's output back into
//! `β_j²`. It is carried classically: after post-selection with probability
//! `P`, the new trace is `P · Σβ² / ρ²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{IterationConfig, Mode, RhoPolicy};
use super::exec::Exec;
use super::fixed::{arcsin_angle_raw, compute_y_raw, newton_reciprocal_raw, FixedPointFormat, YCoefficients};
use super::phase::{adjoint, apply_phase_estimation, phase_estimation_gates};
use super::stateprep::{apply_state_prep, compute_omega_table};
use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;
use crate::qsim::{BasisPermutation, DensityMatrix, Gate, GateKind, RegisterLayout, StateVector, Trace};
use crate::spectral::{beta_step, density_formula, init_spectral, target_state_with, Companion, SpectralModel};

pub const ANCILLA: &str = "a";
pub const REG_U: &str = "A_u";
pub const REG_C_IDX: &str = "A_v";
pub const REG_C: &str = "C";
pub const REG_B: &str = "B";
pub const REG_Z: &str = "Z";
pub const REG_L: &str = "L";
pub const REG_THETA: &str = "TH";
pub const REG_W: &str = "W";

/// Work registers that must return to |0⟩ before post-selection.
pub const WORK_REGISTERS: [&str; 6] = [REG_C, REG_B, REG_Z, REG_L, REG_THETA, REG_W];

pub mod stage {
    pub const STATE_PREP: &str = super::super::stateprep::STAGE;
    pub const STATE_PREP_SIGN: &str = super::super::stateprep::SIGN_STAGE;
    pub const PE_C: &str = "pe_c";
    pub const PE_B: &str = "pe_b";
    pub const ROTATION: &str = "rotation";
    pub const ROTATION_UNCOMPUTE: &str = "rotation_uncompute";
    pub const PE_B_UNCOMPUTE: &str = "pe_b_uncompute";
    pub const PE_C_UNCOMPUTE: &str = "pe_c_uncompute";
    pub const LOAD: &str = "load";
    pub const EXACT_ROTATION: &str = "rotation_exact";

    pub const GATE_LEVEL: [&str; 8] = [
        STATE_PREP,
        STATE_PREP_SIGN,
        PE_C,
        PE_B,
        ROTATION,
        ROTATION_UNCOMPUTE,
        PE_B_UNCOMPUTE,
        PE_C_UNCOMPUTE,
    ];
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Outcome of [`run_iteration`].
#[derive(Clone, Debug)]
pub struct IterationOutput {
    pub model: SpectralModel,
    /// Post-selected state on the full register layout.
    pub state: StateVector,
    pub success_probability: f64,
    /// `Σ_j β̂_j² y_j²` from the classical branch amplitudes.
    pub analytic_success_probability: f64,
    /// Against `target_state(beta_step(model_in))`.
    pub fidelity: f64,
    /// Work-register weight just before post-selection.
    pub leakage: f64,
    pub rho: f64,
    /// `y_j = ρ(1 + λ2/(σ_j β_j)²)`.
    pub branch_amplitudes: Vec<f64>,
    /// `Σ_j β_j²` after the step, carried from the success probability.
    pub trace_norm: f64,
    pub trace: Trace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub success_probability: f64,
    pub analytic_success_probability: f64,
    pub fidelity: f64,
    pub leakage: f64,
    pub rho: f64,
    pub branch_amplitudes: Vec<f64>,
    pub beta: Vec<f64>,
}

impl IterationOutput {
    pub fn summary(&self) -> IterationSummary {
        IterationSummary {
            iteration: self.model.iteration,
            success_probability: self.success_probability,
            analytic_success_probability: self.analytic_success_probability,
            fidelity: self.fidelity,
            leakage: self.leakage,
            rho: self.rho,
            branch_amplitudes: self.branch_amplitudes.clone(),
            beta: self.model.beta.clone(),
        }
    }
}

struct Dims {
    n: usize,
    c: usize,
    qu: usize,
    qv: usize,
}

fn dims(model: &SpectralModel, companion: Companion) -> Dims {
    let n = model.n();
    let c = match companion {
        Companion::RightSingular => model.m(),
        Companion::ColumnIndex => model.k,
    };
    Dims {
        n,
        c,
        qu: ceil_log2(n),
        qv: ceil_log2(c),
    }
}

/// Re-indexes an `n·c` vector (`i·c + l`) into registers `A_u ⊗ A_v`.
fn embed(v: &[f64], d: &Dims) -> Vec<f64> {
    let mut out = vec![0.0; 1usize << (d.qu + d.qv)];
    for i in 0..d.n {
        for l in 0..d.c {
            out[(i << d.qv) | l] = v[i * d.c + l];
        }
    }
    out
}

/// `max_j 1/(σ_j β_j)²`.
pub fn kappa_eff(model: &SpectralModel) -> f64 {
    model
        .sigma()
        .iter()
        .zip(&model.beta)
        .map(|(s, b)| 1.0 / (s * b).powi(2))
        .fold(0.0, f64::max)
}

pub fn choose_rho(config: &IterationConfig, model: &SpectralModel) -> f64 {
    match config.rho {
        RhoPolicy::Fixed(r) => r,
        RhoPolicy::Auto => config.y_cap() / (1.0 + config.lambda2 * kappa_eff(model)),
    }
}

/// `y_j = ρ(1 + λ2/(σ_j β_j)²)`.
pub fn branch_amplitudes(model: &SpectralModel, rho: f64, lambda2: f64) -> Vec<f64> {
    model
        .sigma()
        .iter()
        .zip(&model.beta)
        .map(|(s, b)| rho * (1.0 + lambda2 / (s * b).powi(2)))
        .collect()
}

/// `X̃X̃ᵀ` rebuilt from its singular triplets.
fn data_gram(model: &SpectralModel) -> DenseMatrix {
    let svd = &model.svd;
    let n = model.n();
    let mut g = DenseMatrix::zeros(n, n);
    for (j, s) in svd.sigma.iter().enumerate() {
        let u = svd.u_column(j);
        for r in 0..n {
            for c in 0..n {
                g[(r, c)] += s * s * u[r] * u[c];
            }
        }
    }
    g
}

fn check_model(model: &SpectralModel, config: &IterationConfig) -> Result<()> {
    config.validate()?;
    if model.lambda2 != config.lambda2 {
        return Err(Error::Configuration(format!(
            "model was built with lambda2 = {} but the circuit uses {}",
            model.lambda2, config.lambda2
        )));
    }
    if model.beta.iter().any(|b| !(*b > 0.0)) || model.sigma().iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidState("circuit iteration needs positive sigma and beta".into()));
    }
    Ok(())
}

/// One quantum AOP step on `model`.
pub fn run_iteration(model: &SpectralModel, config: &IterationConfig) -> Result<IterationOutput> {
    check_model(model, config)?;
    match config.mode {
        Mode::MatrixLevel => run_matrix_level(model, config),
        Mode::GateLevel => run_gate_level(model, config),
    }
}

/// Post-selection and the bookkeeping shared by both modes.
fn finish(
    model: &SpectralModel,
    config: &IterationConfig,
    exec: Exec,
    d: &Dims,
    rho: f64,
    leakage: f64,
) -> Result<IterationOutput> {
    let a = exec.state.layout().qubits(ANCILLA)?[0];
    let (post, p) = exec.state.postselect(a, 1)?;

    let ys = branch_amplitudes(model, rho, config.lambda2);
    let norm = model.beta_norm_sq();
    let analytic: f64 = model.beta.iter().zip(&ys).map(|(b, y)| b * b * y * y).sum::<f64>() / norm;

    let expected = beta_step(model)?;
    let target = embed(&target_state_with(&expected, config.companion), d);
    let fidelity = register_fidelity(&post, &target)?;

    let trace_norm = norm * p / (rho * rho);
    let rho_u = extract_density(&post, d.n)?.to_real(1e-9)?;
    let beta = (0..model.k)
        .map(|j| {
            let u = model.svd.u_column(j);
            let w: f64 = (0..d.n)
                .map(|r| (0..d.n).map(|c| u[r] * rho_u[(r, c)] * u[c]).sum::<f64>())
                .sum();
            (w.max(0.0) * trace_norm).sqrt()
        })
        .collect();

    Ok(IterationOutput {
        model: model.with_beta(beta, model.iteration + 1),
        state: post,
        success_probability: p,
        analytic_success_probability: analytic,
        fidelity,
        leakage,
        rho,
        branch_amplitudes: ys,
        trace_norm,
        trace: exec.trace,
    })
}

/// `|⟨target ⊗ 1_a ⊗ 0_work | ψ⟩|²` with `target` over `A_u ⊗ A_v`.
fn register_fidelity(state: &StateVector, target: &[f64]) -> Result<f64> {
    let layout = state.layout();
    let u = layout.qubits(REG_U)?;
    let v = layout.qubits(REG_C_IDX)?;
    let a = layout.qubits(ANCILLA)?;
    let mut work = 0u128;
    for r in layout.registers() {
        if r.name != REG_U && r.name != REG_C_IDX && r.name != ANCILLA {
            work |= layout.mask(&r.qubits());
        }
    }
    let amask = layout.mask(&a);
    let tn: f64 = target.iter().map(|t| t * t).sum();
    let overlap: Complex64 = state
        .entries()
        .into_iter()
        .filter(|(i, _)| i & work == 0 && i & amask == amask)
        .map(|(i, amp)| {
            let idx = ((layout.read(i, &u) << v.len()) | layout.read(i, &v)) as usize;
            amp * target[idx]
        })
        .sum();
    Ok(overlap.norm_sqr() / (tn * state.norm_sq()))
}

fn run_matrix_level(model: &SpectralModel, config: &IterationConfig) -> Result<IterationOutput> {
    let d = dims(model, config.companion);
    if d.qu + 1 > 12 {
        return Err(Error::ResourceRefusal {
            required: d.qu + 1,
            budget: 12,
        });
    }
    let layout = RegisterLayout::new(&[(ANCILLA, 1), (REG_U, d.qu), (REG_C_IDX, d.qv)])?;
    if layout.num_qubits() > config.qubit_budget {
        return Err(Error::ResourceRefusal {
            required: layout.num_qubits(),
            budget: config.qubit_budget,
        });
    }
    let amps = embed(&target_state_with(model, config.companion), &d);
    let state = StateVector::from_entries(
        layout.clone(),
        amps.iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(i, &a)| (i as u128, Complex64::new(a, 0.0))),
    )?;
    let mut exec = Exec::new(state);
    exec.trace.entries.push(crate::qsim::TraceEntry {
        stage: stage::LOAD.into(),
        kind: "LOAD".into(),
        targets: layout.qubits(REG_U)?.into_iter().chain(layout.qubits(REG_C_IDX)?).collect(),
        controls: vec![],
        params: vec![],
    });

    let rho = choose_rho(config, model);
    let ys = branch_amplitudes(model, rho, config.lambda2);
    if let Some(y) = ys.iter().find(|&&y| y > 1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "branch amplitude {y} exceeds 1; lower rho"
        )));
    }
    let w = exact_rotation(model, &ys, d.qu)?;
    let mut targets = layout.qubits(ANCILLA)?;
    targets.extend(layout.qubits(REG_U)?);
    exec.gate(stage::EXACT_ROTATION, Gate::unitary(w, targets, vec![])?)?;
    finish(model, config, exec, &d, rho, 0.0)
}

/// `Σ_j Ry(2 asin y_j) ⊗ |u_j⟩⟨u_j| + I ⊗ (I − Σ_j |u_j⟩⟨u_j|)` on `a ⊗ A_u`.
fn exact_rotation(model: &SpectralModel, ys: &[f64], qu: usize) -> Result<Vec<Complex64>> {
    let du = 1usize << qu;
    let dim = 2 * du;
    let n = model.n();
    let us: Vec<Vec<f64>> = (0..model.k)
        .map(|j| {
            let mut u = model.svd.u_column(j);
            u.resize(du, 0.0);
            u
        })
        .collect();
    let mut w = vec![Complex64::new(0.0, 0.0); dim * dim];
    for a in 0..2 {
        for r in 0..du {
            w[(a * du + r) * dim + a * du + r] += 1.0;
        }
    }
    for (j, u) in us.iter().enumerate() {
        let theta = ys[j].min(1.0).asin();
        let (s, c) = theta.sin_cos();
        let ry = [[c, -s], [s, c]];
        for a2 in 0..2 {
            for a1 in 0..2 {
                let coef = ry[a2][a1] - if a1 == a2 { 1.0 } else { 0.0 };
                for r in 0..n {
                    for col in 0..n {
                        w[(a2 * du + r) * dim + a1 * du + col] += coef * u[r] * u[col];
                    }
                }
            }
        }
    }
    Ok(w)
}

/// Register widths of the gate-level layout, in order.
pub fn gate_level_registers(config: &IterationConfig, qu: usize, qv: usize) -> Vec<(&'static str, usize)> {
    let b = config.b as usize;
    let d = config.d as usize;
    vec![
        (ANCILLA, 1),
        (REG_C, b),
        (REG_B, b),
        (REG_Z, config.z_format().total() as usize),
        (REG_L, d),
        (REG_THETA, d),
        (REG_W, config.p as usize),
        (REG_U, qu),
        (REG_C_IDX, qv),
    ]
}

fn run_gate_level(model: &SpectralModel, config: &IterationConfig) -> Result<IterationOutput> {
    let d = dims(model, config.companion);
    let regs = gate_level_registers(config, d.qu, d.qv);
    let required: usize = regs.iter().map(|r| r.1).sum();
    if required > config.qubit_budget.min(crate::qsim::MAX_QUBITS) {
        return Err(Error::ResourceRefusal {
            required,
            budget: config.qubit_budget.min(crate::qsim::MAX_QUBITS),
        });
    }
    let (a_fmt, z_fmt, y_fmt, th_fmt) = (
        config.product_format(),
        config.z_format(),
        config.y_format(),
        config.theta_format(),
    );
    if a_fmt.total() + 2 * z_fmt.total() + 1 > 127 {
        return Err(Error::Configuration(format!(
            "b = {} and d = {} overflow the Newton arithmetic",
            config.b, config.d
        )));
    }
    let layout = RegisterLayout::new(&regs)?;
    let q = |name: &str| layout.qubits(name);
    let (qa, qc, qb, qz, ql, qth, qw, qu) =
        (q(ANCILLA)?, q(REG_C)?, q(REG_B)?, q(REG_Z)?, q(REG_L)?, q(REG_THETA)?, q(REG_W)?, q(REG_U)?);
    let reg_a: Vec<usize> = qu.iter().copied().chain(q(REG_C_IDX)?).collect();

    let mut exec = Exec::new(StateVector::zero(layout.clone()));

    let amps = embed(&target_state_with(model, config.companion), &d);
    let table = compute_omega_table(&amps, config.p)?;
    apply_state_prep(&mut exec, &table, &reg_a, &qw)?;

    // Both operators are scaled so their largest eigenvalue is 1.
    let sigma1 = model.svd.sigma[0];
    let g_c = 1.0 / (sigma1 * sigma1);
    let op_c = data_gram(model).scale(g_c);
    let norm = model.beta_norm_sq();
    let bmax = model.beta.iter().fold(0.0f64, |m, b| m.max(b * b));
    let g_b = norm / bmax;
    let op_b = density_formula(model).scale(g_b);

    let t0 = config.t0();
    let pe_c = phase_estimation_gates(&op_c, t0, &qu, &qc)?;
    let pe_b = phase_estimation_gates(&op_b, t0, &qu, &qb)?;
    apply_phase_estimation(&mut exec, stage::PE_C, &pe_c)?;
    apply_phase_estimation(&mut exec, stage::PE_B, &pe_b)?;

    // Register values c_σ, c_β decode as λ = c·δ; then
    // λ2/(σβ)² = λ2 g_c g_b / (δ² Σβ²) · 1/(c_σ c_β).
    let delta = 2.0 * PI / (t0 * 2f64.powi(config.b as i32));
    let lambda_reg = config.lambda2 * g_c * g_b / (delta * delta * norm);
    let rho = choose_rho(config, model);
    let coeffs = YCoefficients::new(rho, lambda_reg)?;

    let newton = newton_oracle(vec![qc.clone(), qb.clone()], qz.clone(), config.s_prime, z_fmt)?;
    let y_oracle = y_oracle(qz.clone(), ql.clone(), z_fmt, coeffs, y_fmt)?;
    let arcsin = arcsin_oracle(ql.clone(), qth.clone(), y_fmt, config.n_terms, th_fmt)?;

    exec.oracle(stage::ROTATION, &newton)?;
    exec.oracle(stage::ROTATION, &y_oracle)?;
    exec.oracle(stage::ROTATION, &arcsin)?;
    exec.gates(stage::ROTATION, ry_cascade_gates(&qth, th_fmt.int_bits, qa[0])?)?;
    exec.oracle(stage::ROTATION_UNCOMPUTE, &arcsin)?;
    exec.oracle(stage::ROTATION_UNCOMPUTE, &y_oracle)?;
    exec.oracle(stage::ROTATION_UNCOMPUTE, &newton)?;

    apply_phase_estimation(&mut exec, stage::PE_B_UNCOMPUTE, &adjoint(&pe_b))?;
    apply_phase_estimation(&mut exec, stage::PE_C_UNCOMPUTE, &adjoint(&pe_c))?;

    let leakage = exec.state.leakage(&WORK_REGISTERS)?;
    finish(model, config, exec, &d, rho, leakage)
}

/// `|f_1⟩…|f_r⟩|z⟩ → |f_1⟩…|f_r⟩|z ⊕ 1/(f_1⋯f_r)⟩`: the factors are read as
/// integers and the reciprocal is written in `z_fmt` after `s_prime` Newton
/// steps.
pub fn newton_oracle(
    factors: Vec<Vec<usize>>,
    out: Vec<usize>,
    s_prime: u32,
    z_fmt: FixedPointFormat,
) -> Result<BasisPermutation> {
    BasisPermutation::xor_into("newton", factors, out, move |v| {
        let a = v.iter().fold(1u128, |acc, &x| acc * x as u128);
        newton_reciprocal_raw(a, 0, s_prime, z_fmt) as u64
    })
}

/// `|z⟩|l⟩ → |z⟩|l ⊕ y(z)⟩`; values past the top of `y_fmt` saturate.
pub fn y_oracle(
    z: Vec<usize>,
    out: Vec<usize>,
    z_fmt: FixedPointFormat,
    coeffs: YCoefficients,
    y_fmt: FixedPointFormat,
) -> Result<BasisPermutation> {
    let z_frac = z_fmt.frac_bits;
    BasisPermutation::xor_into("y", vec![z], out, move |v| {
        compute_y_raw(v[0] as u128, z_frac, coeffs, y_fmt).unwrap_or(y_fmt.max_raw()) as u64
    })
}

/// `|y⟩|θ⟩ → |y⟩|θ ⊕ arcsin(y)⟩` through the truncated series.
pub fn arcsin_oracle(
    y: Vec<usize>,
    out: Vec<usize>,
    y_fmt: FixedPointFormat,
    n_terms: usize,
    theta_fmt: FixedPointFormat,
) -> Result<BasisPermutation> {
    let y_frac = y_fmt.frac_bits;
    BasisPermutation::xor_into("arcsin", vec![y], out, move |v| {
        arcsin_angle_raw(v[0] as u128, y_frac, n_terms, theta_fmt) as u64
    })
}

/// Bit `l` of the angle register (most significant first, `int_bits`
/// integer bits) drives `Ry(2·2^{int_bits−1−l})` on the ancilla, so the
/// ancilla ends in `cos θ̂|0⟩ + sin θ̂|1⟩`.
pub fn ry_cascade_gates(theta_qubits: &[usize], int_bits: u32, ancilla: usize) -> Result<Vec<Gate>> {
    theta_qubits
        .iter()
        .enumerate()
        .map(|(l, &q)| {
            let weight = 2f64.powi(int_bits as i32 - 1 - l as i32);
            Gate::controlled(GateKind::Ry(2.0 * weight), ancilla, vec![q])
        })
        .collect()
}

/// Applies [`ry_cascade_gates`].
pub fn controlled_ry_cascade(mut state: StateVector, theta_qubits: &[usize], int_bits: u32, ancilla: usize) -> Result<StateVector> {
    state.apply_all(&ry_cascade_gates(theta_qubits, int_bits, ancilla)?)?;
    Ok(state)
}

/// Reduced density matrix of `A_u`, cut to its first `n` basis states.
pub fn extract_density(state: &StateVector, n: usize) -> Result<DensityMatrix> {
    let full = state.partial_trace(REG_U)?;
    let dim = full.dim();
    if n > dim {
        return Err(Error::InvalidInput(format!("n = {n} exceeds the {dim}-dimensional register")));
    }
    let outside: f64 = (n..dim).map(|i| full.get(i, i).re).sum();
    if outside > 1e-10 {
        return Err(Error::InvalidState(format!(
            "{outside:e} of the register lies outside the first {n} basis states"
        )));
    }
    let data = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| full.get(r, c))
        .collect();
    DensityMatrix::new(n, data)
}

/// `target_state_with(model)` loaded on an `[A_u, A_v]` layout.
pub fn load_model_state(model: &SpectralModel, companion: Companion) -> Result<StateVector> {
    let d = dims(model, companion);
    let layout = RegisterLayout::new(&[(REG_U, d.qu), (REG_C_IDX, d.qv)])?;
    let amps = embed(&target_state_with(model, companion), &d);
    StateVector::from_entries(
        layout,
        amps.iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(i, &a)| (i as u128, Complex64::new(a, 0.0))),
    )
}

/// A chained run of [`run_iteration`].
#[derive(Clone, Debug)]
pub struct QaopRun {
    pub trajectory: Vec<SpectralModel>,
    pub iterations: Vec<IterationSummary>,
    pub cumulative_success_probability: f64,
    /// Trace of the last iteration.
    pub last_trace: Option<Trace>,
    /// Post-selected state of the last iteration.
    pub last_state: Option<StateVector>,
}

impl QaopRun {
    pub fn final_model(&self) -> &SpectralModel {
        self.trajectory.last().expect("trajectory holds the initial model")
    }
}

/// `config.s` iterations starting from the PCA initialization of `xt`.
pub fn run_qaop(xt: &DenseMatrix, k: usize, config: &IterationConfig) -> Result<QaopRun> {
    config.validate()?;
    let mut model = init_spectral(xt, k, config.lambda2)?;
    let mut run = QaopRun {
        trajectory: vec![model.clone()],
        iterations: Vec::with_capacity(config.s),
        cumulative_success_probability: 1.0,
        last_trace: None,
        last_state: None,
    };
    for _ in 0..config.s {
        let out = run_iteration(&model, config)?;
        run.cumulative_success_probability *= out.success_probability;
        run.iterations.push(out.summary());
        model = out.model;
        run.trajectory.push(model.clone());
        run.last_trace = Some(out.trace);
        run.last_state = Some(out.state);
    }
    Ok(run)
}
