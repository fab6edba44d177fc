//! The quantum AOP iteration assembled from simulator primitives: amplitude
//! loading, phase estimation, reversible fixed-point arithmetic, a
//! controlled-rotation cascade, uncomputation and post-selection.

mod config;
mod exec;
mod fixed;
mod iteration;
mod phase;
mod resources;
mod stateprep;

pub use config::{IterationConfig, Mode, RhoPolicy, T0Policy};
pub use fixed::{
    arcsin_angle, arcsin_angle_raw, arcsin_coefficient, compute_y, compute_y_raw, newton_error_bound,
    newton_reciprocal, newton_reciprocal_raw, Fixed, FixedPointFormat, YCoefficients, ARCSIN_Y_MAX,
    MAX_ARCSIN_TERMS,
};
pub use iteration::{
    arcsin_oracle, branch_amplitudes, ceil_log2, choose_rho, controlled_ry_cascade, extract_density, gate_level_registers,
    kappa_eff, load_model_state, newton_oracle, run_iteration, run_qaop, ry_cascade_gates, stage, y_oracle, IterationOutput,
    IterationSummary, QaopRun, ANCILLA, REG_B, REG_C, REG_C_IDX, REG_L, REG_THETA, REG_U, REG_W, REG_Z,
    WORK_REGISTERS,
};
pub use phase::{check_wraparound, pad_operator, phase_estimate, phase_estimation_gates, register_value};
pub use resources::{measure_trace, phase_estimation_gate_count, resource_report, MeasuredResources, ResourceReport, StageTally};
pub use stateprep::{compute_omega_table, prepare_state, register_amplitudes, OmegaTable};
