use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{InputSource, RunConfig, RunMode};
use super::ingest::{ingest_csv, synthetic_data};
use crate::circuit::{measure_trace, resource_report, run_qaop, IterationSummary, ResourceReport};
use crate::classical::{fit_iterative, objective, ConditioningWarning};
use crate::error::Error;
use crate::graphprep::{knn_weights, laplacian, whiten};
use crate::numkit::{projector_distance, relative_error, DenseMatrix};
use crate::qsim::{StateVector, Trace};
use crate::spectral::{assemble_projection, fit_spectral, SpectralModel};

pub const REPORT_SCHEMA: &str = "qaop-report/1";
/// Largest pairwise projector distance for which `compare` reports agreement.
pub const COMPARE_TOLERANCE: f64 = 1e-8;

/// An error tagged with the pipeline stage that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub type StageResult<T> = std::result::Result<T, StageError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    /// Features.
    pub n: usize,
    /// Samples.
    pub m: usize,
    pub k: usize,
    /// Edges of the affinity graph; absent when `lambda1 = 0`.
    pub graph_edges: Option<usize>,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSection {
    /// Column norms of `A` per iteration, starting from the PCA basis.
    pub beta_trajectory: Vec<Vec<f64>>,
    pub objective: Vec<f64>,
    pub converged: bool,
    pub warnings: Vec<ConditioningWarning>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSection {
    pub beta_trajectory: Vec<Vec<f64>>,
    pub objective: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumSection {
    /// `matrix` or `gate`.
    pub level: String,
    pub beta_trajectory: Vec<Vec<f64>>,
    pub objective: Vec<f64>,
    pub iterations: Vec<IterationSummary>,
    pub cumulative_success_probability: f64,
    pub resources: ResourceReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    pub classical_spectral: f64,
    pub classical_quantum: f64,
    pub spectral_quantum: f64,
}

impl Pairwise {
    fn max(&self) -> f64 {
        self.classical_spectral.max(self.classical_quantum).max(self.spectral_quantum)
    }

    fn min(&self) -> f64 {
        self.classical_spectral.min(self.classical_quantum).min(self.spectral_quantum)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Frobenius distance of `AAᵀ/tr(AAᵀ)` between the final projections.
    pub projector_distance: Pairwise,
    pub relative_error: Pairwise,
    /// Overlap of the normalized `vec(A)` states.
    pub state_fidelity: Pairwise,
    /// Post-selected circuit state against the spectral target, per iteration.
    pub circuit_fidelity: Vec<f64>,
    pub max_projector_distance: f64,
    pub tolerance: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: RunMode,
    pub config: RunConfig,
    pub data: DataSummary,
    pub classical: Option<ClassicalSection>,
    pub spectral: Option<SpectralSection>,
    pub quantum: Option<QuantumSection>,
    pub comparison: Option<Comparison>,
    pub timings: Vec<StageTiming>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// The report without wall-clock data, for reproducibility checks.
    pub fn without_timings(&self) -> Report {
        Report {
            timings: vec![],
            ..self.clone()
        }
    }
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub report: Report,
    /// Final projection of the selected mode (the spectral one under `compare`).
    pub projection: DenseMatrix,
    /// Gate trace of the last quantum iteration.
    pub trace: Option<Trace>,
    /// Post-selected state of the last quantum iteration.
    pub state: Option<StateVector>,
}

struct Clock {
    timings: Vec<StageTiming>,
}

impl Clock {
    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> crate::Result<T>) -> StageResult<T> {
        let start = Instant::now();
        let out = f().map_err(|error| StageError {
            stage: stage.to_string(),
            error,
        });
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Loads the data named by `config.input`.
pub fn load_input(config: &RunConfig) -> crate::Result<DenseMatrix> {
    match &config.input {
        None => Err(Error::Configuration("no input given".into())),
        Some(InputSource::Csv(path)) => ingest_csv(path),
        Some(InputSource::Random { n, m }) => {
            if *n == 0 || *m == 0 {
                return Err(Error::Configuration("random input needs n, m > 0".into()));
            }
            Ok(synthetic_data(*n, *m, config.seed))
        }
    }
}

/// Runs `config.mode` on the data named by `config.input`.
pub fn run_pipeline(config: &RunConfig) -> StageResult<PipelineOutput> {
    let mut clock = Clock { timings: vec![] };
    let x = clock.run("ingest", || load_input(config))?;
    run_with_clock(&x, config, clock)
}

/// Runs `config.mode` on `x` (features by samples); `config.input` is ignored.
pub fn run_pipeline_on(x: &DenseMatrix, config: &RunConfig) -> StageResult<PipelineOutput> {
    run_with_clock(x, config, Clock { timings: vec![] })
}

fn vec_fidelity(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let dot: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum();
    let na: f64 = a.as_slice().iter().map(|x| x * x).sum();
    let nb: f64 = b.as_slice().iter().map(|x| x * x).sum();
    dot * dot / (na * nb)
}

fn objectives(
    projections: impl Iterator<Item = DenseMatrix>,
    x: &DenseMatrix,
    l: &DenseMatrix,
    config: &RunConfig,
) -> crate::Result<Vec<f64>> {
    projections
        .map(|a| objective(&a, x, l, config.lambda1, config.lambda2))
        .collect()
}

fn betas(models: &[SpectralModel]) -> Vec<Vec<f64>> {
    models.iter().map(|m| m.beta.clone()).collect()
}

fn run_with_clock(x: &DenseMatrix, config: &RunConfig, mut clock: Clock) -> StageResult<PipelineOutput> {
    clock.run("config", || config.validate())?;
    let (n, m) = x.shape();

    let (l, graph_edges) = clock.run("graph", || {
        if config.lambda1 == 0.0 {
            return Ok((DenseMatrix::zeros(m, m), None));
        }
        let g = knn_weights(x, config.k_nn)?;
        let edges = g.weights.as_slice().iter().filter(|&&w| w != 0.0).count() / 2;
        Ok((laplacian(&g), Some(edges)))
    })?;
    let xt = clock.run("whiten", || whiten(x, &l, config.lambda1))?;

    let mode = config.mode;
    let wants = |r: RunMode| mode == r || mode == RunMode::Compare;

    let mut classical = None;
    let mut classical_a = None;
    if wants(RunMode::Classical) {
        let rho0 = if mode == RunMode::Compare { None } else { config.rho0 };
        let fit = clock.run("classical", || fit_iterative(&xt, config.k, config.lambda2, rho0, config.s, 0.0))?;
        let objective = clock.run("classical-objective", || {
            objectives(fit.states.iter().map(|s| s.a.clone()), x, &l, config)
        })?;
        classical_a = Some(fit.last().a.clone());
        classical = Some(ClassicalSection {
            beta_trajectory: fit.states.iter().map(|s| s.column_scales()).collect(),
            objective,
            converged: fit.converged,
            warnings: fit.warnings,
        });
    }

    let mut spectral = None;
    let mut spectral_models = None;
    if wants(RunMode::Spectral) {
        let traj = clock.run("spectral", || fit_spectral(&xt, config.k, config.lambda2, config.s))?;
        let objective = clock.run("spectral-objective", || {
            objectives(traj.iter().map(assemble_projection), x, &l, config)
        })?;
        spectral = Some(SpectralSection {
            beta_trajectory: betas(&traj),
            objective,
        });
        spectral_models = Some(traj);
    }

    let mut quantum = None;
    let mut quantum_model = None;
    let (mut trace, mut state) = (None, None);
    if wants(RunMode::QuantumMatrix) || mode == RunMode::QuantumGate {
        let gate = mode == RunMode::QuantumGate;
        let it = config.iteration_config(gate);
        let stage = if gate { "quantum-gate" } else { "quantum-matrix" };
        let run = clock.run(stage, || run_qaop(&xt, config.k, &it))?;
        let objective = clock.run("quantum-objective", || {
            objectives(run.trajectory.iter().map(assemble_projection), x, &l, config)
        })?;
        let mut resources = resource_report(&it, n, config.k);
        if gate {
            if let (Some(t), Some(s)) = (&run.last_trace, &run.last_state) {
                resources = resources.with_measured(measure_trace(t, &it, s.num_qubits()));
            }
        }
        quantum = Some(QuantumSection {
            level: if gate { "gate" } else { "matrix" }.into(),
            beta_trajectory: betas(&run.trajectory),
            objective,
            iterations: run.iterations.clone(),
            cumulative_success_probability: run.cumulative_success_probability,
            resources,
        });
        quantum_model = Some(run.final_model().clone());
        trace = run.last_trace;
        state = run.last_state;
    }

    let spectral_a = spectral_models.as_ref().map(|t| assemble_projection(t.last().unwrap()));
    let quantum_a = quantum_model.as_ref().map(assemble_projection);

    let comparison = if mode == RunMode::Compare {
        let (c, s, q) = (
            classical_a.as_ref().unwrap(),
            spectral_a.as_ref().unwrap(),
            quantum_a.as_ref().unwrap(),
        );
        let cmp = clock.run("compare", || {
            let projector_distance = Pairwise {
                classical_spectral: projector_distance(c, s)?,
                classical_quantum: projector_distance(c, q)?,
                spectral_quantum: projector_distance(s, q)?,
            };
            let max = projector_distance.max();
            let state_fidelity = Pairwise {
                classical_spectral: vec_fidelity(c, s),
                classical_quantum: vec_fidelity(c, q),
                spectral_quantum: vec_fidelity(s, q),
            };
            let circuit_fidelity: Vec<f64> = quantum.as_ref().unwrap().iterations.iter().map(|i| i.fidelity).collect();
            Ok(Comparison {
                relative_error: Pairwise {
                    classical_spectral: relative_error(c, s),
                    classical_quantum: relative_error(c, q),
                    spectral_quantum: relative_error(q, s),
                },
                agree: max < COMPARE_TOLERANCE
                    && state_fidelity.min() > 1.0 - COMPARE_TOLERANCE
                    && circuit_fidelity.iter().all(|f| *f > 1.0 - COMPARE_TOLERANCE),
                projector_distance,
                state_fidelity,
                circuit_fidelity,
                max_projector_distance: max,
                tolerance: COMPARE_TOLERANCE,
            })
        })?;
        Some(cmp)
    } else {
        None
    };

    let projection = match mode {
        RunMode::Classical => classical_a,
        RunMode::Spectral | RunMode::Compare => spectral_a,
        RunMode::QuantumMatrix | RunMode::QuantumGate => quantum_a,
    }
    .expect("selected mode produced a projection");

    let singular_values = spectral_models
        .as_ref()
        .map(|t| t[0].sigma().to_vec())
        .or_else(|| quantum_model.as_ref().map(|q| q.sigma().to_vec()))
        .unwrap_or_default();

    Ok(PipelineOutput {
        report: Report {
            schema: REPORT_SCHEMA.into(),
            mode,
            config: config.clone(),
            data: DataSummary {
                n,
                m,
                k: config.k,
                graph_edges,
                singular_values,
            },
            classical,
            spectral,
            quantum,
            comparison,
            timings: clock.timings,
        },
        projection,
        trace,
        state,
    })
}

/// `Y = AᵀX`: the reduced data, one column per sample.
pub fn reduce(a: &DenseMatrix, x: &DenseMatrix) -> crate::Result<DenseMatrix> {
    a.transpose().matmul(x)
}
