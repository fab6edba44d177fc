//! Batch front-end: CSV ingestion, run configuration, the mode runner with
//! its JSON report, and downstream regression evaluation.

mod config;
mod ingest;
mod regression;
mod run;

pub use config::{InputSource, RunConfig, RunMode, CONFIG_KEYS};
pub use ingest::{ingest_csv, parse_csv, synthetic_data, write_csv};
pub use regression::{eval_regression, RegressionEval, FALLBACK_RIDGE};
pub use run::{
    load_input, reduce, run_pipeline, run_pipeline_on, ClassicalSection, Comparison, DataSummary, Pairwise,
    PipelineOutput, QuantumSection, Report, SpectralSection, StageError, StageResult, StageTiming, COMPARE_TOLERANCE,
    REPORT_SCHEMA,
};
