//! `qaop`: fit, compare and evaluate A-optimal projections from CSV data.
//!
//! Exit codes: 0 success, 2 parse or configuration error, 3 numerical
//! failure, 4 resource refusal.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qaop::circuit::{measure_trace, resource_report, run_iteration, IterationConfig, Mode};
use qaop::pipeline::{
    eval_regression, ingest_csv, load_input, reduce, run_pipeline, synthetic_data, write_csv, PipelineOutput,
    RunConfig, RunMode, StageError,
};
use qaop::spectral::init_spectral;
use qaop::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "qaop", version, about = "A-optimal projections: iterative, spectral and circuit-level")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mode and write the JSON report.
    Fit(FitArgs),
    /// Run the classical, spectral and matrix-level quantum paths and cross-check them.
    Compare(FitArgs),
    /// Qubit and gate counts of one gate-level iteration.
    Resources(ResourceArgs),
    /// Fit, reduce the data and regress observations on the reduced coordinates.
    Eval(EvalArgs),
}

/// Flags mirroring the `key = value` config file; flags win over the file.
#[derive(Args, Default)]
struct RunArgs {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV path (rows are samples) or `random:NxM`.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    k_nn: Option<String>,
    #[arg(long)]
    lambda1: Option<String>,
    #[arg(long)]
    lambda2: Option<String>,
    /// Frobenius radius of the classical learner, or `none`.
    #[arg(long)]
    rho0: Option<String>,
    /// Outer iterations.
    #[arg(long)]
    s: Option<String>,
    /// Newton steps.
    #[arg(long)]
    s_prime: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    n_terms: Option<String>,
    /// Evolution time, or `auto`.
    #[arg(long)]
    t0: Option<String>,
    /// Rotation scale, or `auto`.
    #[arg(long)]
    rho: Option<String>,
    /// `column-index` or `right-singular`.
    #[arg(long)]
    companion: Option<String>,
    #[arg(long)]
    qubit_budget: Option<String>,
    /// classical, spectral, quantum-matrix, quantum-gate or compare.
    #[arg(long)]
    mode: Option<String>,
    /// Seed for every random choice, including `random:` inputs.
    #[arg(long)]
    seed: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Write the final projection matrix as CSV.
    #[arg(long)]
    dump_a: Option<PathBuf>,
    /// Write the gate trace of the last quantum iteration.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the post-selected state of the last quantum iteration.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args)]
struct ResourceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Features; taken from the input when one is given.
    #[arg(long)]
    n: Option<usize>,
    /// Samples of the synthetic instance used by `--measure`.
    #[arg(long)]
    m: Option<usize>,
    /// Also run one gate-level iteration and compare its trace with the formulas.
    #[arg(long)]
    measure: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    run: RunArgs,
    /// CSV of observations, one row per sample.
    #[arg(long)]
    target: PathBuf,
    /// Column of the target file to regress on.
    #[arg(long, default_value_t = 0)]
    target_column: usize,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let fields: [(&'static str, &Option<String>); 19] = [
            ("input", &self.input),
            ("k", &self.k),
            ("k_nn", &self.k_nn),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("rho0", &self.rho0),
            ("s", &self.s),
            ("s_prime", &self.s_prime),
            ("b", &self.b),
            ("d", &self.d),
            ("p", &self.p),
            ("n_terms", &self.n_terms),
            ("t0", &self.t0),
            ("rho", &self.rho),
            ("companion", &self.companion),
            ("qubit_budget", &self.qubit_budget),
            ("mode", &self.mode),
            ("seed", &self.seed),
            ("output", &self.output),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }

    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Configuration(_)
        | Error::InvalidParameter(_)
        | Error::InvalidInput(_)
        | Error::Io(_) => 2,
        Error::ResourceRefusal { .. } | Error::StateTooLarge { .. } => 4,
        _ => 3,
    }
}

fn staged(stage: &str) -> impl Fn(Error) -> StageError + '_ {
    move |error| StageError {
        stage: stage.to_string(),
        error,
    }
}

fn emit(text: &str, output: Option<&str>) -> Result<(), StageError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| staged("output")(e.into())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_dumps(out: &PipelineOutput, args: &FitArgs) -> Result<(), StageError> {
    if let Some(path) = &args.dump_a {
        write_csv(path, &out.projection).map_err(staged("output"))?;
    }
    for (path, text) in [
        (&args.trace, out.trace.as_ref().map(|t| t.dump())),
        (&args.state, out.state.as_ref().map(|s| s.dump())),
    ] {
        if let Some(path) = path {
            let text = text.ok_or_else(|| {
                staged("output")(Error::Configuration(
                    "trace and state dumps need a quantum mode".into(),
                ))
            })?;
            fs::write(path, text).map_err(|e| staged("output")(e.into()))?;
        }
    }
    Ok(())
}

fn fit(args: &FitArgs, force: Option<RunMode>) -> Result<(), StageError> {
    let mut cfg = args.run.resolve().map_err(staged("config"))?;
    if let Some(mode) = force {
        cfg.mode = mode;
    }
    let out = run_pipeline(&cfg)?;
    write_dumps(&out, args)?;
    emit(&out.report.to_json(), cfg.output.as_deref())?;
    if let Some(c) = &out.report.comparison {
        if !c.agree {
            eprintln!(
                "warning: paths disagree, max projector distance {:.3e} (tolerance {:.0e})",
                c.max_projector_distance, c.tolerance
            );
        }
    }
    Ok(())
}

fn resources(args: &ResourceArgs) -> Result<(), StageError> {
    let cfg = args.run.resolve().map_err(staged("config"))?;
    let data = match &cfg.input {
        Some(_) => Some(load_input(&cfg).map_err(staged("ingest"))?),
        None => None,
    };
    let n = match (&data, args.n) {
        (Some(x), _) => x.rows(),
        (None, Some(n)) => n,
        (None, None) => return Err(staged("config")(Error::Configuration("resources needs --n or --input".into()))),
    };
    let it = IterationConfig {
        mode: Mode::GateLevel,
        ..cfg.iteration_config(true)
    };
    it.validate().map_err(staged("config"))?;
    let mut report = resource_report(&it, n, cfg.k);
    if args.measure {
        let x = data.unwrap_or_else(|| synthetic_data(n, args.m.unwrap_or(n), cfg.seed));
        let model = init_spectral(&x, cfg.k, cfg.lambda2).map_err(staged("spectral"))?;
        let out = run_iteration(&model, &it).map_err(staged("quantum-gate"))?;
        report = report.with_measured(measure_trace(&out.trace, &it, out.state.num_qubits()));
    }
    let mismatches = report.mismatches();
    let text = serde_json::to_string_pretty(&json!({
        "schema": "qaop-resources/1",
        "report": report,
        "mismatches": mismatches,
    }))
    .expect("serializable");
    emit(&text, cfg.output.as_deref())
}

fn eval(args: &EvalArgs) -> Result<(), StageError> {
    let cfg = args.run.resolve().map_err(staged("config"))?;
    let out = run_pipeline(&cfg)?;
    let x = load_input(&cfg).map_err(staged("ingest"))?;
    let targets = ingest_csv(&args.target).map_err(staged("target"))?;
    if args.target_column >= targets.rows() {
        return Err(staged("target")(Error::Configuration(format!(
            "target column {} out of range ({} columns)",
            args.target_column,
            targets.rows()
        ))));
    }
    let z = targets.row(args.target_column).to_vec();
    let y = reduce(&out.projection, &x).map_err(staged("reduce"))?;
    let fit = eval_regression(&y, &z).map_err(staged("regression"))?;
    if fit.regularized {
        eprintln!("warning: reduced design is rank deficient, used the ridge fallback");
    }
    let text = serde_json::to_string_pretty(&json!({
        "schema": "qaop-eval/1",
        "mode": cfg.mode,
        "k": cfg.k,
        "samples": z.len(),
        "regression": fit,
    }))
    .expect("serializable");
    emit(&text, cfg.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => fit(a, None),
        Command::Compare(a) => fit(a, Some(RunMode::Compare)),
        Command::Resources(a) => resources(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e.error))
        }
    }
}
