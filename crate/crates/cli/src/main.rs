mod cache;
mod catalog;
mod config;
mod ops;
mod output;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use catalog::Op;
use config::{Experiment, ExperimentConfig, RunArgs};
use output::{Manifest, MANIFEST, VERSIONS};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 2;
const EXIT_FLAGGED: u8 = 3;

#[derive(Parser)]
#[command(name = "ncheat", version, about = "Heat-semigroup experiments on group algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gram test of negative definiteness on a ball
    CheckNd(RunArgs),
    /// Positive definiteness of exp(-t d) on a ball
    Schoenberg(RunArgs),
    /// Poincare exponent bracket and l2 threshold
    Poincare(RunArgs),
    /// Fit or check c <= a c' + b
    Dominance(RunArgs),
    /// Truncated operator norm
    Norm(RunArgs),
    /// l2 threshold next to sphere-tail flags
    Tail(RunArgs),
    /// Apply the heat semigroup to initial data
    HeatEvolve(RunArgs),
    /// Heat-equation residuals
    HeatResidual(RunArgs),
    /// Haagerup content of a finite set
    Content(RunArgs),
    /// Decay ratio ||x|| / ||x kappa||_2
    Kappa(RunArgs),
    /// Content growth of sublevel sets
    Hgrowth(RunArgs),
    /// Per-sphere multiplier bound on a free group
    SphereBound(RunArgs),
    /// Run the operation named in --config
    Run(RunArgs),
    /// Validate a config and its inputs without computing
    Validate(RunArgs),
    /// Print the experiment catalog with parameter schemas (JSON)
    List,
}

fn split(cmd: Command) -> Option<(Option<Op>, RunArgs, bool)> {
    Some(match cmd {
        Command::CheckNd(a) => (Some(Op::CheckNd), a, false),
        Command::Schoenberg(a) => (Some(Op::Schoenberg), a, false),
        Command::Poincare(a) => (Some(Op::Poincare), a, false),
        Command::Dominance(a) => (Some(Op::Dominance), a, false),
        Command::Norm(a) => (Some(Op::Norm), a, false),
        Command::Tail(a) => (Some(Op::Tail), a, false),
        Command::HeatEvolve(a) => (Some(Op::HeatEvolve), a, false),
        Command::HeatResidual(a) => (Some(Op::HeatResidual), a, false),
        Command::Content(a) => (Some(Op::Content), a, false),
        Command::Kappa(a) => (Some(Op::Kappa), a, false),
        Command::Hgrowth(a) => (Some(Op::Hgrowth), a, false),
        Command::SphereBound(a) => (Some(Op::SphereBound), a, false),
        Command::Run(a) => (None, a, false),
        Command::Validate(a) => (None, a, true),
        Command::List => return None,
    })
}

struct Report<'a> {
    op: Option<Op>,
    config: Option<&'a ExperimentConfig>,
    status: &'a str,
    code: u8,
    messages: Vec<String>,
    experiment: Option<&'a Experiment>,
    outputs: Vec<String>,
    start: Instant,
}

fn finish(dir: &Path, r: Report) -> ExitCode {
    let manifest = Manifest {
        schema_version: catalog::SCHEMA_VERSION,
        operation: r.op.map(Op::name),
        status: r.status,
        exit_code: r.code,
        messages: r.messages.clone(),
        config: r.config,
        config_sha256: r.config.map(output::config_hash),
        seeds: r.config.and_then(|c| c.seed).into_iter().collect(),
        inputs: r.experiment.map(|e| e.inputs.clone()).unwrap_or_default(),
        outputs: r.outputs,
        versions: VERSIONS,
        threads: rayon::current_num_threads(),
        wall_time_s: r.start.elapsed().as_secs_f64(),
    };
    for m in &r.messages {
        eprintln!("ncheat: {m}");
    }
    let written = output::json_bytes(&manifest).and_then(|b| output::write_files(dir, &[(MANIFEST.into(), b)]));
    if let Err(e) = written {
        eprintln!("ncheat: could not write the manifest: {e:#}");
        return ExitCode::from(EXIT_FLAGGED.max(r.code));
    }
    ExitCode::from(r.code)
}

fn run(op: Option<Op>, args: RunArgs, validate_only: bool) -> ExitCode {
    let start = Instant::now();
    let invalid = |dir: &Path, op, config, msg: String| {
        finish(dir, Report { op, config, status: "invalid", code: EXIT_INVALID, messages: vec![msg], experiment: None, outputs: vec![], start })
    };
    let (op, cfg) = match config::merge(op, &args) {
        Ok(v) => v,
        Err(e) => return invalid(&args.fallback_out(), op, None, format!("{e:#}")),
    };
    let dir = cfg.out.clone().unwrap_or_else(|| config::DEFAULT_OUT.into());
    if let Some(n) = args.threads {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        if n == 0 || pool.is_err() {
            return invalid(&dir, Some(op), Some(&cfg), format!("cannot use --threads {n}"));
        }
    }
    let exp = match Experiment::validate(op, cfg.clone()) {
        Ok(e) => e,
        Err(e) => return invalid(&dir, Some(op), Some(&cfg), format!("{e:#}")),
    };
    let report = |status, code, messages, outputs| Report {
        op: Some(op),
        config: Some(&exp.config),
        status,
        code,
        messages,
        experiment: Some(&exp),
        outputs,
        start,
    };
    if validate_only {
        println!("{} config is valid", op.name());
        return finish(&dir, report("valid", EXIT_OK, vec![], vec![]));
    }
    match ops::execute(&exp) {
        Ok(produced) => {
            let names: Vec<String> = produced.files.iter().map(|f| f.0.clone()).collect();
            if let Err(e) = output::write_files(&dir, &produced.files) {
                return finish(&dir, report("failed", EXIT_FLAGGED, vec![format!("{e:#}")], vec![]));
            }
            for n in &names {
                println!("{}", dir.join(n).display());
            }
            if produced.flags.is_empty() {
                finish(&dir, report("ok", EXIT_OK, vec![], names))
            } else {
                finish(&dir, report("flagged", EXIT_FLAGGED, produced.flags, names))
            }
        }
        Err(e) => finish(&dir, report("failed", EXIT_FLAGGED, vec![format!("{e:#}")], vec![])),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match split(cli.command) {
        None => {
            println!("{}", serde_json::to_string_pretty(&catalog::listing()).expect("catalog serializes"));
            ExitCode::SUCCESS
        }
        Some((op, args, validate_only)) => run(op, args, validate_only),
    }
}
