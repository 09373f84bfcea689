//! `warden`: authorize requests, validate policies against a schema, format
//! policy files, and drive the random-testing harness.
//!
//! Exit codes: 0 success (authorize: Allow; fuzz: no failures), 1 fuzz
//! failures found, 2 input or usage error, 3 authorize Deny / validation
//! rejected.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use warden_core::{request_conforms, store_conforms, Decision};
use warden_engine::{is_authorized, validate_policy_set};
use warden_harness as harness;
use warden_parser::{
    format_text, parse_entities_json, parse_request_json, parse_schema_json, parse_policy_set,
};

#[derive(Parser)]
#[command(name = "warden", version, about = "Authorization policy engine and testing harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a request against a policy set and entity store.
    Authorize(AuthorizeArgs),
    /// Typecheck policies against a schema.
    Validate(ValidateArgs),
    /// Reformat a policy file, preserving comments.
    Format(FormatArgs),
    /// Run, replay, minimize, or inspect the random-testing targets.
    #[command(subcommand)]
    Fuzz(FuzzCommand),
}

#[derive(Args)]
struct AuthorizeArgs {
    /// Policy file (policy text).
    #[arg(long)]
    policies: PathBuf,
    /// Entities JSON file.
    #[arg(long)]
    entities: PathBuf,
    /// Optional schema JSON; when given, the store and request are checked
    /// for conformance first.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Request JSON file.
    #[arg(long)]
    request: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    policies: PathBuf,
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Args)]
struct FormatArgs {
    /// Input policy file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Target line width.
    #[arg(long, default_value_t = 80)]
    width: usize,
}

#[derive(Subcommand)]
enum FuzzCommand {
    /// Run a target on fresh random inputs (replaying its corpus first).
    Run(FuzzRunArgs),
    /// Replay stored corpus entries for one target.
    Replay(FuzzReplayArgs),
    /// Replay the stored corpus entries of every target.
    ReplayAll(FuzzReplayAllArgs),
    /// Shrink a failing input with ddmin and store it in the corpus.
    Minimize(FuzzMinimizeArgs),
    /// Report generator statistics for a target (or `typed-expr`).
    Stats(FuzzStatsArgs),
}

#[derive(Args)]
struct FuzzRunArgs {
    #[arg(long)]
    target: String,
    /// Number of inputs to run (corpus replays count toward it).
    #[arg(long, conflicts_with = "seconds")]
    iterations: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    seconds: Option<u64>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FuzzReplayArgs {
    #[arg(long)]
    target: String,
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct FuzzReplayAllArgs {
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct FuzzMinimizeArgs {
    #[arg(long)]
    target: String,
    /// File holding the failing input bytes.
    #[arg(long)]
    input: PathBuf,
    /// Corpus to store the minimized case in.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzStatsArgs {
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Authorize(args) => authorize(args),
        Command::Validate(args) => validate(args),
        Command::Format(args) => format(args),
        Command::Fuzz(cmd) => fuzz(cmd),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn authorize(args: AuthorizeArgs) -> Result<ExitCode> {
    let policies = parse_policy_set(&read(&args.policies)?)
        .map_err(|e| anyhow!("{}: {e}", args.policies.display()))?;
    let store = parse_entities_json(&read(&args.entities)?)
        .map_err(|e| anyhow!("{}: {e}", args.entities.display()))?;
    let request = parse_request_json(&read(&args.request)?)
        .map_err(|e| anyhow!("{}: {e}", args.request.display()))?;

    if let Some(schema_path) = &args.schema {
        let schema = parse_schema_json(&read(schema_path)?)
            .map_err(|e| anyhow!("{}: {e}", schema_path.display()))?;
        let violations = store_conforms(&store, &schema);
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("store does not conform to the schema: {v}");
            }
            return Err(anyhow!("entity store rejected by schema"));
        }
        if let Err(v) = request_conforms(&request, &schema) {
            return Err(anyhow!("request does not conform to the schema: {v}"));
        }
    }

    let response = is_authorized(&request, &store, &policies);
    let decision = match response.decision {
        Decision::Allow => "Allow",
        Decision::Deny => "Deny",
    };
    let errors: Vec<serde_json::Value> = response
        .errors
        .iter()
        .map(|(id, e)| serde_json::json!({"policy": id, "error": e.to_string()}))
        .collect();
    let doc = serde_json::json!({
        "decision": decision,
        "determining": response.determining.iter().collect::<Vec<_>>(),
        "errors": errors,
    });
    println!("{doc}");
    Ok(match response.decision {
        Decision::Allow => ExitCode::SUCCESS,
        Decision::Deny => ExitCode::from(3),
    })
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let policies = parse_policy_set(&read(&args.policies)?)
        .map_err(|e| anyhow!("{}: {e}", args.policies.display()))?;
    let schema = parse_schema_json(&read(&args.schema)?)
        .map_err(|e| anyhow!("{}: {e}", args.schema.display()))?;
    match validate_policy_set(&policies, &schema) {
        Ok(()) => {
            println!("{}", serde_json::json!({"valid": true, "errors": {}}));
            Ok(ExitCode::SUCCESS)
        }
        Err(failures) => {
            let errors: serde_json::Map<String, serde_json::Value> = failures
                .iter()
                .map(|(id, errs)| {
                    (
                        id.clone(),
                        serde_json::Value::from(
                            errs.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                        ),
                    )
                })
                .collect();
            println!("{}", serde_json::json!({"valid": false, "errors": errors}));
            Ok(ExitCode::from(3))
        }
    }
}

fn format(args: FormatArgs) -> Result<ExitCode> {
    let text = read(&args.input)?;
    let formatted =
        format_text(&text, args.width).map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
    print!("{formatted}");
    Ok(ExitCode::SUCCESS)
}

fn fuzz(cmd: FuzzCommand) -> Result<ExitCode> {
    match cmd {
        FuzzCommand::Run(args) => {
            let target = harness::find_target(&args.target)
                .ok_or_else(|| anyhow!("unknown target `{}`", args.target))?;
            let budget = match (args.iterations, args.seconds) {
                (Some(n), None) => harness::Budget::Iterations(n),
                (None, Some(s)) => harness::Budget::Seconds(s),
                (None, None) => harness::Budget::Iterations(10_000),
                (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
            };
            let config = harness::RunConfig {
                budget,
                corpus_dir: args.corpus,
                jobs: args.jobs,
                seed: args.seed,
                ..harness::RunConfig::default()
            };
            let report = harness::run_target(&target, &config)?;
            println!("{}", report.to_json_line());
            Ok(exit_for_failures(report.failures.is_empty()))
        }
        FuzzCommand::Replay(args) => {
            let target = harness::find_target(&args.target)
                .ok_or_else(|| anyhow!("unknown target `{}`", args.target))?;
            let report = harness::replay_target(&target, &args.corpus)?;
            println!("{}", report.to_json_line());
            Ok(exit_for_failures(report.failures.is_empty()))
        }
        FuzzCommand::ReplayAll(args) => {
            let reports = harness::replay_all(&args.corpus)
                .map_err(|e| anyhow!("replaying corpus: {e}"))?;
            let mut clean = true;
            for report in &reports {
                clean &= report.failures.is_empty();
                println!("{}", report.to_json_line());
            }
            Ok(exit_for_failures(clean))
        }
        FuzzCommand::Minimize(args) => {
            let target = harness::find_target(&args.target)
                .ok_or_else(|| anyhow!("unknown target `{}`", args.target))?;
            let bytes = std::fs::read(&args.input)
                .with_context(|| format!("reading {}", args.input.display()))?;
            if !(target.check)(&bytes).is_fail() {
                return Err(anyhow!("input does not fail target `{}`", args.target));
            }
            let minimized = harness::minimize_case(&target, &bytes);
            let hash = match &args.corpus {
                Some(dir) => harness::save_case(dir, target.name, &minimized)?,
                None => harness::hash_hex(&minimized),
            };
            println!(
                "{}",
                serde_json::json!({
                    "target": target.name,
                    "original_len": bytes.len(),
                    "minimized_len": minimized.len(),
                    "hash": hash,
                })
            );
            Ok(ExitCode::from(1))
        }
        FuzzCommand::Stats(args) => {
            let known = args.target == harness::TYPED_EXPR_TARGET
                || harness::find_target(&args.target).is_some();
            if !known {
                return Err(anyhow!("unknown target `{}`", args.target));
            }
            let stats = harness::compute_stats(&args.target, args.samples.max(1), args.seed);
            println!("{}", serde_json::to_string(&stats)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_for_failures(clean: bool) -> ExitCode {
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
