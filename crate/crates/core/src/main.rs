use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use reasontrans::agent::{self, AgentConfig};
use reasontrans::corpus::{self, FilterConfig};
use reasontrans::eval::{self, EvalConfig};
use reasontrans::gateway::{EndpointConfig, Gateway, API_KEY_ENV};
use reasontrans::metrics::{CodeBleuWeights, MetricsReport};
use reasontrans::report;
use reasontrans::reward::{self, RewardDefaults};
use reasontrans::sandbox::{ExecLimits, Executor, Job, Toolchains};
use reasontrans::synthesis::{self, RunOptions, SynthesisConfig};
use reasontrans::LanguagePair;

#[derive(Parser)]
#[command(name = "reasontrans", version, about = "Triplet synthesis, rewards and evaluation for code translation")]
struct Cli {
    /// Log structured JSON lines to stderr.
    #[arg(long, global = true)]
    log_json: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every gold program against its suite and apply the corpus filters.
    ValidateCorpus(ValidateArgs),
    /// Generate and validate reasoning triplets.
    Synthesize(SynthesizeArgs),
    /// Translate a parallel dataset and report CA/APR/CodeBLEU/#Tokens/Latency.
    Evaluate(EvaluateArgs),
    /// Test-guided translate-and-repair agent.
    Agent(AgentArgs),
    /// Serve execution and length rewards over HTTP.
    RewardServe(RewardServeArgs),
    /// Re-score stored evaluation records offline.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// programs.jsonl or a parallel-function file.
    #[arg(long)]
    programs: PathBuf,
    /// JSON array of ids that overlap the evaluation set.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Minimum suite size.
    #[arg(long, default_value_t = 10)]
    min_cases: usize,
    /// Writes kept.jsonl and rejected.jsonl here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// programs.jsonl or a parallel-function file.
    #[arg(long)]
    programs: PathBuf,
    /// SynthesisConfig JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; resumes when it holds a checkpoint.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop after this many new items.
    #[arg(long)]
    max_items: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// EvalConfig JSON.
    #[arg(long)]
    config: PathBuf,
    /// Pairs to run, e.g. `java:python`; defaults to the config's list.
    #[arg(long = "pair")]
    pairs: Vec<LanguagePair>,
    /// Overrides the config's dataset path.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory for records.jsonl and report.{csv,md,json}.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Method label for the report rows.
    #[arg(long)]
    method: Option<String>,
    /// A report.json to annotate against.
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Args)]
struct AgentArgs {
    /// Parallel-function file; the target implementation is the reference.
    #[arg(long)]
    programs: PathBuf,
    /// Translation direction, e.g. `cpp:python`.
    #[arg(long)]
    pair: LanguagePair,
    /// AgentConfig JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for traces.jsonl, records.jsonl and reports.
    #[arg(long)]
    out: PathBuf,
    /// Method label for the report rows.
    #[arg(long, default_value = "Agent")]
    method: String,
}

#[derive(Args)]
struct RewardServeArgs {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// JSON with optional `defaults`, `limits`, `toolchains` and `workers`.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// records.jsonl written by `evaluate` or `agent`.
    #[arg(long)]
    records: PathBuf,
    /// Also write report.{csv,md,json} here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Method label for the report rows.
    #[arg(long, default_value = "")]
    method: String,
    /// A report.json to annotate against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// CodeBLEU weights as `ngram,weighted,syntax,dataflow`.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<CodeBleuWeights>,
    /// Printed format: csv, md or json.
    #[arg(long, default_value = "md")]
    format: report::ReportFormat,
}

fn parse_weights(s: &str) -> Result<CodeBleuWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [ngram, weighted_ngram, syntax, dataflow] = parts[..] else {
        return Err("expected four comma-separated weights".into());
    };
    let w = CodeBleuWeights { ngram, weighted_ngram, syntax, dataflow };
    w.validate().map_err(|e| e.to_string())?;
    Ok(w)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RewardServeConfig {
    #[serde(default)]
    defaults: RewardDefaults,
    #[serde(default)]
    limits: ExecLimits,
    #[serde(default)]
    toolchains: Toolchains,
    #[serde(default)]
    workers: usize,
}

fn init_logging(json: bool, verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let builder = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr);
    if json {
        builder.json().init();
    } else {
        builder.init();
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| anyhow::anyhow!("{}: field `{}`: {}", path.display(), e.path(), e.inner()))
}

/// Relative paths in a config file are resolved against its directory.
fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() { path.to_path_buf() } else { base.join(path) }
}

fn prepare_endpoint(endpoint: &mut EndpointConfig, config_path: &Path) {
    let base = config_path.parent().unwrap_or(Path::new("."));
    if let Some(rest) = endpoint.base_url.strip_prefix("mock://") {
        let script = resolve(base, Path::new(rest));
        endpoint.base_url = format!("mock://{}", script.display());
    }
    if endpoint.api_key.is_empty() {
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            endpoint.api_key = reasontrans::gateway::ApiKey::new(key);
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_baseline(path: Option<&Path>) -> Result<Option<Vec<MetricsReport>>> {
    path.map(|p| report::load_json_report(p).with_context(|| format!("baseline {}", p.display())))
        .transpose()
}

fn validate_corpus(args: ValidateArgs) -> Result<()> {
    let programs = corpus::load_programs_any(&args.programs)?;
    let exclusions = match &args.exclusions {
        Some(p) => corpus::load_exclusions(p)?,
        None => BTreeSet::new(),
    };
    let executor = Executor::default();
    let jobs: Vec<Job> = programs
        .iter()
        .map(|p| Job { code: &p.code, suite: &p.suite, language: p.language })
        .collect();
    let reports = executor.evaluate_batch(&jobs);
    let gold: HashMap<String, _> = programs.iter().map(|p| p.id.clone()).zip(reports).collect();
    let outcome = corpus::filter_corpus(&programs, &gold, &exclusions, FilterConfig { min_cases: args.min_cases })?;
    for r in &outcome.rejected {
        println!("rejected {} ({})", r.id, r.reason.as_str());
    }
    println!("kept {} of {} programs", outcome.kept.len(), programs.len());
    if let Some(out) = args.out {
        std::fs::create_dir_all(&out)?;
        corpus::write_source_programs(&out.join("kept.jsonl"), &outcome.kept)?;
        corpus::write_jsonl(&out.join("rejected.jsonl"), &outcome.rejected)?;
    }
    Ok(())
}

fn synthesize(args: SynthesizeArgs) -> Result<()> {
    let mut config: SynthesisConfig = read_json(&args.config)?;
    prepare_endpoint(&mut config.endpoint, &args.config);
    let out = match (args.out, &config.output_path) {
        (Some(out), _) => out,
        (None, Some(p)) => resolve(args.config.parent().unwrap_or(Path::new(".")), p),
        (None, None) => bail!("no output directory: pass --out or set output_path"),
    };
    let programs = corpus::load_programs_any(&args.programs)?;
    let gateway = Gateway::new(config.endpoint.clone())?;
    let executor = Executor::new(Toolchains::default(), config.limits);
    let result = synthesis::run(&programs, &config, &out, &gateway, &executor, RunOptions { max_items: args.max_items })?;
    write_text(&out.join("stats.md"), &result.stats.to_markdown())?;
    println!(
        "{} triplets, {} rejections ({} processed now, {} from checkpoint) in {}",
        result.triplets.len(),
        result.rejections.len(),
        result.processed,
        result.skipped,
        out.display()
    );
    print!("{}", result.stats.to_markdown());
    Ok(())
}

fn finish_reports(out: &Path, rows: &[MetricsReport], baseline: Option<&[MetricsReport]>) -> Result<()> {
    report::write_reports(out, rows, baseline)?;
    print!("{}", report::emit_report(rows, report::ReportFormat::Md, baseline)?);
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut config: EvalConfig = read_json(&args.config)?;
    prepare_endpoint(&mut config.endpoint, &args.config);
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    config.dataset_path = match args.dataset {
        Some(p) => p,
        None => resolve(&base, &config.dataset_path),
    };
    if !args.pairs.is_empty() {
        config.pairs = args.pairs;
    }
    if let Some(m) = args.method {
        config.method = m;
    }
    let out = match (args.out, &config.out_dir) {
        (Some(out), _) => out,
        (None, Some(p)) => resolve(&base, p),
        (None, None) => bail!("no output directory: pass --out or set out_dir"),
    };
    config.validate()?;
    let functions = corpus::load_parallel_functions(&config.dataset_path)?;
    let gateway = Gateway::new(config.endpoint.clone())?;
    let executor = Executor::new(Toolchains::default(), config.limits);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &pair in &config.pairs {
        let (row, mut recs) = eval::evaluate_functions(&functions, pair, &config, &gateway, &executor)?;
        rows.push(row);
        records.append(&mut recs);
    }
    std::fs::create_dir_all(&out)?;
    eval::write_records(&out.join(eval::RECORDS_FILE), &records)?;
    let baseline = load_baseline(args.baseline.as_deref())?;
    finish_reports(&out, &rows, baseline.as_deref())
}

fn run_agent(args: AgentArgs) -> Result<()> {
    let mut config: AgentConfig = read_json(&args.config)?;
    prepare_endpoint(&mut config.endpoint, &args.config);
    let functions = corpus::load_parallel_functions(&args.programs)?;
    let gateway = Gateway::new(config.endpoint.clone())?;
    let executor = Executor::new(Toolchains::default(), config.limits);
    let traces = agent::run_agents(&functions, args.pair, &config, &gateway, &executor)?;
    std::fs::create_dir_all(&args.out)?;
    corpus::write_jsonl(&args.out.join("traces.jsonl"), &traces)?;
    let records = agent::trace_records(&traces, &functions)?;
    eval::write_records(&args.out.join(eval::RECORDS_FILE), &records)?;
    let rows = eval::rescore(&records, CodeBleuWeights::default(), &args.method)?;
    finish_reports(&args.out, &rows, None)
}

fn reward_serve(args: RewardServeArgs) -> Result<()> {
    let config: RewardServeConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => RewardServeConfig::default(),
    };
    config.defaults.config.validate()?;
    config.defaults.weights.validate()?;
    config.limits.validate()?;
    let executor = Executor::with_workers(config.toolchains, config.limits, config.workers);
    eprintln!("serving rewards on http://{}", args.bind);
    reward::serve_rewards(args.bind, executor, config.defaults)?;
    Ok(())
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let records = eval::load_records(&args.records)?;
    let rows = eval::rescore(&records, args.weights.unwrap_or_default(), &args.method)?;
    let baseline = load_baseline(args.baseline.as_deref())?;
    if let Some(out) = &args.out {
        report::write_reports(out, &rows, baseline.as_deref())?;
    }
    print!("{}", report::emit_report(&rows, args.format, baseline.as_deref())?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.log_json, cli.verbose);
    let result = match cli.command {
        Command::ValidateCorpus(a) => validate_corpus(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Agent(a) => run_agent(a),
        Command::RewardServe(a) => reward_serve(a),
        Command::Metrics(a) => metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            tracing::error!(error = %format!("{e:#}"), "command failed");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
