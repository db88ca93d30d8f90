use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use obfubench::config::RunConfig;
use obfubench::corpus::{load_manifest, validate_corpus, Corpus};
use obfubench::obfuscate::templates::{default_template, load_template};
use obfubench::obfuscate::{Baseline, FailureKind, Mode, ProviderClient, ResponseCache, ThreadSleeper, UreqTransport};
use obfubench::pipeline::{count_failures, evaluate_run, obfuscate_corpus, run_dir_name, BatchOptions, Source};
use obfubench::report::summary::group_table;
use obfubench::report::{read_metrics_csv, read_run, render_summary, write_metrics_csv, ReportError};
use obfubench::sandbox::PythonSandbox;
use obfubench_core::stats::GroupKey;
use obfubench_core::{MetricRecord, Regime};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CACHE: u8 = 3;
const EXIT_EMPTY: u8 = 4;

#[derive(Parser)]
#[command(name = "obfubench", version, about = "Benchmark LLM and rule-based obfuscation of Python functions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset directory or manifest file.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Response cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Directory that receives run directories.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the manifest, the test literals and the identity differential.
    Validate,
    /// Produce obfuscated sources for every corpus function.
    Obfuscate(ObfuscateArgs),
    /// Run the differential tests and metrics for a run directory.
    Evaluate {
        run_dir: PathBuf,
        /// Metrics CSV path; `<run_dir>/metrics.csv` by default.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Grouped means of every metric.
    Stats {
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        /// Comma-separated keys from model, pet, category.
        #[arg(long, value_delimiter = ',', default_value = "model,pet")]
        group: Vec<GroupKey>,
    },
    /// Markdown summary with the category and elasticity tables.
    Report {
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        /// Also append a grouped table.
        #[arg(long, value_delimiter = ',')]
        group: Vec<GroupKey>,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ObfuscateArgs {
    /// Provider name or model id from the configuration.
    #[arg(long, conflicts_with = "baseline", required_unless_present = "baseline")]
    model: Option<String>,
    /// Rule-based transform instead of a model.
    #[arg(long)]
    baseline: Option<Baseline>,
    /// Prompt regime; every configured regime when omitted.
    #[arg(long, conflicts_with = "baseline")]
    pet: Option<Regime>,
    #[arg(long)]
    seed: Option<u64>,
    /// Serve responses from the cache only.
    #[arg(long)]
    offline: bool,
    /// Regenerate responses already present in the run directory.
    #[arg(long)]
    force: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

fn report_failure(e: ReportError) -> Failure {
    match e {
        ReportError::EmptyInput => Failure::new(EXIT_EMPTY, e),
        other => Failure::new(EXIT_CONFIG, other),
    }
}

fn settings(g: &Global) -> Result<RunConfig, Failure> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::new(EXIT_CONFIG, e))?,
        None => RunConfig::default(),
    };
    if let Some(d) = &g.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    if let Some(c) = &g.cache {
        cfg.cache_dir = c.clone();
    }
    if let Some(o) = &g.out {
        cfg.out_dir = o.clone();
    }
    cfg.check().map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    Ok(cfg)
}

fn corpus(cfg: &RunConfig) -> Result<Corpus, Failure> {
    load_manifest(&cfg.dataset).map_err(|e| Failure::new(EXIT_CONFIG, e))
}

fn sandbox(cfg: &RunConfig) -> PythonSandbox {
    let mut s = PythonSandbox::new(cfg.interpreter());
    s.float_tolerance = cfg.float_tolerance;
    s
}

fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = corpus(cfg)?;
    let report = validate_corpus(&corpus, &sandbox(cfg), cfg.workers).map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    for f in &report.functions {
        if f.is_valid() {
            println!("ok      {}", f.id);
        } else {
            println!("invalid {}", f.id);
            for r in &f.reasons {
                println!("        {r}");
            }
        }
    }
    for note in &report.shape_notes {
        println!("note: {note}");
    }
    println!("{}/{} valid", report.valid_count(), report.functions.len());
    if report.all_valid() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VALIDATION, "validation failed"))
    }
}

fn obfuscate(cfg: &RunConfig, args: &ObfuscateArgs) -> Result<(), Failure> {
    let corpus = corpus(cfg)?;
    let opts = BatchOptions {
        workers: cfg.workers,
        force: args.force,
    };
    let seed = args.seed.unwrap_or(cfg.seed);
    let mut cache_misses = 0;
    let mut emit = |source: &Source<'_>, model: &str, regime: Regime| -> Result<(), Failure> {
        let dir = cfg.out_dir.join(run_dir_name(model, regime));
        let record = obfuscate_corpus(&corpus, source, &dir, opts).map_err(|e| Failure::new(EXIT_CONFIG, e))?;
        for f in &record.functions {
            if let Some(failure) = &f.failure {
                eprintln!("{}: {failure}", f.run.function_id);
            }
        }
        cache_misses += count_failures(&record, FailureKind::CacheMiss);
        println!("{}", dir.display());
        Ok(())
    };

    if let Some(baseline) = args.baseline {
        emit(&Source::Baseline { baseline, seed }, baseline.model_id(), Regime::ZeroShot)?;
    } else {
        let name = args.model.as_deref().unwrap_or_default();
        let mut provider = cfg
            .provider(name)
            .cloned()
            .ok_or_else(|| Failure::new(EXIT_CONFIG, format!("no provider named {name:?} in the configuration")))?;
        if args.seed.is_some() || provider.seed.is_none() {
            provider.seed = Some(seed);
        }
        let mode = if args.offline || cfg.offline { Mode::Offline } else { Mode::Live };
        let transport = UreqTransport;
        let sleeper = ThreadSleeper;
        let client = ProviderClient::new(provider, &transport, &sleeper);
        let cache = ResponseCache::new(&cfg.cache_dir);
        let regimes = args.pet.map_or_else(|| cfg.regimes.clone(), |r| vec![r]);
        for regime in regimes {
            let template = match &cfg.template_dir {
                Some(dir) => load_template(dir, regime, cfg.exemplar_count)
                    .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", dir.display())))?,
                None => default_template(regime, cfg.exemplar_count),
            };
            let source = Source::Model {
                client: &client,
                template: &template,
                cache: &cache,
                mode,
            };
            emit(&source, &client.config.name, regime)?;
        }
    }
    if cache_misses > 0 {
        return Err(Failure::new(EXIT_CACHE, format!("{cache_misses} responses missing from the cache")));
    }
    Ok(())
}

fn evaluate(cfg: &RunConfig, run_dir: &Path, metrics: Option<&Path>) -> Result<(), Failure> {
    let corpus = corpus(cfg)?;
    let record = read_run(run_dir).map_err(report_failure)?;
    let records = evaluate_run(&corpus, &record, &sandbox(cfg), cfg.workers).map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    let path = metrics.map_or_else(|| run_dir.join("metrics.csv"), Path::to_path_buf);
    write_metrics_csv(&records, &path).map_err(report_failure)?;
    println!("{}", path.display());
    Ok(())
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<MetricRecord>, Failure> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(read_metrics_csv(p).map_err(report_failure)?);
    }
    if records.is_empty() {
        return Err(report_failure(ReportError::EmptyInput));
    }
    Ok(records)
}

fn stats(paths: &[PathBuf], group: &[GroupKey]) -> Result<(), Failure> {
    let records = read_all(paths)?;
    print!("{}", group_table(&records, group).map_err(report_failure)?);
    Ok(())
}

fn report(paths: &[PathBuf], group: &[GroupKey], output: Option<&Path>) -> Result<(), Failure> {
    let records = read_all(paths)?;
    let mut text = render_summary(&records).map_err(report_failure)?;
    if !group.is_empty() {
        text.push_str("\n## Grouped metrics\n\n");
        text.push_str(&group_table(&records, group).map_err(report_failure)?);
    }
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate => validate(&settings(&cli.global)?),
        Command::Obfuscate(args) => obfuscate(&settings(&cli.global)?, args),
        Command::Evaluate { run_dir, metrics } => evaluate(&settings(&cli.global)?, run_dir, metrics.as_deref()),
        Command::Stats { metrics, group } => stats(metrics, group),
        Command::Report { metrics, group, output } => report(metrics, group, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
