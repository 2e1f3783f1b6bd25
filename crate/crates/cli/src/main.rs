//! `gaf`: run, resume and inspect evolutionary query optimization runs.
//!
//! Exit codes: 0 success, 1 invalid arguments or unreadable input, 2 invalid
//! configuration, 3 run stopped with an error, 4 nothing to resume.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use gaf_core::config::{parse_config, ConfigError, EngineKind};
use gaf_core::evolve::{advance, start};
use gaf_core::lexicon::tokenize;
use gaf_core::persistence::{load_keyword_pool, load_state, save_state};
use gaf_core::search::{engine_from_config, execute, index_corpus, LocalEngine, SearchEngine};
use gaf_core::{validate, Config, Lexicon, RunState, StopReason};
use log::info;

use report::{num, RunReport};

const DEFAULT_STATE_FILE: &str = "gaf-run.gaf";

#[derive(Parser)]
#[command(
    name = "gaf",
    version,
    about = "Evolutionary optimization of subject search queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a run and write its final state.
    Run(RunArgs),
    /// Continue a saved run to a terminal stop reason.
    Resume(ResumeArgs),
    /// Print the report of a saved run.
    Inspect(InspectArgs),
    /// Execute one query against a search engine.
    Search(SearchArgs),
    /// Show how text is tokenized and lemmatized.
    Lemma(LemmaArgs),
}

#[derive(Args)]
struct EngineArgs {
    /// Corpus directory for the local engine.
    #[arg(long, conflicts_with = "adapter_url")]
    corpus: Option<PathBuf>,
    /// Base URL of an HTTP search adapter.
    #[arg(long)]
    adapter_url: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    /// Number of resources in the report.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Parameter file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keyword pool file, one concept per line.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Random seed, overriding the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the state file.
    #[arg(long)]
    state_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ResumeArgs {
    state: PathBuf,
    /// Replaces the engine source stored in the state.
    #[command(flatten)]
    engine: EngineArgs,
    /// Where to write the state file (default: rewrite the input).
    #[arg(long)]
    state_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct InspectArgs {
    state: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SearchArgs {
    query: String,
    /// Parameter file supplying the engine source and dictionaries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 10)]
    limit: usize,
}

#[derive(Args)]
struct LemmaArgs {
    text: String,
    /// Parameter file naming lemma, synonym and stopword dictionaries.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// An error together with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait ExitContext<T> {
    fn exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitContext<T> for Result<T, E> {
    fn exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or("gaf_core=info,gaf=info,warn"),
    )
    .format(|buf, record| {
        writeln!(
            buf,
            "{}: {}",
            record.level().as_str().to_lowercase(),
            record.args()
        )
    })
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Resume(args) => cmd_resume(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Search(args) => cmd_search(args),
        Command::Lemma(args) => cmd_lemma(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

/// Absolute form of an existing path.
fn existing(path: &Path, what: &str) -> Result<PathBuf, Failure> {
    path.canonicalize()
        .with_context(|| format!("{what} {} not found", path.display()))
        .exit(1)
}

fn absolute(path: &Path) -> Result<PathBuf, Failure> {
    std::path::absolute(path)
        .with_context(|| format!("invalid path {}", path.display()))
        .exit(1)
}

/// Reads a config file without validating it; relative paths inside it are
/// taken relative to the file's directory.
fn read_config(path: &Path) -> Result<Config, Failure> {
    let path = existing(path, "config file")?;
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read {}", path.display()))
        .exit(1)?;
    let mut config = parse_config(&text)
        .map_err(|e| match e {
            ConfigError::Io { .. } => anyhow!(e),
            other => anyhow!(other).context(format!("invalid config {}", path.display())),
        })
        .exit(2)?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

fn apply_engine(config: &mut Config, engine: &EngineArgs) -> Result<(), Failure> {
    if let Some(dir) = &engine.corpus {
        config.engine_kind = EngineKind::Local;
        config.corpus_dir = Some(existing(dir, "corpus directory")?);
    }
    if let Some(url) = &engine.adapter_url {
        config.engine_kind = EngineKind::HttpAdapter;
        config.adapter_url = Some(url.clone());
    }
    Ok(())
}

fn check_engine_source(config: &Config) -> Result<(), Failure> {
    match config.engine_kind {
        EngineKind::Local => match &config.corpus_dir {
            None => Err(anyhow!("no engine source: give --corpus or --adapter-url")).exit(1),
            Some(dir) if !dir.is_dir() => {
                Err(anyhow!("corpus directory {} not found", dir.display())).exit(1)
            }
            Some(_) => Ok(()),
        },
        EngineKind::HttpAdapter if config.adapter_url.is_none() => {
            Err(anyhow!("no engine source: give --corpus or --adapter-url")).exit(1)
        }
        EngineKind::HttpAdapter => Ok(()),
    }
}

fn build_engine(config: &Config, lexicon: &Lexicon) -> Result<Box<dyn SearchEngine>, Failure> {
    check_engine_source(config)?;
    engine_from_config(config, lexicon)
        .context("cannot set up the search engine")
        .exit(1)
}

fn lexicon_for(config: &Config) -> Result<Lexicon, Failure> {
    Lexicon::for_config(config)
        .context("cannot load dictionaries")
        .exit(1)
}

fn print_report(state: &RunState, output: &OutputArgs, started: Option<Instant>) {
    let report = RunReport::from_state(state, output.top, started.map(|t| t.elapsed()));
    if output.json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
}

fn finish(state: &RunState) -> u8 {
    if matches!(state.stop_reason, StopReason::Error(_)) {
        3
    } else {
        0
    }
}

fn save(state: &RunState, path: &Path) -> Result<(), Failure> {
    save_state(state, path)
        .context("cannot write state")
        .exit(1)?;
    info!("state written to {}", path.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => Config::default(),
    };
    if let Some(pool) = &args.pool {
        config.keyword_pool_path = pool.clone();
    }
    config.keyword_pool_path = existing(&config.keyword_pool_path, "keyword pool")?;
    apply_engine(&mut config, &args.engine)?;
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    let state_path = match args.state_out.as_ref().or(config.state_path.as_ref()) {
        Some(p) => absolute(p)?,
        None => absolute(Path::new(DEFAULT_STATE_FILE))?,
    };
    config.state_path = Some(state_path.clone());
    let config = validate(config)
        .map_err(|e| anyhow!("invalid configuration: {e}"))
        .exit(2)?;

    let lexicon = lexicon_for(&config)?;
    let pool = load_keyword_pool(&config.keyword_pool_path, &lexicon).exit(1)?;
    let engine = build_engine(&config, &lexicon)?;

    let started = Instant::now();
    let mut state = start(config, pool)
        .context("cannot start the run")
        .exit(1)?;
    advance(&mut state, &lexicon, engine.as_ref(), None);
    save(&state, &state_path)?;
    print_report(&state, &args.output, Some(started));
    Ok(finish(&state))
}

fn cmd_resume(args: ResumeArgs) -> Result<u8, Failure> {
    let mut state = load_state(&args.state)
        .with_context(|| format!("cannot load {}", args.state.display()))
        .exit(1)?;
    if state.stop_reason.is_terminal() {
        eprintln!(
            "run already stopped ({}); nothing to resume",
            state.stop_reason
        );
        return Ok(4);
    }
    apply_engine(&mut state.config, &args.engine)?;
    let out = match &args.state_out {
        Some(p) => absolute(p)?,
        None => absolute(&args.state)?,
    };
    let lexicon = lexicon_for(&state.config)?;
    let engine = build_engine(&state.config, &lexicon)?;

    let started = Instant::now();
    advance(&mut state, &lexicon, engine.as_ref(), None);
    save(&state, &out)?;
    print_report(&state, &args.output, Some(started));
    Ok(finish(&state))
}

fn cmd_inspect(args: InspectArgs) -> Result<u8, Failure> {
    let state = load_state(&args.state)
        .with_context(|| format!("cannot load {}", args.state.display()))
        .exit(1)?;
    print_report(&state, &args.output, None);
    Ok(0)
}

fn cmd_search(args: SearchArgs) -> Result<u8, Failure> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => Config::default(),
    };
    apply_engine(&mut config, &args.engine)?;
    check_engine_source(&config)?;
    let lexicon = lexicon_for(&config)?;
    let rows: Vec<(String, String, String, String)> = match config.engine_kind {
        EngineKind::Local => {
            let dir = config.corpus_dir.as_ref().expect("checked engine source");
            let index = index_corpus(dir, &lexicon)
                .context("cannot index corpus")
                .exit(1)?;
            let engine = LocalEngine::new(index, lexicon);
            if args.limit == 0 {
                return Err(anyhow!("--limit must be at least 1")).exit(1);
            }
            engine
                .search_scored(&args.query, args.limit)
                .into_iter()
                .map(|(h, score)| (h.rank.to_string(), num(score), h.location, h.title))
                .collect()
        }
        EngineKind::HttpAdapter => {
            let engine = build_engine(&config, &lexicon)?;
            execute(&args.query, engine.as_ref(), args.limit)
                .context("search failed")
                .exit(1)?
                .into_iter()
                .map(|h| (h.rank.to_string(), "-".to_owned(), h.location, h.title))
                .collect()
        }
    };
    for (rank, score, location, title) in &rows {
        println!("{rank:>4}  {score:>8}  {location}  {title}");
    }
    println!("{} results", rows.len());
    Ok(0)
}

fn cmd_lemma(args: LemmaArgs) -> Result<u8, Failure> {
    let config = match &args.config {
        Some(path) => read_config(path)?,
        None => Config::default(),
    };
    let lexicon = lexicon_for(&config)?;
    let tokens = tokenize(&args.text);
    if tokens.is_empty() {
        return Ok(0);
    }
    let mut lemmas = Vec::new();
    for token in &tokens {
        match lexicon.normalize(token) {
            Some(lemma) => {
                println!("{token} → {lemma}");
                lemmas.push(lemma);
            }
            None => println!("{token} → ∅ (stopword)"),
        }
    }
    println!("lemmas: {}", lemmas.join(" "));
    Ok(0)
}
