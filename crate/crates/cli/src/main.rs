use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use viramem_core::analysis::{run_analysis, validate, AnalysisError, RunConfig};
use viramem_core::corpus::{load_corpus, save_corpus, ImageStore};
use viramem_core::reddit::{
    run_collection, CollectionState, FetchConfig, LiveTransport, RecordingTransport, RedditClient, ReplayTransport,
    SystemClock, Transport,
};
use viramem_core::report::run_report;
use viramem_core::synth::{generate, SynthOptions};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

/// Bearer token for authenticated API access; unauthenticated when unset.
const TOKEN_ENV: &str = "VIRAMEM_REDDIT_TOKEN";

#[derive(Parser)]
#[command(name = "viramem", version, about = "Image memorability and online engagement analysis")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect image posts, comments and images into a corpus file.
    Fetch(FetchArgs),
    /// Check every input of an analysis run and print diagnostics.
    Validate { config: PathBuf },
    /// Run all analyses and write result files.
    Analyze(AnalyzeArgs),
    /// Redraw the SVG figures from an analysis output directory.
    Report { results_dir: PathBuf },
    /// Write the deterministic synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct FetchArgs {
    /// TOML file with fetch settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    subreddits: Option<Vec<String>>,
    /// Posts to accept in this run.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    quota: Option<usize>,
    /// Tag stored on every record of this run.
    #[arg(long)]
    run: Option<String>,
    /// Corpus file; new records are appended and images go next to it.
    #[arg(long, default_value = "corpus.ndjson")]
    out: PathBuf,
    /// Record HTTP transcripts here.
    #[arg(long, conflicts_with = "replay")]
    record: Option<PathBuf>,
    /// Serve requests from recorded transcripts instead of the network.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    config: PathBuf,
    /// Run the main analyses on all posts.
    #[arg(long)]
    no_outlier_removal: bool,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    posts: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_DATA, message: e.to_string() }
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Config(_) => Failure::usage(e),
            _ => Failure::data(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Fetch(a) => fetch(a),
        Command::Validate { config } => cmd_validate(&config),
        Command::Analyze(a) => analyze(a),
        Command::Report { results_dir } => report(&results_dir),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn fetch(a: FetchArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            toml::from_str::<FetchConfig>(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
        }
        None => FetchConfig::default(),
    };
    if let Some(s) = a.subreddits {
        cfg.subreddits = s;
    }
    if let Some(n) = a.count {
        cfg.target_count = n;
    }
    if let Some(q) = a.quota {
        cfg.per_subreddit_quota = q;
    }
    if a.run.is_some() {
        cfg.collection_run = a.run;
    }
    if a.record.is_some() {
        cfg.record_dir = a.record;
    }
    cfg.validate().map_err(Failure::usage)?;

    let transport: Box<dyn Transport> = match (&a.replay, &cfg.record_dir) {
        (Some(dir), _) => Box::new(ReplayTransport::new(dir)),
        (None, record) => {
            let mut live = LiveTransport::new(Duration::from_secs(cfg.timeout_secs));
            if let Ok(token) = std::env::var(TOKEN_ENV) {
                if !token.trim().is_empty() {
                    live = live.with_bearer(token.trim());
                }
            }
            match record {
                Some(dir) => Box::new(RecordingTransport::new(live, dir).map_err(Failure::data)?),
                None => Box::new(live),
            }
        }
    };
    let client = RedditClient::new(&cfg, transport, Arc::new(SystemClock::default())).map_err(Failure::usage)?;

    let root = a.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    fs::create_dir_all(&root).map_err(|e| Failure::data(format!("{}: {e}", root.display())))?;
    let store = ImageStore::new(&root);
    let mut existing = if a.out.exists() { load_corpus(&a.out).map_err(Failure::data)? } else { Vec::new() };
    let state_path = a.out.with_extension("state.json");
    let mut state = CollectionState::load(&state_path).map_err(Failure::data)?;

    let outcome = run_collection(&cfg, &client, &store, &existing, &mut state).map_err(Failure::data)?;
    existing.extend(outcome.records);
    save_corpus(&a.out, &existing).map_err(Failure::data)?;
    state.save(&state_path).map_err(Failure::data)?;

    let receipt = serde_json::to_string_pretty(&outcome.receipt).expect("receipt serializes");
    let receipts = a.out.with_extension("receipts.ndjson");
    let line = serde_json::to_string(&outcome.receipt).expect("receipt serializes") + "\n";
    let mut log_text = fs::read_to_string(&receipts).unwrap_or_default();
    log_text.push_str(&line);
    fs::write(&receipts, log_text).map_err(|e| Failure::data(format!("{}: {e}", receipts.display())))?;
    if let Some(w) = &outcome.receipt.warning {
        log::warn!("{w}");
    }
    println!("{receipt}");
    Ok(())
}

fn cmd_validate(config: &Path) -> Result<(), Failure> {
    let cfg = RunConfig::from_toml_file(config)?;
    let d = validate(&cfg);
    print!("{d}");
    if d.ok() {
        Ok(())
    } else {
        let failed = d.checks.iter().filter(|c| !c.ok).count();
        Err(Failure::data(format!("{failed} check(s) failed")))
    }
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::from_toml_file(&a.config)?;
    if a.no_outlier_removal {
        cfg.outlier_removal = false;
    }
    if let Some(out) = a.out {
        cfg.output_dir = out;
    }
    let summary = run_analysis(&cfg)?;
    let c = &summary.counts;
    println!(
        "{} posts analysed ({} joined, {} outliers, {} without features); wrote {} files to {}",
        c.main_rows,
        c.joined,
        c.outliers,
        c.without_features,
        summary.files.len(),
        summary.output_dir.display()
    );
    if summary.nonconverged.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NONCONVERGED,
            message: format!("model fit did not converge for: {}", summary.nonconverged.join(", ")),
        })
    }
}

fn report(dir: &Path) -> Result<(), Failure> {
    for p in run_report(dir).map_err(Failure::data)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let mut opts = SynthOptions::default();
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    if let Some(n) = a.posts {
        opts.n_posts = n;
    }
    let s = generate(&a.dir, &opts).map_err(Failure::data)?;
    println!("{} posts written; config at {}", s.n_posts, s.config_path.display());
    Ok(())
}
