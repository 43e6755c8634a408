use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mltv_core::catalog::load_catalog;
use mltv_core::config::Config;
use mltv_core::intent::{evaluate, split_corpus, IntentModel};
use mltv_core::service::{load_corpus, session_token, ManualClock, Models, Service, SystemClock};
use mltv_core::transcript::{
    format_transcript, parse_script, run_script, run_script_text, REPL_SESSION, REPL_USER,
};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "mltv", version, about = "Voice-driven movie recommender service and tools")]
struct Cli {
    /// TOML config file; MLTV_* environment variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate movies.csv, ratings.csv and tags.csv.
    Ingest {
        /// Directory with the data files; defaults to the configured one.
        data_dir: Option<PathBuf>,
    },
    /// Train the intent classifier and write the model file.
    Train {
        /// Labeled utterances (`label<TAB>utterance`); bundled corpus if absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Seeded 80/20 split, train on 80, report accuracy on 20.
    Eval {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run the HTTP and WebSocket server.
    Serve {
        /// Overrides the configured bind address.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Talk to the dialogue engine without a client. With a script the
    /// output is a deterministic transcript.
    Repl { script: Option<PathBuf> },
    /// Print the push-channel token for a session.
    Token { session_id: String },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { data_dir } => ingest(data_dir.or(cfg.data_dir)),
        Command::Train { corpus, out } => train(corpus.or(cfg.corpus).as_deref(), &out),
        Command::Eval { corpus, seed } => eval(corpus.or(cfg.corpus).as_deref(), seed, cfg.confidence_threshold),
        Command::Serve { bind } => serve(cfg, bind),
        Command::Repl { script } => repl(&cfg, script.as_deref()),
        Command::Token { session_id } => {
            println!("{}", session_token(&cfg.token_secret, &session_id));
            Ok(())
        }
    }
}

fn ingest(data_dir: Option<PathBuf>) -> Result<()> {
    let Some(dir) = data_dir else {
        bail!("no data directory given (argument, config data_dir or MLTV_DATA_DIR)");
    };
    let tags = dir.join("tags.csv");
    let (catalog, ratings) = load_catalog(
        &dir.join("movies.csv"),
        &dir.join("ratings.csv"),
        tags.exists().then_some(tags.as_path()),
    )?;
    println!("movies: {}", catalog.len());
    println!("ratings: {}", ratings.len());
    println!("users: {}", ratings.user_count());
    println!("tags: {}", catalog.tag_count());
    Ok(())
}

fn train(corpus: Option<&Path>, out: &Path) -> Result<()> {
    let corpus = load_corpus(corpus)?;
    let model = IntentModel::train(&corpus)?;
    model.save(out)?;
    println!(
        "trained on {} utterances, {} features -> {}",
        corpus.len(),
        model.vocabulary().len(),
        out.display()
    );
    Ok(())
}

fn eval(corpus: Option<&Path>, seed: u64, threshold: f64) -> Result<()> {
    let corpus = load_corpus(corpus)?;
    let (train, test) = split_corpus(&corpus, seed);
    let model = IntentModel::train(&train)?;
    let report = evaluate(&model, &test, threshold);
    println!("seed {seed}: {} train, {} test", train.len(), test.len());
    print!("{report}");
    Ok(())
}

fn serve(cfg: Config, bind: Option<String>) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let models = Arc::new(Models::from_config(&cfg)?);
    let service = Arc::new(Service::new(models, Arc::new(SystemClock), cfg.token_secret.clone()));
    let bind = bind.unwrap_or(cfg.bind);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        tracing::info!("listening on {}", listener.local_addr()?);
        mltv_gateway::serve(listener, service, cfg.push_queue).await?;
        Ok(())
    })
}

fn repl(cfg: &Config, script: Option<&Path>) -> Result<()> {
    let models = Arc::new(Models::from_config(cfg)?);
    if let Some(path) = script {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        print!("{}", format_transcript(&run_script_text(models, &text)?));
        return Ok(());
    }

    // interactive: same simulated clock, so `@sleep` works here too
    let clock = Arc::new(ManualClock::new(0));
    let service = Service::new(models, clock.clone(), cfg.token_secret.clone());
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    write!(stdout, "> ")?;
    stdout.flush()?;
    for line in stdin.lock().lines() {
        let steps = match parse_script(&line?) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{e}");
                Vec::new()
            }
        };
        let turns = run_script(&service, &clock, &steps, REPL_SESSION, REPL_USER);
        for turn in &turns {
            // the prompt already echoed the utterance
            let full = format_transcript(std::slice::from_ref(turn));
            print!("{}", full.split_once('\n').map_or("", |(_, rest)| rest));
        }
        write!(stdout, "> ")?;
        stdout.flush()?;
    }
    println!();
    Ok(())
}
