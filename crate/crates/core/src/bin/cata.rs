use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cata::pipeline::{self, ExperimentConfig, ModelKind};
use cata::synth::{self, SynthConfig};
use cata::{Error, Result};

#[derive(Parser)]
#[command(name = "cata", version, about = "Hybrid article recommender with attentive autoencoder priors")]
struct Cli {
    /// JSON experiment config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, env = "CATA_DATA_DIR")]
    data_dir: Option<PathBuf>,

    #[arg(long = "out", global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for ALS and evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    /// Comma-separated: pop, wrmf, cata, cata-tags, cata++.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    #[arg(long, global = true)]
    p: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_repeats: Option<usize>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    lambda_u: Option<f64>,
    #[arg(long, global = true)]
    lambda_v: Option<f64>,
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    max_sweeps: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    #[arg(long, global = true)]
    vocab_size: Option<usize>,
    #[arg(long, global = true)]
    min_articles_per_tag: Option<usize>,
    #[arg(long, global = true)]
    users_file: Option<String>,
    #[arg(long, global = true)]
    docs_file: Option<String>,
    #[arg(long, global = true)]
    term_counts_file: Option<String>,
    #[arg(long, global = true)]
    tags_file: Option<String>,
    #[arg(long, global = true)]
    citations_file: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a planted-cluster dataset into the data directory.
    Synth {
        #[arg(long, default_value_t = 500)]
        users: usize,
        #[arg(long, default_value_t = 800)]
        articles: usize,
        #[arg(long, default_value_t = 10)]
        clusters: usize,
    },
    /// Parse raw files into binary caches.
    Preprocess,
    /// Pre-train autoencoders and fit factor models on every split.
    Train,
    /// Score trained models and write reports.
    Evaluate {
        /// Score the validation split instead of the reporting splits.
        #[arg(long)]
        validation: bool,
    },
    /// Print the top-K unseen articles for a user.
    Recommend {
        user_id: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        split: usize,
    },
}

macro_rules! apply {
    ($cfg:ident, $o:ident; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $o.$field { $cfg.$field = v; })*
    };
}

fn build_config(cli: &mut Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = cli.data_dir.take() {
        cfg.data_dir = d;
    }
    if let Some(o) = cli.out_dir.take() {
        cfg.out_dir = o;
    }
    let o = std::mem::take(&mut cli.overrides);
    apply!(cfg, o; models, p, seed, n_repeats, d, lambda_u, lambda_v, a, b, max_sweeps, tol,
        widths, epochs, batch_size, learning_rate, ks, vocab_size, min_articles_per_tag, users_file);
    if o.docs_file.is_some() {
        cfg.docs_file = o.docs_file;
    }
    if o.term_counts_file.is_some() {
        cfg.term_counts_file = o.term_counts_file;
    }
    if o.tags_file.is_some() {
        cfg.tags_file = o.tags_file;
    }
    if o.citations_file.is_some() {
        cfg.citations_file = o.citations_file;
    }
    Ok(cfg)
}

fn run(mut cli: Cli) -> Result<()> {
    let cfg = build_config(&mut cli)?;
    match cli.command {
        Command::Synth { users, articles, clusters } => {
            let sc = SynthConfig {
                n_users: users,
                n_articles: articles,
                n_clusters: clusters,
                seed: cfg.seed,
                ..SynthConfig::default()
            };
            synth::generate(&sc)?.write_to(&cfg.data_dir)?;
            println!("wrote synthetic dataset to {}", cfg.data_dir.display());
        }
        Command::Preprocess => {
            let m = pipeline::preprocess(&cfg)?;
            println!(
                "users {}  articles {}  pairs {}  vocabulary {}  tags {}",
                m.n_users,
                m.n_articles,
                m.n_pairs,
                m.vocab_size,
                m.n_tags.map_or("-".to_string(), |t| t.to_string())
            );
            println!("cache: {}", cfg.cache_dir().display());
        }
        Command::Train => {
            for s in pipeline::train(&cfg)? {
                println!("{}: {} ({} splits)", s.model, s.run_dir.display(), cfg.n_repeats);
            }
        }
        Command::Evaluate { validation } => {
            let out = pipeline::evaluate(&cfg, validation)?;
            println!("{:<10} {:>5} {:>9} {:>9}", "model", "K", "recall", "ndcg");
            for rep in &out.reports {
                for m in &rep.mean {
                    println!("{:<10} {:>5} {:>9.4} {:>9.4}", rep.variant, m.k, m.recall, m.ndcg);
                }
            }
            println!("reports: {}", out.report_dir.display());
        }
        Command::Recommend { user_id, k, split } => {
            for r in pipeline::recommend(&cfg, user_id, k, split)? {
                println!("{}\t{:.6}", r.article, r.score);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| run(cli))),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
