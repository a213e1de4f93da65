use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use embcomp::config::{Overrides, RunConfig};
use embcomp::error::Error;
use embcomp::pipeline;

#[derive(Parser)]
#[command(
    name = "embcomp",
    version,
    about = "Scores how well compound-word embeddings are predicted from their constituents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset file and its fingerprint
    Generate(RunArgs),
    /// Resolve every embedding the run needs into the cache, nothing else
    Embed(RunArgs),
    /// Fit the parametric composers and write model documents
    Fit(RunArgs),
    /// Full pipeline: dataset, embeddings, fitting, evaluation, report
    Evaluate(RunArgs),
    /// Merge evaluation reports into side-by-side tables
    Report {
        /// Report JSON files produced by `evaluate`
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Also write the merged table as CSV to this path
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed (default 42)
    #[arg(long)]
    seed: Option<u64>,
    /// Keep only the named source
    #[arg(long)]
    source: Option<String>,
    /// Keep only the named composer kind
    #[arg(long)]
    composer: Option<String>,
    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing generated datasets
    #[arg(long)]
    force: bool,
    /// Never touch the network; cache, local and synthetic sources only
    #[arg(long)]
    offline: bool,
}

impl RunArgs {
    fn load_config(&self) -> Result<RunConfig, Error> {
        let overrides = Overrides {
            seed: self.seed,
            source: self.source.clone(),
            composer: self.composer.clone(),
            out: self.out.clone(),
            offline: self.offline,
        };
        RunConfig::load(&self.config)?.apply_overrides(&overrides)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run() -> Result<(), Error> {
    match Cli::parse().command {
        Command::Generate(args) => {
            let config = args.load_config()?;
            let outcome = pipeline::run_generate(&config, args.force)?;
            println!(
                "wrote {} ({} records, sha256 {})",
                outcome.dataset_path.display(),
                outcome.n_records,
                outcome.fingerprint
            );
            println!("fingerprint: {}", outcome.fingerprint_path.display());
        }
        Command::Embed(args) => {
            let config = args.load_config()?;
            let n = pipeline::run_embed(&config, args.offline)?;
            println!("cache holds embeddings for {n} texts");
        }
        Command::Fit(args) => {
            let config = args.load_config()?;
            let paths = pipeline::run_fit(&config, args.offline)?;
            for path in paths {
                println!("wrote {}", path.display());
            }
        }
        Command::Evaluate(args) => {
            let config = args.load_config()?;
            let outcome = pipeline::run_evaluate(&config, args.offline)?;
            println!("report: {}", outcome.report_path.display());
            println!("kde plot data: {}", outcome.kde_path.display());
            for path in &outcome.per_record_paths {
                println!("per-record scores: {}", path.display());
            }
            let labelled = vec![(
                outcome.report.body.dataset.kind.clone(),
                &outcome.report,
            )];
            print!("{}", embcomp::report::render_text(&labelled));
        }
        Command::Report { reports, csv } => {
            let (text, csv_text) = pipeline::run_report(&reports)?;
            print!("{text}");
            if let Some(path) = csv {
                std::fs::write(&path, csv_text)?;
                println!("csv table: {}", path.display());
            }
        }
    }
    Ok(())
}
