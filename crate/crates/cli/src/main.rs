use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rightsaudit_cli::{Overrides, Pipeline, RunConfig, Stage, StageOutcome};
use rightsaudit_core::rights::Rating;

#[derive(Parser, Debug)]
#[command(
    name = "rightsaudit",
    version,
    about = "Audit LLM headline generation for human-rights risk"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "audit.toml")]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated subset of configured model ids.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Comma-separated prompt variant keys.
    #[arg(long, global = true, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    /// Exit with status 2 when any rating reaches this level.
    #[arg(long, global = true)]
    fail_on: Option<FailOn>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Validate and normalize the article corpus.
    Ingest,
    /// Generate headlines for every (article, model, variant, sample) cell.
    Generate,
    /// Inter-annotator agreement and keyword classifier evaluation.
    AnnotateEval,
    /// Train the label regressor and build the partisanship axis.
    TrainAxis,
    /// Classify, embed and score generated headlines.
    Score,
    /// Map metrics to right-level risk ratings.
    Report,
    /// Run every stage in order, skipping those already up to date.
    Run,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FailOn {
    High,
    Medium,
}

impl FailOn {
    fn rating(self) -> Rating {
        match self {
            FailOn::High => Rating::High,
            FailOn::Medium => Rating::Medium,
        }
    }
}

fn stages(cmd: Command) -> Vec<Stage> {
    match cmd {
        Command::Ingest => vec![Stage::Ingest],
        Command::Generate => vec![Stage::Generate],
        Command::AnnotateEval => vec![Stage::AnnotateEval],
        Command::TrainAxis => vec![Stage::TrainAxis],
        Command::Score => vec![Stage::Score],
        Command::Report => vec![Stage::Report],
        Command::Run => Stage::ALL.to_vec(),
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        models: cli.models.clone(),
        variants: cli.variants.clone(),
    };
    let cfg = RunConfig::load(&cli.config, &overrides)?;
    let pipeline = Pipeline::new(cfg)?;
    for stage in stages(cli.command) {
        let outcome = pipeline.run(stage)?;
        let note = match outcome {
            StageOutcome::Ran => "done",
            StageOutcome::UpToDate => "up to date",
        };
        println!("{stage}: {note} ({})", stage.dir(pipeline.out()).display());
    }
    if let Some(level) = cli.fail_on {
        let worst = pipeline.report_max_rating()?;
        if worst.is_some_and(|r| r >= level.rating()) {
            eprintln!(
                "highest rating {} meets --fail-on threshold",
                worst.unwrap_or(Rating::Low)
            );
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
