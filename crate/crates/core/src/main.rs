use clap::{Args, Parser, Subcommand};
use singulate::harness::commands::{self, exit_code, load_config, PolicyChoice};
use singulate::harness::RunConfig;
use singulate::mdp::RewardScheme;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "singulate", version, about = "Push-based target singulation: scenes, heuristics, training and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed for everything random in this run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use the reduced-clutter desk profile as the base config.
    #[arg(long)]
    desk: bool,
}

impl Common {
    fn config(&self) -> singulate::Result<RunConfig> {
        match (&self.config, self.desk) {
            (Some(_), true) => Err(singulate::Error::Config("--config and --desk are exclusive".into())),
            (None, true) => Ok(RunConfig::desk()),
            (path, false) => load_config(path.as_deref()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a batch of random cluttered scenes.
    GenScenes {
        #[command(flatten)]
        common: Common,
    },
    /// Run a policy on a batch of scenes and summarize the episodes.
    Eval {
        #[command(flatten)]
        common: Common,
        /// es, les, random, or model:<path> for a trained actor.
        #[arg(long, default_value = "es")]
        policy: String,
        /// Scene batch file; scenes are generated from --seed when omitted.
        #[arg(long)]
        scenes: Option<PathBuf>,
    },
    /// Fill a replay buffer with random-push transitions.
    FillBuffer {
        #[command(flatten)]
        common: Common,
    },
    /// Train agents offline on a replay buffer.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        buffer: PathBuf,
        /// Reward schemes to train; all three when omitted.
        #[arg(long, value_delimiter = ',')]
        scheme: Vec<String>,
    },
    /// Tabulate results and direction similarity from eval records.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// records.json files written by eval.
        #[arg(long = "records", required = true, num_args = 1..)]
        records: Vec<PathBuf>,
    },
    /// Write the map stages and a push top-view as PGM images.
    Render {
        #[command(flatten)]
        common: Common,
        /// Scene file; a scene is generated from --seed when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> singulate::Result<()> {
    let manifest = match cli.command {
        Command::GenScenes { common } => commands::gen_scenes(&common.config()?, common.seed, &common.out)?,
        Command::Eval { common, policy, scenes } => {
            let choice: PolicyChoice = policy.parse()?;
            commands::eval(&common.config()?, common.seed, &common.out, &choice, scenes.as_deref())?
        }
        Command::FillBuffer { common } => commands::fill_buffer(&common.config()?, common.seed, &common.out)?,
        Command::Train { common, buffer, scheme } => {
            let schemes = if scheme.is_empty() {
                vec![RewardScheme::Sparse, RewardScheme::EsShaped, RewardScheme::LesShaped]
            } else {
                scheme.iter().map(|s| s.parse()).collect::<singulate::Result<_>>()?
            };
            commands::train(&common.config()?, common.seed, &common.out, &buffer, &schemes)?
        }
        Command::Analyze { common, records } => {
            commands::analyze(&common.config()?, common.seed, &common.out, &records)?
        }
        Command::Render { common, scene } => {
            commands::render(&common.config()?, common.seed, &common.out, scene.as_deref())?
        }
    };
    log::info!("{} wrote {} outputs", manifest.command, manifest.outputs.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
