use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ipd_lab::payoff::PayoffValues;
use ipd_lab::strategy::Behavior;
use ipd_lab_cli::commands::{self, CmdError};
use ipd_lab_cli::config::{parse_mix, parse_payoffs, ConfigLayer, RunConfig};

/// Spatial iterated prisoner's dilemma laboratory.
#[derive(Parser)]
#[command(name = "ipd-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a randomly mixed population and write stats, snapshots and a
    /// summary.
    Run(RunArgs),
    /// Play one match between two strategies and print the transcript.
    Match(MatchArgs),
    /// Print the closed-form invasion thresholds for a payoff setting.
    Analyze(AnalyzeArgs),
    /// Evolve a hand-placed cluster scenario from a descriptor file.
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct SharedRunArgs {
    /// Rounds per match
    #[arg(long)]
    rounds: Option<u32>,
    /// Generations to simulate
    #[arg(long)]
    generations: Option<u64>,
    /// Payoff matrix as T,R,P,S
    #[arg(long)]
    payoffs: Option<String>,
    /// Master-to-slave flip probability
    #[arg(long)]
    p_slave: Option<f64>,
    /// Master seed for all randomness
    #[arg(long)]
    seed: Option<u64>,
    /// Snapshot interval in generations (0 = off)
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Worker threads (affects wall clock only, never output)
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Freeze roles: no master-to-slave flips
    #[arg(long, num_args = 0..=1, default_missing_value = "on", value_parser = ["on", "off"])]
    freeze_roles: Option<String>,
    /// Stop as soon as one kind holds the whole grid
    #[arg(long)]
    stop_on_fixation: bool,
    /// Config file with key=value lines (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Grid width
    #[arg(long)]
    width: Option<u32>,
    /// Grid height
    #[arg(long)]
    height: Option<u32>,
    /// Initial mix as KIND:fraction,... (fractions sum to 1)
    #[arg(long)]
    mix: Option<String>,
    #[command(flatten)]
    shared: SharedRunArgs,
}

#[derive(Args)]
struct MatchArgs {
    /// First player as KIND or CSMSM:ROLE
    player_a: String,
    /// Second player as KIND or CSMSM:ROLE
    player_b: String,
    #[arg(long, default_value_t = 50)]
    rounds: u32,
    /// Payoff matrix as T,R,P,S
    #[arg(long)]
    payoffs: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Rounds per match (the n in the formulas)
    #[arg(long, default_value_t = 50)]
    rounds: u32,
    /// Payoff matrix as T,R,P,S
    #[arg(long)]
    payoffs: Option<String>,
    /// Emit key/value CSV rows instead of text
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario descriptor file
    descriptor: PathBuf,
    #[command(flatten)]
    shared: SharedRunArgs,
}

fn parse_payoff_values(s: &str) -> Result<PayoffValues, CmdError> {
    let (t, r, p, v) = parse_payoffs(s).map_err(CmdError::usage)?;
    PayoffValues::new(t, r, p, v).map_err(CmdError::usage)
}

fn layer_from_shared(shared: &SharedRunArgs) -> Result<ConfigLayer, CmdError> {
    Ok(ConfigLayer {
        rounds: shared.rounds,
        generations: shared.generations,
        payoffs: match &shared.payoffs {
            Some(s) => Some(parse_payoffs(s).map_err(CmdError::usage)?),
            None => None,
        },
        p_slave: shared.p_slave,
        seed: shared.seed,
        snapshot_every: shared.snapshot_every,
        workers: shared.workers,
        out: shared.out.clone(),
        freeze_roles: shared.freeze_roles.as_deref().map(|v| v == "on"),
        stop_on_fixation: shared.stop_on_fixation.then_some(true),
        ..ConfigLayer::default()
    })
}

fn resolve_config(
    flag_layer: ConfigLayer,
    config_path: Option<&PathBuf>,
) -> Result<RunConfig, CmdError> {
    let file_layer = match config_path {
        Some(path) => {
            let text = commands::read_file(path)?;
            ConfigLayer::from_config_text(&text).map_err(CmdError::usage)?
        }
        None => ConfigLayer::default(),
    };
    RunConfig::resolve(file_layer.overridden_by(flag_layer)).map_err(CmdError::usage)
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Run(args) => {
            let mut layer = layer_from_shared(&args.shared)?;
            layer.width = args.width;
            layer.height = args.height;
            layer.mix = match &args.mix {
                Some(s) => Some(parse_mix(s).map_err(CmdError::usage)?),
                None => None,
            };
            let config = resolve_config(layer, args.shared.config.as_ref())?;
            let artifacts = commands::execute_run(&config)?;
            println!("{}", artifacts.summary);
            println!("stats: {}", artifacts.stats_path.display());
            Ok(())
        }
        Command::Match(args) => {
            let a: Behavior = args.player_a.parse().map_err(CmdError::usage)?;
            let b: Behavior = args.player_b.parse().map_err(CmdError::usage)?;
            let payoffs = match &args.payoffs {
                Some(s) => parse_payoff_values(s)?,
                None => PayoffValues::CANONICAL,
            };
            let transcript = commands::execute_match(a, b, args.rounds, &payoffs, args.seed)?;
            print!("{transcript}");
            Ok(())
        }
        Command::Analyze(args) => {
            let payoffs = match &args.payoffs {
                Some(s) => parse_payoff_values(s)?,
                None => PayoffValues::CANONICAL,
            };
            let (_, rendering) = commands::execute_analyze(args.rounds, &payoffs, args.csv)?;
            print!("{rendering}");
            Ok(())
        }
        Command::Scenario(args) => {
            let descriptor = commands::read_file(&args.descriptor)?;
            let freeze_override = args.shared.freeze_roles.as_deref().map(|v| v == "on");
            let mut layer = layer_from_shared(&args.shared)?;
            // The descriptor, not the config file, owns the freeze switch;
            // the flag overrides the descriptor explicitly.
            layer.freeze_roles = None;
            let config = resolve_config(layer, args.shared.config.as_ref())?;
            let artifacts = commands::execute_scenario(&descriptor, &config, freeze_override)?;
            println!("{}", artifacts.summary);
            println!("stats: {}", artifacts.stats_path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
