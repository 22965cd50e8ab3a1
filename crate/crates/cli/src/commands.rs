//! The four subcommands, as library functions so tests can drive them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ipd_lab::grid::GridState;
use ipd_lab::payoff::PayoffValues;
use ipd_lab::rng::{RngPolicy, StreamPurpose};
use ipd_lab::scenario::Scenario;
use ipd_lab::sim::{run, RunOptions, RunOutput, SimParams};
use ipd_lab::strategy::{Behavior, StrategyKind, StrategyMachine};
use ipd_lab::ThresholdReport;
use thiserror::Error;

use crate::config::RunConfig;
use crate::output;

/// Command failures, split by the exit code they map to: usage/config
/// problems exit 1, I/O problems exit 2.
#[derive(Debug, Error)]
pub enum CmdError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 1,
            CmdError::Io { .. } => 2,
        }
    }

    pub fn usage(e: impl std::fmt::Display) -> CmdError {
        CmdError::Usage(e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CmdError> {
    fs::write(path, contents).map_err(|source| CmdError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path).map_err(|source| CmdError::Io {
        context: format!("reading {}", path.display()),
        source,
    })
}

fn in_worker_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, CmdError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CmdError::Usage(format!("cannot build a {workers}-thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Files produced by a run, plus the summary echoed to stdout.
#[derive(Debug)]
pub struct RunArtifacts {
    pub stats_path: PathBuf,
    pub snapshot_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: String,
}

fn emit_run_files(
    config: &RunConfig,
    initial: &GridState,
    output_run: &RunOutput,
) -> Result<RunArtifacts, CmdError> {
    fs::create_dir_all(&config.out).map_err(|source| CmdError::Io {
        context: format!("creating output directory {}", config.out.display()),
        source,
    })?;

    // A zero-generation run still records what the initial grid looks like.
    let stats_csv = if output_run.stats.is_empty() {
        output::stats_csv(&[ipd_lab::sim::GenerationStats::occupancy_only(initial)])
    } else {
        output::stats_csv(&output_run.stats)
    };
    let stats_path = config.out.join("stats.csv");
    write_file(&stats_path, &stats_csv)?;

    let mut snapshot_paths = Vec::new();
    if config.snapshot_every > 0 && output_run.snapshots.is_empty() && config.generations == 0 {
        let path = config
            .out
            .join(output::snapshot_filename(initial.generation()));
        write_file(&path, &initial.to_snapshot())?;
        snapshot_paths.push(path);
    }
    for (generation, text) in &output_run.snapshots {
        let path = config.out.join(output::snapshot_filename(*generation));
        write_file(&path, text)?;
        snapshot_paths.push(path);
    }

    let summary = output::summary_line(output_run.fixation, &output_run.final_grid);
    let summary_path = config.out.join("summary.txt");
    write_file(&summary_path, &format!("{summary}\n"))?;

    Ok(RunArtifacts {
        stats_path,
        snapshot_paths,
        summary_path,
        summary,
    })
}

/// `run`: random initial mix, full dynamics, file outputs.
pub fn execute_run(config: &RunConfig) -> Result<RunArtifacts, CmdError> {
    let rng = RngPolicy::new(config.seed);
    let grid = GridState::init_random(config.width, config.height, &config.mix, &rng)
        .map_err(CmdError::usage)?;
    let params = SimParams {
        rounds: config.rounds,
        payoffs: config.payoffs,
        p_slave: config.p_slave,
        freeze_roles: config.freeze_roles,
        rng,
    };
    params.validate().map_err(CmdError::usage)?;
    let options = RunOptions {
        snapshot_every: config.snapshot_every,
        stop_on_fixation: config.stop_on_fixation,
        record_first_generation: false,
    };
    let output_run = in_worker_pool(config.workers, || {
        run(grid.clone(), config.generations, &params, &options)
    })?
    .map_err(CmdError::usage)?;
    emit_run_files(config, &grid, &output_run)
}

/// `scenario`: like `run` but from a descriptor file, with a per-cell
/// payoff dump for the first generation.
pub fn execute_scenario(
    descriptor_text: &str,
    config: &RunConfig,
    freeze_override: Option<bool>,
) -> Result<RunArtifacts, CmdError> {
    let scenario = Scenario::parse(descriptor_text).map_err(CmdError::usage)?;
    let grid = scenario.build();
    let params = SimParams {
        rounds: config.rounds,
        payoffs: config.payoffs,
        p_slave: config.p_slave,
        freeze_roles: freeze_override.unwrap_or_else(|| scenario.freeze_roles()),
        rng: RngPolicy::new(config.seed),
    };
    params.validate().map_err(CmdError::usage)?;
    let options = RunOptions {
        snapshot_every: config.snapshot_every,
        stop_on_fixation: config.stop_on_fixation,
        record_first_generation: true,
    };
    let output_run = in_worker_pool(config.workers, || {
        run(grid.clone(), config.generations, &params, &options)
    })?
    .map_err(CmdError::usage)?;
    let artifacts = emit_run_files(config, &grid, &output_run)?;
    if let Some(first) = &output_run.first_generation {
        write_file(
            &config.out.join("payoffs_gen0.csv"),
            &output::payoff_dump(first),
        )?;
    }
    Ok(artifacts)
}

/// `match`: a single match transcript between two behaviors.
pub fn execute_match(
    a: Behavior,
    b: Behavior,
    rounds: u32,
    payoffs: &PayoffValues,
    seed: u64,
) -> Result<String, CmdError> {
    let policy = RngPolicy::new(seed);
    let stream = |behavior: Behavior, purpose| {
        (behavior.kind() == StrategyKind::Random).then(|| policy.stream(purpose, 0, 0))
    };
    let mut machine_a =
        StrategyMachine::from_behavior(a, stream(a, StreamPurpose::MatchSideA), *payoffs)
            .map_err(CmdError::usage)?;
    let mut machine_b =
        StrategyMachine::from_behavior(b, stream(b, StreamPurpose::MatchSideB), *payoffs)
            .map_err(CmdError::usage)?;
    let result = ipd_lab::play_match(&mut machine_a, &mut machine_b, rounds, payoffs)
        .map_err(CmdError::usage)?;

    let mut transcript = format!("# {a} vs {b}, {rounds} rounds, {payoffs}\n");
    transcript.push_str("round a b cum_a cum_b\n");
    let (mut cum_a, mut cum_b) = (0.0, 0.0);
    for i in 0..rounds as usize {
        let (pa, pb) = payoffs.stage(result.history_a[i], result.history_b[i]);
        cum_a += pa;
        cum_b += pb;
        writeln!(
            transcript,
            "{} {} {} {cum_a} {cum_b}",
            i + 1,
            result.history_a[i],
            result.history_b[i]
        )
        .unwrap();
    }
    writeln!(transcript, "total {} {}", result.payoff_a, result.payoff_b).unwrap();
    Ok(transcript)
}

/// `analyze`: threshold report at (rounds, payoffs).
pub fn execute_analyze(
    rounds: u32,
    payoffs: &PayoffValues,
    csv: bool,
) -> Result<(ThresholdReport, String), CmdError> {
    let report = ipd_lab::thresholds(rounds, payoffs).map_err(CmdError::usage)?;
    let rendering = if csv {
        report.render_csv()
    } else {
        report.render_text()
    };
    Ok((report, rendering))
}
