//! Generation dynamics on the lattice.
//!
//! One generation runs four phases in order: role flips, matches, stats,
//! synchronous imitation. Every phase is computed cell-by-cell (or
//! edge-by-edge) from per-purpose rng streams, so the result is bitwise
//! identical whatever the evaluation order or rayon worker count.
//!
//! Matches between deterministic behaviors depend only on the two
//! phenotypes, so a run plays each such pairing once up front (`PairTable`)
//! and a 200x200 generation costs table lookups instead of 80k simulated
//! matches. Matches involving RANDOM cells are simulated per edge from the
//! edge's own streams; both endpoint cells replay the same match, which
//! keeps the accumulation free of shared state.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::play_match;
use crate::grid::{CellState, GridState};
use crate::payoff::PayoffValues;
use crate::rng::{RngPolicy, StreamPurpose};
use crate::strategy::{Behavior, Role, StrategyKind, StrategyMachine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("slave probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("matches need at least one round")]
    ZeroRounds,
}

/// Fixed per-run simulation parameters.
#[derive(Clone, Copy, Debug)]
pub struct SimParams {
    pub rounds: u32,
    pub payoffs: PayoffValues,
    /// Probability that a master flips to slave at the start of a generation.
    pub p_slave: f64,
    /// Disables role flips entirely (analysis scenarios).
    pub freeze_roles: bool,
    pub rng: RngPolicy,
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.rounds == 0 {
            return Err(SimError::ZeroRounds);
        }
        if !(self.p_slave >= 0.0 && self.p_slave <= 1.0) {
            return Err(SimError::InvalidProbability(self.p_slave));
        }
        Ok(())
    }
}

/// The eight behaviors whose matches are pure functions of the pairing.
const DETERMINISTIC_BEHAVIORS: [(StrategyKind, Option<Role>); 8] = [
    (StrategyKind::Csmsm, Some(Role::Master)),
    (StrategyKind::Csmsm, Some(Role::Slave)),
    (StrategyKind::Tft, None),
    (StrategyKind::Tftt, None),
    (StrategyKind::Grim, None),
    (StrategyKind::AllC, None),
    (StrategyKind::AllD, None),
    (StrategyKind::Adaptive, None),
];

fn behavior_slot(b: Behavior) -> Option<usize> {
    DETERMINISTIC_BEHAVIORS
        .iter()
        .position(|&(kind, role)| b.kind() == kind && b.role() == role)
}

/// Precomputed totals for every ordered pair of deterministic behaviors at
/// fixed (rounds, payoffs).
#[derive(Clone, Debug)]
pub struct PairTable {
    rounds: u32,
    payoffs: PayoffValues,
    totals: [[(f64, f64); 8]; 8],
}

impl PairTable {
    pub fn build(rounds: u32, payoffs: &PayoffValues) -> Result<PairTable, SimError> {
        if rounds == 0 {
            return Err(SimError::ZeroRounds);
        }
        let mut totals = [[(0.0, 0.0); 8]; 8];
        for (i, &(kind_a, role_a)) in DETERMINISTIC_BEHAVIORS.iter().enumerate() {
            for (j, &(kind_b, role_b)) in DETERMINISTIC_BEHAVIORS.iter().enumerate() {
                let mut a = StrategyMachine::new(kind_a, role_a, None, *payoffs)
                    .expect("deterministic behaviors are constructible");
                let mut b = StrategyMachine::new(kind_b, role_b, None, *payoffs)
                    .expect("deterministic behaviors are constructible");
                let result = play_match(&mut a, &mut b, rounds, payoffs)
                    .expect("fresh machines and rounds >= 1");
                totals[i][j] = (result.payoff_a, result.payoff_b);
            }
        }
        Ok(PairTable {
            rounds,
            payoffs: *payoffs,
            totals,
        })
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Totals for an ordered pair, or None when either side is RANDOM.
    pub fn lookup(&self, a: Behavior, b: Behavior) -> Option<(f64, f64)> {
        Some(self.totals[behavior_slot(a)?][behavior_slot(b)?])
    }
}

/// Per-generation aggregates, computed from the post-flip (pre-imitation)
/// occupancy and the payoffs it earned.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: u64,
    pub total_cells: u64,
    /// Cell counts in `ALL_KINDS` order.
    pub kind_counts: [u64; 8],
    pub master_count: u64,
    pub slave_count: u64,
    /// Average payoff per move by kind (the CSMSM slot covers both roles);
    /// zero when the group is empty.
    pub kind_avg_payoff_per_move: [f64; 8],
    pub master_avg_payoff_per_move: f64,
    pub slave_avg_payoff_per_move: f64,
}

impl GenerationStats {
    fn compute(played: &GridState, totals: &[f64], rounds: u32) -> GenerationStats {
        let mut kind_counts = [0u64; 8];
        let mut kind_sums = [0f64; 8];
        let mut master_count = 0u64;
        let mut slave_count = 0u64;
        let mut master_sum = 0f64;
        let mut slave_sum = 0f64;
        for (cell, &total) in played.cells().iter().zip(totals) {
            let k = cell.kind().index();
            kind_counts[k] += 1;
            kind_sums[k] += total;
            match cell.role() {
                Some(Role::Master) => {
                    master_count += 1;
                    master_sum += total;
                }
                Some(Role::Slave) => {
                    slave_count += 1;
                    slave_sum += total;
                }
                None => {}
            }
        }
        let moves_per_cell = 8.0 * rounds as f64;
        let avg = |sum: f64, count: u64| {
            if count == 0 {
                0.0
            } else {
                sum / (count as f64 * moves_per_cell)
            }
        };
        let mut kind_avg_payoff_per_move = [0f64; 8];
        for k in 0..8 {
            kind_avg_payoff_per_move[k] = avg(kind_sums[k], kind_counts[k]);
        }
        GenerationStats {
            generation: played.generation(),
            total_cells: played.cell_count() as u64,
            kind_counts,
            master_count,
            slave_count,
            kind_avg_payoff_per_move,
            master_avg_payoff_per_move: avg(master_sum, master_count),
            slave_avg_payoff_per_move: avg(slave_sum, slave_count),
        }
    }

    /// Occupancy-only stats for a grid that has not played (payoff columns
    /// all zero); used for zero-generation runs.
    pub fn occupancy_only(grid: &GridState) -> GenerationStats {
        let zeros = vec![0.0; grid.cell_count()];
        // rounds value is irrelevant with all-zero totals
        GenerationStats::compute(grid, &zeros, 1)
    }

    pub fn kind_fraction(&self, kind: StrategyKind) -> f64 {
        self.kind_counts[kind.index()] as f64 / self.total_cells as f64
    }

    pub fn master_fraction(&self) -> f64 {
        self.master_count as f64 / self.total_cells as f64
    }

    pub fn slave_fraction(&self) -> f64 {
        self.slave_count as f64 / self.total_cells as f64
    }

    pub fn csmsm_avg_payoff_per_move(&self) -> f64 {
        self.kind_avg_payoff_per_move[StrategyKind::Csmsm.index()]
    }
}

/// Everything one generation produced.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    /// The grid after imitation, generation counter incremented.
    pub next: GridState,
    /// The occupancy that actually played this generation: post-flip,
    /// pre-imitation, same generation counter as the input grid.
    pub played: GridState,
    /// Per-cell neighbourhood totals earned by `played`.
    pub payoffs: Vec<f64>,
    pub stats: GenerationStats,
}

fn flip_roles(grid: &GridState, params: &SimParams) -> GridState {
    let generation = grid.generation();
    let mut played = grid.clone();
    if params.freeze_roles || params.p_slave == 0.0 {
        return played;
    }
    let flipped: Vec<CellState> = grid
        .cells()
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            if cell.kind() == StrategyKind::Csmsm && cell.role() == Some(Role::Master) {
                let mut rng = params
                    .rng
                    .stream(StreamPurpose::RoleFlip, generation, i as u64);
                if rng.gen_bool(params.p_slave) {
                    return CellState::csmsm(Role::Slave);
                }
            }
            *cell
        })
        .collect();
    for (i, cell) in flipped.into_iter().enumerate() {
        played.set_cell(i, cell);
    }
    played
}

/// Plays the unordered edge (lo, hi) from its canonical orientation and
/// returns (payoff of lo, payoff of hi). RANDOM machines draw from streams
/// keyed by the edge id, so both endpoints reconstruct the same match.
fn play_edge(lo: usize, hi: usize, played: &GridState, params: &SimParams) -> (f64, f64) {
    debug_assert!(lo < hi);
    let edge_id = lo as u64 * played.cell_count() as u64 + hi as u64;
    let generation = played.generation();
    let machine = |cell: CellState, purpose: StreamPurpose| {
        let rng = (cell.kind() == StrategyKind::Random)
            .then(|| params.rng.stream(purpose, generation, edge_id));
        StrategyMachine::from_behavior(cell.behavior(), rng, params.payoffs)
            .expect("cell states hold valid behaviors")
    };
    let mut a = machine(played.cell(lo), StreamPurpose::MatchSideA);
    let mut b = machine(played.cell(hi), StreamPurpose::MatchSideB);
    let result = play_match(&mut a, &mut b, params.rounds, &params.payoffs)
        .expect("fresh machines and validated rounds");
    (result.payoff_a, result.payoff_b)
}

fn neighbourhood_totals(
    played: &GridState,
    params: &SimParams,
    table: Option<&PairTable>,
) -> Vec<f64> {
    (0..played.cell_count())
        .into_par_iter()
        .map(|i| {
            let my_behavior = played.cell(i).behavior();
            played
                .neighbors(i)
                .iter()
                .map(|&j| {
                    if let Some(table) = table {
                        if let Some((mine, _)) =
                            table.lookup(my_behavior, played.cell(j).behavior())
                        {
                            return mine;
                        }
                    }
                    let (lo, hi) = (i.min(j), i.max(j));
                    let (pay_lo, pay_hi) = play_edge(lo, hi, played, params);
                    if i == lo {
                        pay_lo
                    } else {
                        pay_hi
                    }
                })
                .sum()
        })
        .collect()
}

fn imitate(played: &GridState, totals: &[f64], params: &SimParams) -> Vec<CellState> {
    let generation = played.generation();
    (0..played.cell_count())
        .into_par_iter()
        .map(|i| {
            let own = totals[i];
            let nbrs = played.neighbors(i);
            let mut best = f64::NEG_INFINITY;
            for &j in &nbrs {
                if totals[j] > best {
                    best = totals[j];
                }
            }
            // Incumbents keep their site on ties; only a strictly greater
            // neighbour replaces them.
            if best <= own {
                return played.cell(i);
            }
            let mut winners = [0usize; 8];
            let mut winner_count = 0;
            for &j in &nbrs {
                if totals[j] == best {
                    winners[winner_count] = j;
                    winner_count += 1;
                }
            }
            let chosen = if winner_count == 1 {
                winners[0]
            } else {
                let mut rng = params
                    .rng
                    .stream(StreamPurpose::Imitation, generation, i as u64);
                winners[rng.gen_range(0..winner_count)]
            };
            // The full phenotype is copied: kind and role.
            played.cell(chosen)
        })
        .collect()
}

/// Advances the grid by one generation.
///
/// With a `PairTable` (built for the same rounds and payoffs) deterministic
/// pairings are looked up instead of replayed; without one every edge is
/// simulated. Both paths produce identical results.
pub fn step_generation(
    grid: &GridState,
    params: &SimParams,
    table: Option<&PairTable>,
) -> Result<StepOutcome, SimError> {
    params.validate()?;
    if let Some(table) = table {
        assert_eq!(
            (table.rounds, table.payoffs),
            (params.rounds, params.payoffs),
            "pair table was built for different match parameters"
        );
    }
    let played = flip_roles(grid, params);
    let payoffs = neighbourhood_totals(&played, params, table);
    let stats = GenerationStats::compute(&played, &payoffs, params.rounds);
    let next_cells = imitate(&played, &payoffs, params);
    let mut next = played.clone();
    for (i, cell) in next_cells.into_iter().enumerate() {
        next.set_cell(i, cell);
    }
    next.set_generation(grid.generation() + 1);
    Ok(StepOutcome {
        next,
        played,
        payoffs,
        stats,
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Emit a snapshot of the played occupancy every this many generations
    /// (0 disables snapshots).
    pub snapshot_every: u64,
    /// Stop as soon as one kind occupies the whole grid.
    pub stop_on_fixation: bool,
    /// Keep the first generation's played cells and per-cell payoffs.
    pub record_first_generation: bool,
}

/// Played occupancy and payoffs of the first generation of a run.
#[derive(Clone, Debug)]
pub struct FirstGeneration {
    pub played: GridState,
    pub payoffs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub final_grid: GridState,
    pub stats: Vec<GenerationStats>,
    /// (generation, snapshot text) pairs at the configured interval.
    pub snapshots: Vec<(u64, String)>,
    /// First generation counter at which a single kind held every cell.
    pub fixation: Option<(u64, StrategyKind)>,
    pub first_generation: Option<FirstGeneration>,
}

/// Runs `generations` steps, collecting stats, snapshots and the fixation
/// generation.
pub fn run(
    grid: GridState,
    generations: u64,
    params: &SimParams,
    options: &RunOptions,
) -> Result<RunOutput, SimError> {
    params.validate()?;
    let table = PairTable::build(params.rounds, &params.payoffs)?;
    let mut current = grid;
    let mut stats = Vec::new();
    let mut snapshots = Vec::new();
    let mut first_generation = None;
    let mut fixation = current
        .homogeneous_kind()
        .map(|k| (current.generation(), k));
    for step in 0..generations {
        if options.stop_on_fixation && fixation.is_some() {
            break;
        }
        let outcome = step_generation(&current, params, Some(&table))?;
        if options.snapshot_every > 0 && outcome.played.generation() % options.snapshot_every == 0 {
            snapshots.push((outcome.played.generation(), outcome.played.to_snapshot()));
        }
        if options.record_first_generation && step == 0 {
            first_generation = Some(FirstGeneration {
                played: outcome.played.clone(),
                payoffs: outcome.payoffs.clone(),
            });
        }
        stats.push(outcome.stats);
        current = outcome.next;
        if fixation.is_none() {
            if let Some(kind) = current.homogeneous_kind() {
                fixation = Some((current.generation(), kind));
            }
        }
    }
    Ok(RunOutput {
        final_grid: current,
        stats,
        snapshots,
        fixation,
        first_generation,
    })
}
