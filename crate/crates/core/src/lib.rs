//! Spatial iterated prisoner's dilemma laboratory.
//!
//! The crate has four layers:
//!
//! - [`payoff`] and [`strategy`]: the stage game and exact strategy state
//!   machines, including the collective handshake strategy with its
//!   master/slave roles.
//! - [`engine`]: the n-round simultaneous-move match driver.
//! - [`analysis`]: closed-form match totals, neighbourhood payoffs and the
//!   exact rational invasion thresholds they imply.
//! - [`grid`], [`scenario`], [`sim`]: the toroidal lattice, hand-placed
//!   cluster scenarios, and best-neighbour imitation dynamics with
//!   per-stream determinism.

pub mod analysis;
pub mod engine;
pub mod grid;
pub mod payoff;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod strategy;

pub use analysis::{
    alld_payoff, master_payoff, pair_payoff, tft_payoff, thresholds, AnalysisError, ClusterVerdict,
    MasterPosition, ThresholdReport, MIN_ANALYSIS_ROUNDS,
};
pub use engine::{play_match, MatchError, MatchResult};
pub use grid::{CellState, GridError, GridState};
pub use payoff::{Move, PayoffError, PayoffValues};
pub use rng::{RngPolicy, StreamPurpose};
pub use scenario::{Scenario, ScenarioError};
pub use sim::{
    run, step_generation, FirstGeneration, GenerationStats, PairTable, RunOptions, RunOutput,
    SimError, SimParams, StepOutcome,
};
pub use strategy::{
    Behavior, MachineError, Role, StrategyKind, StrategyMachine, ALL_KINDS, HANDSHAKE,
};
