//! Strategy state machines: the collective handshake strategy and the
//! classic opponents it competes against.
//!
//! Every machine is driven through the same two-phase protocol: `next_move`
//! emits this round's move, then `observe` feeds back the opponent's move
//! for the same round. The two calls strictly alternate, starting with
//! `next_move`, so a machine can never see the opponent's current-round
//! choice before committing its own.
//!
//! The collective strategy (CSMSM) opens every match with the fixed
//! handshake C,D,C,C,D. An opponent that echoes the sequence is recognized
//! as kin; any deviation triggers unconditional defection for the rest of
//! the match. After mutual recognition the machine's role takes over:
//! masters play a grim trigger over the post-handshake rounds, slaves defect
//! once at round 6 and then either serve a recognized master with permanent
//! cooperation or mirror the inverse of a fellow slave's previous move.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::payoff::{Move, PayoffValues};

/// The fixed opening sequence used for kin recognition.
pub const HANDSHAKE: [Move; 5] = [Move::C, Move::D, Move::C, Move::C, Move::D];

/// Scripted opening of the adaptive strategy (rounds 1-10).
pub const ADAPTIVE_PREFIX: [Move; 10] = [
    Move::C,
    Move::C,
    Move::C,
    Move::C,
    Move::C,
    Move::C,
    Move::D,
    Move::D,
    Move::D,
    Move::D,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Csmsm,
    Tft,
    Tftt,
    Grim,
    AllC,
    AllD,
    Random,
    Adaptive,
}

/// All kinds, in the canonical reporting order used by stats and CSV output.
pub const ALL_KINDS: [StrategyKind; 8] = [
    StrategyKind::Csmsm,
    StrategyKind::Tft,
    StrategyKind::Tftt,
    StrategyKind::Grim,
    StrategyKind::AllC,
    StrategyKind::AllD,
    StrategyKind::Random,
    StrategyKind::Adaptive,
];

impl StrategyKind {
    /// The exact token used in CLI arguments, config files and CSV headers.
    pub fn token(self) -> &'static str {
        match self {
            StrategyKind::Csmsm => "CSMSM",
            StrategyKind::Tft => "TFT",
            StrategyKind::Tftt => "TFTT",
            StrategyKind::Grim => "GRIM",
            StrategyKind::AllC => "ALLC",
            StrategyKind::AllD => "ALLD",
            StrategyKind::Random => "RANDOM",
            StrategyKind::Adaptive => "ADAPTIVE",
        }
    }

    pub fn index(self) -> usize {
        ALL_KINDS.iter().position(|k| *k == self).unwrap()
    }

    /// True for every kind whose play involves no random draws.
    pub fn is_deterministic(self) -> bool {
        self != StrategyKind::Random
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for StrategyKind {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_KINDS
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| MachineError::UnknownKind(s.to_string()))
    }
}

/// Intra-group role of a collective-strategy player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Master,
    Slave,
}

impl Role {
    pub fn token(self) -> &'static str {
        match self {
            Role::Master => "MASTER",
            Role::Slave => "SLAVE",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Role {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MASTER" => Ok(Role::Master),
            "SLAVE" => Ok(Role::Slave),
            _ => Err(MachineError::UnknownRole(s.to_string())),
        }
    }
}

/// A strategy kind plus its role, when the kind carries one.
///
/// This is the full phenotype of a player: two machines with equal
/// `Behavior` play identically (up to their random streams).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Behavior {
    kind: StrategyKind,
    role: Option<Role>,
}

impl Behavior {
    pub fn new(kind: StrategyKind, role: Option<Role>) -> Result<Behavior, MachineError> {
        match (kind, role) {
            (StrategyKind::Csmsm, None) => Err(MachineError::MissingRole),
            (StrategyKind::Csmsm, Some(_)) => Ok(Behavior { kind, role }),
            (_, Some(_)) => Err(MachineError::RoleOnNonCsmsm(kind)),
            (_, None) => Ok(Behavior { kind, role: None }),
        }
    }

    pub fn csmsm(role: Role) -> Behavior {
        Behavior {
            kind: StrategyKind::Csmsm,
            role: Some(role),
        }
    }

    /// Behavior of a plain (non-collective) kind. Panics on CSMSM, which
    /// always needs a role.
    pub fn plain(kind: StrategyKind) -> Behavior {
        Behavior::new(kind, None).expect("plain() requires a role-free kind")
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn role(&self) -> Option<Role> {
        self.role
    }

    pub fn is_deterministic(&self) -> bool {
        self.kind.is_deterministic()
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Some(role) => write!(f, "{}:{}", self.kind, role),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl FromStr for Behavior {
    type Err = MachineError;

    /// Parses `KIND` or `KIND:ROLE` tokens, e.g. `TFT` or `CSMSM:MASTER`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((kind, role)) => Behavior::new(kind.parse()?, Some(role.parse()?)),
            None => Behavior::new(s.parse()?, None),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MachineError {
    #[error("unknown strategy kind {0:?}; valid tokens: CSMSM, TFT, TFTT, GRIM, ALLC, ALLD, RANDOM, ADAPTIVE")]
    UnknownKind(String),
    #[error("unknown role {0:?}; valid tokens: MASTER, SLAVE")]
    UnknownRole(String),
    #[error("a role can only be assigned to CSMSM, not {0}")]
    RoleOnNonCsmsm(StrategyKind),
    #[error("CSMSM machines need a MASTER or SLAVE role")]
    MissingRole,
    #[error("RANDOM machines need an rng stream")]
    MissingRng,
    #[error("an rng stream was supplied for {0}, which never draws from it")]
    RngOnDeterministic(StrategyKind),
    #[error("protocol violation: observe called before next_move")]
    ObserveBeforeMove,
    #[error("protocol violation: next_move called twice without an observe between")]
    MoveBeforeObserve,
}

#[derive(Clone, Debug)]
enum CsmsmPhase {
    /// Still inside the scripted opening; `round` doubles as the position.
    Handshake,
    /// Opponent broke the script: defect for the rest of the match.
    Punish,
    /// Recognized kin, master role, no defection seen after the handshake.
    MasterPeace,
    /// Recognized kin, master role, retaliating forever.
    MasterRetaliate,
    /// Recognized kin, slave role, about to defect once at round 6.
    SlaveSignal,
    /// Opponent answered round 6 with C: it is a master, serve it forever.
    SlaveServe,
    /// Opponent answered round 6 with D: fellow slave, mirror the inverse
    /// of its previous move.
    SlaveMirror { last_opp: Move },
}

#[derive(Clone, Debug, Default)]
struct MoveTally {
    payoff_sum: f64,
    count: u32,
}

impl MoveTally {
    fn average(&self) -> Option<f64> {
        (self.count > 0).then(|| self.payoff_sum / self.count as f64)
    }
}

#[derive(Clone, Debug)]
enum KindState {
    Stateless,
    Random,
    Tft {
        last_opp: Option<Move>,
    },
    Tftt {
        prev: Option<Move>,
        before_prev: Option<Move>,
    },
    Grim {
        triggered: bool,
    },
    Adaptive {
        after_c: MoveTally,
        after_d: MoveTally,
    },
    Csmsm(CsmsmPhase),
}

/// A resettable per-match strategy state machine.
///
/// The machine carries its payoff matrix because the adaptive strategy
/// scores its own past moves; every other kind ignores it.
#[derive(Clone, Debug)]
pub struct StrategyMachine {
    behavior: Behavior,
    payoffs: PayoffValues,
    rng: Option<ChaCha8Rng>,
    state: KindState,
    /// Completed rounds, i.e. the number of observes so far.
    round: u32,
    /// Set between next_move and the matching observe.
    pending: Option<Move>,
}

impl StrategyMachine {
    /// Builds a machine in its round-0 state.
    ///
    /// A role must be supplied exactly for CSMSM and an rng stream exactly
    /// for RANDOM.
    pub fn new(
        kind: StrategyKind,
        role: Option<Role>,
        rng: Option<ChaCha8Rng>,
        payoffs: PayoffValues,
    ) -> Result<StrategyMachine, MachineError> {
        let behavior = Behavior::new(kind, role)?;
        match (kind, &rng) {
            (StrategyKind::Random, None) => return Err(MachineError::MissingRng),
            (StrategyKind::Random, Some(_)) => {}
            (_, Some(_)) => return Err(MachineError::RngOnDeterministic(kind)),
            (_, None) => {}
        }
        Ok(StrategyMachine {
            behavior,
            payoffs,
            rng,
            state: Self::initial_state(kind),
            round: 0,
            pending: None,
        })
    }

    pub fn from_behavior(
        behavior: Behavior,
        rng: Option<ChaCha8Rng>,
        payoffs: PayoffValues,
    ) -> Result<StrategyMachine, MachineError> {
        StrategyMachine::new(behavior.kind(), behavior.role(), rng, payoffs)
    }

    fn initial_state(kind: StrategyKind) -> KindState {
        match kind {
            StrategyKind::AllC | StrategyKind::AllD => KindState::Stateless,
            StrategyKind::Random => KindState::Random,
            StrategyKind::Tft => KindState::Tft { last_opp: None },
            StrategyKind::Tftt => KindState::Tftt {
                prev: None,
                before_prev: None,
            },
            StrategyKind::Grim => KindState::Grim { triggered: false },
            StrategyKind::Adaptive => KindState::Adaptive {
                after_c: MoveTally::default(),
                after_d: MoveTally::default(),
            },
            StrategyKind::Csmsm => KindState::Csmsm(CsmsmPhase::Handshake),
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.behavior.kind()
    }

    pub fn role(&self) -> Option<Role> {
        self.behavior.role()
    }

    pub fn behavior(&self) -> Behavior {
        self.behavior
    }

    /// Completed rounds so far.
    pub fn round(&self) -> u32 {
        self.round
    }

    /// True iff the machine is in its round-0 state and may start a match.
    pub fn is_fresh(&self) -> bool {
        self.round == 0 && self.pending.is_none()
    }

    /// Restores the round-0 state. The role survives (roles are
    /// per-generation, not per-match); a RANDOM machine keeps consuming the
    /// same stream rather than replaying it.
    pub fn reset(&mut self) {
        self.state = Self::initial_state(self.kind());
        self.round = 0;
        self.pending = None;
    }

    /// Emits this round's move. Must alternate with `observe`.
    pub fn next_move(&mut self) -> Result<Move, MachineError> {
        if self.pending.is_some() {
            return Err(MachineError::MoveBeforeObserve);
        }
        let mv = match &self.state {
            KindState::Stateless => match self.kind() {
                StrategyKind::AllC => Move::C,
                StrategyKind::AllD => Move::D,
                _ => unreachable!(),
            },
            KindState::Random => {
                let rng = self.rng.as_mut().expect("RANDOM machine carries a stream");
                if rng.gen_bool(0.5) {
                    Move::C
                } else {
                    Move::D
                }
            }
            KindState::Tft { last_opp } => last_opp.unwrap_or(Move::C),
            KindState::Tftt { prev, before_prev } => {
                if *prev == Some(Move::D) && *before_prev == Some(Move::D) {
                    Move::D
                } else {
                    Move::C
                }
            }
            KindState::Grim { triggered } => {
                if *triggered {
                    Move::D
                } else {
                    Move::C
                }
            }
            KindState::Adaptive { after_c, after_d } => {
                if (self.round as usize) < ADAPTIVE_PREFIX.len() {
                    ADAPTIVE_PREFIX[self.round as usize]
                } else {
                    // Higher average own payoff wins; ties cooperate.
                    let avg_c = after_c.average().unwrap_or(0.0);
                    let avg_d = after_d.average().unwrap_or(0.0);
                    if avg_d > avg_c {
                        Move::D
                    } else {
                        Move::C
                    }
                }
            }
            KindState::Csmsm(phase) => match phase {
                CsmsmPhase::Handshake => HANDSHAKE[self.round as usize],
                CsmsmPhase::Punish => Move::D,
                CsmsmPhase::MasterPeace => Move::C,
                CsmsmPhase::MasterRetaliate => Move::D,
                CsmsmPhase::SlaveSignal => Move::D,
                CsmsmPhase::SlaveServe => Move::C,
                CsmsmPhase::SlaveMirror { last_opp } => last_opp.flipped(),
            },
        };
        self.pending = Some(mv);
        Ok(mv)
    }

    /// Feeds back the opponent's move for the round opened by the last
    /// `next_move`.
    pub fn observe(&mut self, opp: Move) -> Result<(), MachineError> {
        let own = self.pending.take().ok_or(MachineError::ObserveBeforeMove)?;
        let round = self.round;
        let role = self.behavior.role();
        match &mut self.state {
            KindState::Stateless | KindState::Random => {}
            KindState::Tft { last_opp } => *last_opp = Some(opp),
            KindState::Tftt { prev, before_prev } => {
                *before_prev = *prev;
                *prev = Some(opp);
            }
            KindState::Grim { triggered } => {
                if opp == Move::D {
                    *triggered = true;
                }
            }
            KindState::Adaptive { after_c, after_d } => {
                let (own_payoff, _) = self.payoffs.stage(own, opp);
                let tally = match own {
                    Move::C => after_c,
                    Move::D => after_d,
                };
                tally.payoff_sum += own_payoff;
                tally.count += 1;
            }
            KindState::Csmsm(phase) => {
                *phase = match phase {
                    CsmsmPhase::Handshake => {
                        if opp != HANDSHAKE[round as usize] {
                            CsmsmPhase::Punish
                        } else if (round as usize) + 1 < HANDSHAKE.len() {
                            CsmsmPhase::Handshake
                        } else {
                            // All five opening moves matched: kin recognized.
                            match role.expect("CSMSM carries a role") {
                                Role::Master => CsmsmPhase::MasterPeace,
                                Role::Slave => CsmsmPhase::SlaveSignal,
                            }
                        }
                    }
                    CsmsmPhase::Punish => CsmsmPhase::Punish,
                    CsmsmPhase::MasterPeace => {
                        if opp == Move::D {
                            CsmsmPhase::MasterRetaliate
                        } else {
                            CsmsmPhase::MasterPeace
                        }
                    }
                    CsmsmPhase::MasterRetaliate => CsmsmPhase::MasterRetaliate,
                    CsmsmPhase::SlaveSignal => {
                        // The opponent's round-6 move reveals its role.
                        if opp == Move::C {
                            CsmsmPhase::SlaveServe
                        } else {
                            CsmsmPhase::SlaveMirror { last_opp: opp }
                        }
                    }
                    CsmsmPhase::SlaveServe => CsmsmPhase::SlaveServe,
                    CsmsmPhase::SlaveMirror { .. } => CsmsmPhase::SlaveMirror { last_opp: opp },
                };
            }
        }
        self.round += 1;
        Ok(())
    }
}
