//! The n-round match engine.
//!
//! Drives two strategy machines under the simultaneous-move protocol: both
//! machines commit their moves for a round before either observes the
//! other's. Totals accumulate in `f64`, which is exact for integer-valued
//! payoff matrices.

use thiserror::Error;

use crate::payoff::{Move, PayoffValues};
use crate::strategy::{MachineError, StrategyMachine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("a match needs at least one round")]
    ZeroRounds,
    #[error("machine for player {player} was not reset before the match")]
    MachineNotFresh { player: char },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Full record of one match.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub payoff_a: f64,
    pub payoff_b: f64,
    pub history_a: Vec<Move>,
    pub history_b: Vec<Move>,
    pub rounds: u32,
}

/// Plays one `rounds`-round match between two freshly reset machines.
///
/// Each round both machines emit a move, payoffs accumulate, and then each
/// machine observes the opponent's move. The machines are left in their
/// end-of-match state; reset them before reuse.
pub fn play_match(
    a: &mut StrategyMachine,
    b: &mut StrategyMachine,
    rounds: u32,
    payoffs: &PayoffValues,
) -> Result<MatchResult, MatchError> {
    if rounds == 0 {
        return Err(MatchError::ZeroRounds);
    }
    if !a.is_fresh() {
        return Err(MatchError::MachineNotFresh { player: 'a' });
    }
    if !b.is_fresh() {
        return Err(MatchError::MachineNotFresh { player: 'b' });
    }
    let mut result = MatchResult {
        payoff_a: 0.0,
        payoff_b: 0.0,
        history_a: Vec::with_capacity(rounds as usize),
        history_b: Vec::with_capacity(rounds as usize),
        rounds,
    };
    for _ in 0..rounds {
        let move_a = a.next_move()?;
        let move_b = b.next_move()?;
        let (pa, pb) = payoffs.stage(move_a, move_b);
        result.payoff_a += pa;
        result.payoff_b += pb;
        result.history_a.push(move_a);
        result.history_b.push(move_b);
        a.observe(move_b)?;
        b.observe(move_a)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{Behavior, Role, StrategyKind};

    fn mk(b: Behavior) -> StrategyMachine {
        StrategyMachine::from_behavior(b, None, PayoffValues::CANONICAL).unwrap()
    }

    fn totals(a: Behavior, b: Behavior, rounds: u32) -> (f64, f64) {
        let (mut ma, mut mb) = (mk(a), mk(b));
        let r = play_match(&mut ma, &mut mb, rounds, &PayoffValues::CANONICAL).unwrap();
        (r.payoff_a, r.payoff_b)
    }

    #[test]
    fn tft_pair_earns_full_cooperation() {
        let tft = Behavior::plain(StrategyKind::Tft);
        assert_eq!(totals(tft, tft, 50), (150.0, 150.0));
    }

    #[test]
    fn master_against_tft() {
        let master = Behavior::csmsm(Role::Master);
        let tft = Behavior::plain(StrategyKind::Tft);
        assert_eq!(totals(master, tft, 50), (56.0, 51.0));
    }

    #[test]
    fn alld_pair_earns_mutual_punishment() {
        let alld = Behavior::plain(StrategyKind::AllD);
        assert_eq!(totals(alld, alld, 50), (50.0, 50.0));
    }

    #[test]
    fn master_exploits_slave() {
        let master = Behavior::csmsm(Role::Master);
        let slave = Behavior::csmsm(Role::Slave);
        assert_eq!(totals(master, slave, 50), (231.0, 16.0));
        assert_eq!(totals(slave, master, 50), (16.0, 231.0));
    }

    #[test]
    fn slave_pair_splits_alternation() {
        let slave = Behavior::csmsm(Role::Slave);
        assert_eq!(totals(slave, slave, 50), (100.0, 100.0));
    }

    #[test]
    fn csmsm_against_alld_is_role_free() {
        let alld = Behavior::plain(StrategyKind::AllD);
        for role in [Role::Master, Role::Slave] {
            assert_eq!(totals(Behavior::csmsm(role), alld, 50), (49.0, 54.0));
        }
    }

    #[test]
    fn zero_rounds_rejected() {
        let tft = Behavior::plain(StrategyKind::Tft);
        let (mut a, mut b) = (mk(tft), mk(tft));
        assert_eq!(
            play_match(&mut a, &mut b, 0, &PayoffValues::CANONICAL).unwrap_err(),
            MatchError::ZeroRounds
        );
    }

    #[test]
    fn stale_machine_rejected_until_reset() {
        let tft = Behavior::plain(StrategyKind::Tft);
        let (mut a, mut b) = (mk(tft), mk(tft));
        play_match(&mut a, &mut b, 5, &PayoffValues::CANONICAL).unwrap();
        let mut fresh = mk(tft);
        assert_eq!(
            play_match(&mut a, &mut fresh, 5, &PayoffValues::CANONICAL).unwrap_err(),
            MatchError::MachineNotFresh { player: 'a' }
        );
        a.reset();
        b.reset();
        assert!(play_match(&mut a, &mut b, 5, &PayoffValues::CANONICAL).is_ok());
    }

    #[test]
    fn histories_cover_every_round() {
        let grim = Behavior::plain(StrategyKind::Grim);
        let alld = Behavior::plain(StrategyKind::AllD);
        let (mut a, mut b) = (mk(grim), mk(alld));
        let r = play_match(&mut a, &mut b, 17, &PayoffValues::CANONICAL).unwrap();
        assert_eq!(r.history_a.len(), 17);
        assert_eq!(r.history_b.len(), 17);
        assert_eq!(r.rounds, 17);
    }
}
