//! Cross-checks the strategy machines against an independent oracle.
//!
//! The oracle recomputes each strategy's move directly from the full match
//! histories, with no shared state machinery: at every round it is handed
//! both players' past moves and derives the next move from the strategy
//! definition alone. Any divergence between incremental machine state and
//! the definition shows up as a transcript mismatch.

use ipd_lab::payoff::{Move, PayoffValues};
use ipd_lab::strategy::{
    Behavior, Role, StrategyKind, StrategyMachine, ADAPTIVE_PREFIX, HANDSHAKE,
};

use Move::{C, D};

/// The next move of `b` given both histories so far, straight from the
/// strategy definitions.
fn oracle_move(b: Behavior, own: &[Move], opp: &[Move], payoffs: &PayoffValues) -> Move {
    assert_eq!(own.len(), opp.len());
    let k = own.len();
    match b.kind() {
        StrategyKind::AllC => C,
        StrategyKind::AllD => D,
        StrategyKind::Random => panic!("the oracle only covers deterministic strategies"),
        StrategyKind::Tft => {
            if k == 0 {
                C
            } else {
                opp[k - 1]
            }
        }
        StrategyKind::Tftt => {
            if k >= 2 && opp[k - 1] == D && opp[k - 2] == D {
                D
            } else {
                C
            }
        }
        StrategyKind::Grim => {
            if opp.contains(&D) {
                D
            } else {
                C
            }
        }
        StrategyKind::Adaptive => {
            if k < ADAPTIVE_PREFIX.len() {
                ADAPTIVE_PREFIX[k]
            } else {
                let average = |mv: Move| {
                    let rounds: Vec<f64> = (0..k)
                        .filter(|&i| own[i] == mv)
                        .map(|i| payoffs.stage(own[i], opp[i]).0)
                        .collect();
                    if rounds.is_empty() {
                        0.0
                    } else {
                        rounds.iter().sum::<f64>() / rounds.len() as f64
                    }
                };
                if average(D) > average(C) {
                    D
                } else {
                    C
                }
            }
        }
        StrategyKind::Csmsm => {
            let mismatched = (0..k.min(HANDSHAKE.len())).any(|i| opp[i] != HANDSHAKE[i]);
            if mismatched {
                return D;
            }
            if k < HANDSHAKE.len() {
                return HANDSHAKE[k];
            }
            match b.role().unwrap() {
                Role::Master => {
                    if opp[HANDSHAKE.len()..].contains(&D) {
                        D
                    } else {
                        C
                    }
                }
                Role::Slave => {
                    if k == HANDSHAKE.len() {
                        D
                    } else if opp[HANDSHAKE.len()] == C {
                        // Round 6 cooperation marks a master: serve it.
                        C
                    } else {
                        // Fellow slave: play the reverse of its last move.
                        opp[k - 1].flipped()
                    }
                }
            }
        }
    }
}

fn deterministic_behaviors() -> Vec<Behavior> {
    let mut all = vec![Behavior::csmsm(Role::Master), Behavior::csmsm(Role::Slave)];
    for kind in [
        StrategyKind::Tft,
        StrategyKind::Tftt,
        StrategyKind::Grim,
        StrategyKind::AllC,
        StrategyKind::AllD,
        StrategyKind::Adaptive,
    ] {
        all.push(Behavior::plain(kind));
    }
    all
}

/// Plays an entire match using only the oracle.
fn oracle_match(
    a: Behavior,
    b: Behavior,
    rounds: u32,
    payoffs: &PayoffValues,
) -> (Vec<Move>, Vec<Move>) {
    let mut hist_a = Vec::new();
    let mut hist_b = Vec::new();
    for _ in 0..rounds {
        let ma = oracle_move(a, &hist_a, &hist_b, payoffs);
        let mb = oracle_move(b, &hist_b, &hist_a, payoffs);
        hist_a.push(ma);
        hist_b.push(mb);
    }
    (hist_a, hist_b)
}

#[test]
fn machines_match_the_oracle_on_every_deterministic_pairing() {
    let payoffs = PayoffValues::CANONICAL;
    for &a in &deterministic_behaviors() {
        for &b in &deterministic_behaviors() {
            let (expect_a, expect_b) = oracle_match(a, b, 60, &payoffs);
            let mut ma = StrategyMachine::from_behavior(a, None, payoffs).unwrap();
            let mut mb = StrategyMachine::from_behavior(b, None, payoffs).unwrap();
            let result = ipd_lab::play_match(&mut ma, &mut mb, 60, &payoffs).unwrap();
            assert_eq!(result.history_a, expect_a, "{a} vs {b}");
            assert_eq!(result.history_b, expect_b, "{a} vs {b}");
        }
    }
}

#[test]
fn machines_match_the_oracle_under_noncanonical_payoffs() {
    // Payoff-sensitive play (the adaptive averager) must track the matrix.
    let payoffs = PayoffValues::new(9.0, 6.0, 2.0, -1.0).unwrap();
    let adaptive = Behavior::plain(StrategyKind::Adaptive);
    for &b in &deterministic_behaviors() {
        let (expect_a, expect_b) = oracle_match(adaptive, b, 45, &payoffs);
        let mut ma = StrategyMachine::from_behavior(adaptive, None, payoffs).unwrap();
        let mut mb = StrategyMachine::from_behavior(b, None, payoffs).unwrap();
        let result = ipd_lab::play_match(&mut ma, &mut mb, 45, &payoffs).unwrap();
        assert_eq!(result.history_a, expect_a, "ADAPTIVE vs {b}");
        assert_eq!(result.history_b, expect_b, "ADAPTIVE vs {b}");
    }
}

#[test]
fn collective_machines_always_recognize_each_other() {
    let payoffs = PayoffValues::CANONICAL;
    for role_a in [Role::Master, Role::Slave] {
        for role_b in [Role::Master, Role::Slave] {
            let a = Behavior::csmsm(role_a);
            let b = Behavior::csmsm(role_b);
            let mut ma = StrategyMachine::from_behavior(a, None, payoffs).unwrap();
            let mut mb = StrategyMachine::from_behavior(b, None, payoffs).unwrap();
            let result = ipd_lab::play_match(&mut ma, &mut mb, 12, &payoffs).unwrap();
            // Both sides complete the handshake...
            assert_eq!(&result.history_a[..5], &HANDSHAKE);
            assert_eq!(&result.history_b[..5], &HANDSHAKE);
            // ...and the round-6 moves reveal the roles.
            let sixth = |r: Role| if r == Role::Master { C } else { D };
            assert_eq!(result.history_a[5], sixth(role_a), "{a} vs {b}");
            assert_eq!(result.history_b[5], sixth(role_b), "{a} vs {b}");
        }
    }
}

#[test]
fn collective_machines_punish_every_non_kin_by_round_five() {
    let payoffs = PayoffValues::CANONICAL;
    let non_kin = [
        StrategyKind::Tft,
        StrategyKind::Tftt,
        StrategyKind::Grim,
        StrategyKind::AllC,
        StrategyKind::AllD,
        StrategyKind::Adaptive,
    ];
    for role in [Role::Master, Role::Slave] {
        for kind in non_kin {
            let c = Behavior::csmsm(role);
            let o = Behavior::plain(kind);
            let mut mc = StrategyMachine::from_behavior(c, None, payoffs).unwrap();
            let mut mo = StrategyMachine::from_behavior(o, None, payoffs).unwrap();
            let result = ipd_lab::play_match(&mut mc, &mut mo, 30, &payoffs).unwrap();
            let first_mismatch = (0..5)
                .find(|&i| result.history_b[i] != HANDSHAKE[i])
                .unwrap_or_else(|| panic!("{kind} played the whole handshake"));
            assert!(
                first_mismatch < 5,
                "{kind} must break the script by round 5"
            );
            // From the round after the mismatch on, the collective defects.
            assert!(
                result.history_a[first_mismatch + 1..]
                    .iter()
                    .all(|&m| m == D),
                "{c} vs {o}: expected permanent defection after round {}",
                first_mismatch + 1
            );
        }
    }
}

#[test]
fn collective_totals_against_non_kin_ignore_the_role() {
    let payoffs = PayoffValues::CANONICAL;
    let non_kin = [
        StrategyKind::Tft,
        StrategyKind::Tftt,
        StrategyKind::Grim,
        StrategyKind::AllC,
        StrategyKind::AllD,
        StrategyKind::Adaptive,
    ];
    for kind in non_kin {
        for rounds in [7, 20, 50] {
            let opp = Behavior::plain(kind);
            let totals: Vec<(f64, f64)> = [Role::Master, Role::Slave]
                .iter()
                .map(|&role| {
                    let mut a =
                        StrategyMachine::from_behavior(Behavior::csmsm(role), None, payoffs)
                            .unwrap();
                    let mut b = StrategyMachine::from_behavior(opp, None, payoffs).unwrap();
                    let r = ipd_lab::play_match(&mut a, &mut b, rounds, &payoffs).unwrap();
                    (r.payoff_a, r.payoff_b)
                })
                .collect();
            assert_eq!(totals[0], totals[1], "vs {kind} at {rounds} rounds");
        }
    }
}
