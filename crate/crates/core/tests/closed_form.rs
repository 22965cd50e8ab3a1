//! Analytic invariants of the neighbourhood payoffs and thresholds.

use ipd_lab::payoff::PayoffValues;
use ipd_lab::strategy::{Behavior, Role, StrategyKind};
use ipd_lab::{
    alld_payoff, master_payoff, pair_payoff, play_match, tft_payoff, thresholds, MasterPosition,
    StrategyMachine,
};
use num::ToPrimitive;

fn canonical() -> PayoffValues {
    PayoffValues::CANONICAL
}

#[test]
fn closed_forms_equal_the_engine_for_every_pair_and_length() {
    let payoffs = canonical();
    let covered = [
        Behavior::plain(StrategyKind::Tft),
        Behavior::plain(StrategyKind::AllD),
        Behavior::csmsm(Role::Master),
        Behavior::csmsm(Role::Slave),
    ];
    for n in 7..=200 {
        for &a in &covered {
            for &b in &covered {
                let mut ma = StrategyMachine::from_behavior(a, None, payoffs).unwrap();
                let mut mb = StrategyMachine::from_behavior(b, None, payoffs).unwrap();
                let sim = play_match(&mut ma, &mut mb, n, &payoffs).unwrap();
                let formula = pair_payoff(a, b, n, &payoffs).unwrap();
                assert_eq!(sim.payoff_a, formula, "{a} vs {b} at n={n}");
            }
        }
    }
}

#[test]
fn tft_totals_decrease_with_collective_neighbours() {
    for n in 7..=200 {
        let t: Vec<f64> = (0..=3)
            .map(|k| tft_payoff(k, n, &canonical()).unwrap())
            .collect();
        assert!(t[0] > t[1] && t[1] > t[2] && t[2] > t[3], "n={n}: {t:?}");
    }
}

#[test]
fn alld_totals_increase_with_collective_neighbours() {
    for n in 7..=200 {
        let d: Vec<f64> = (0..=2)
            .map(|k| alld_payoff(k, n, &canonical()).unwrap())
            .collect();
        assert!(d[0] < d[1] && d[1] < d[2], "n={n}: {d:?}");
    }
}

#[test]
fn master_totals_increase_with_slaves_above_the_crossover() {
    // Exploiting a slave beats cooperating with a master once
    // (n-6)T + 3R + 2P + S > (n-2)R + 2P, i.e. n > (6T - 5R - S)/(T - R);
    // canonically that is n > 7.5.
    let p = canonical();
    let crossover = (6.0 * p.t() - 5.0 * p.r() - p.s()) / (p.t() - p.r());
    assert_eq!(crossover, 7.5);
    for n in 8..=200 {
        for (position, max) in [
            (MasterPosition::Center, 8),
            (MasterPosition::Border, 5),
            (MasterPosition::Corner, 3),
        ] {
            for slaves in 1..=max {
                let less = master_payoff(position, slaves - 1, n, &p).unwrap();
                let more = master_payoff(position, slaves, n, &p).unwrap();
                assert!(more > less, "{position} n={n} slaves={slaves}");
            }
        }
    }
}

#[test]
fn corner_masters_never_beat_their_tft_neighbours() {
    let p = canonical();
    for n in 10..=200 {
        let t2 = tft_payoff(2, n, &p).unwrap();
        for q in 0..=3 {
            let c2 = master_payoff(MasterPosition::Corner, q, n, &p).unwrap();
            assert!(c2 < t2, "n={n} q={q}: C2={c2} T2={t2}");
        }
    }
}

#[test]
fn growth_bound_converges_to_its_large_n_limit() {
    let report = thresholds(10_000, &canonical()).unwrap();
    let gap = (&report.growth_l_star - &report.growth_l_star_limit)
        .to_f64()
        .unwrap()
        .abs();
    assert!(gap < 0.1, "gap {gap}");
}

#[test]
fn center_protection_bound_is_tight_at_canonical_values() {
    let p = canonical();
    // Above the bound (n > 16.5) the central master beats the best TFT
    // whatever its slave count; at or below it some slave count fails.
    for n in 17..=40 {
        let t1 = tft_payoff(1, n, &p).unwrap();
        for m in 0..=8 {
            let c0 = master_payoff(MasterPosition::Center, m, n, &p).unwrap();
            assert!(c0 > t1, "n={n} m={m}");
        }
    }
    for n in 7..=16 {
        let t1 = tft_payoff(1, n, &p).unwrap();
        let exposed =
            (0..=8).any(|m| master_payoff(MasterPosition::Center, m, n, &p).unwrap() <= t1);
        assert!(exposed, "n={n} should leave some slave count unprotected");
    }
}

#[test]
fn hold_interval_is_ordered_whenever_the_regime_is_nonempty() {
    // The shared denominator n(T-R) - 6T + 5R + S is 2n - 15 canonically:
    // positive from n = 8 on, where the hold regime exists; at n = 7 it is
    // negative and the interval degenerates.
    for n in 8..=200 {
        let report = thresholds(n, &canonical()).unwrap();
        assert!(report.hold_interval.0 < report.hold_interval.1, "n={n}");
    }
    let degenerate = thresholds(7, &canonical()).unwrap();
    assert!(degenerate.hold_interval.0 > degenerate.hold_interval.1);
}

#[test]
fn neighbourhood_totals_decompose_into_pair_payoffs() {
    // T_k and D_k are sums of eight pair totals; check the decomposition
    // against the pair table itself.
    let p = canonical();
    let tft = Behavior::plain(StrategyKind::Tft);
    let alld = Behavior::plain(StrategyKind::AllD);
    let master = Behavior::csmsm(Role::Master);
    for n in [7u32, 50, 137] {
        let vs_tft = pair_payoff(tft, tft, n, &p).unwrap();
        let vs_csmsm = pair_payoff(tft, master, n, &p).unwrap();
        for k in 0..=3 {
            assert_eq!(
                tft_payoff(k, n, &p).unwrap(),
                (8 - k) as f64 * vs_tft + k as f64 * vs_csmsm
            );
        }
        let d_vs_alld = pair_payoff(alld, alld, n, &p).unwrap();
        let d_vs_csmsm = pair_payoff(alld, master, n, &p).unwrap();
        for k in 0..=2 {
            assert_eq!(
                alld_payoff(k, n, &p).unwrap(),
                (8 - k) as f64 * d_vs_alld + k as f64 * d_vs_csmsm
            );
        }
    }
}
