//! Closed-form match totals and cluster-invasion thresholds.
//!
//! These formulas are the analytic counterpart of the match engine: for the
//! four behaviors they cover (TFT, ALLD and the two collective roles) the
//! closed forms must reproduce `play_match` totals exactly, and the engine
//! tests hold them to integer equality at canonical payoffs.
//!
//! Threshold bounds are computed in exact rational arithmetic so strict
//! inequalities like l > 302/85 can be decided without rounding.

use std::fmt;
use std::fmt::Write as _;

use num::rational::BigRational;
use num::ToPrimitive;
use thiserror::Error;

use crate::payoff::PayoffValues;
use crate::strategy::{Behavior, Role, StrategyKind};

/// Matches shorter than this have no closed-form row: the master/slave
/// formulas carry (n-6) terms.
pub const MIN_ANALYSIS_ROUNDS: u32 = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no closed form covers the pair {a} vs {b}; run the match engine instead")]
    UncoveredPair { a: Behavior, b: Behavior },
    #[error("closed forms need n >= {MIN_ANALYSIS_ROUNDS} rounds, got {0}")]
    RoundsTooSmall(u32),
    #[error(
        "{position} position admits at most {max} collective neighbours of which slaves, got {got}"
    )]
    SlaveCountOutOfRange {
        position: MasterPosition,
        max: u32,
        got: u32,
    },
    #[error("neighbour count out of range: at most {max} collective neighbours here, got {got}")]
    NeighborCountOutOfRange { max: u32, got: u32 },
    #[error("the growth bound denominator n(T-R) - 6T + 5R + S is zero at n={n} for {payoffs}")]
    GrowthDenominatorZero { n: u32, payoffs: PayoffValues },
}

/// The four behaviors the closed forms cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Actor {
    Tft,
    AllD,
    Master,
    Slave,
}

fn classify(b: Behavior) -> Option<Actor> {
    match (b.kind(), b.role()) {
        (StrategyKind::Tft, None) => Some(Actor::Tft),
        (StrategyKind::AllD, None) => Some(Actor::AllD),
        (StrategyKind::Csmsm, Some(Role::Master)) => Some(Actor::Master),
        (StrategyKind::Csmsm, Some(Role::Slave)) => Some(Actor::Slave),
        _ => None,
    }
}

/// Closed-form total for `a` over an n-round match against `b`.
///
/// Must equal `play_match` exactly; pairs outside the covered four-behavior
/// table are an error directing the caller to the engine.
pub fn pair_payoff(
    a: Behavior,
    b: Behavior,
    n: u32,
    p: &PayoffValues,
) -> Result<f64, AnalysisError> {
    if n < MIN_ANALYSIS_ROUNDS {
        return Err(AnalysisError::RoundsTooSmall(n));
    }
    let (actor_a, actor_b) = match (classify(a), classify(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(AnalysisError::UncoveredPair { a, b }),
    };
    let nf = n as f64;
    let (t, r, pp, s) = (p.t(), p.r(), p.p(), p.s());
    use Actor::*;
    let total = match (actor_a, actor_b) {
        (Tft, Tft) => nf * r,
        // Both collective roles defect identically against non-kin, so the
        // TFT and ALLD rows do not depend on the opposing role.
        (Tft, Master) | (Tft, Slave) => r + (nf - 2.0) * pp + s,
        (Master, Tft) | (Slave, Tft) => t + r + (nf - 2.0) * pp,
        (Tft, AllD) => s + (nf - 1.0) * pp,
        (AllD, Tft) => t + (nf - 1.0) * pp,
        (AllD, AllD) => nf * pp,
        (AllD, Master) | (AllD, Slave) => t + (nf - 1.0) * pp,
        (Master, AllD) | (Slave, AllD) => (nf - 1.0) * pp + s,
        (Master, Master) => (nf - 2.0) * r + 2.0 * pp,
        (Master, Slave) => (nf - 6.0) * t + 3.0 * r + 2.0 * pp + s,
        (Slave, Master) => t + 3.0 * r + 2.0 * pp + (nf - 6.0) * s,
        // Two slaves alternate P,R,P,... from round 6, so the exact total
        // is ceil(n/2)R + floor(n/2)P; at even n this is (nR + nP)/2.
        (Slave, Slave) => n.div_ceil(2) as f64 * r + (n / 2) as f64 * pp,
    };
    Ok(total)
}

/// Neighbourhood total of a TFT with `k` collective neighbours (0..=3):
/// (8-k)nR + k(R + (n-2)P + S).
pub fn tft_payoff(k: u32, n: u32, p: &PayoffValues) -> Result<f64, AnalysisError> {
    if k > 3 {
        return Err(AnalysisError::NeighborCountOutOfRange { max: 3, got: k });
    }
    if n < MIN_ANALYSIS_ROUNDS {
        return Err(AnalysisError::RoundsTooSmall(n));
    }
    let nf = n as f64;
    let vs_tft = nf * p.r();
    let vs_csmsm = p.r() + (nf - 2.0) * p.p() + p.s();
    Ok((8 - k) as f64 * vs_tft + k as f64 * vs_csmsm)
}

/// Neighbourhood total of an ALLD with `k` collective neighbours (0..=2):
/// (8-k)nP + k(T + (n-1)P).
pub fn alld_payoff(k: u32, n: u32, p: &PayoffValues) -> Result<f64, AnalysisError> {
    if k > 2 {
        return Err(AnalysisError::NeighborCountOutOfRange { max: 2, got: k });
    }
    if n < MIN_ANALYSIS_ROUNDS {
        return Err(AnalysisError::RoundsTooSmall(n));
    }
    let nf = n as f64;
    let vs_alld = nf * p.p();
    let vs_csmsm = p.t() + (nf - 1.0) * p.p();
    Ok((8 - k) as f64 * vs_alld + k as f64 * vs_csmsm)
}

/// Where a master sits in a nine-cell cluster, which fixes how many of its
/// eight neighbours are kin (8, 5 or 3) and how many are TFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MasterPosition {
    Center,
    Border,
    Corner,
}

impl MasterPosition {
    pub fn kin_neighbors(self) -> u32 {
        match self {
            MasterPosition::Center => 8,
            MasterPosition::Border => 5,
            MasterPosition::Corner => 3,
        }
    }
}

impl fmt::Display for MasterPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MasterPosition::Center => "center",
            MasterPosition::Border => "border",
            MasterPosition::Corner => "corner",
        })
    }
}

/// Neighbourhood total of a master in a TFT sea with `slaves` slaves among
/// its kin neighbours; the remaining kin are masters and the rest of the
/// Moore neighbourhood is TFT.
pub fn master_payoff(
    position: MasterPosition,
    slaves: u32,
    n: u32,
    p: &PayoffValues,
) -> Result<f64, AnalysisError> {
    let kin = position.kin_neighbors();
    if slaves > kin {
        return Err(AnalysisError::SlaveCountOutOfRange {
            position,
            max: kin,
            got: slaves,
        });
    }
    if n < MIN_ANALYSIS_ROUNDS {
        return Err(AnalysisError::RoundsTooSmall(n));
    }
    let nf = n as f64;
    let (t, r, pp, s) = (p.t(), p.r(), p.p(), p.s());
    let vs_slave = (nf - 6.0) * t + 3.0 * r + 2.0 * pp + s;
    let vs_master = (nf - 2.0) * r + 2.0 * pp;
    let vs_tft = t + r + (nf - 2.0) * pp;
    Ok(slaves as f64 * vs_slave + (kin - slaves) as f64 * vs_master + (8 - kin) as f64 * vs_tft)
}

/// What a cluster does around a border master with a given slave count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterVerdict {
    Grow,
    Hold,
    Shrink,
}

impl fmt::Display for ClusterVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterVerdict::Grow => "grow",
            ClusterVerdict::Hold => "hold",
            ClusterVerdict::Shrink => "shrink",
        })
    }
}

/// Exact invasion-threshold bounds for one (n, payoffs) setting.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub n: u32,
    pub payoffs: PayoffValues,
    /// Iteration count above which a central master beats every TFT
    /// whatever its slave count: n > (17R - 18P + S)/(R - P).
    pub protection_n_star: BigRational,
    /// Slave count above which a border master beats the best TFT total:
    /// l > (3n(R-P) - 3T + 7R - 4P)/(n(T-R) - 6T + 5R + S).
    pub growth_l_star: BigRational,
    /// Large-n simplification of the growth bound: 3(R-P)/(T-R).
    pub growth_l_star_limit: BigRational,
    /// Slave-count interval in which the border master beats its adjacent
    /// TFTs but not the best TFT, so the cluster holds its size.
    pub hold_interval: (BigRational, BigRational),
    /// Large-n simplification of the hold interval:
    /// (2(R-P)/(T-R), 3(R-P)/(T-R)).
    pub hold_interval_limit: (BigRational, BigRational),
    /// Iteration count above which a master/slave pair beats the best ALLD
    /// total: n > (8T - 3R + 3P - 2S)/(T - P).
    pub alld_invasion_n_star: BigRational,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("validated payoffs are finite")
}

fn ratio_u32(n: u32) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Evaluates every invasion bound at (n, payoffs) in exact rationals.
pub fn thresholds(n: u32, p: &PayoffValues) -> Result<ThresholdReport, AnalysisError> {
    if n < MIN_ANALYSIS_ROUNDS {
        return Err(AnalysisError::RoundsTooSmall(n));
    }
    let (t, r, pp, s) = (exact(p.t()), exact(p.r()), exact(p.p()), exact(p.s()));
    let nf = ratio_u32(n);
    let two = ratio_u32(2);
    let three = ratio_u32(3);

    let protection_n_star = (ratio_u32(17) * &r - ratio_u32(18) * &pp + &s) / (&r - &pp);

    // Shared denominator of the growth and hold bounds; the strict payoff
    // ordering does not rule out a zero here, so it must be checked.
    let growth_denominator = &nf * (&t - &r) - ratio_u32(6) * &t + ratio_u32(5) * &r + &s;
    if growth_denominator == ratio_u32(0) {
        return Err(AnalysisError::GrowthDenominatorZero { n, payoffs: *p });
    }
    let growth_l_star = (&three * &nf * (&r - &pp) - &three * &t + ratio_u32(7) * &r
        - ratio_u32(4) * &pp)
        / &growth_denominator;
    let hold_lower =
        (&two * &nf * (&r - &pp) - &three * &t + ratio_u32(8) * &r - ratio_u32(6) * &pp + &s)
            / &growth_denominator;
    let growth_l_star_limit = &three * (&r - &pp) / (&t - &r);
    let hold_lower_limit = &two * (&r - &pp) / (&t - &r);

    let alld_invasion_n_star =
        (ratio_u32(8) * &t - &three * &r + &three * &pp - &two * &s) / (&t - &pp);

    Ok(ThresholdReport {
        n,
        payoffs: *p,
        protection_n_star,
        growth_l_star: growth_l_star.clone(),
        growth_l_star_limit: growth_l_star_limit.clone(),
        hold_interval: (hold_lower, growth_l_star),
        hold_interval_limit: (hold_lower_limit, growth_l_star_limit),
        alld_invasion_n_star,
    })
}

fn decimal(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl ThresholdReport {
    /// True iff n is large enough that a central master beats the best TFT
    /// total whatever its slave count.
    pub fn center_protected(&self) -> bool {
        ratio_u32(self.n) > self.protection_n_star
    }

    /// True iff n is large enough that a master/slave pair invades an ALLD
    /// sea.
    pub fn alld_invaded(&self) -> bool {
        ratio_u32(self.n) > self.alld_invasion_n_star
    }

    /// Classifies a border master with `l` slave neighbours: above the
    /// growth bound the cluster grows, inside the hold interval it keeps
    /// its size, at or below the lower bound it may be invaded.
    pub fn border_verdict(&self, l: u32) -> ClusterVerdict {
        let l = ratio_u32(l);
        if l > self.growth_l_star {
            ClusterVerdict::Grow
        } else if l > self.hold_interval.0 {
            ClusterVerdict::Hold
        } else {
            ClusterVerdict::Shrink
        }
    }

    /// Human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, label: &str, v: &BigRational| {
            writeln!(out, "{label}: {v} ({:.6})", decimal(v)).unwrap();
        };
        writeln!(out, "payoffs: {}", self.payoffs).unwrap();
        writeln!(out, "rounds: n={}", self.n).unwrap();
        line(
            &mut out,
            "center_protection_n_star",
            &self.protection_n_star,
        );
        line(&mut out, "border_growth_l_star", &self.growth_l_star);
        line(
            &mut out,
            "border_growth_l_star_large_n",
            &self.growth_l_star_limit,
        );
        writeln!(
            out,
            "border_hold_interval: ({}, {}) (({:.6}, {:.6}))",
            self.hold_interval.0,
            self.hold_interval.1,
            decimal(&self.hold_interval.0),
            decimal(&self.hold_interval.1),
        )
        .unwrap();
        writeln!(
            out,
            "border_hold_interval_large_n: ({}, {})",
            self.hold_interval_limit.0, self.hold_interval_limit.1,
        )
        .unwrap();
        line(&mut out, "alld_invasion_n_star", &self.alld_invasion_n_star);
        writeln!(
            out,
            "verdict_center: {} (corner masters never beat adjacent TFT; any slave count is covered)",
            if self.center_protected() {
                "protected"
            } else {
                "exposed"
            }
        )
        .unwrap();
        for l in 0..=5 {
            writeln!(out, "verdict_border_l{l}: {}", self.border_verdict(l)).unwrap();
        }
        writeln!(
            out,
            "verdict_alld_sea: {}",
            if self.alld_invaded() {
                "invaded"
            } else {
                "resists"
            }
        )
        .unwrap();
        out
    }

    /// Key/value CSV rows: key, exact rational, decimal.
    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "key,exact,decimal").unwrap();
        let mut row = |key: &str, v: &BigRational| {
            writeln!(out, "{key},{v},{:.6}", decimal(v)).unwrap();
        };
        row("center_protection_n_star", &self.protection_n_star);
        row("border_growth_l_star", &self.growth_l_star);
        row("border_growth_l_star_large_n", &self.growth_l_star_limit);
        row("border_hold_lower", &self.hold_interval.0);
        row("border_hold_upper", &self.hold_interval.1);
        row("border_hold_lower_large_n", &self.hold_interval_limit.0);
        row("border_hold_upper_large_n", &self.hold_interval_limit.1);
        row("alld_invasion_n_star", &self.alld_invasion_n_star);
        writeln!(
            out,
            "verdict_center,{},",
            if self.center_protected() {
                "protected"
            } else {
                "exposed"
            }
        )
        .unwrap();
        for l in 0..=5 {
            writeln!(out, "verdict_border_l{l},{},", self.border_verdict(l)).unwrap();
        }
        writeln!(
            out,
            "verdict_alld_sea,{},",
            if self.alld_invaded() {
                "invaded"
            } else {
                "resists"
            }
        )
        .unwrap();
        out
    }
}
