//! Stage-game moves and the prisoner's dilemma payoff matrix.

use std::fmt;

use thiserror::Error;

/// One move of the stage game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    C,
    D,
}

impl Move {
    /// The opposite move.
    pub fn flipped(self) -> Move {
        match self {
            Move::C => Move::D,
            Move::D => Move::C,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Move::C => 'C',
            Move::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Move> {
        match c {
            'C' => Some(Move::C),
            'D' => Some(Move::D),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PayoffError {
    #[error("payoff values must be finite, got T={t} R={r} P={p} S={s}")]
    NonFinite { t: f64, r: f64, p: f64, s: f64 },
    #[error("required strict inequality {inequality} fails for T={t} R={r} P={p} S={s}")]
    OrderingViolation {
        inequality: &'static str,
        t: f64,
        r: f64,
        p: f64,
        s: f64,
    },
}

/// A validated prisoner's dilemma payoff matrix.
///
/// Invariants enforced at construction: `T > R > P > S` and `R > (S+T)/2`.
/// Values are stored as `f64`; with integer-valued payoffs (such as the
/// canonical 5,3,1,0) every product and sum that appears in a match or in a
/// neighbourhood total stays an exact integer, so totals compare exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffValues {
    t: f64,
    r: f64,
    p: f64,
    s: f64,
}

impl PayoffValues {
    /// The canonical matrix T=5, R=3, P=1, S=0.
    pub const CANONICAL: PayoffValues = PayoffValues {
        t: 5.0,
        r: 3.0,
        p: 1.0,
        s: 0.0,
    };

    /// Validates and constructs a matrix, reporting the first inequality
    /// that fails.
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Result<PayoffValues, PayoffError> {
        if ![t, r, p, s].iter().all(|v| v.is_finite()) {
            return Err(PayoffError::NonFinite { t, r, p, s });
        }
        let fail = |inequality| PayoffError::OrderingViolation {
            inequality,
            t,
            r,
            p,
            s,
        };
        if t <= r {
            return Err(fail("T > R"));
        }
        if r <= p {
            return Err(fail("R > P"));
        }
        if p <= s {
            return Err(fail("P > S"));
        }
        if r <= (s + t) / 2.0 {
            return Err(fail("R > (S+T)/2"));
        }
        Ok(PayoffValues { t, r, p, s })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Per-round payoffs for a simultaneous move pair, as (player a, player b).
    pub fn stage(&self, a: Move, b: Move) -> (f64, f64) {
        match (a, b) {
            (Move::C, Move::C) => (self.r, self.r),
            (Move::C, Move::D) => (self.s, self.t),
            (Move::D, Move::C) => (self.t, self.s),
            (Move::D, Move::D) => (self.p, self.p),
        }
    }
}

impl fmt::Display for PayoffValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={} R={} P={} S={}", self.t, self.r, self.p, self.s)
    }
}
