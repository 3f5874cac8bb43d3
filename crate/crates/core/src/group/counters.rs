//! Instrumented operation counters.
//!
//! Counters are kept per thread. A stage measured on one thread only sees the
//! primitives that thread executed, which keeps deltas exact even when other
//! threads are running orchestrations at the same time.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// Tally of the expensive primitives: G1 exponentiations, GT exponentiations,
/// pairings and hash-to-group evaluations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounters {
    pub e1: u64,
    pub e2: u64,
    pub pairing: u64,
    pub hash: u64,
}

impl OpCounters {
    pub const fn new(e1: u64, e2: u64, pairing: u64, hash: u64) -> Self {
        Self {
            e1,
            e2,
            pairing,
            hash,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

impl Add for OpCounters {
    type Output = OpCounters;

    fn add(self, rhs: Self) -> Self {
        Self {
            e1: self.e1 + rhs.e1,
            e2: self.e2 + rhs.e2,
            pairing: self.pairing + rhs.pairing,
            hash: self.hash + rhs.hash,
        }
    }
}

impl Sub for OpCounters {
    type Output = OpCounters;

    fn sub(self, rhs: Self) -> Self {
        Self {
            e1: self.e1 - rhs.e1,
            e2: self.e2 - rhs.e2,
            pairing: self.pairing - rhs.pairing,
            hash: self.hash - rhs.hash,
        }
    }
}

impl fmt::Display for OpCounters {
    /// Renders in the `3E1+2E2+2P+H` style used for cost formulas.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (n, sym) in [
            (self.e1, "E1"),
            (self.e2, "E2"),
            (self.pairing, "P"),
            (self.hash, "H"),
        ] {
            match n {
                0 => {}
                1 => parts.push(sym.to_string()),
                n => parts.push(format!("{n}{sym}")),
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Op {
    E1,
    E2,
    Pairing,
    Hash,
}

thread_local! {
    static COUNTERS: Cell<OpCounters> = const { Cell::new(OpCounters::new(0, 0, 0, 0)) };
}

pub(crate) fn bump(op: Op) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        match op {
            Op::E1 => v.e1 += 1,
            Op::E2 => v.e2 += 1,
            Op::Pairing => v.pairing += 1,
            Op::Hash => v.hash += 1,
        }
        c.set(v);
    });
}

/// Current counter values for the calling thread.
pub fn counters_snapshot() -> OpCounters {
    COUNTERS.with(Cell::get)
}

/// Zeroes the calling thread's counters.
pub fn counters_reset() {
    COUNTERS.with(|c| c.set(OpCounters::default()));
}

/// Runs `f` and returns its result together with the primitives it executed.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounters) {
    let before = counters_snapshot();
    let out = f();
    (out, counters_snapshot() - before)
}
