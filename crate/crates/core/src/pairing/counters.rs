//! Per-thread operation counters.
//!
//! Every exponentiation in `G` and `G_T` and every pairing evaluated through
//! the public group API bumps a thread-local counter. [`measure`] snapshots
//! the counters around a closure so callers can check cost profiles exactly.

use std::cell::Cell;
use std::ops::Sub;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OpCounts {
    /// Exponentiations (scalar multiplications) in `G`.
    pub g_exp: u64,
    /// Exponentiations in `G_T`.
    pub gt_exp: u64,
    /// Bilinear pairing evaluations.
    pub pairings: u64,
}

impl Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            g_exp: self.g_exp - rhs.g_exp,
            gt_exp: self.gt_exp - rhs.gt_exp,
            pairings: self.pairings - rhs.pairings,
        }
    }
}

impl OpCounts {
    pub fn exponentiations(&self) -> u64 {
        self.g_exp + self.gt_exp
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts { g_exp: 0, gt_exp: 0, pairings: 0 }) };
}

pub(crate) fn bump_g_exp() {
    COUNTS.with(|c| {
        let mut v = c.get();
        v.g_exp += 1;
        c.set(v);
    });
}

pub(crate) fn bump_gt_exp() {
    COUNTS.with(|c| {
        let mut v = c.get();
        v.gt_exp += 1;
        c.set(v);
    });
}

pub(crate) fn bump_pairing() {
    COUNTS.with(|c| {
        let mut v = c.get();
        v.pairings += 1;
        c.set(v);
    });
}

/// Current counter values for this thread.
pub fn snapshot() -> OpCounts {
    COUNTS.with(|c| c.get())
}

/// Runs `f` and returns its result with the operations it performed on this thread.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}
