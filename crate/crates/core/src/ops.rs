//! Per-thread operation counters.
//!
//! Protocol code bumps these at every pairing, group exponentiation,
//! signature-curve scalar multiplication and protocol hash, so benchmarks and
//! tests can assert operation budgets structurally instead of by wall time.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    /// Bilinear pairings evaluated.
    pub pairings: u64,
    /// Exponentiations in the pairing source groups.
    pub exponentiations: u64,
    /// Scalar multiplications on the signature curve.
    pub scalar_muls: u64,
    /// Multi-scalar multiplications, counted once each regardless of length.
    pub msms: u64,
    /// Protocol-level hash evaluations.
    pub hashes: u64,
}

impl OpCounts {
    /// Exponentiation-class operations in either curve.
    pub fn exponentiation_class(&self) -> u64 {
        self.exponentiations + self.scalar_muls
    }
}

impl std::ops::Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: Self) -> Self {
        OpCounts {
            pairings: self.pairings - rhs.pairings,
            exponentiations: self.exponentiations - rhs.exponentiations,
            scalar_muls: self.scalar_muls - rhs.scalar_muls,
            msms: self.msms - rhs.msms,
            hashes: self.hashes - rhs.hashes,
        }
    }
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.pairings += rhs.pairings;
        self.exponentiations += rhs.exponentiations;
        self.scalar_muls += rhs.scalar_muls;
        self.msms += rhs.msms;
        self.hashes += rhs.hashes;
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts {
        pairings: 0,
        exponentiations: 0,
        scalar_muls: 0,
        msms: 0,
        hashes: 0,
    }) };
}

fn bump(f: impl FnOnce(&mut OpCounts)) {
    COUNTS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

pub(crate) fn pairings(k: u64) {
    bump(|c| c.pairings += k);
}

pub(crate) fn exponentiation() {
    bump(|c| c.exponentiations += 1);
}

pub(crate) fn scalar_mul() {
    bump(|c| c.scalar_muls += 1);
}

pub(crate) fn msm() {
    bump(|c| c.msms += 1);
}

pub(crate) fn hash() {
    bump(|c| c.hashes += 1);
}

/// Current counts on this thread.
pub fn snapshot() -> OpCounts {
    COUNTS.with(|c| c.get())
}

pub fn reset() {
    COUNTS.with(|c| c.set(OpCounts::default()));
}

/// Runs `f` and returns its result with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}
