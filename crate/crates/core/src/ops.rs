//! Scalar operation counter.
//!
//! Matrix kernels report the number of scalar multiplications (field
//! inversions count as one) and additions they perform. Counters are
//! thread-local so that concurrently running tests do not disturb each
//! other. They only grow until [`reset`] is called.

use std::cell::Cell;
use std::ops::Sub;

use serde::Serialize;

thread_local! {
    static MULS: Cell<u64> = const { Cell::new(0) };
    static ADDS: Cell<u64> = const { Cell::new(0) };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub muls: u64,
    pub adds: u64,
}

impl Sub for OpCount {
    type Output = OpCount;
    fn sub(self, rhs: OpCount) -> OpCount {
        OpCount {
            muls: self.muls - rhs.muls,
            adds: self.adds - rhs.adds,
        }
    }
}

#[inline]
pub fn count_muls(n: u64) {
    MULS.with(|c| c.set(c.get() + n));
}

#[inline]
pub fn count_adds(n: u64) {
    ADDS.with(|c| c.set(c.get() + n));
}

pub fn snapshot() -> OpCount {
    OpCount {
        muls: MULS.with(Cell::get),
        adds: ADDS.with(Cell::get),
    }
}

pub fn reset() {
    MULS.with(|c| c.set(0));
    ADDS.with(|c| c.set(0));
}

/// Runs `f` and returns its result with the operations it performed.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCount) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_and_resettable() {
        reset();
        count_muls(3);
        let a = snapshot();
        count_muls(2);
        count_adds(1);
        let b = snapshot();
        assert!(b.muls >= a.muls);
        assert_eq!(b - a, OpCount { muls: 2, adds: 1 });
        reset();
        assert_eq!(snapshot(), OpCount::default());
    }
}
