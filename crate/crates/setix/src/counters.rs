//! Thread-local operation counters.
//!
//! The asymptotic claims behind the structures cannot be checked by wall
//! clock alone, so the kernels and scan loops bump these counters and the
//! test suites assert growth rates on snapshot deltas. Counters are
//! thread-local: each test thread and each benchmark repetition observes only
//! its own work.

use std::cell::Cell;

thread_local! {
    static WORD_OPS: Cell<u64> = const { Cell::new(0) };
    static MEMBERSHIP_PROBES: Cell<u64> = const { Cell::new(0) };
    static FALSE_POSITIVES: Cell<u64> = const { Cell::new(0) };
    static VERIFICATIONS: Cell<u64> = const { Cell::new(0) };
    static TYPE1_VISITS: Cell<u64> = const { Cell::new(0) };
    static TYPE2_VISITS: Cell<u64> = const { Cell::new(0) };
    static STASH_DUMPS: Cell<u64> = const { Cell::new(0) };
    static REBUILDS: Cell<u64> = const { Cell::new(0) };
}

/// Point-in-time copy of every counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Snapshot {
    /// Constant-time word operations performed by the packed kernels.
    pub word_ops: u64,
    /// Membership-table lookups performed by scan loops.
    pub membership_probes: u64,
    /// Fingerprint matches that verification rejected.
    pub false_positives: u64,
    /// Fingerprint matches checked against member tables.
    pub verifications: u64,
    /// Tree-query visits to vertices where both sets are locally large.
    pub type1_visits: u64,
    /// Tree-query visits that scan or emit output.
    pub type2_visits: u64,
    /// Stash dumps performed by the incremental witness structure.
    pub stash_dumps: u64,
    /// Full structure rebuilds (size anchor drift or key exhaustion).
    pub rebuilds: u64,
}

impl Snapshot {
    /// Counter-wise difference `self - earlier`.
    pub fn since(&self, earlier: &Snapshot) -> Snapshot {
        Snapshot {
            word_ops: self.word_ops - earlier.word_ops,
            membership_probes: self.membership_probes - earlier.membership_probes,
            false_positives: self.false_positives - earlier.false_positives,
            verifications: self.verifications - earlier.verifications,
            type1_visits: self.type1_visits - earlier.type1_visits,
            type2_visits: self.type2_visits - earlier.type2_visits,
            stash_dumps: self.stash_dumps - earlier.stash_dumps,
            rebuilds: self.rebuilds - earlier.rebuilds,
        }
    }
}

pub fn snapshot() -> Snapshot {
    Snapshot {
        word_ops: WORD_OPS.with(Cell::get),
        membership_probes: MEMBERSHIP_PROBES.with(Cell::get),
        false_positives: FALSE_POSITIVES.with(Cell::get),
        verifications: VERIFICATIONS.with(Cell::get),
        type1_visits: TYPE1_VISITS.with(Cell::get),
        type2_visits: TYPE2_VISITS.with(Cell::get),
        stash_dumps: STASH_DUMPS.with(Cell::get),
        rebuilds: REBUILDS.with(Cell::get),
    }
}

pub fn reset() {
    WORD_OPS.with(|c| c.set(0));
    MEMBERSHIP_PROBES.with(|c| c.set(0));
    FALSE_POSITIVES.with(|c| c.set(0));
    VERIFICATIONS.with(|c| c.set(0));
    TYPE1_VISITS.with(|c| c.set(0));
    TYPE2_VISITS.with(|c| c.set(0));
    STASH_DUMPS.with(|c| c.set(0));
    REBUILDS.with(|c| c.set(0));
}

macro_rules! bump_fn {
    ($name:ident, $cell:ident) => {
        #[inline]
        pub(crate) fn $name(n: u64) {
            $cell.with(|c| c.set(c.get() + n));
        }
    };
}

bump_fn!(word_ops, WORD_OPS);
bump_fn!(membership_probes, MEMBERSHIP_PROBES);
bump_fn!(false_positives, FALSE_POSITIVES);
bump_fn!(verifications, VERIFICATIONS);
bump_fn!(type1_visits, TYPE1_VISITS);
bump_fn!(type2_visits, TYPE2_VISITS);
bump_fn!(stash_dumps, STASH_DUMPS);
bump_fn!(rebuilds, REBUILDS);
