//! Fully dynamic disjointness queries with intersection-size tables.
//!
//! Sets are classified by size against a space budget `M` and a size anchor
//! `N'` (kept within a factor two of the true total by rebuilds):
//!
//! * *large* — grew past `2N'/sqrt(M)` and has stayed at or above
//!   `N'/sqrt(M)` since,
//! * *medium* — at least `N'/sqrt(M)` but not large,
//! * *small*  — everything else.
//!
//! Medium and large sets hold registry slots and per-set tables `T_S` with
//! `T_S[i_{S'}] = |S ∩ S'|`. A pair of large sets answers disjointness from
//! the tables in constant time; any other pair scans the smaller/non-large
//! set against the other's membership table. A set entering the medium band
//! snapshots the registry and catches its table up a few pairs per insert,
//! finishing before it can become large, which is what keeps the table
//! invariant intact for large pairs without ever paying more than
//! `O(sqrt(M))` per update.

use crate::counters;
use crate::det::{DetMap, DetSet};
use crate::error::{Error, Result};
use crate::{ElementKey, SetId};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Smallest size anchor; rebuilds never shrink `N'` below this.
const MIN_ANCHOR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

/// A class transition observed during an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassEvent {
    pub set: SetId,
    pub from: SizeClass,
    pub to: SizeClass,
}

/// What an update did besides the membership change.
#[derive(Debug, Clone, Default)]
pub struct UpdateReport {
    pub events: Vec<ClassEvent>,
    pub rebuilt: bool,
}

/// Deferred table construction for a set that just entered the medium band:
/// the registry snapshot still to process, lazily honoring removals.
#[derive(Debug, Clone)]
struct CatchUp {
    queue: VecDeque<SetId>,
    removed: DetSet<SetId>,
    quantum: usize,
}

#[derive(Debug, Clone, Default)]
struct SetState {
    members: DetSet<ElementKey>,
    class: Option<SizeClass>, // None only during construction
    slot: Option<usize>,
    /// `T_S`: peer slot -> |S ∩ peer|. Entries exist once computed.
    table: DetMap<usize, u64>,
    catch_up: Option<CatchUp>,
}

impl SetState {
    fn class(&self) -> SizeClass {
        self.class.unwrap_or(SizeClass::Small)
    }
}

/// Point-in-time introspection of classes, slots and tables (test support;
/// not a stable API).
#[derive(Debug, Clone)]
pub struct EmptinessSnapshot {
    pub anchor: usize,
    pub budget: usize,
    pub total: usize,
    pub classes: BTreeMap<SetId, SizeClass>,
    pub sizes: BTreeMap<SetId, usize>,
    pub slots_in_use: usize,
    pub max_slot: Option<usize>,
    /// Peer-resolved table entries, one row per stored direction.
    pub tables: BTreeMap<(SetId, SetId), u64>,
    /// Remaining catch-up queue length per medium set.
    pub pending: BTreeMap<SetId, usize>,
}

#[derive(Debug)]
pub struct EmptinessStructure {
    budget: usize,
    anchor: usize,
    total: usize,
    med_threshold: f64,
    large_threshold: f64,
    sets: DetMap<SetId, SetState>,
    /// Slot registry over medium and large sets.
    slots: Vec<Option<SetId>>,
    free_slots: BTreeSet<usize>,
}

use crate::round_pow2_nearest;

impl EmptinessStructure {
    pub fn new(budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidParameter("space budget M must be at least 1"));
        }
        let mut s = EmptinessStructure {
            budget,
            anchor: MIN_ANCHOR,
            total: 0,
            med_threshold: 0.0,
            large_threshold: 0.0,
            sets: DetMap::default(),
            slots: Vec::new(),
            free_slots: BTreeSet::new(),
        };
        s.recompute_thresholds();
        Ok(s)
    }

    fn recompute_thresholds(&mut self) {
        let sqrt_m = (self.budget as f64).sqrt();
        self.med_threshold = self.anchor as f64 / sqrt_m;
        self.large_threshold = 2.0 * self.anchor as f64 / sqrt_m;
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Threshold for entering/staying in the medium band, `N'/sqrt(M)`.
    pub fn medium_threshold(&self) -> f64 {
        self.med_threshold
    }

    /// Threshold for entering the large band, `2N'/sqrt(M)`.
    pub fn large_threshold(&self) -> f64 {
        self.large_threshold
    }

    /// Make the set known (empty) without inserting anything.
    pub fn register(&mut self, s: SetId) {
        self.sets.entry(s).or_default();
    }

    pub fn is_registered(&self, s: SetId) -> bool {
        self.sets.contains_key(&s)
    }

    pub fn class_of(&self, s: SetId) -> Result<SizeClass> {
        Ok(self.sets.get(&s).ok_or(Error::UnknownSet(s))?.class())
    }

    pub fn len_of(&self, s: SetId) -> usize {
        self.sets.get(&s).map_or(0, |st| st.members.len())
    }

    pub fn contains(&self, s: SetId, x: ElementKey) -> bool {
        self.probe(s, x)
    }

    /// Deterministic member iteration.
    pub fn members(&self, s: SetId) -> impl Iterator<Item = ElementKey> + '_ {
        self.sets.get(&s).into_iter().flat_map(|st| st.members.iter().copied())
    }

    /// Sets currently holding registry slots (medium + large), slot order.
    pub fn registry(&self) -> Vec<SetId> {
        self.slots.iter().flatten().copied().collect()
    }

    pub fn large_sets(&self) -> Vec<SetId> {
        self.slots
            .iter()
            .flatten()
            .filter(|s| self.sets[s].class() == SizeClass::Large)
            .copied()
            .collect()
    }

    #[inline]
    fn probe(&self, s: SetId, x: ElementKey) -> bool {
        counters::membership_probes(1);
        self.sets.get(&s).is_some_and(|st| st.members.contains(&x))
    }

    /// |a ∩ b| by scanning the smaller membership table.
    fn scan_common_count(&self, a: SetId, b: SetId) -> u64 {
        let (scan, other) = if self.len_of(a) <= self.len_of(b) { (a, b) } else { (b, a) };
        let Some(st) = self.sets.get(&scan) else { return 0 };
        let mut n = 0;
        for &x in &st.members {
            if self.probe(other, x) {
                n += 1;
            }
        }
        n
    }

    /// Exact `s1 ∩ s2` by scanning the smaller set. Used where at most one
    /// operand is large.
    pub fn intersection_scan(&self, s1: SetId, s2: SetId) -> Vec<ElementKey> {
        let (scan, other) = if self.len_of(s1) <= self.len_of(s2) { (s1, s2) } else { (s2, s1) };
        let Some(st) = self.sets.get(&scan) else { return Vec::new() };
        st.members.iter().copied().filter(|&x| self.probe(other, x)).collect()
    }

    /// First common element found while scanning the smaller set.
    pub fn witness_scan(&self, s1: SetId, s2: SetId) -> Option<ElementKey> {
        let (scan, other) = if self.len_of(s1) <= self.len_of(s2) { (s1, s2) } else { (s2, s1) };
        let st = self.sets.get(&scan)?;
        st.members.iter().copied().find(|&x| self.probe(other, x))
    }

    /// True iff `s1 ∩ s2` is empty. Large pairs answer from the tables in
    /// constant time; otherwise the smaller/non-large set is scanned.
    pub fn disjoint(&self, s1: SetId, s2: SetId) -> Result<bool> {
        let st1 = self.sets.get(&s1).ok_or(Error::UnknownSet(s1))?;
        let st2 = self.sets.get(&s2).ok_or(Error::UnknownSet(s2))?;
        if s1 == s2 {
            return Ok(st1.members.is_empty());
        }
        match (st1.class(), st2.class()) {
            (SizeClass::Large, SizeClass::Large) => {
                let peer_slot = st2.slot.expect("large set holds a slot");
                let entry = st1
                    .table
                    .get(&peer_slot)
                    .expect("intersection-size table entry for a large pair");
                Ok(*entry == 0)
            }
            (SizeClass::Large, _) => Ok(self.witness_scan_ordered(s2, s1).is_none()),
            (_, SizeClass::Large) => Ok(self.witness_scan_ordered(s1, s2).is_none()),
            _ => Ok(self.witness_scan(s1, s2).is_none()),
        }
    }

    /// Scan exactly `scan` against `other`, regardless of sizes.
    fn witness_scan_ordered(&self, scan: SetId, other: SetId) -> Option<ElementKey> {
        let st = self.sets.get(&scan)?;
        st.members.iter().copied().find(|&x| self.probe(other, x))
    }

    pub fn insert(&mut self, s: SetId, x: ElementKey) -> Result<UpdateReport> {
        let st = self.sets.entry(s).or_default();
        counters::membership_probes(1);
        if st.members.contains(&x) {
            return Err(Error::DuplicateElement { set: s, element: x });
        }
        st.members.insert(x);
        let size = st.members.len();
        let was = st.class();
        self.total += 1;

        let mut report = UpdateReport::default();
        match was {
            SizeClass::Small => {
                if (size as f64) >= self.med_threshold {
                    self.promote_to_medium(s, &mut report.events);
                }
            }
            SizeClass::Medium | SizeClass::Large => {
                self.adjust_tables_for(s, x, 1);
                if was == SizeClass::Medium {
                    self.run_catch_up(s, false);
                }
            }
        }
        if self.sets[&s].class() == SizeClass::Medium && (size as f64) > self.large_threshold {
            // Finish the table before the set counts as large.
            self.run_catch_up(s, true);
            self.sets.get_mut(&s).unwrap().class = Some(SizeClass::Large);
            report.events.push(ClassEvent { set: s, from: SizeClass::Medium, to: SizeClass::Large });
        }

        if self.total > 2 * self.anchor {
            report.events.extend(self.rebuild());
            report.rebuilt = true;
        }
        Ok(report)
    }

    pub fn delete(&mut self, s: SetId, x: ElementKey) -> Result<UpdateReport> {
        let st = self.sets.get_mut(&s).ok_or(Error::UnknownSet(s))?;
        counters::membership_probes(1);
        if !st.members.remove(&x) {
            return Err(Error::ElementNotFound { set: s, element: x });
        }
        let size = st.members.len();
        let was = st.class();
        self.total -= 1;

        let mut report = UpdateReport::default();
        if was != SizeClass::Small {
            self.adjust_tables_for(s, x, -1);
            if (size as f64) < self.med_threshold {
                // Hysteresis: each band's floor is N'/sqrt(M), so falling
                // below it leaves the slot registry entirely.
                self.demote_to_small(s);
                report.events.push(ClassEvent { set: s, from: was, to: SizeClass::Small });
            }
        }

        if 2 * self.total < self.anchor && self.anchor > MIN_ANCHOR {
            report.events.extend(self.rebuild());
            report.rebuilt = true;
        }
        Ok(report)
    }

    /// For every slot-registered peer containing `x`, adjust both stored
    /// directions of the pair's size entry where they exist. Entries not yet
    /// computed stay absent; the owning catch-up computes them from scratch.
    fn adjust_tables_for(&mut self, s: SetId, x: ElementKey, delta: i64) {
        let s_slot = self.sets[&s].slot.expect("registered set holds a slot");
        let peers: Vec<(usize, SetId)> = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.map(|id| (i, id)))
            .filter(|&(_, id)| id != s)
            .collect();
        for (peer_slot, peer) in peers {
            if !self.probe(peer, x) {
                continue;
            }
            if let Some(e) = self.sets.get_mut(&s).unwrap().table.get_mut(&peer_slot) {
                *e = e.checked_add_signed(delta).expect("table entry underflow");
            }
            if let Some(e) = self.sets.get_mut(&peer).unwrap().table.get_mut(&s_slot) {
                *e = e.checked_add_signed(delta).expect("table entry underflow");
            }
        }
    }

    fn alloc_slot(&mut self, s: SetId) -> usize {
        if let Some(&slot) = self.free_slots.iter().next() {
            self.free_slots.remove(&slot);
            self.slots[slot] = Some(s);
            slot
        } else {
            self.slots.push(Some(s));
            self.slots.len() - 1
        }
    }

    fn promote_to_medium(&mut self, s: SetId, events: &mut Vec<ClassEvent>) {
        // Snapshot the registry before s joins it.
        let queue: VecDeque<SetId> = self.registry().into();
        let slot = self.alloc_slot(s);
        let quantum = ((2.0 * queue.len() as f64 * (self.budget as f64).sqrt()
            / self.anchor as f64)
            .ceil() as usize)
            .max(1);
        let st = self.sets.get_mut(&s).unwrap();
        st.slot = Some(slot);
        st.table = DetMap::default();
        st.catch_up =
            Some(CatchUp { queue, removed: DetSet::default(), quantum });
        st.class = Some(SizeClass::Medium);
        events.push(ClassEvent { set: s, from: SizeClass::Small, to: SizeClass::Medium });
    }

    /// Process catch-up work for medium set `s`: one quantum normally, the
    /// whole remaining snapshot when `flush` (set is about to become large).
    fn run_catch_up(&mut self, s: SetId, flush: bool) {
        let Some(mut cu) = self.sets.get_mut(&s).unwrap().catch_up.take() else {
            return;
        };
        let s_slot = self.sets[&s].slot.expect("medium set holds a slot");
        let limit = if flush { usize::MAX } else { cu.quantum };
        let mut done = 0;
        while done < limit {
            let Some(peer) = cu.queue.pop_front() else { break };
            if cu.removed.contains(&peer) {
                continue;
            }
            // Peer may have left and re-entered the registry; recomputing is
            // harmless, skipping a vanished peer is required.
            let Some(peer_slot) = self.sets.get(&peer).and_then(|p| p.slot) else {
                continue;
            };
            let size = self.scan_common_count(s, peer);
            self.sets.get_mut(&s).unwrap().table.insert(peer_slot, size);
            self.sets.get_mut(&peer).unwrap().table.insert(s_slot, size);
            done += 1;
        }
        if !cu.queue.is_empty() {
            self.sets.get_mut(&s).unwrap().catch_up = Some(cu);
        }
    }

    fn demote_to_small(&mut self, s: SetId) {
        let slot = self.sets[&s].slot.expect("registered set holds a slot");
        // Purge the vacated slot from every other table so a future occupant
        // inherits nothing.
        let peers: Vec<SetId> = self.registry().into_iter().filter(|&p| p != s).collect();
        for peer in peers {
            let pst = self.sets.get_mut(&peer).unwrap();
            pst.table.remove(&slot);
            if let Some(cu) = pst.catch_up.as_mut() {
                cu.removed.insert(s);
            }
        }
        let st = self.sets.get_mut(&s).unwrap();
        st.class = Some(SizeClass::Small);
        st.slot = None;
        st.table = DetMap::default();
        st.catch_up = None;
        self.slots[slot] = None;
        self.free_slots.insert(slot);
    }

    /// Change the space budget; the structure is rebuilt when it differs.
    pub fn set_budget(&mut self, budget: usize) -> Result<Vec<ClassEvent>> {
        if budget == 0 {
            return Err(Error::InvalidParameter("space budget M must be at least 1"));
        }
        if budget == self.budget {
            return Ok(Vec::new());
        }
        self.budget = budget;
        Ok(self.rebuild())
    }

    /// Recompute the anchor, all classes, slots and tables from scratch.
    fn rebuild(&mut self) -> Vec<ClassEvent> {
        counters::rebuilds(1);
        self.anchor = MIN_ANCHOR.max(round_pow2_nearest(self.total));
        self.recompute_thresholds();

        let mut ids: Vec<SetId> = self.sets.keys().copied().collect();
        ids.sort_unstable();

        let mut events = Vec::new();
        self.slots.clear();
        self.free_slots.clear();
        for &s in &ids {
            let size = self.sets[&s].members.len() as f64;
            let class = if size > self.large_threshold {
                SizeClass::Large
            } else if size >= self.med_threshold {
                SizeClass::Medium
            } else {
                SizeClass::Small
            };
            let st = self.sets.get_mut(&s).unwrap();
            let old = st.class();
            st.table = DetMap::default();
            st.catch_up = None;
            st.slot = None;
            st.class = Some(class);
            if old != class {
                events.push(ClassEvent { set: s, from: old, to: class });
            }
            if class != SizeClass::Small {
                let slot = self.slots.len();
                self.slots.push(Some(s));
                self.sets.get_mut(&s).unwrap().slot = Some(slot);
            }
        }
        // Full pairwise tables; rebuilt tables start complete, so rebuilt
        // medium sets carry no catch-up state.
        let registry = self.registry();
        for (i, &a) in registry.iter().enumerate() {
            for &b in &registry[i + 1..] {
                let size = self.scan_common_count(a, b);
                let a_slot = self.sets[&a].slot.unwrap();
                let b_slot = self.sets[&b].slot.unwrap();
                self.sets.get_mut(&a).unwrap().table.insert(b_slot, size);
                self.sets.get_mut(&b).unwrap().table.insert(a_slot, size);
            }
        }
        events
    }

    pub fn snapshot(&self) -> EmptinessSnapshot {
        let mut classes = BTreeMap::new();
        let mut sizes = BTreeMap::new();
        let mut tables = BTreeMap::new();
        let mut pending = BTreeMap::new();
        for (&s, st) in &self.sets {
            classes.insert(s, st.class());
            sizes.insert(s, st.members.len());
            for (&slot, &size) in &st.table {
                if let Some(peer) = self.slots.get(slot).copied().flatten() {
                    tables.insert((s, peer), size);
                }
            }
            if let Some(cu) = &st.catch_up {
                pending.insert(
                    s,
                    cu.queue.iter().filter(|p| !cu.removed.contains(p)).count(),
                );
            }
        }
        EmptinessSnapshot {
            anchor: self.anchor,
            budget: self.budget,
            total: self.total,
            classes,
            sizes,
            slots_in_use: self.slots.iter().flatten().count(),
            max_slot: self
                .slots
                .iter()
                .enumerate()
                .filter_map(|(i, o)| o.map(|_| i))
                .max(),
            tables,
            pending,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::OracleFamily;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Invariant: for every pair of large sets, both table directions exist
    /// and equal the oracle intersection size.
    fn assert_large_tables_exact(es: &EmptinessStructure, oracle: &OracleFamily) {
        let snap = es.snapshot();
        let larges: Vec<SetId> = snap
            .classes
            .iter()
            .filter(|(_, &c)| c == SizeClass::Large)
            .map(|(&s, _)| s)
            .collect();
        for (i, &a) in larges.iter().enumerate() {
            for &b in &larges[i + 1..] {
                let want = oracle.intersect(a, b).unwrap().len() as u64;
                assert_eq!(snap.tables.get(&(a, b)), Some(&want), "{a} vs {b}");
                assert_eq!(snap.tables.get(&(b, a)), Some(&want), "{b} vs {a}");
            }
        }
    }

    #[test]
    fn new_structure_thresholds() {
        let es = EmptinessStructure::new(16).unwrap();
        assert_eq!(es.anchor(), 16);
        assert_eq!(es.large_threshold(), 8.0);
        assert_eq!(es.medium_threshold(), 4.0);
        assert_eq!(es.snapshot().slots_in_use, 0);
        assert!(EmptinessStructure::new(0).is_err());
    }

    #[test]
    fn queries_on_registered_empty_sets() {
        let mut es = EmptinessStructure::new(16).unwrap();
        es.register(SetId(0));
        es.register(SetId(1));
        assert!(es.disjoint(SetId(0), SetId(1)).unwrap());
        assert!(es.disjoint(SetId(0), SetId(0)).unwrap());
        assert!(matches!(es.disjoint(SetId(0), SetId(9)), Err(Error::UnknownSet(_))));
    }

    #[test]
    fn small_insert_does_only_membership_work() {
        let mut es = EmptinessStructure::new(64).unwrap();
        // Thresholds: medium at 2, stay small with one element.
        let r = es.insert(SetId(0), ElementKey(1)).unwrap();
        assert!(r.events.is_empty());
        assert!(es.snapshot().pending.is_empty());
        assert_eq!(es.class_of(SetId(0)).unwrap(), SizeClass::Small);
    }

    #[test]
    fn self_intersection_nonempty() {
        let mut es = EmptinessStructure::new(16).unwrap();
        es.insert(SetId(3), ElementKey(9)).unwrap();
        assert!(!es.disjoint(SetId(3), SetId(3)).unwrap());
    }

    #[test]
    fn promotion_reaches_large_with_exact_tables() {
        let mut es = EmptinessStructure::new(16).unwrap();
        let mut oracle = OracleFamily::new();
        // Static background sets straddling the class bands.
        for i in 0..5u64 {
            for s in [SetId(10), SetId(11)] {
                es.insert(s, ElementKey(i)).unwrap();
                oracle.insert(s, ElementKey(i));
            }
        }
        // Drive one set from empty past the large threshold (8 for M=16).
        for i in 0..12u64 {
            es.insert(SetId(0), ElementKey(i)).unwrap();
            oracle.insert(SetId(0), ElementKey(i));
            assert_large_tables_exact(&es, &oracle);
        }
        assert_eq!(es.class_of(SetId(0)).unwrap(), SizeClass::Large);
    }

    #[test]
    fn concurrent_promotions_cover_both_directions() {
        // S1 becomes medium before S2 exists in the registry, so S2 is
        // absent from S1's snapshot; the reciprocal entries must appear via
        // S2's own catch-up.
        let mut es = EmptinessStructure::new(16).unwrap();
        let mut oracle = OracleFamily::new();
        let mut push = |es: &mut EmptinessStructure, oracle: &mut OracleFamily, s: u64, e: u64| {
            es.insert(SetId(s), ElementKey(e)).unwrap();
            oracle.insert(SetId(s), ElementKey(e));
        };
        for i in 0..5u64 {
            push(&mut es, &mut oracle, 1, i);
        }
        assert_eq!(es.class_of(SetId(1)).unwrap(), SizeClass::Medium);
        // Interleave growth so both cross into large around the same time,
        // sharing elements 0..4.
        for i in 0..5u64 {
            push(&mut es, &mut oracle, 2, i);
        }
        for i in 5..12u64 {
            push(&mut es, &mut oracle, 2, i + 100);
            push(&mut es, &mut oracle, 1, i + 200);
        }
        assert_eq!(es.class_of(SetId(1)).unwrap(), SizeClass::Large);
        assert_eq!(es.class_of(SetId(2)).unwrap(), SizeClass::Large);
        assert_large_tables_exact(&es, &oracle);
        assert!(!es.disjoint(SetId(1), SetId(2)).unwrap());
    }

    #[test]
    fn delete_decrements_both_directions() {
        let mut es = EmptinessStructure::new(16).unwrap();
        let mut oracle = OracleFamily::new();
        for i in 0..10u64 {
            for s in [SetId(0), SetId(1)] {
                es.insert(s, ElementKey(i)).unwrap();
                oracle.insert(s, ElementKey(i));
            }
        }
        assert_eq!(es.class_of(SetId(0)).unwrap(), SizeClass::Large);
        es.delete(SetId(0), ElementKey(3)).unwrap();
        oracle.delete(SetId(0), ElementKey(3));
        assert_large_tables_exact(&es, &oracle);
        let snap = es.snapshot();
        assert_eq!(snap.tables[&(SetId(0), SetId(1))], 9);
    }

    #[test]
    fn demotion_releases_slot_and_clears_entries() {
        let mut es = EmptinessStructure::new(16).unwrap();
        for i in 0..6u64 {
            es.insert(SetId(0), ElementKey(i)).unwrap();
            es.insert(SetId(1), ElementKey(i)).unwrap();
        }
        assert_eq!(es.class_of(SetId(0)).unwrap(), SizeClass::Medium);
        for i in 0..3u64 {
            es.delete(SetId(0), ElementKey(i)).unwrap();
        }
        assert_eq!(es.class_of(SetId(0)).unwrap(), SizeClass::Small);
        let snap = es.snapshot();
        // No table row may mention the demoted set in either direction.
        assert!(snap.tables.keys().all(|&(a, b)| a != SetId(0) && b != SetId(0)));
        // The freed slot is reused by the next promotion.
        let before = snap.max_slot.unwrap();
        for i in 0..6u64 {
            es.insert(SetId(2), ElementKey(i + 50)).unwrap();
        }
        assert!(es.snapshot().max_slot.unwrap() <= before + 1);
    }

    #[test]
    fn insert_then_delete_restores_state() {
        let mut es = EmptinessStructure::new(16).unwrap();
        for i in 0..5u64 {
            es.insert(SetId(0), ElementKey(i)).unwrap();
        }
        let before = es.snapshot();
        es.insert(SetId(0), ElementKey(99)).unwrap();
        es.delete(SetId(0), ElementKey(99)).unwrap();
        let after = es.snapshot();
        assert_eq!(before.classes, after.classes);
        assert_eq!(before.sizes, after.sizes);
        assert_eq!(before.tables, after.tables);
    }

    #[test]
    fn rebuild_fires_once_on_growth_to_40() {
        let mut es = EmptinessStructure::new(64).unwrap();
        let mut rebuilds = 0;
        for i in 0..40u64 {
            let r = es.insert(SetId(i % 4), ElementKey(i)).unwrap();
            if r.rebuilt {
                rebuilds += 1;
            }
        }
        assert_eq!(rebuilds, 1);
        assert_eq!(es.anchor(), 32);
    }

    #[test]
    fn shrink_triggers_rebuild() {
        let mut es = EmptinessStructure::new(64).unwrap();
        for i in 0..40u64 {
            es.insert(SetId(0), ElementKey(i)).unwrap();
        }
        assert_eq!(es.anchor(), 32);
        let mut rebuilt = false;
        for i in 0..30u64 {
            rebuilt |= es.delete(SetId(0), ElementKey(i)).unwrap().rebuilt;
        }
        assert!(rebuilt);
        assert!(es.anchor() < 32);
    }

    #[test]
    fn errors_on_duplicate_and_absent() {
        let mut es = EmptinessStructure::new(16).unwrap();
        es.insert(SetId(0), ElementKey(1)).unwrap();
        assert!(matches!(
            es.insert(SetId(0), ElementKey(1)),
            Err(Error::DuplicateElement { .. })
        ));
        assert!(matches!(
            es.delete(SetId(0), ElementKey(2)),
            Err(Error::ElementNotFound { .. })
        ));
        assert!(matches!(es.delete(SetId(5), ElementKey(0)), Err(Error::UnknownSet(_))));
    }

    #[test]
    fn random_schedule_matches_oracle_everywhere() {
        let mut rng = StdRng::seed_from_u64(0xe5);
        for round in 0..20 {
            let budget = [16, 64, 256][round % 3];
            let mut es = EmptinessStructure::new(budget).unwrap();
            let mut oracle = OracleFamily::new();
            let sets: Vec<SetId> = (0..6).map(SetId).collect();
            for &s in &sets {
                es.register(s);
                oracle.register(s);
            }
            for _ in 0..2000 {
                let s = sets[rng.gen_range(0..sets.len())];
                let x = ElementKey(rng.gen_range(0..120));
                if rng.gen_bool(0.65) {
                    assert_eq!(es.insert(s, x).is_ok(), oracle.insert(s, x));
                } else {
                    assert_eq!(es.delete(s, x).is_ok(), oracle.delete(s, x));
                }
                let a = sets[rng.gen_range(0..sets.len())];
                let b = sets[rng.gen_range(0..sets.len())];
                assert_eq!(
                    es.disjoint(a, b).unwrap(),
                    oracle.disjoint(a, b).unwrap(),
                    "disjointness divergence on {a} vs {b}"
                );
            }
            assert_large_tables_exact(&es, &oracle);
            // Registry stays within twice sqrt(M) plus slack.
            let snap = es.snapshot();
            assert!(
                snap.slots_in_use as f64 <= 2.0 * (budget as f64).sqrt() + 2.0,
                "registry {} too large for budget {budget}",
                snap.slots_in_use
            );
        }
    }
}
