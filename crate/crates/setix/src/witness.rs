//! Insert-only witness queries combining packed stashes with witness tables.
//!
//! Every medium or large set keeps a *stash* of its most recent inserts in an
//! inner [`PackedFamily`] (for a medium set the stash is the whole set); a
//! large set additionally owns a *primary* set holding everything dumped out
//! of the stash. Witness tables record, per set `S` and large peer `S'`, one
//! element of `S ∩ primary(S')` (or that the intersection was empty when
//! last probed). A query consults both table directions and falls back to a
//! packed stash-against-stash intersection; any small operand is simply
//! scanned against the other side's membership table.
//!
//! Because the family is insert-only, a witness once established stays valid
//! forever: table entries are written at most once per pair and survive
//! rebuilds. Coverage is maintained by three rules: a set crossing the
//! medium boundary scans itself against every large primary (prepared
//! incrementally starting at half the boundary), each insert into a non-small
//! set probes every large primary for the new element, and a stash dump
//! rescans every medium and large set against the dumped batch.

use crate::counters;
use crate::det::{DetMap, DetSet};
pub use crate::emptiness::SizeClass;
use crate::error::{Error, Result};
use crate::hashing::SeedStream;
use crate::packed_sets::PackedFamily;
use crate::word_ops::{FieldLayout, LAYOUT_W64};
use crate::{ElementKey, SetId};
use std::collections::{BTreeMap, VecDeque};

const MIN_ANCHOR: usize = 16;

#[derive(Debug, Clone)]
struct WsCatchUp {
    queue: VecDeque<SetId>,
    quantum: usize,
}

#[derive(Debug, Clone, Default)]
struct WsSet {
    members: DetSet<ElementKey>,
    /// Recent inserts, mirrored in the inner packed family. The whole set
    /// while the set is medium.
    stash: Vec<ElementKey>,
    /// Dumped elements; nonempty only for large sets.
    primary: DetSet<ElementKey>,
    class: Option<SizeClass>,
    /// `P_S`: large peer -> witness in `S ∩ primary(peer)`, `None` when that
    /// intersection was empty at probe time. Absent means never probed.
    table: DetMap<SetId, Option<ElementKey>>,
    catch_up: Option<WsCatchUp>,
    /// Whether incremental table preparation has already been kicked off.
    prepared: bool,
}

impl WsSet {
    fn class(&self) -> SizeClass {
        self.class.unwrap_or(SizeClass::Small)
    }
}

/// Introspection snapshot (test support; not a stable API).
#[derive(Debug, Clone)]
pub struct WitnessSnapshot {
    pub anchor: usize,
    pub tau_q: usize,
    pub total: usize,
    pub generation: u64,
    pub dumps: u64,
    pub stash_cap: usize,
    pub classes: BTreeMap<SetId, SizeClass>,
    pub sizes: BTreeMap<SetId, usize>,
    pub stash_sizes: BTreeMap<SetId, usize>,
    pub primary_sizes: BTreeMap<SetId, usize>,
    pub tables: BTreeMap<(SetId, SetId), Option<ElementKey>>,
}

#[derive(Debug)]
pub struct WitnessStructure {
    anchor: usize,
    total: usize,
    tau_q: usize,
    layout: &'static FieldLayout,
    seeds: SeedStream,
    inner: PackedFamily,
    stash_cap: usize,
    build_threshold: f64,
    med_threshold: f64,
    large_threshold: f64,
    sets: DetMap<SetId, WsSet>,
    /// Medium and large sets in promotion order.
    active: Vec<SetId>,
    /// Large sets in promotion order.
    large: Vec<SetId>,
    generation: u64,
    dumps: u64,
}

/// Default speedup parameter `w / log^2 w` rounded to the nearest positive
/// integer (2 for w = 64).
pub fn default_tau_q(layout: &FieldLayout) -> usize {
    let w = layout.word_bits() as f64;
    let log_w = w.log2();
    ((w / (log_w * log_w)).round() as usize).max(1)
}

impl WitnessStructure {
    pub fn new(seed: u64) -> Self {
        Self::with_config(seed, default_tau_q(&LAYOUT_W64), &LAYOUT_W64)
    }

    /// Explicit speedup parameter (tests force larger stash/primary
    /// interplay with e.g. `tau_q = 16`) and word layout.
    pub fn with_config(seed: u64, tau_q: usize, layout: &'static FieldLayout) -> Self {
        let tau_q = tau_q.max(1);
        let mut seeds = SeedStream::new(seed);
        let mut ws = WitnessStructure {
            anchor: MIN_ANCHOR,
            total: 0,
            tau_q,
            layout,
            inner: PackedFamily::with_layout(2, seeds.next_u64(), layout).unwrap(),
            seeds,
            stash_cap: 0,
            build_threshold: 0.0,
            med_threshold: 0.0,
            large_threshold: 0.0,
            sets: DetMap::default(),
            active: Vec::new(),
            large: Vec::new(),
            generation: 0,
            dumps: 0,
        };
        ws.recompute_thresholds();
        ws.inner = PackedFamily::with_layout(ws.stash_cap + 1, ws.seeds.next_u64(), layout)
            .expect("cap is positive");
        ws
    }

    fn recompute_thresholds(&mut self) {
        let n = self.anchor as f64;
        let t = self.tau_q as f64;
        self.build_threshold = (n / (2.0 * t)).sqrt();
        self.med_threshold = (n / t).sqrt();
        self.large_threshold = (n * t).sqrt();
        self.stash_cap = (self.large_threshold.ceil() as usize).max(1);
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn tau_q(&self) -> usize {
        self.tau_q
    }

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

    #[inline]
    fn probe_members(&self, s: SetId, x: ElementKey) -> bool {
        counters::membership_probes(1);
        self.sets.get(&s).is_some_and(|st| st.members.contains(&x))
    }

    #[inline]
    fn probe_primary(&self, s: SetId, x: ElementKey) -> bool {
        counters::membership_probes(1);
        self.sets.get(&s).is_some_and(|st| st.primary.contains(&x))
    }

    /// Witness of `S ∩ primary(peer)` by scanning the members of `s`.
    fn scan_vs_primary(&self, s: SetId, peer: SetId) -> Option<ElementKey> {
        let st = self.sets.get(&s)?;
        st.members.iter().copied().find(|&x| self.probe_primary(peer, x))
    }

    pub fn insert(&mut self, s: SetId, x: ElementKey) -> Result<()> {
        let st = self.sets.entry(s).or_default();
        counters::membership_probes(1);
        if st.members.contains(&x) {
            return Err(Error::DuplicateElement { set: s, element: x });
        }
        st.members.insert(x);
        self.total += 1;
        let size = self.sets[&s].members.len();
        let was = self.sets[&s].class();

        if was != SizeClass::Small {
            // Keep the tables current for the new element: one probe per
            // large primary, written only where no witness exists yet.
            let larges: Vec<SetId> = self.large.iter().copied().filter(|&p| p != s).collect();
            for peer in larges {
                let known = matches!(self.sets[&s].table.get(&peer), Some(Some(_)));
                if !known && self.probe_primary(peer, x) {
                    self.sets.get_mut(&s).unwrap().table.insert(peer, Some(x));
                }
            }
        }

        // Kick off incremental table preparation halfway to the medium
        // boundary, and advance it one quantum per insert.
        if was == SizeClass::Small
            && !self.sets[&s].prepared
            && size as f64 >= self.build_threshold
        {
            self.start_catch_up(s);
        }
        self.run_catch_up(s, false);

        if self.sets[&s].class() == SizeClass::Small && size as f64 >= self.med_threshold {
            // Bulk-loads the whole member set (including x) into the stash.
            self.promote_to_medium(s)?;
        }
        if self.sets[&s].class() == SizeClass::Medium && size as f64 > self.large_threshold {
            self.sets.get_mut(&s).unwrap().class = Some(SizeClass::Large);
            self.large.push(s);
        }
        // Dump before x joins the stash, so the stash never outgrows the
        // inner family's cap.
        if self.sets[&s].class() == SizeClass::Large
            && self.sets[&s].stash.len() >= self.stash_cap
        {
            self.dump_stash(s)?;
        }
        if was != SizeClass::Small {
            self.sets.get_mut(&s).unwrap().stash.push(x);
            self.inner.insert(s, x)?;
        }

        if self.total > 2 * self.anchor {
            self.rebuild()?;
        }
        Ok(())
    }

    fn start_catch_up(&mut self, s: SetId) {
        let queue: VecDeque<SetId> = self.large.iter().copied().filter(|&p| p != s).collect();
        let window = (self.med_threshold - self.build_threshold).max(1.0);
        let quantum = ((queue.len() as f64 / window).ceil() as usize).max(1);
        let st = self.sets.get_mut(&s).unwrap();
        st.catch_up = Some(WsCatchUp { queue, quantum });
        st.prepared = true;
    }

    fn run_catch_up(&mut self, s: SetId, flush: bool) {
        let Some(mut cu) = self.sets.get_mut(&s).unwrap().catch_up.take() else {
            return;
        };
        let limit = if flush { usize::MAX } else { cu.quantum };
        let mut done = 0;
        while done < limit {
            let Some(peer) = cu.queue.pop_front() else { break };
            if self.sets.get(&peer).map(|p| p.class()) != Some(SizeClass::Large) {
                continue;
            }
            if !self.sets[&s].table.contains_key(&peer) {
                let found = self.scan_vs_primary(s, peer);
                self.sets.get_mut(&s).unwrap().table.insert(peer, found);
            }
            done += 1;
        }
        if !cu.queue.is_empty() {
            self.sets.get_mut(&s).unwrap().catch_up = Some(cu);
        }
    }

    fn promote_to_medium(&mut self, s: SetId) -> Result<()> {
        // Finish the table against every current large set. The catch-up
        // snapshot may predate some promotions, and entries it computed as
        // empty may have gone stale behind a dump, so everything without an
        // established witness is rechecked here.
        self.sets.get_mut(&s).unwrap().catch_up = None;
        let larges: Vec<SetId> = self.large.iter().copied().filter(|&p| p != s).collect();
        for peer in larges {
            if !matches!(self.sets[&s].table.get(&peer), Some(Some(_))) {
                let found = self.scan_vs_primary(s, peer);
                self.sets.get_mut(&s).unwrap().table.insert(peer, found);
            }
        }
        // The whole set enters the stash.
        let mut elems: Vec<ElementKey> = self.sets[&s].members.iter().copied().collect();
        elems.sort_unstable();
        for &e in &elems {
            self.inner.insert(s, e)?;
        }
        let st = self.sets.get_mut(&s).unwrap();
        st.stash = elems;
        st.class = Some(SizeClass::Medium);
        self.active.push(s);
        Ok(())
    }

    /// Move the stash of large set `s` into its primary set, then rescan
    /// every medium and large set against the dumped batch so no witness
    /// that lived only in the stash is lost.
    fn dump_stash(&mut self, s: SetId) -> Result<()> {
        counters::stash_dumps(1);
        self.dumps += 1;
        let batch = std::mem::take(&mut self.sets.get_mut(&s).unwrap().stash);
        for &e in &batch {
            self.inner.delete(s, e)?;
        }
        let st = self.sets.get_mut(&s).unwrap();
        for &e in &batch {
            st.primary.insert(e);
        }
        let others: Vec<SetId> = self.active.iter().copied().filter(|&w| w != s).collect();
        for w in others {
            if matches!(self.sets[&w].table.get(&s), Some(Some(_))) {
                continue;
            }
            if let Some(&e) = batch.iter().find(|&&e| self.probe_members(w, e)) {
                self.sets.get_mut(&w).unwrap().table.insert(s, Some(e));
            }
            // A miss proves nothing about older primary contents: leave the
            // entry as it was.
        }
        Ok(())
    }

    /// One element of `s1 ∩ s2`, or `None` when disjoint.
    pub fn witness(&self, s1: SetId, s2: SetId) -> Result<Option<ElementKey>> {
        let st1 = self.sets.get(&s1).ok_or(Error::UnknownSet(s1))?;
        let st2 = self.sets.get(&s2).ok_or(Error::UnknownSet(s2))?;
        if s1 == s2 {
            return Ok(st1.members.iter().copied().min());
        }
        // Any small operand is strictly smaller than every medium or large
        // set, so scanning it is both correct and cheap.
        if st1.class() == SizeClass::Small || st2.class() == SizeClass::Small {
            let (scan, other) = if st1.members.len() <= st2.members.len() {
                (st1, s2)
            } else {
                (st2, s1)
            };
            return Ok(scan.members.iter().copied().find(|&x| self.probe_members(other, x)));
        }
        if st2.class() == SizeClass::Large {
            if let Some(Some(w)) = st1.table.get(&s2) {
                return Ok(Some(*w));
            }
        }
        if st1.class() == SizeClass::Large {
            if let Some(Some(w)) = st2.table.get(&s1) {
                return Ok(Some(*w));
            }
        }
        // A freshly rebuilt large set may have an empty stash and no entry
        // in the inner family yet.
        if self.inner.contains_set(s1) && self.inner.contains_set(s2) {
            self.inner.intersect_witness(s1, s2)
        } else {
            Ok(None)
        }
    }

    /// Rebuild for a doubled anchor: reclassify, reload stashes (medium sets
    /// fit whole; a large set restarts with an empty stash and its members
    /// as primary), then fill table gaps for every pair with a large side.
    /// Existing non-null entries are kept: they remain sound forever in an
    /// insert-only family.
    fn rebuild(&mut self) -> Result<()> {
        counters::rebuilds(1);
        self.generation += 1;
        self.anchor = MIN_ANCHOR.max(crate::round_pow2_nearest(self.total));
        self.recompute_thresholds();
        self.inner =
            PackedFamily::with_layout(self.stash_cap + 1, self.seeds.next_u64(), self.layout)?;
        self.active.clear();
        self.large.clear();
        let mut ids: Vec<SetId> = self.sets.keys().copied().collect();
        ids.sort_unstable();
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
            st.class = Some(class);
            st.primary.clear();
            st.stash.clear();
            st.catch_up = None;
            st.prepared = class != SizeClass::Small;
            match class {
                SizeClass::Small => {}
                SizeClass::Medium => {
                    let mut elems: Vec<ElementKey> =
                        self.sets[&s].members.iter().copied().collect();
                    elems.sort_unstable();
                    for &e in &elems {
                        self.inner.insert(s, e)?;
                    }
                    self.sets.get_mut(&s).unwrap().stash = elems;
                    self.active.push(s);
                }
                SizeClass::Large => {
                    let st = self.sets.get_mut(&s).unwrap();
                    st.primary = st.members.clone();
                    self.active.push(s);
                    self.large.push(s);
                }
            }
        }
        // Large primaries were refilled without passing through a dump, so
        // recompute every missing table direction against them.
        let active = self.active.clone();
        let large = self.large.clone();
        for &w in &active {
            for &s in &large {
                if s == w {
                    continue;
                }
                if matches!(self.sets[&w].table.get(&s), Some(Some(_))) {
                    continue;
                }
                let found = self.scan_vs_primary(w, s);
                self.sets.get_mut(&w).unwrap().table.insert(s, found);
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> WitnessSnapshot {
        let mut classes = BTreeMap::new();
        let mut sizes = BTreeMap::new();
        let mut stash_sizes = BTreeMap::new();
        let mut primary_sizes = BTreeMap::new();
        let mut tables = BTreeMap::new();
        for (&s, st) in &self.sets {
            classes.insert(s, st.class());
            sizes.insert(s, st.members.len());
            stash_sizes.insert(s, st.stash.len());
            primary_sizes.insert(s, st.primary.len());
            for (&peer, &w) in &st.table {
                tables.insert((s, peer), w);
            }
        }
        WitnessSnapshot {
            anchor: self.anchor,
            tau_q: self.tau_q,
            total: self.total,
            generation: self.generation,
            dumps: self.dumps,
            stash_cap: self.stash_cap,
            classes,
            sizes,
            stash_sizes,
            primary_sizes,
            tables,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::OracleFamily;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn default_tau_q_for_w64_is_two() {
        assert_eq!(default_tau_q(&LAYOUT_W64), 2);
    }

    #[test]
    fn small_insert_touches_no_tables() {
        let mut ws = WitnessStructure::new(1);
        ws.insert(SetId(0), ElementKey(1)).unwrap();
        let snap = ws.snapshot();
        assert!(snap.tables.is_empty());
        assert_eq!(snap.classes[&SetId(0)], SizeClass::Small);
        assert_eq!(snap.stash_sizes[&SetId(0)], 0);
    }

    #[test]
    fn disjoint_sets_give_no_witness() {
        let mut ws = WitnessStructure::new(2);
        for i in 0..20u64 {
            ws.insert(SetId(0), ElementKey(i)).unwrap();
            ws.insert(SetId(1), ElementKey(i + 100)).unwrap();
        }
        assert_eq!(ws.witness(SetId(0), SetId(1)).unwrap(), None);
        assert!(matches!(ws.witness(SetId(0), SetId(9)), Err(Error::UnknownSet(_))));
    }

    /// Drive a set to Large with at least one dump, all under a fixed
    /// structure; returns the element count used.
    fn grow(ws: &mut WitnessStructure, s: SetId, base: u64, n: u64) {
        for i in 0..n {
            ws.insert(s, ElementKey(base + i)).unwrap();
        }
    }

    #[test]
    fn large_pair_witness_via_tables() {
        let mut ws = WitnessStructure::with_config(3, 2, &LAYOUT_W64);
        // Push two sets well past the large threshold; anchors/rebuilds run
        // as a side effect.
        grow(&mut ws, SetId(0), 0, 60);
        grow(&mut ws, SetId(1), 1000, 60);
        assert_eq!(ws.class_of(SetId(0)).unwrap(), SizeClass::Large);
        assert_eq!(ws.class_of(SetId(1)).unwrap(), SizeClass::Large);
        assert!(ws.snapshot().primary_sizes[&SetId(0)] > 0, "expected a dump");
        // Share one element that sits in S0's primary.
        let shared = ws.snapshot().primary_sizes[&SetId(0)] as u64 - 1;
        ws.insert(SetId(1), ElementKey(shared)).unwrap();
        let w = ws.witness(SetId(0), SetId(1)).unwrap();
        assert_eq!(w, Some(ElementKey(shared)));
        assert_eq!(
            ws.snapshot().tables.get(&(SetId(1), SetId(0))),
            Some(&Some(ElementKey(shared)))
        );
    }

    #[test]
    fn dump_moves_stash_to_primary_and_preserves_witnesses() {
        let mut ws = WitnessStructure::with_config(4, 2, &LAYOUT_W64);
        grow(&mut ws, SetId(0), 0, 40);
        let snap = ws.snapshot();
        assert!(snap.dumps >= 1);
        assert_eq!(
            snap.sizes[&SetId(0)],
            snap.stash_sizes[&SetId(0)] + snap.primary_sizes[&SetId(0)]
        );
        // A second set sharing only primary elements of S0 still finds a
        // witness after its own growth.
        let mut ws2 = WitnessStructure::with_config(4, 2, &LAYOUT_W64);
        grow(&mut ws2, SetId(0), 0, 40);
        let primary_elem = ElementKey(0);
        assert!(ws2.snapshot().primary_sizes[&SetId(0)] > 0);
        ws2.insert(SetId(1), primary_elem).unwrap();
        grow(&mut ws2, SetId(1), 500, 30);
        assert!(ws2.witness(SetId(0), SetId(1)).unwrap().is_some());
    }

    #[test]
    fn witness_found_in_stash_only() {
        let mut ws = WitnessStructure::with_config(5, 2, &LAYOUT_W64);
        grow(&mut ws, SetId(0), 0, 30);
        grow(&mut ws, SetId(1), 1000, 30);
        // Insert a fresh shared element: it lives in both stashes (or one
        // stash and one probe-covered primary) but in no table necessarily.
        ws.insert(SetId(0), ElementKey(7777)).unwrap();
        ws.insert(SetId(1), ElementKey(7777)).unwrap();
        assert_eq!(ws.witness(SetId(0), SetId(1)).unwrap(), Some(ElementKey(7777)));
    }

    #[test]
    fn nonnull_table_entries_are_write_once() {
        let mut rng = StdRng::seed_from_u64(0xabc);
        let mut ws = WitnessStructure::with_config(6, 4, &LAYOUT_W64);
        let mut history: BTreeMap<(u64, SetId, SetId), ElementKey> = BTreeMap::new();
        for step in 0..3000 {
            let s = SetId(rng.gen_range(0..4));
            let e = ElementKey(rng.gen_range(0..400));
            let _ = ws.insert(s, e);
            if step % 50 == 0 {
                let snap = ws.snapshot();
                for (&(a, b), &w) in &snap.tables {
                    if let Some(w) = w {
                        let prev = history.insert((snap.generation, a, b), w);
                        assert!(
                            prev.is_none() || prev == Some(w),
                            "witness for ({a},{b}) changed from {prev:?} to {w}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn random_incremental_schedules_match_oracle() {
        let mut rng = StdRng::seed_from_u64(42);
        for round in 0..40 {
            let tau = [2, 4, 16][round % 3];
            let mut ws = WitnessStructure::with_config(round as u64, tau, &LAYOUT_W64);
            let mut oracle = OracleFamily::new();
            let sets: Vec<SetId> = (0..5).map(SetId).collect();
            for &s in &sets {
                ws.register(s);
                oracle.register(s);
            }
            let universe = rng.gen_range(30..300);
            for _ in 0..rng.gen_range(50..800) {
                let s = sets[rng.gen_range(0..sets.len())];
                let e = ElementKey(rng.gen_range(0..universe));
                assert_eq!(ws.insert(s, e).is_ok(), oracle.insert(s, e));
                let a = sets[rng.gen_range(0..sets.len())];
                let b = sets[rng.gen_range(0..sets.len())];
                let got = ws.witness(a, b).unwrap();
                let want = oracle.intersect(a, b).unwrap();
                match got {
                    Some(w) => assert!(want.contains(&w), "unsound witness {w} for {a},{b}"),
                    None => assert!(want.is_empty(), "missed witness for {a},{b}"),
                }
            }
        }
    }

    #[test]
    fn long_schedule_covers_transitions_and_dumps() {
        let mut rng = StdRng::seed_from_u64(4242);
        let mut ws = WitnessStructure::with_config(9, 2, &LAYOUT_W64);
        let mut oracle = OracleFamily::new();
        let sets: Vec<SetId> = (0..4).map(SetId).collect();
        for &s in &sets {
            ws.register(s);
            oracle.register(s);
        }
        for _ in 0..4000 {
            let s = sets[rng.gen_range(0..sets.len())];
            let e = ElementKey(rng.gen_range(0..2000));
            assert_eq!(ws.insert(s, e).is_ok(), oracle.insert(s, e));
        }
        let snap = ws.snapshot();
        assert!(snap.dumps >= 2, "schedule produced {} dumps", snap.dumps);
        assert!(snap.classes.values().any(|&c| c == SizeClass::Large));
        for &a in &sets {
            for &b in &sets {
                let got = ws.witness(a, b).unwrap();
                let want = oracle.intersect(a, b).unwrap();
                assert_eq!(got.is_some(), !want.is_empty());
                if let Some(w) = got {
                    assert!(want.contains(&w));
                }
            }
        }
    }

    #[test]
    fn class_thresholds_respected_after_every_insert() {
        let mut ws = WitnessStructure::with_config(11, 2, &LAYOUT_W64);
        for i in 0..200u64 {
            ws.insert(SetId(i % 3), ElementKey(i)).unwrap();
            let snap = ws.snapshot();
            for (&s, &c) in &snap.classes {
                let size = snap.sizes[&s] as f64;
                let n = snap.anchor as f64;
                let t = snap.tau_q as f64;
                match c {
                    SizeClass::Small => assert!(size < (n / t).sqrt()),
                    SizeClass::Medium => {
                        assert!(size >= (n / t).sqrt() && size <= (n * t).sqrt())
                    }
                    SizeClass::Large => assert!(size > (n / t).sqrt(), "{s} large below floor"),
                }
            }
        }
    }
}
