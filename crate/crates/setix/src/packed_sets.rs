//! A family of capped-size sets with packed intersection queries.
//!
//! Each set is split into `l = max(1, ceil(d * log2(w) / w))` buckets by a
//! pairwise-independent hash `h`; within a bucket, elements are represented
//! by fingerprints `h'(e) < w^2` kept in a sorted [`PackedList`], plus a
//! lookup table translating fingerprints back to elements. Intersecting two
//! sets merges the per-bucket fingerprint lists word-parallel, detects
//! duplicate fingerprints, and filters false positives through the member
//! tables, so query work scales with `d / (w / log^2 w)` plus output size
//! while updates stay expected constant time.

use crate::counters;
use crate::det::DetMap;
use crate::error::{Error, Result};
use crate::hashing::{BucketHash, FingerprintHash, SeedStream};
use crate::word_ops::{FieldLayout, PackedList, LAYOUT_W64};
use crate::{ElementKey, SetId};

/// One bucket: packed fingerprints plus the fingerprint -> element table.
/// Elements colliding on `h'` chain in insertion order.
#[derive(Debug, Clone)]
struct Bucket {
    fingerprints: PackedList,
    members: DetMap<u64, Vec<ElementKey>>,
}

impl Bucket {
    fn new(layout: &'static FieldLayout) -> Self {
        Bucket { fingerprints: PackedList::new(layout), members: DetMap::default() }
    }
}

#[derive(Debug, Clone)]
struct SetEntry {
    buckets: Vec<Bucket>,
    size: usize,
}

/// Family of sets, each of size strictly below the cap `d`.
#[derive(Debug)]
pub struct PackedFamily {
    cap: usize,
    num_buckets: usize,
    layout: &'static FieldLayout,
    bucket_hash: BucketHash,
    fp_hash: FingerprintHash,
    sets: DetMap<SetId, SetEntry>,
}

impl PackedFamily {
    /// Family with cap `d` on the native 64-bit layout.
    pub fn new(cap: usize, seed: u64) -> Result<Self> {
        Self::with_layout(cap, seed, &LAYOUT_W64)
    }

    /// Family with cap `d`, explicit word layout.
    pub fn with_layout(cap: usize, seed: u64, layout: &'static FieldLayout) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidParameter("cap d must be at least 1"));
        }
        let w = layout.word_bits() as usize;
        let log_w = w.trailing_zeros() as usize;
        let num_buckets = 1.max((cap * log_w).div_ceil(w));
        let mut seeds = SeedStream::new(seed);
        let bucket_hash = seeds.bucket_hash(num_buckets);
        let fp_hash = seeds.fingerprint_hash(layout.field_width() - 1);
        Ok(PackedFamily {
            cap,
            num_buckets,
            layout,
            bucket_hash,
            fp_hash,
            sets: DetMap::default(),
        })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn num_buckets(&self) -> usize {
        self.num_buckets
    }

    pub fn contains_set(&self, s: SetId) -> bool {
        self.sets.contains_key(&s)
    }

    pub fn len_of(&self, s: SetId) -> Result<usize> {
        Ok(self.entry(s)?.size)
    }

    fn entry(&self, s: SetId) -> Result<&SetEntry> {
        self.sets.get(&s).ok_or(Error::UnknownSet(s))
    }

    fn contains(&self, entry: &SetEntry, e: ElementKey) -> bool {
        let b = &entry.buckets[self.bucket_hash.bucket_of(e)];
        counters::membership_probes(1);
        b.members
            .get(&self.fp_hash.fingerprint_of(e))
            .is_some_and(|chain| chain.contains(&e))
    }

    /// Insert `e` into set `s`, creating the set on first use.
    pub fn insert(&mut self, s: SetId, e: ElementKey) -> Result<()> {
        let num_buckets = self.num_buckets;
        let layout = self.layout;
        if !self.sets.contains_key(&s) {
            self.sets.insert(
                s,
                SetEntry { buckets: (0..num_buckets).map(|_| Bucket::new(layout)).collect(), size: 0 },
            );
        }
        let entry = self.sets.get(&s).unwrap();
        if self.contains(entry, e) {
            return Err(Error::DuplicateElement { set: s, element: e });
        }
        if entry.size + 1 >= self.cap {
            return Err(Error::CapacityExceeded { set: s, cap: self.cap });
        }
        let bi = self.bucket_hash.bucket_of(e);
        let fp = self.fp_hash.fingerprint_of(e);
        let entry = self.sets.get_mut(&s).unwrap();
        let bucket = &mut entry.buckets[bi];
        bucket.fingerprints.insert(fp)?;
        bucket.members.entry(fp).or_default().push(e);
        entry.size += 1;
        Ok(())
    }

    /// Remove `e` from set `s`.
    pub fn delete(&mut self, s: SetId, e: ElementKey) -> Result<()> {
        let bi = self.bucket_hash.bucket_of(e);
        let fp = self.fp_hash.fingerprint_of(e);
        let entry = self.sets.get_mut(&s).ok_or(Error::UnknownSet(s))?;
        let bucket = &mut entry.buckets[bi];
        counters::membership_probes(1);
        let chain = bucket
            .members
            .get_mut(&fp)
            .ok_or(Error::ElementNotFound { set: s, element: e })?;
        let pos = chain
            .iter()
            .position(|&m| m == e)
            .ok_or(Error::ElementNotFound { set: s, element: e })?;
        chain.remove(pos);
        if chain.is_empty() {
            bucket.members.remove(&fp);
        }
        bucket.fingerprints.delete(fp)?;
        entry.size -= 1;
        Ok(())
    }

    /// All elements of `s1 ∩ s2`, in deterministic but unspecified order.
    pub fn intersect_report(&self, s1: SetId, s2: SetId) -> Result<Vec<ElementKey>> {
        let mut out = Vec::new();
        self.intersect_impl(s1, s2, &mut |e| {
            out.push(e);
            true
        })?;
        Ok(out)
    }

    /// Some element of `s1 ∩ s2`, or `None` when disjoint. Stops at the
    /// first verified duplicate fingerprint.
    pub fn intersect_witness(&self, s1: SetId, s2: SetId) -> Result<Option<ElementKey>> {
        let mut witness = None;
        self.intersect_impl(s1, s2, &mut |e| {
            witness = Some(e);
            false
        })?;
        Ok(witness)
    }

    /// Shared query loop; `emit` returns false to stop after a hit.
    fn intersect_impl(
        &self,
        s1: SetId,
        s2: SetId,
        emit: &mut dyn FnMut(ElementKey) -> bool,
    ) -> Result<()> {
        let e1 = self.entry(s1)?;
        let e2 = self.entry(s2)?;
        for (b1, b2) in e1.buckets.iter().zip(&e2.buckets) {
            if b1.fingerprints.is_empty() || b2.fingerprints.is_empty() {
                continue;
            }
            let merged = b1.fingerprints.merge(&b2.fingerprints)?;
            let mut last_fp = u64::MAX;
            for idx in merged.duplicates() {
                let fp = merged.get(idx);
                if fp == last_fp {
                    continue; // longer runs repeat the same fingerprint
                }
                last_fp = fp;
                counters::verifications(1);
                let c1 = b1.members.get(&fp);
                let c2 = b2.members.get(&fp);
                let (c1, c2) = match (c1, c2) {
                    (Some(c1), Some(c2)) => (c1, c2),
                    // Duplicate came from a same-set h' collision.
                    _ => continue,
                };
                let mut matched = 0u64;
                for &e in c1 {
                    if c2.contains(&e) {
                        matched += 1;
                        if !emit(e) {
                            return Ok(());
                        }
                    }
                }
                // Cross pairs with equal fingerprints but distinct elements.
                counters::false_positives((c1.len() * c2.len()) as u64 - matched);
            }
        }
        Ok(())
    }

    /// Verify the bucket invariant of `s` against recomputed hashes: the
    /// fingerprint multiset matches the member table, chains are nonempty
    /// and control bits are clear. Test support.
    pub fn check_invariants(&self, s: SetId) -> Result<bool> {
        let entry = self.entry(s)?;
        let mut total = 0;
        for bucket in &entry.buckets {
            if !bucket.fingerprints.control_bits_clear() {
                return Ok(false);
            }
            let mut from_members: Vec<u64> = Vec::new();
            for (&fp, chain) in &bucket.members {
                if chain.is_empty() {
                    return Ok(false);
                }
                for &e in chain {
                    if self.fp_hash.fingerprint_of(e) != fp {
                        return Ok(false);
                    }
                    from_members.push(fp);
                }
                total += chain.len();
            }
            from_members.sort_unstable();
            if from_members != bucket.fingerprints.values() {
                return Ok(false);
            }
        }
        Ok(total == entry.size)
    }
}
