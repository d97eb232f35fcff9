//! Fully dynamic set intersection with reporting and witness queries.
//!
//! External elements are assigned integer keys in `[0, 2N')`, spread by a
//! keyed permutation, and a binary tree over that range holds one
//! [`EmptinessStructure`] per materialized vertex, over the restrictions
//! `S^v = S ∩ range(v)`. Per-vertex budgets track `N_v * M / N'` (with `M`
//! pre-divided by the tree height so total space stays `O(M)`).
//!
//! For every vertex `v` where two sets are both locally large and intersect,
//! a pair of *shortcut pointers* names the first descendant toward each side
//! where something changes: the sets stop being locally large, the
//! intersection branches into both halves, or a leaf is reached. Queries
//! follow pointers through the all-large region in constant time per hop and
//! pay scan costs only at vertices that are charged to output. Updates walk
//! the leaf-to-root path and repair exactly the pairs whose class or
//! intersection status could have changed there.

use crate::counters;
use crate::det::{DetMap, DetSet};
use crate::emptiness::{ClassEvent, EmptinessStructure, SizeClass};
use crate::error::{Error, Result};
use crate::hashing::SeedStream;
use crate::round_pow2_nearest;
use crate::{ElementKey, SetId};
use std::collections::{BTreeMap, BTreeSet};

const MIN_ANCHOR: usize = 16;

/// Keyed permutation of `[0, size)`: a four-round Feistel network on the
/// next even number of bits, cycle-walked back into range.
#[derive(Debug, Clone)]
struct Feistel {
    half_bits: u32,
    size: u64,
    keys: [u64; 4],
}

fn mix(x: u64, k: u64) -> u64 {
    let mut z = x ^ k;
    z = z.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z ^= z >> 31;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^ (z >> 29)
}

impl Feistel {
    fn new(size: u64, seeds: &mut SeedStream) -> Feistel {
        debug_assert!(size.is_power_of_two() && size >= 2);
        let bits = size.trailing_zeros();
        let half_bits = bits.div_ceil(2).max(1);
        Feistel {
            half_bits,
            size,
            keys: [seeds.next_u64(), seeds.next_u64(), seeds.next_u64(), seeds.next_u64()],
        }
    }

    fn encrypt(&self, v: u64) -> u64 {
        let mask = (1u64 << self.half_bits) - 1;
        let (mut l, mut r) = (v >> self.half_bits, v & mask);
        for &k in &self.keys {
            let f = mix(r, k) & mask;
            let next_r = l ^ f;
            l = r;
            r = next_r;
        }
        (l << self.half_bits) | r
    }

    fn permute(&self, x: u64) -> u64 {
        let mut v = x;
        loop {
            v = self.encrypt(v);
            if v < self.size {
                return v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairPtrs {
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug)]
struct TreeNode {
    lo: u64,
    hi: u64,
    depth: usize,
    parent: Option<usize>,
    children: [Option<usize>; 2],
    empt: EmptinessStructure,
    /// Shortcut pointers for each unordered pair of locally large sets with
    /// nonempty local intersection.
    pairs: DetMap<(SetId, SetId), PairPtrs>,
}

/// Per-level accounting for introspection.
#[derive(Debug, Clone, Default)]
pub struct LevelStats {
    pub nodes: usize,
    pub total_elements: usize,
    pub total_budget: usize,
}

/// Introspection snapshot (test support; not a stable API).
#[derive(Debug, Clone)]
pub struct TreeSnapshot {
    pub anchor: usize,
    pub budget: usize,
    pub eff_budget: usize,
    pub total: usize,
    pub height: usize,
    pub node_count: usize,
    pub rebuild_count: u64,
    pub max_key_assigned: Option<u64>,
    pub levels: BTreeMap<usize, LevelStats>,
}

#[derive(Debug)]
pub struct IntersectionTree {
    budget: usize,
    eff_budget: usize,
    anchor: usize,
    total: usize,
    seeds: SeedStream,
    perm: Feistel,
    next_free: u64,
    assign: DetMap<ElementKey, u64>,
    rev: DetMap<u64, ElementKey>,
    sets: DetMap<SetId, DetSet<ElementKey>>,
    nodes: Vec<Option<TreeNode>>,
    free_nodes: Vec<usize>,
    root: Option<usize>,
    rebuild_count: u64,
    in_rebuild: bool,
}

fn ordered(a: SetId, b: SetId) -> (SetId, SetId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl IntersectionTree {
    pub fn new(budget: usize, seed: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidParameter("space budget M must be at least 1"));
        }
        let mut seeds = SeedStream::new(seed);
        let anchor = MIN_ANCHOR;
        let perm = Feistel::new(2 * anchor as u64, &mut seeds);
        let mut tree = IntersectionTree {
            budget,
            eff_budget: 1,
            anchor,
            total: 0,
            seeds,
            perm,
            next_free: 0,
            assign: DetMap::default(),
            rev: DetMap::default(),
            sets: DetMap::default(),
            nodes: Vec::new(),
            free_nodes: Vec::new(),
            root: None,
            rebuild_count: 0,
            in_rebuild: false,
        };
        tree.eff_budget = tree.effective_budget();
        Ok(tree)
    }

    /// The per-tree budget after the `M / log N'` change of variable.
    fn effective_budget(&self) -> usize {
        (self.budget / self.height()).max(1)
    }

    /// Height of the tree: `log2(N') + 1` edges from root to the single-key
    /// leaves covering `[0, 2N')`. The anchor is always a power of two.
    pub fn height(&self) -> usize {
        (2 * self.anchor).trailing_zeros() as usize
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn rebuild_count(&self) -> u64 {
        self.rebuild_count
    }

    pub fn register(&mut self, s: SetId) {
        self.sets.entry(s).or_default();
    }

    pub fn is_registered(&self, s: SetId) -> bool {
        self.sets.contains_key(&s)
    }

    pub fn len_of(&self, s: SetId) -> usize {
        self.sets.get(&s).map_or(0, |m| m.len())
    }

    pub fn contains(&self, s: SetId, x: ElementKey) -> bool {
        self.sets.get(&s).is_some_and(|m| m.contains(&x))
    }

    fn node(&self, id: usize) -> &TreeNode {
        self.nodes[id].as_ref().expect("live node")
    }

    fn node_mut(&mut self, id: usize) -> &mut TreeNode {
        self.nodes[id].as_mut().expect("live node")
    }

    fn alloc_node(&mut self, lo: u64, hi: u64, depth: usize, parent: Option<usize>) -> usize {
        let node = TreeNode {
            lo,
            hi,
            depth,
            parent,
            children: [None, None],
            empt: EmptinessStructure::new(1).expect("budget 1 is valid"),
            pairs: DetMap::default(),
        };
        if let Some(id) = self.free_nodes.pop() {
            self.nodes[id] = Some(node);
            id
        } else {
            self.nodes.push(Some(node));
            self.nodes.len() - 1
        }
    }

    fn key_for(&mut self, x: ElementKey) -> u64 {
        if let Some(&raw) = self.assign.get(&x) {
            return self.perm.permute(raw);
        }
        let raw = self.next_free;
        self.next_free += 1;
        self.assign.insert(x, raw);
        let key = self.perm.permute(raw);
        self.rev.insert(key, x);
        key
    }

    pub fn insert(&mut self, s: SetId, x: ElementKey) -> Result<()> {
        let members = self.sets.entry(s).or_default();
        if members.contains(&x) {
            return Err(Error::DuplicateElement { set: s, element: x });
        }
        // Key-space exhaustion (deleted keys are not reused in place):
        // rebuild reassigns the live elements compactly, then there is room.
        if !self.assign.contains_key(&x) && self.next_free >= 2 * self.anchor as u64 {
            self.full_rebuild()?;
        }
        let key = self.key_for(x);
        self.sets.get_mut(&s).unwrap().insert(x);
        self.total += 1;
        self.update_path(s, key, true)?;
        if !self.in_rebuild && self.total > 2 * self.anchor {
            self.full_rebuild()?;
        }
        Ok(())
    }

    pub fn delete(&mut self, s: SetId, x: ElementKey) -> Result<()> {
        let members = self.sets.get_mut(&s).ok_or(Error::UnknownSet(s))?;
        if !members.remove(&x) {
            return Err(Error::ElementNotFound { set: s, element: x });
        }
        self.total -= 1;
        let raw = *self.assign.get(&x).expect("present element has a key");
        let key = self.perm.permute(raw);
        self.update_path(s, key, false)?;
        if !self.in_rebuild && 2 * self.total < self.anchor && self.anchor > MIN_ANCHOR {
            self.full_rebuild()?;
        }
        Ok(())
    }

    /// Walk the root-to-leaf path of `key`, update every vertex structure,
    /// retune budgets, prune emptied vertices, and repair shortcut pointers
    /// bottom-up for every pair whose status could have changed.
    fn update_path(&mut self, s: SetId, key: u64, is_insert: bool) -> Result<()> {
        if self.root.is_none() {
            let hi = 2 * self.anchor as u64;
            let id = self.alloc_node(0, hi, 0, None);
            self.root = Some(id);
        }
        let mut path = Vec::with_capacity(self.height() + 1);
        let mut id = self.root.unwrap();
        loop {
            path.push(id);
            let (lo, hi, depth) = {
                let n = self.node(id);
                (n.lo, n.hi, n.depth)
            };
            if hi - lo == 1 {
                break;
            }
            let mid = lo + (hi - lo) / 2;
            let side = usize::from(key >= mid);
            let child = self.node(id).children[side];
            let child = match child {
                Some(c) => c,
                None => {
                    let (clo, chi) = if side == 0 { (lo, mid) } else { (mid, hi) };
                    let c = self.alloc_node(clo, chi, depth + 1, Some(id));
                    self.node_mut(id).children[side] = Some(c);
                    c
                }
            };
            id = child;
        }

        // Structural updates top-down, collecting class events per vertex.
        let ik = ElementKey(key);
        let mut events_by_node: Vec<Vec<ClassEvent>> = Vec::with_capacity(path.len());
        for &nid in &path {
            let eff = self.eff_budget;
            let anchor = self.anchor;
            let node = self.node_mut(nid);
            let report =
                if is_insert { node.empt.insert(s, ik)? } else { node.empt.delete(s, ik)? };
            let mut events = report.events;
            let target = (node.empt.total() * eff / anchor).max(1);
            let cur = node.empt.budget();
            if target >= 2 * cur || 2 * target <= cur {
                events.extend(node.empt.set_budget(target)?);
            }
            events_by_node.push(events);
        }

        if !is_insert {
            self.prune_path(&path);
        }

        // Pointer repair bottom-up. `touched` carries the updated set plus
        // every set whose local class flipped at or below the current vertex.
        let mut touched: BTreeSet<SetId> = BTreeSet::new();
        touched.insert(s);
        for (i, &nid) in path.iter().enumerate().rev() {
            for ev in &events_by_node[i] {
                touched.insert(ev.set);
            }
            if self.nodes[nid].is_some() {
                self.repair_node(nid, &touched)?;
            }
        }
        Ok(())
    }

    /// Free emptied childless vertices along the path, leaf first.
    fn prune_path(&mut self, path: &[usize]) {
        for &nid in path.iter().rev() {
            let node = self.node(nid);
            if node.empt.total() != 0 || node.children.iter().any(|c| c.is_some()) {
                break;
            }
            let parent = node.parent;
            self.nodes[nid] = None;
            self.free_nodes.push(nid);
            match parent {
                Some(p) => {
                    let pn = self.node_mut(p);
                    for c in pn.children.iter_mut() {
                        if *c == Some(nid) {
                            *c = None;
                        }
                    }
                }
                None => self.root = None,
            }
        }
    }

    /// Recompute the pair entries at `nid` for every pair with a touched
    /// member: stale entries are dropped, eligible ones rebuilt from child
    /// state (children along the update path are already repaired).
    fn repair_node(&mut self, nid: usize, touched: &BTreeSet<SetId>) -> Result<()> {
        let large = self.node(nid).empt.large_sets();
        let mut fixes: BTreeSet<(SetId, SetId)> = BTreeSet::new();
        for &t in touched {
            for &l in &large {
                if t != l {
                    fixes.insert(ordered(t, l));
                }
            }
        }
        self.node_mut(nid)
            .pairs
            .retain(|&(a, b), _| !touched.contains(&a) && !touched.contains(&b));
        for (a, b) in fixes {
            let empt = &self.node(nid).empt;
            let eligible = empt.class_of(a).unwrap_or(SizeClass::Small) == SizeClass::Large
                && empt.class_of(b).unwrap_or(SizeClass::Small) == SizeClass::Large
                && !empt.disjoint(a, b)?;
            if eligible {
                let left = self.compute_ptr(nid, 0, a, b)?;
                let right = self.compute_ptr(nid, 1, a, b)?;
                self.node_mut(nid).pairs.insert((a, b), PairPtrs { left, right });
            }
        }
        Ok(())
    }

    /// Target of the shortcut pointer of `(a, b)` at `nid` toward `side`:
    /// `None` when the child subtree holds no common element, otherwise the
    /// first descendant that is not all-large, branches, or is a leaf. A
    /// non-branching all-large child forwards its own pointer, which keeps
    /// this constant time per repaired pair.
    fn compute_ptr(&self, nid: usize, side: usize, a: SetId, b: SetId) -> Result<Option<usize>> {
        let Some(child) = self.node(nid).children[side] else {
            return Ok(None);
        };
        let w = self.node(child);
        if w.empt.len_of(a) == 0 || w.empt.len_of(b) == 0 {
            return Ok(None);
        }
        let both_large = w.empt.class_of(a)? == SizeClass::Large
            && w.empt.class_of(b)? == SizeClass::Large;
        if !both_large {
            return Ok(if w.empt.witness_scan(a, b).is_some() { Some(child) } else { None });
        }
        if w.empt.disjoint(a, b)? {
            return Ok(None);
        }
        let entry = w
            .pairs
            .get(&ordered(a, b))
            .expect("pair entry at an all-large vertex with nonempty intersection");
        Ok(match (entry.left, entry.right) {
            (Some(_), Some(_)) => Some(child), // branching vertex
            (None, None) => Some(child),       // leaf-level terminal
            (Some(p), None) | (None, Some(p)) => Some(p),
        })
    }

    /// All external elements of `s1 ∩ s2`.
    pub fn report(&self, s1: SetId, s2: SetId) -> Result<Vec<ElementKey>> {
        let m1 = self.sets.get(&s1).ok_or(Error::UnknownSet(s1))?;
        self.sets.get(&s2).ok_or(Error::UnknownSet(s2))?;
        if s1 == s2 {
            let mut all: Vec<ElementKey> = m1.iter().copied().collect();
            all.sort_unstable();
            return Ok(all);
        }
        let mut out = Vec::new();
        if let Some(root) = self.root {
            self.report_rec(root, s1, s2, &mut out)?;
        }
        Ok(out)
    }

    fn report_rec(&self, nid: usize, a: SetId, b: SetId, out: &mut Vec<ElementKey>) -> Result<()> {
        let node = self.node(nid);
        if node.empt.len_of(a) == 0 || node.empt.len_of(b) == 0 {
            return Ok(());
        }
        let both_large = node.empt.class_of(a)? == SizeClass::Large
            && node.empt.class_of(b)? == SizeClass::Large;
        if !both_large {
            // Scan vertex: cost proportional to the smaller restriction,
            // charged to the output it is guaranteed to contain.
            counters::type2_visits(1);
            for key in node.empt.intersection_scan(a, b) {
                out.push(self.rev[&key.0]);
            }
            return Ok(());
        }
        if node.empt.disjoint(a, b)? {
            return Ok(());
        }
        let entry = node
            .pairs
            .get(&ordered(a, b))
            .expect("pair entry at an all-large vertex with nonempty intersection");
        match (entry.left, entry.right) {
            (None, None) => {
                // Single-key leaf holding one output element.
                counters::type2_visits(1);
                for key in node.empt.intersection_scan(a, b) {
                    out.push(self.rev[&key.0]);
                }
            }
            (l, r) => {
                counters::type1_visits(1);
                if let Some(l) = l {
                    self.report_rec(l, a, b, out)?;
                }
                if let Some(r) = r {
                    self.report_rec(r, a, b, out)?;
                }
            }
        }
        Ok(())
    }

    /// One external element of `s1 ∩ s2`, following a single pointer chain.
    pub fn witness(&self, s1: SetId, s2: SetId) -> Result<Option<ElementKey>> {
        let m1 = self.sets.get(&s1).ok_or(Error::UnknownSet(s1))?;
        self.sets.get(&s2).ok_or(Error::UnknownSet(s2))?;
        if s1 == s2 {
            return Ok(m1.iter().copied().min());
        }
        let Some(mut nid) = self.root else { return Ok(None) };
        loop {
            let node = self.node(nid);
            if node.empt.len_of(s1) == 0 || node.empt.len_of(s2) == 0 {
                return Ok(None);
            }
            let both_large = node.empt.class_of(s1)? == SizeClass::Large
                && node.empt.class_of(s2)? == SizeClass::Large;
            if !both_large {
                return Ok(node.empt.witness_scan(s1, s2).map(|key| self.rev[&key.0]));
            }
            if node.empt.disjoint(s1, s2)? {
                return Ok(None);
            }
            let entry = node
                .pairs
                .get(&ordered(s1, s2))
                .expect("pair entry at an all-large vertex with nonempty intersection");
            match (entry.left, entry.right) {
                (None, None) => {
                    return Ok(node.empt.witness_scan(s1, s2).map(|key| self.rev[&key.0]));
                }
                (Some(l), _) => nid = l,
                (None, Some(r)) => nid = r,
            }
        }
    }

    /// Rebuild: fresh anchor, fresh permutation, compact key reassignment,
    /// and full reconstruction through the ordinary insert path.
    fn full_rebuild(&mut self) -> Result<()> {
        counters::rebuilds(1);
        self.rebuild_count += 1;
        let mut ids: Vec<SetId> = self.sets.keys().copied().collect();
        ids.sort_unstable();
        let mut items: Vec<(SetId, ElementKey)> = Vec::with_capacity(self.total);
        for &s in &ids {
            let mut elems: Vec<ElementKey> = self.sets[&s].iter().copied().collect();
            elems.sort_unstable();
            items.extend(elems.into_iter().map(|x| (s, x)));
        }

        self.anchor = MIN_ANCHOR.max(round_pow2_nearest(self.total));
        self.eff_budget = self.effective_budget();
        self.perm = Feistel::new(2 * self.anchor as u64, &mut self.seeds);
        self.assign = DetMap::default();
        self.rev = DetMap::default();
        self.next_free = 0;
        self.nodes.clear();
        self.free_nodes.clear();
        self.root = None;
        self.total = 0;
        for &s in &ids {
            self.sets.insert(s, DetSet::default());
        }

        self.in_rebuild = true;
        let result = (|| -> Result<()> {
            for (s, x) in items {
                self.insert(s, x)?;
            }
            Ok(())
        })();
        self.in_rebuild = false;
        result
    }

    pub fn snapshot(&self) -> TreeSnapshot {
        let mut levels: BTreeMap<usize, LevelStats> = BTreeMap::new();
        let mut node_count = 0;
        for node in self.nodes.iter().flatten() {
            node_count += 1;
            let l = levels.entry(node.depth).or_default();
            l.nodes += 1;
            l.total_elements += node.empt.total();
            l.total_budget += node.empt.budget();
        }
        TreeSnapshot {
            anchor: self.anchor,
            budget: self.budget,
            eff_budget: self.eff_budget,
            total: self.total,
            height: self.height(),
            node_count,
            rebuild_count: self.rebuild_count,
            max_key_assigned: self.rev.keys().copied().max(),
            levels,
        }
    }

    /// Structural audit: ranges halve dyadically, per-set sizes add up
    /// across children, and budgets track `N_v * M / N'`. Test support.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        let Some(root) = self.root else { return Ok(()) };
        let r = self.node(root);
        if r.lo != 0 || r.hi != 2 * self.anchor as u64 {
            return Err(format!("root covers [{}, {}) for anchor {}", r.lo, r.hi, self.anchor));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            let Some(node) = node else { continue };
            if node.hi - node.lo > 1 {
                let mid = node.lo + (node.hi - node.lo) / 2;
                let bounds = [(node.lo, mid), (mid, node.hi)];
                let mut child_sum = 0;
                for side in 0..2 {
                    if let Some(c) = node.children[side] {
                        let cn = self.node(c);
                        if (cn.lo, cn.hi) != bounds[side] {
                            return Err(format!("node {id} child {side} range mismatch"));
                        }
                        if cn.parent != Some(id) {
                            return Err(format!("node {id} child {side} parent link broken"));
                        }
                        child_sum += cn.empt.total();
                    }
                }
                if child_sum != node.empt.total() {
                    return Err(format!(
                        "node {id} holds {} elements but children hold {child_sum}",
                        node.empt.total()
                    ));
                }
            }
            let target = (node.empt.total() * self.eff_budget / self.anchor).max(1);
            let cur = node.empt.budget();
            if !(cur <= 2 * target && target <= 2 * cur) {
                return Err(format!("node {id} budget {cur} drifted from target {target}"));
            }
        }
        Ok(())
    }

    /// Shortcut audit: for every vertex and every locally-large pair,
    /// re-derive existence and both targets from the definition, using
    /// membership scans only (never the stored pointers). Test support;
    /// meant for small instances.
    pub fn audit_shortcuts(&self) -> std::result::Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            let Some(node) = node else { continue };
            let large = node.empt.large_sets();
            for (i, &a) in large.iter().enumerate() {
                for &b in &large[i + 1..] {
                    let (a, b) = ordered(a, b);
                    let nonempty = self.scan_nonempty(id, a, b);
                    let stored = node.pairs.get(&(a, b));
                    if !nonempty {
                        if stored.is_some() {
                            return Err(format!(
                                "node {id}: stale pair entry for disjoint ({a}, {b})"
                            ));
                        }
                        continue;
                    }
                    let Some(stored) = stored else {
                        return Err(format!("node {id}: missing pair entry for ({a}, {b})"));
                    };
                    for side in 0..2 {
                        let want = self.expected_target(id, side, a, b);
                        let got = if side == 0 { stored.left } else { stored.right };
                        if want != got {
                            return Err(format!(
                                "node {id} pair ({a}, {b}) side {side}: stored {got:?}, expected {want:?}"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn scan_nonempty(&self, nid: usize, a: SetId, b: SetId) -> bool {
        let node = self.node(nid);
        node.empt.members(a).any(|x| node.empt.members(b).any(|y| x == y))
    }

    /// Definition walk for the audit: follow the unique nonempty side
    /// through all-large non-branching vertices, checking emptiness by
    /// scanning memberships.
    fn expected_target(&self, nid: usize, side: usize, a: SetId, b: SetId) -> Option<usize> {
        let mut cur = self.node(nid).children[side]?;
        loop {
            let w = self.node(cur);
            if !self.scan_nonempty(cur, a, b) {
                return None;
            }
            let both_large = w.empt.class_of(a).unwrap_or(SizeClass::Small) == SizeClass::Large
                && w.empt.class_of(b).unwrap_or(SizeClass::Small) == SizeClass::Large;
            if !both_large {
                return Some(cur);
            }
            let sides: Vec<Option<usize>> = (0..2)
                .map(|sd| w.children[sd].filter(|&c| self.scan_nonempty(c, a, b)))
                .collect();
            match (sides[0], sides[1]) {
                (Some(_), Some(_)) => return Some(cur), // branching
                (None, None) => return Some(cur),       // leaf
                (Some(c), None) | (None, Some(c)) => cur = c,
            }
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
    fn feistel_is_a_permutation() {
        let mut seeds = SeedStream::new(17);
        for bits in [5u32, 6, 7, 10] {
            let size = 1u64 << bits;
            let f = Feistel::new(size, &mut seeds);
            let mut seen = vec![false; size as usize];
            for x in 0..size {
                let y = f.permute(x);
                assert!(y < size);
                assert!(!seen[y as usize], "collision at {x}");
                seen[y as usize] = true;
            }
        }
    }

    #[test]
    fn fresh_tree_shape() {
        let t = IntersectionTree::new(64, 0).unwrap();
        assert_eq!(t.anchor(), 16);
        assert_eq!(t.height(), 5);
        assert!(IntersectionTree::new(0, 0).is_err());
    }

    #[test]
    fn empty_set_queries() {
        let mut t = IntersectionTree::new(64, 1).unwrap();
        t.register(SetId(0));
        t.register(SetId(1));
        assert_eq!(t.report(SetId(0), SetId(1)).unwrap(), vec![]);
        assert_eq!(t.witness(SetId(0), SetId(1)).unwrap(), None);
        assert!(matches!(t.report(SetId(0), SetId(9)), Err(Error::UnknownSet(_))));
    }

    #[test]
    fn first_insert_materializes_one_path() {
        let mut t = IntersectionTree::new(64, 2).unwrap();
        t.insert(SetId(0), ElementKey(123)).unwrap();
        let snap = t.snapshot();
        // One vertex per depth 0..=height: single-key leaves sit height
        // edges below the root.
        assert_eq!(snap.node_count, snap.height + 1);
        t.check_structure().unwrap();
    }

    #[test]
    fn shared_element_flips_root_disjointness() {
        let mut t = IntersectionTree::new(64, 3).unwrap();
        t.insert(SetId(0), ElementKey(5)).unwrap();
        t.insert(SetId(1), ElementKey(6)).unwrap();
        assert_eq!(t.witness(SetId(0), SetId(1)).unwrap(), None);
        t.insert(SetId(1), ElementKey(5)).unwrap();
        assert_eq!(t.witness(SetId(0), SetId(1)).unwrap(), Some(ElementKey(5)));
        assert_eq!(t.report(SetId(0), SetId(1)).unwrap(), vec![ElementKey(5)]);
    }

    #[test]
    fn insert_then_delete_restores_answers() {
        let mut t = IntersectionTree::new(64, 4).unwrap();
        for i in 0..10u64 {
            t.insert(SetId(0), ElementKey(i)).unwrap();
            t.insert(SetId(1), ElementKey(i + 5)).unwrap();
        }
        let before: Vec<ElementKey> = {
            let mut v = t.report(SetId(0), SetId(1)).unwrap();
            v.sort_unstable();
            v
        };
        t.insert(SetId(0), ElementKey(100)).unwrap();
        t.insert(SetId(1), ElementKey(100)).unwrap();
        t.delete(SetId(0), ElementKey(100)).unwrap();
        t.delete(SetId(1), ElementKey(100)).unwrap();
        let mut after = t.report(SetId(0), SetId(1)).unwrap();
        after.sort_unstable();
        assert_eq!(before, after);
        t.audit_shortcuts().unwrap();
    }

    #[test]
    fn deleting_unique_shared_element_leaves_no_stale_pointer() {
        let mut t = IntersectionTree::new(16, 5).unwrap();
        for i in 0..12u64 {
            t.insert(SetId(0), ElementKey(i)).unwrap();
            t.insert(SetId(1), ElementKey(i + 50)).unwrap();
        }
        t.insert(SetId(0), ElementKey(99)).unwrap();
        t.insert(SetId(1), ElementKey(99)).unwrap();
        assert!(t.witness(SetId(0), SetId(1)).unwrap().is_some());
        t.delete(SetId(0), ElementKey(99)).unwrap();
        assert_eq!(t.report(SetId(0), SetId(1)).unwrap(), vec![]);
        t.audit_shortcuts().unwrap();
        t.check_structure().unwrap();
    }

    #[test]
    fn growth_rebuild_fires_once_and_compacts_keys() {
        let mut t = IntersectionTree::new(256, 6).unwrap();
        for i in 0..40u64 {
            t.insert(SetId(0), ElementKey(i * 1000)).unwrap();
        }
        assert_eq!(t.rebuild_count(), 1);
        let snap = t.snapshot();
        assert_eq!(snap.anchor, 32);
        assert!(snap.max_key_assigned.unwrap() < 2 * snap.anchor as u64);
        t.check_structure().unwrap();
    }

    #[test]
    fn mass_deletion_rebuilds_and_stays_correct() {
        let mut t = IntersectionTree::new(128, 7).unwrap();
        let mut oracle = OracleFamily::new();
        for i in 0..60u64 {
            for s in [SetId(0), SetId(1)] {
                t.insert(s, ElementKey(i)).unwrap();
                oracle.insert(s, ElementKey(i));
            }
        }
        for i in 0..55u64 {
            t.delete(SetId(0), ElementKey(i)).unwrap();
            oracle.delete(SetId(0), ElementKey(i));
            t.delete(SetId(1), ElementKey(i)).unwrap();
            oracle.delete(SetId(1), ElementKey(i));
        }
        assert!(t.rebuild_count() >= 2, "growth and shrink rebuilds expected");
        let mut got = t.report(SetId(0), SetId(1)).unwrap();
        got.sort_unstable();
        assert_eq!(got, oracle.intersect(SetId(0), SetId(1)).unwrap());
    }

    #[test]
    fn key_exhaustion_triggers_rebuild_then_succeeds() {
        let mut t = IntersectionTree::new(64, 8).unwrap();
        // Churn distinct elements so assignments outrun the live count.
        let mut next = 0u64;
        for _ in 0..6 {
            let mut batch = Vec::new();
            for _ in 0..10 {
                t.insert(SetId(0), ElementKey(next)).unwrap();
                batch.push(next);
                next += 1;
            }
            for x in batch {
                t.delete(SetId(0), ElementKey(x)).unwrap();
            }
        }
        assert!(t.rebuild_count() >= 1);
        assert_eq!(t.len_of(SetId(0)), 0);
    }

    #[test]
    fn space_audit_within_budget_times_height() {
        let mut t = IntersectionTree::new(200, 9).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..300 {
            let s = SetId(rng.gen_range(0..4));
            let x = ElementKey(rng.gen_range(0..200));
            let _ = t.insert(s, x);
        }
        let snap = t.snapshot();
        let sum_budget: usize = snap.levels.values().map(|l| l.total_budget).sum();
        // Per level the budgets sum to about 2 * eff_budget, over height+1
        // levels, and eff_budget is budget / height.
        assert!(
            sum_budget <= 8 * snap.budget + 16 * snap.node_count,
            "budgets {sum_budget} vs M {}",
            snap.budget
        );
        // Dyadic partition at every level.
        t.check_structure().unwrap();
    }

    #[test]
    fn random_schedules_match_oracle_with_audits() {
        let mut rng = StdRng::seed_from_u64(0x715);
        for round in 0..15 {
            let budget = [16, 64, 256][round % 3];
            let mut t = IntersectionTree::new(budget, round as u64).unwrap();
            let mut oracle = OracleFamily::new();
            let sets: Vec<SetId> = (0..4).map(SetId).collect();
            for &s in &sets {
                t.register(s);
                oracle.register(s);
            }
            for step in 0..400 {
                let s = sets[rng.gen_range(0..sets.len())];
                let x = ElementKey(rng.gen_range(0..80));
                if rng.gen_bool(0.7) {
                    assert_eq!(t.insert(s, x).is_ok(), oracle.insert(s, x));
                } else {
                    assert_eq!(t.delete(s, x).is_ok(), oracle.delete(s, x));
                }
                let a = sets[rng.gen_range(0..sets.len())];
                let b = sets[rng.gen_range(0..sets.len())];
                let mut got = t.report(a, b).unwrap();
                got.sort_unstable();
                assert_eq!(got, oracle.intersect(a, b).unwrap(), "report {a} vs {b}");
                let w = t.witness(a, b).unwrap();
                assert_eq!(w.is_some(), !got.is_empty());
                if let Some(w) = w {
                    assert!(oracle.contains(a, w) && oracle.contains(b, w));
                }
                if step % 40 == 0 {
                    t.audit_shortcuts().unwrap();
                    t.check_structure().unwrap();
                }
            }
        }
    }

    #[test]
    fn traversal_accounting_bounds() {
        let mut t = IntersectionTree::new(64, 10).unwrap();
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..600 {
            let s = SetId(rng.gen_range(0..2));
            let x = ElementKey(rng.gen_range(0..300));
            let _ = t.insert(s, x);
        }
        for _ in 0..100 {
            let before = crate::counters::snapshot();
            let out = t.report(SetId(0), SetId(1)).unwrap();
            let d = crate::counters::snapshot().since(&before);
            assert!(
                d.type1_visits <= d.type2_visits + 1,
                "type1 {} vs type2 {}",
                d.type1_visits,
                d.type2_visits
            );
            if !out.is_empty() {
                assert!(d.type2_visits <= out.len() as u64);
            }
        }
    }
}
