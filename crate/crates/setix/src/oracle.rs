//! Brute-force reference implementations used as ground truth in tests.
//!
//! Everything here is deliberately simple and slow; test drivers cap input
//! sizes accordingly. Two independent routes exist for each answer (sorted
//! containers vs hash sets for intersections, triple loop vs edge-wise
//! adjacency checks for triangles) so a bug in one oracle cannot silently
//! anchor the whole suite.

use crate::det::DetSet;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::{ElementKey, SetId};
use std::collections::{BTreeMap, BTreeSet};

/// Exact mirror of an operation history on a family of sets.
#[derive(Debug, Clone, Default)]
pub struct OracleFamily {
    sets: BTreeMap<SetId, BTreeSet<ElementKey>>,
}

impl OracleFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, s: SetId) {
        self.sets.entry(s).or_default();
    }

    /// Returns false if the element was already present.
    pub fn insert(&mut self, s: SetId, e: ElementKey) -> bool {
        self.sets.entry(s).or_default().insert(e)
    }

    /// Returns false if the element was absent.
    pub fn delete(&mut self, s: SetId, e: ElementKey) -> bool {
        self.sets.get_mut(&s).is_some_and(|set| set.remove(&e))
    }

    pub fn contains(&self, s: SetId, e: ElementKey) -> bool {
        self.sets.get(&s).is_some_and(|set| set.contains(&e))
    }

    pub fn len_of(&self, s: SetId) -> usize {
        self.sets.get(&s).map_or(0, |set| set.len())
    }

    pub fn total(&self) -> usize {
        self.sets.values().map(|s| s.len()).sum()
    }

    pub fn known(&self, s: SetId) -> bool {
        self.sets.contains_key(&s)
    }

    pub fn members(&self, s: SetId) -> Vec<ElementKey> {
        self.sets.get(&s).map_or_else(Vec::new, |set| set.iter().copied().collect())
    }

    pub fn set_ids(&self) -> Vec<SetId> {
        self.sets.keys().copied().collect()
    }

    /// Sorted intersection by merging the two sorted containers.
    pub fn intersect(&self, s1: SetId, s2: SetId) -> Result<Vec<ElementKey>> {
        let a = self.sets.get(&s1).ok_or(Error::UnknownSet(s1))?;
        let b = self.sets.get(&s2).ok_or(Error::UnknownSet(s2))?;
        let mut out = Vec::new();
        let mut ia = a.iter().peekable();
        let mut ib = b.iter().peekable();
        while let (Some(&&x), Some(&&y)) = (ia.peek(), ib.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    ia.next();
                }
                std::cmp::Ordering::Greater => {
                    ib.next();
                }
                std::cmp::Ordering::Equal => {
                    out.push(x);
                    ia.next();
                    ib.next();
                }
            }
        }
        Ok(out)
    }

    /// Independent second route: intersection through a hash set.
    pub fn intersect_via_hash(&self, s1: SetId, s2: SetId) -> Result<Vec<ElementKey>> {
        let a = self.sets.get(&s1).ok_or(Error::UnknownSet(s1))?;
        let b = self.sets.get(&s2).ok_or(Error::UnknownSet(s2))?;
        let bh: DetSet<ElementKey> = b.iter().copied().collect();
        let mut out: Vec<ElementKey> = a.iter().copied().filter(|e| bh.contains(e)).collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn disjoint(&self, s1: SetId, s2: SetId) -> Result<bool> {
        Ok(self.intersect(s1, s2)?.is_empty())
    }
}

/// All triangles by exhaustive check of every vertex triple, O(n^3).
pub fn oracle_triangles(g: &Graph) -> BTreeSet<[u32; 3]> {
    let n = g.n();
    let mut adj = vec![false; n * n];
    for &(u, v) in g.edges() {
        adj[u as usize * n + v as usize] = true;
        adj[v as usize * n + u as usize] = true;
    }
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            if !adj[a * n + b] {
                continue;
            }
            for c in b + 1..n {
                if adj[a * n + c] && adj[b * n + c] {
                    out.insert([a as u32, b as u32, c as u32]);
                }
            }
        }
    }
    out
}

/// Independent second route: per edge, scan the smaller endpoint
/// neighborhood and close the wedge through a membership test.
pub fn oracle_triangles_edge(g: &Graph) -> BTreeSet<[u32; 3]> {
    let adj_sets: Vec<DetSet<u32>> = g.adjacency().iter().map(|a| a.iter().copied().collect()).collect();
    let mut out = BTreeSet::new();
    for &(u, v) in g.edges() {
        let (scan, other) = if g.degree(u) <= g.degree(v) { (u, v) } else { (v, u) };
        for &w in &g.adjacency()[scan as usize] {
            if w != other && adj_sets[other as usize].contains(&w) {
                let mut t = [u, v, w];
                t.sort_unstable();
                out.insert(t);
            }
        }
    }
    out
}

/// Degeneracy by repeated minimum-degree removal with a plain O(n^2) scan,
/// independent of the bucketed peeling in `graph`.
pub fn oracle_degeneracy(g: &Graph) -> usize {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v as u32)).collect();
    let mut removed = vec![false; n];
    let mut degeneracy = 0;
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut pick = 0;
        for v in 0..n {
            if !removed[v] && deg[v] < best {
                best = deg[v];
                pick = v;
            }
        }
        degeneracy = degeneracy.max(best);
        removed[pick] = true;
        for &w in &g.adjacency()[pick] {
            if !removed[w as usize] {
                deg[w as usize] -= 1;
            }
        }
    }
    degeneracy
}
