//! Undirected graphs and low-out-degree acyclic orientations.

use crate::det::DetSet;
use crate::hashing::SeedStream;
use std::collections::BTreeSet;

/// Simple undirected graph: no self-loops, no parallel edges.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// Build from an edge list, dropping self-loops and duplicate edges
    /// (in either orientation). Edges are canonicalized to `u < v`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Graph {
        let mut seen: DetSet<(u32, u32)> = DetSet::default();
        let mut dedup = Vec::new();
        for (a, b) in edges {
            debug_assert!((a as usize) < n && (b as usize) < n);
            if a == b {
                continue;
            }
            let e = (a.min(b), a.max(b));
            if seen.insert(e) {
                dedup.push(e);
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &dedup {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Graph { n, edges: dedup, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adj
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges)
    }

    /// Erdős–Rényi G(n, p) with a pinned seed.
    pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
        let mut s = SeedStream::new(seed);
        let mut edges = Vec::new();
        let scale = (p * (1u64 << 32) as f64) as u64;
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if s.next_u64() >> 32 < scale {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, edges)
    }

    /// Random graph with roughly regular degree `d` (union of d/2 random
    /// perfect-matching-ish rounds); degeneracy stays close to `d`.
    pub fn near_regular(n: usize, d: usize, seed: u64) -> Graph {
        let mut s = SeedStream::new(seed);
        let mut edges = Vec::new();
        let rounds = d.div_ceil(2);
        for _ in 0..rounds {
            let mut perm: Vec<u32> = (0..n as u32).collect();
            // Fisher-Yates with the seed stream.
            for i in (1..n).rev() {
                let j = (s.next_u64() % (i as u64 + 1)) as usize;
                perm.swap(i, j);
            }
            for i in (0..n - 1).step_by(2) {
                edges.push((perm[i], perm[i + 1]));
            }
            // A random cycle adds the other half of the degree.
            for i in 0..n {
                edges.push((perm[i], perm[(i + 1) % n]));
            }
        }
        Graph::new(n, edges)
    }
}

/// Acyclic orientation from peeling: repeatedly remove a minimum-degree
/// vertex, orienting its remaining incident edges outward.
#[derive(Debug, Clone)]
pub struct Orientation {
    order: Vec<u32>,
    out_neighbors: Vec<Vec<u32>>,
    degeneracy: usize,
}

impl Orientation {
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out_neighbors[v as usize]
    }

    pub fn max_out_degree(&self) -> usize {
        self.out_neighbors.iter().map(|o| o.len()).max().unwrap_or(0)
    }

    /// Maximum degree seen at removal time; bounds every out-degree.
    pub fn degeneracy(&self) -> usize {
        self.degeneracy
    }
}

/// Peel with bucketed degree lists; ties broken toward the lowest vertex id
/// so orientations are reproducible.
pub fn orient(g: &Graph) -> Orientation {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v as u32)).collect();
    let mut buckets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n.max(1)];
    for v in 0..n {
        buckets[deg[v]].insert(v as u32);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut out_neighbors = vec![Vec::new(); n];
    let mut degeneracy = 0;
    let mut cur = 0usize;
    for _ in 0..n {
        while buckets[cur].is_empty() {
            cur += 1;
        }
        let v = *buckets[cur].iter().next().unwrap();
        buckets[cur].remove(&v);
        removed[v as usize] = true;
        degeneracy = degeneracy.max(cur);
        order.push(v);
        for &w in &g.adj[v as usize] {
            if removed[w as usize] {
                continue;
            }
            out_neighbors[v as usize].push(w);
            let dw = deg[w as usize];
            buckets[dw].remove(&w);
            buckets[dw - 1].insert(w);
            deg[w as usize] = dw - 1;
        }
        cur = cur.saturating_sub(1);
    }
    Orientation { order, out_neighbors, degeneracy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_degeneracy;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn is_acyclic(o: &Orientation, n: usize) -> bool {
        // Peeling order is a topological order of the out-edge relation.
        let mut pos = vec![0usize; n];
        for (i, &v) in o.order().iter().enumerate() {
            pos[v as usize] = i;
        }
        (0..n as u32).all(|v| o.out_neighbors(v).iter().all(|&w| pos[v as usize] < pos[w as usize]))
    }

    #[test]
    fn path_and_tree_have_out_degree_one() {
        let path = Graph::new(3, vec![(0, 1), (1, 2)]);
        let o = orient(&path);
        assert!(o.max_out_degree() <= 1);
        assert!(is_acyclic(&o, 3));

        let tree = Graph::new(7, vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        let o = orient(&tree);
        assert!(o.max_out_degree() <= 1);
        assert_eq!(o.degeneracy(), 1);
    }

    #[test]
    fn k4_peeling_with_lowest_id_tie_break() {
        let g = Graph::complete(4);
        let o = orient(&g);
        // All degrees tie, so vertices peel in id order; out-degrees 3,2,1,0.
        assert_eq!(o.order(), &[0, 1, 2, 3]);
        let mut outs: Vec<usize> = (0..4).map(|v| o.out_neighbors(v).len()).collect();
        assert_eq!(o.max_out_degree(), 3);
        assert_eq!(outs.iter().sum::<usize>(), 6);
        outs.sort_unstable();
        assert_eq!(outs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn orientation_matches_oracle_degeneracy_on_random_graphs() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.gen_range(2..60);
            let g = Graph::gnp(n, 0.15, rng.gen());
            let o = orient(&g);
            assert!(is_acyclic(&o, n));
            let d = oracle_degeneracy(&g);
            assert_eq!(o.degeneracy(), d);
            assert!(o.max_out_degree() <= d);
            let out_sum: usize = (0..n as u32).map(|v| o.out_neighbors(v).len()).sum();
            assert_eq!(out_sum, g.m(), "every edge oriented exactly once");
        }
    }

    #[test]
    fn loader_style_dedup() {
        let g = Graph::new(3, vec![(0, 1), (1, 0), (1, 1), (1, 2), (0, 1)]);
        assert_eq!(g.m(), 2);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }
}
