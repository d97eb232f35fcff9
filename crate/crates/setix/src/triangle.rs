//! Triangle enumeration through packed out-neighborhood intersections.
//!
//! Orient the graph acyclically with out-degrees bounded by the degeneracy,
//! load the out-neighborhoods into a [`PackedFamily`] with cap
//! `max out-degree + 1`, and issue one intersection-report query per edge.
//! Acyclicity makes every triangle appear for exactly one of its edges.

use crate::graph::{orient, Graph};
use crate::packed_sets::PackedFamily;
use crate::word_ops::{FieldLayout, LAYOUT_W64};
use crate::{ElementKey, SetId};

/// Call `f(u, v, w)` once per triangle (unsorted corners).
fn for_each_triangle(
    g: &Graph,
    seed: u64,
    layout: &'static FieldLayout,
    f: &mut dyn FnMut(u32, u32, u32),
) {
    if g.n() == 0 || g.m() == 0 {
        return;
    }
    let o = orient(g);
    let d = o.max_out_degree() + 1;
    let mut fam =
        PackedFamily::with_layout(d, seed, layout).expect("cap is positive");
    let mut has_out = vec![false; g.n()];
    for v in 0..g.n() as u32 {
        let outs = o.out_neighbors(v);
        has_out[v as usize] = !outs.is_empty();
        for &w in outs {
            fam.insert(SetId(v as u64), ElementKey(w as u64))
                .expect("out-degree stays below the cap");
        }
    }
    for &(u, v) in g.edges() {
        // A triangle through (u,v) needs a common out-neighbor.
        if !has_out[u as usize] || !has_out[v as usize] {
            continue;
        }
        let common = fam
            .intersect_report(SetId(u as u64), SetId(v as u64))
            .expect("both sets exist");
        for w in common {
            f(u, v, w.0 as u32);
        }
    }
}

/// All triangles as canonically sorted vertex triples. Emission order is
/// deterministic for a fixed seed but otherwise unspecified.
pub fn enumerate_triangles(g: &Graph, seed: u64) -> Vec<[u32; 3]> {
    enumerate_triangles_with_layout(g, seed, &LAYOUT_W64)
}

pub fn enumerate_triangles_with_layout(
    g: &Graph,
    seed: u64,
    layout: &'static FieldLayout,
) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for_each_triangle(g, seed, layout, &mut |u, v, w| {
        let mut t = [u, v, w];
        t.sort_unstable();
        out.push(t);
    });
    out
}

/// Triangle count without materializing the list.
pub fn count_triangles(g: &Graph, seed: u64) -> u64 {
    count_triangles_with_layout(g, seed, &LAYOUT_W64)
}

pub fn count_triangles_with_layout(g: &Graph, seed: u64, layout: &'static FieldLayout) -> u64 {
    let mut count = 0u64;
    for_each_triangle(g, seed, layout, &mut |_, _, _| count += 1);
    count
}
