use rustc_hash::FxHashMap;

use crate::graph::Graph;
use crate::vertex::Vertex;

/// Default cap on the number of enumerated subsets.
pub const DEFAULT_SUBSET_CAP: usize = 2_000_000;

/// Induced adjacency of a finite vertex set, in local indices.
pub struct LocalGraph {
    pub verts: Vec<Vertex>,
    pub adj: Vec<Vec<u32>>,
}

impl LocalGraph {
    pub fn induced<G: Graph + ?Sized>(g: &G, set: &[Vertex]) -> Self {
        let index: FxHashMap<Vertex, u32> = set.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let mut nb = Vec::new();
        let adj = set
            .iter()
            .map(|v| {
                nb.clear();
                g.neighbors(v, &mut nb);
                let mut a: Vec<u32> = nb.iter().filter_map(|(w, _)| index.get(w).copied()).collect();
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect();
        LocalGraph { verts: set.to_vec(), adj }
    }
}

/// Visits every connected induced subset of size ≤ `s_max` exactly once (ESU order).
///
/// Returns the number visited and whether the enumeration finished before `cap`.
pub fn connected_subsets(lg: &LocalGraph, s_max: usize, cap: usize, mut visit: impl FnMut(&[u32])) -> (usize, bool) {
    let n = lg.verts.len();
    let mut count = 0usize;
    let mut in_sub = vec![false; n];
    let mut near = vec![0u32; n];
    let mut sub: Vec<u32> = Vec::with_capacity(s_max);

    #[allow(clippy::too_many_arguments)]
    fn extend(
        lg: &LocalGraph,
        root: u32,
        ext: Vec<u32>,
        sub: &mut Vec<u32>,
        in_sub: &mut [bool],
        near: &mut [u32],
        s_max: usize,
        cap: usize,
        count: &mut usize,
        visit: &mut dyn FnMut(&[u32]),
    ) -> bool {
        if *count >= cap {
            return false;
        }
        *count += 1;
        visit(sub);
        if sub.len() == s_max {
            return true;
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            // Exclusive neighbours of w: above the root, not in or next to the current subset.
            let mut next = ext.clone();
            for u in &lg.adj[w as usize] {
                if *u > root && !in_sub[*u as usize] && near[*u as usize] == 0 && !next.contains(u) && *u != w {
                    next.push(*u);
                }
            }
            sub.push(w);
            in_sub[w as usize] = true;
            for u in &lg.adj[w as usize] {
                near[*u as usize] += 1;
            }
            let ok = extend(lg, root, next, sub, in_sub, near, s_max, cap, count, visit);
            for u in &lg.adj[w as usize] {
                near[*u as usize] -= 1;
            }
            in_sub[w as usize] = false;
            sub.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    for v in 0..n as u32 {
        sub.clear();
        sub.push(v);
        in_sub[v as usize] = true;
        for u in &lg.adj[v as usize] {
            near[*u as usize] += 1;
        }
        let ext: Vec<u32> = lg.adj[v as usize].iter().copied().filter(|u| *u > v).collect();
        let ok = extend(lg, v, ext, &mut sub, &mut in_sub, &mut near, s_max, cap, &mut count, &mut visit);
        for u in &lg.adj[v as usize] {
            near[*u as usize] -= 1;
        }
        in_sub[v as usize] = false;
        if !ok {
            return (count, false);
        }
    }
    (count, true)
}
