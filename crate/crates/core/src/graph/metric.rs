use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use super::Graph;
use crate::vertex::Vertex;

/// B(x, r) with BFS distances, in BFS order.
pub fn ball_with_dist<G: Graph + ?Sized>(g: &G, x: &Vertex, r: u32) -> Vec<(Vertex, u32)> {
    if !g.contains(x) {
        return Vec::new();
    }
    let mut seen: FxHashMap<Vertex, u32> = FxHashMap::default();
    let mut out = vec![(*x, 0)];
    let mut queue = VecDeque::from([(*x, 0u32)]);
    seen.insert(*x, 0);
    let mut nb = Vec::new();
    while let Some((v, d)) = queue.pop_front() {
        if d == r {
            continue;
        }
        nb.clear();
        g.neighbors(&v, &mut nb);
        for (w, _) in &nb {
            if !seen.contains_key(w) {
                seen.insert(*w, d + 1);
                out.push((*w, d + 1));
                queue.push_back((*w, d + 1));
            }
        }
    }
    out
}

pub fn ball<G: Graph + ?Sized>(g: &G, x: &Vertex, r: u32) -> Vec<Vertex> {
    ball_with_dist(g, x, r).into_iter().map(|e| e.0).collect()
}

/// BFS distance, or `None` when y is not reached within `cap` steps.
///
/// On a finite graph `cap = u32::MAX` makes `None` mean "disconnected".
pub fn distance<G: Graph + ?Sized>(g: &G, x: &Vertex, y: &Vertex, cap: u32) -> Option<u32> {
    if !g.contains(x) || !g.contains(y) {
        return None;
    }
    if x == y {
        return Some(0);
    }
    let mut seen: FxHashMap<Vertex, ()> = FxHashMap::default();
    seen.insert(*x, ());
    let mut frontier = vec![*x];
    let mut nb = Vec::new();
    let mut d = 0;
    while !frontier.is_empty() && d < cap {
        d += 1;
        let mut next = Vec::new();
        for v in &frontier {
            nb.clear();
            g.neighbors(v, &mut nb);
            for (w, _) in &nb {
                if w == y {
                    return Some(d);
                }
                if seen.insert(*w, ()).is_none() {
                    next.push(*w);
                }
            }
        }
        frontier = next;
    }
    None
}

/// V(x, r) = Σ_{y ∈ B(x,r)} π(y).
pub fn volume<G: Graph + ?Sized>(g: &G, x: &Vertex, r: u32) -> f64 {
    if let Some(v) = g.ball_volume(x, r) {
        return v;
    }
    ball(g, x, r).iter().map(|v| g.weight(v)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraph, Lattice};

    #[test]
    fn distances() {
        let g = Lattice::new(2);
        let o = Vertex::ORIGIN;
        assert_eq!(distance(&g, &o, &o, 10), Some(0));
        assert_eq!(distance(&g, &o, &Vertex::at(&[2, -3]), 10), Some(5));
        assert_eq!(distance(&g, &o, &Vertex::at(&[20, 0]), 10), None);
    }

    #[test]
    fn disconnected_is_infinite() {
        let g = FiniteGraph::builder("two")
            .vertex(Vertex::at(&[0]), 1.0)
            .vertex(Vertex::at(&[5]), 1.0)
            .build();
        assert_eq!(distance(&g, &Vertex::at(&[0]), &Vertex::at(&[5]), u32::MAX), None);
    }

    #[test]
    fn bfs_volume_matches_closed_form() {
        let g = Lattice::new(3);
        for r in 0..6 {
            let bfs: f64 = ball(&g, &Vertex::ORIGIN, r).iter().map(|v| g.weight(v)).sum();
            assert_eq!(bfs, volume(&g, &Vertex::ORIGIN, r));
        }
    }
}
