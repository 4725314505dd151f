use std::sync::Arc;

use rustc_hash::FxHashSet;
use serde::Serialize;

use super::glue::GluedGraph;
use crate::graph::{ball, Graph, GraphRef, Subgraph};
use crate::vertex::Vertex;

/// Outcome of a predicate certified on a finite window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Certificate {
    Holds { window_radius: u32 },
    Fails { witness: Vertex, page: usize },
    Inconclusive(String),
}

impl Certificate {
    pub fn holds(&self) -> bool {
        matches!(self, Certificate::Holds { .. })
    }
    pub fn fails(&self) -> bool {
        matches!(self, Certificate::Fails { .. })
    }
}

/// Layers of a BFS from `v`, stopping at the first layer containing a page-i vertex.
/// Returns that layer's lexicographically smallest page-i vertex and its distance.
pub fn nearest_page_point(g: &GluedGraph, v: &Vertex, i: usize, cap: u32) -> Option<(Vertex, u32)> {
    if g.in_page(i, v) {
        return Some((*v, 0));
    }
    let mut seen: FxHashSet<Vertex> = FxHashSet::default();
    seen.insert(*v);
    let mut frontier = vec![*v];
    let mut nb = Vec::new();
    for d in 1..=cap {
        let mut next = Vec::new();
        for u in &frontier {
            nb.clear();
            g.neighbors(u, &mut nb);
            for (w, _) in &nb {
                if seen.insert(*w) {
                    next.push(*w);
                }
            }
        }
        if let Some(best) = next.iter().filter(|w| g.in_page(i, w)).min() {
            return Some((*best, d));
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// d(v, Γ_i) when at most `cap`.
pub fn page_distance(g: &GluedGraph, v: &Vertex, i: usize, cap: u32) -> Option<u32> {
    nearest_page_point(g, v, i, cap).map(|e| e.1)
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthReport {
    pub window_radius: u32,
    pub spine_vertices: usize,
    /// max_v min_i d(v, Γ_i); `None` when some distance exceeds the cap.
    pub fixed_width: Option<u32>,
    /// max_v max_i d(v, Γ_i); `None` when some distance exceeds the cap.
    pub book_like_width: Option<u32>,
}

fn spine_in_window(g: &GluedGraph, center: &Vertex, radius: u32) -> Vec<Vertex> {
    ball(g, center, radius).into_iter().filter(|v| g.in_spine(v)).collect()
}

/// Smallest δ certified on B(center, radius) for the fixed-width and book-like conditions.
pub fn spine_width(g: &GluedGraph, center: &Vertex, radius: u32, cap: u32) -> WidthReport {
    let spine = spine_in_window(g, center, radius);
    let mut fixed = Some(0);
    let mut book = Some(0);
    if g.num_pages() > 1 {
        for v in &spine {
            let ds: Vec<Option<u32>> = (1..=g.num_pages()).map(|i| page_distance(g, v, i, cap)).collect();
            let min = ds.iter().flatten().min().copied();
            fixed = match (fixed, min) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
            book = if ds.iter().all(|d| d.is_some()) {
                book.map(|b| b.max(ds.iter().flatten().copied().max().unwrap_or(0)))
            } else {
                None
            };
        }
    }
    WidthReport { window_radius: radius, spine_vertices: spine.len(), fixed_width: fixed, book_like_width: book }
}

fn certify(g: &GluedGraph, delta: u32, center: &Vertex, radius: u32, all_pages: bool) -> Certificate {
    if g.num_pages() <= 1 {
        return Certificate::Holds { window_radius: radius };
    }
    let spine = spine_in_window(g, center, radius);
    if spine.is_empty() {
        return Certificate::Inconclusive(format!("no spine vertex within radius {radius} of {center}"));
    }
    for v in &spine {
        let near: Vec<bool> = (1..=g.num_pages()).map(|i| page_distance(g, v, i, delta).is_some()).collect();
        let ok = if all_pages { near.iter().all(|b| *b) } else { near.iter().any(|b| *b) };
        if !ok {
            let page = near.iter().position(|b| !*b).map_or(0, |p| p + 1);
            return Certificate::Fails { witness: *v, page };
        }
    }
    Certificate::Holds { window_radius: radius }
}

/// Every spine vertex in the window is within δ of some page.
pub fn is_fixed_width(g: &GluedGraph, delta: u32, center: &Vertex, radius: u32) -> Certificate {
    certify(g, delta, center, radius, false)
}

/// Every spine vertex in the window is within δ of every page.
pub fn is_book_like(g: &GluedGraph, delta: u32, center: &Vertex, radius: u32) -> Certificate {
    certify(g, delta, center, radius, true)
}

/// Γ̂_i = [Γ_i]_δ ∩ (Γ_i ∪ Γ₀) with weights inherited from the glued graph.
pub fn augmented_page(g: &Arc<GluedGraph>, i: usize, delta: u32) -> Subgraph {
    let parent: GraphRef = g.clone();
    let gg = g.clone();
    Subgraph::new(parent, &format!("aug{i}"), move |v| {
        gg.in_page(i, v) || (gg.in_spine(v) && page_distance(&gg, v, i, delta).is_some())
    })
}

/// Γ_i as a subgraph of the glued graph.
pub fn page_subgraph(g: &Arc<GluedGraph>, i: usize) -> Subgraph {
    let parent: GraphRef = g.clone();
    let gg = g.clone();
    Subgraph::new(parent, &format!("page{i}"), move |v| gg.in_page(i, v))
}
