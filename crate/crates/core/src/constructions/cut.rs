use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::glue::{GluedGraph, GluingSpec, Page, TableIdent};
use crate::error::{Error, Result};
use crate::graph::{ball_with_dist, FiniteGraph, Graph, GraphRef};
use crate::vertex::Vertex;

/// How weights are split when a graph is cut along a spine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reweight {
    /// Caps inherit the parent weights and every trailing edge is kept (Neumann pages).
    Neumann,
    /// Cap weights and cap-cap edges are divided evenly among the pages sharing them, so
    /// gluing the pieces back reproduces the parent exactly.
    EvenSplit,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutConditions {
    pub components: usize,
    /// Condition a: every component reaches the window boundary.
    pub all_unbounded: bool,
    /// Condition b: smallest α with the spine α-connected on the window.
    pub alpha: Option<u32>,
    /// Condition c: every interior spine vertex sees only the spine or ≥ 2 pieces.
    pub condition_c: bool,
    /// Range of π_page / π_parent over page vertices.
    pub c_b: f64,
    pub big_c_b: f64,
}

pub struct CutResult {
    pub spec: GluingSpec,
    pub conditions: CutConditions,
    /// Glued id → parent vertex, for every vertex of the cut pieces.
    pub to_parent: FxHashMap<Vertex, Vertex>,
    pub window_center: Vertex,
    pub window_radius: u32,
}

/// Injective relabelling to tag-0 ids: keeps coordinates when that is collision-free,
/// otherwise numbers the vertices along the first coordinate.
fn relabel(vs: &[Vertex]) -> Vec<Vertex> {
    let plain: Vec<Vertex> = vs.iter().map(|v| v.with_tag(0)).collect();
    let distinct: FxHashSet<Vertex> = plain.iter().copied().collect();
    if distinct.len() == vs.len() {
        plain
    } else {
        (0..vs.len()).map(|i| Vertex::at(&[i as i32])).collect()
    }
}

/// Cuts `g` along the vertices satisfying `spine_pred` inside B(center, radius).
///
/// Pages are the components of the window minus the spine, each capped with copies of
/// the spine vertices it touches; the spine keeps whatever weight the policy leaves.
pub fn cut(
    g: &GraphRef,
    center: &Vertex,
    radius: u32,
    spine_pred: impl Fn(&Vertex) -> bool,
    policy: Reweight,
) -> Result<CutResult> {
    let window = ball_with_dist(g, center, radius);
    let dist: FxHashMap<Vertex, u32> = window.iter().copied().collect();
    let spine: Vec<Vertex> = window.iter().map(|e| e.0).filter(|v| spine_pred(v)).collect();
    let spine_set: FxHashSet<Vertex> = spine.iter().copied().collect();

    let mut comp_of: FxHashMap<Vertex, usize> = FxHashMap::default();
    let mut comps: Vec<Vec<Vertex>> = Vec::new();
    for (v, _) in &window {
        if spine_set.contains(v) || comp_of.contains_key(v) {
            continue;
        }
        let id = comps.len();
        let mut members = vec![*v];
        comp_of.insert(*v, id);
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            k += 1;
            for (w, _) in g.neighbor_list(&u) {
                if dist.contains_key(&w) && !spine_set.contains(&w) && !comp_of.contains_key(&w) {
                    comp_of.insert(w, id);
                    members.push(w);
                }
            }
        }
        comps.push(members);
    }

    let all_unbounded = comps.iter().all(|c| c.iter().any(|v| dist[v] == radius));
    if !all_unbounded {
        return Err(Error::Cutting("a component does not reach the window boundary (finite component)".into()));
    }

    // Pages touching each spine vertex / spine edge.
    let mut touching: FxHashMap<Vertex, Vec<usize>> = FxHashMap::default();
    let mut condition_c = true;
    for s in &spine {
        let nb = g.neighbor_list(s);
        let mut ps: Vec<usize> = nb.iter().filter_map(|(w, _)| comp_of.get(w).copied()).collect();
        ps.sort_unstable();
        ps.dedup();
        if dist[s] < radius && ps.len() == 1 {
            condition_c = false;
        }
        touching.insert(*s, ps);
    }
    if !condition_c {
        return Err(Error::Cutting("a spine vertex is surrounded by a single page (condition c)".into()));
    }
    let shares = |a: &Vertex, b: &Vertex| -> Vec<usize> {
        let pa = &touching[a];
        touching[b].iter().filter(|p| pa.contains(p)).copied().collect()
    };

    let mut to_parent: FxHashMap<Vertex, Vertex> = FxHashMap::default();
    let mut pages = Vec::new();
    let mut c_b = f64::INFINITY;
    let mut big_c_b: f64 = 0.0;
    let spine_ids = relabel(&spine);
    let spine_id: FxHashMap<Vertex, Vertex> = spine.iter().copied().zip(spine_ids.iter().copied()).collect();

    for (j, comp) in comps.iter().enumerate() {
        let caps: Vec<Vertex> = spine.iter().filter(|s| touching[*s].contains(&j)).copied().collect();
        let all: Vec<Vertex> = comp.iter().chain(caps.iter()).copied().collect();
        let ids = relabel(&all);
        let local: FxHashMap<Vertex, Vertex> = all.iter().copied().zip(ids.iter().copied()).collect();
        let mut b = FiniteGraph::builder(&format!("piece{}", j + 1));
        for v in comp {
            b = b.vertex(local[v], g.weight(v));
        }
        for s in &caps {
            let w = match policy {
                Reweight::Neumann => g.weight(s),
                Reweight::EvenSplit => g.weight(s) / touching[s].len() as f64,
            };
            b = b.vertex(local[s], w);
        }
        for u in &all {
            for (w, mu) in g.neighbor_list(u) {
                let Some(lw) = local.get(&w) else { continue };
                if *u >= w {
                    continue;
                }
                let both_caps = spine_set.contains(u) && spine_set.contains(&w);
                let mu = match (policy, both_caps) {
                    (Reweight::EvenSplit, true) => mu / shares(u, &w).len() as f64,
                    _ => mu,
                };
                b = b.edge(local[u], *lw, mu);
            }
        }
        let graph = b.build();
        for v in &all {
            let ratio = graph.weight(&local[v]) / g.weight(v);
            c_b = c_b.min(ratio);
            big_c_b = big_c_b.max(ratio);
        }
        let ident = TableIdent::new(caps.iter().map(|s| (local[s], spine_id[s])));
        for v in comp {
            to_parent.insert(local[v].with_tag(j as u16 + 1), *v);
        }
        pages.push(Page::new(&format!("piece{}", j + 1), Arc::new(graph), Arc::new(ident)));
    }

    let mut sb = FiniteGraph::builder("spine");
    for s in &spine {
        let pi = match policy {
            Reweight::Neumann => 0.0,
            Reweight::EvenSplit if touching[s].is_empty() => g.weight(s),
            Reweight::EvenSplit => 0.0,
        };
        sb = sb.vertex(spine_id[s], pi);
        to_parent.insert(spine_id[s], *s);
    }
    if policy == Reweight::EvenSplit {
        for s in &spine {
            for (w, mu) in g.neighbor_list(s) {
                if spine_set.contains(&w) && *s < w && shares(s, &w).is_empty() {
                    sb = sb.edge(spine_id[s], spine_id[&w], mu);
                }
            }
        }
    }
    let spine_graph: GraphRef = Arc::new(sb.build());
    let spec = GluingSpec {
        name: format!("cut({})", g.label()),
        pages,
        spine: spine_graph,
        c_compat: 0.0,
        big_c_compat: f64::INFINITY,
    };
    let alpha = {
        let glued = GluedGraph::assemble(&spec);
        super::glue::alpha_connectivity(&glued, &spine_ids, radius)
    };
    Ok(CutResult {
        conditions: CutConditions {
            components: comps.len(),
            all_unbounded,
            alpha,
            condition_c,
            c_b: if c_b.is_finite() { c_b } else { 1.0 },
            big_c_b: if big_c_b > 0.0 { big_c_b } else { 1.0 },
        },
        spec,
        to_parent,
        window_center: *center,
        window_radius: radius,
    })
}

impl CutResult {
    /// Largest discrepancy between glue(cut(g)) and g on vertices at distance < radius − 1
    /// from the centre: (max |Δπ|, max |Δμ|, first mismatching parent vertex).
    pub fn round_trip_error(&self, g: &GraphRef) -> (f64, f64, Option<Vertex>) {
        let glued = GluedGraph::assemble(&self.spec);
        let dist: FxHashMap<Vertex, u32> = ball_with_dist(g, &self.window_center, self.window_radius).into_iter().collect();
        let mut dpi: f64 = 0.0;
        let mut dmu: f64 = 0.0;
        let mut first = None;
        let mut ids: Vec<_> = self.to_parent.iter().collect();
        ids.sort();
        for (gid, pv) in ids {
            if dist[pv] + 1 >= self.window_radius {
                continue;
            }
            let e = (glued.weight(gid) - g.weight(pv)).abs();
            let mut a: Vec<(Vertex, f64)> =
                glued.neighbor_list(gid).into_iter().map(|(w, m)| (self.to_parent[&w], m)).collect();
            let mut b = g.neighbor_list(pv);
            a.sort_by(|x, y| x.0.cmp(&y.0));
            b.sort_by(|x, y| x.0.cmp(&y.0));
            let mut m = if a.len() == b.len() { 0.0 } else { f64::INFINITY };
            for (x, y) in a.iter().zip(&b) {
                m = f64::max(m, if x.0 == y.0 { (x.1 - y.1).abs() } else { f64::INFINITY });
            }
            if (e > 0.0 || m > 0.0) && first.is_none() {
                first = Some(*pv);
            }
            dpi = dpi.max(e);
            dmu = dmu.max(m);
        }
        (dpi, dmu, first)
    }
}
