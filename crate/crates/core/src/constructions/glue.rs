use std::collections::VecDeque;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graph::{ball, check_weights, Graph, GraphRef};
use crate::vertex::{Vertex, MAX_DIM};

/// The bijection φ_i between the margin G_i of a page and its spine copy G_i′.
pub trait Identification: Send + Sync {
    /// φ_i(v) when v ∈ G_i.
    fn to_spine(&self, v: &Vertex) -> Option<Vertex>;
    /// φ_i⁻¹(s) when s ∈ G_i′.
    fn from_spine(&self, s: &Vertex) -> Option<Vertex>;
}

type VertexPred = Arc<dyn Fn(&Vertex) -> bool + Send + Sync>;

/// Identification by copying coordinates: page coordinate `p` ↔ spine coordinate `s`
/// for each `(p, s)` in `map`; every other coordinate is zero on the margin and on G_i′.
#[derive(Clone)]
pub struct CoordIdent {
    map: Vec<(usize, usize)>,
    spine_member: VertexPred,
}

impl CoordIdent {
    pub fn new(map: Vec<(usize, usize)>, spine_member: impl Fn(&Vertex) -> bool + Send + Sync + 'static) -> Self {
        CoordIdent { map, spine_member: Arc::new(spine_member) }
    }

    /// Identifies the first k coordinates with the spine Z^k.
    pub fn axes(k: usize, spine: GraphRef) -> Self {
        Self::new((0..k).map(|i| (i, i)).collect(), move |s| spine.contains(s))
    }
}

impl Identification for CoordIdent {
    fn to_spine(&self, v: &Vertex) -> Option<Vertex> {
        if v.tag != 0 {
            return None;
        }
        let mut s = Vertex::ORIGIN;
        let mut used = [false; MAX_DIM];
        for (p, q) in &self.map {
            s.x[*q] = v.x[*p];
            used[*p] = true;
        }
        if (0..MAX_DIM).any(|c| !used[c] && v.x[c] != 0) {
            return None;
        }
        (self.spine_member)(&s).then_some(s)
    }

    fn from_spine(&self, s: &Vertex) -> Option<Vertex> {
        if s.tag != 0 || !(self.spine_member)(s) {
            return None;
        }
        let mut v = Vertex::ORIGIN;
        let mut used = [false; MAX_DIM];
        for (p, q) in &self.map {
            v.x[*p] = s.x[*q];
            used[*q] = true;
        }
        if (0..MAX_DIM).any(|c| !used[c] && s.x[c] != 0) {
            return None;
        }
        Some(v)
    }
}

/// Identification given by explicit tables (finite margins).
#[derive(Clone, Default)]
pub struct TableIdent {
    fwd: FxHashMap<Vertex, Vertex>,
    back: FxHashMap<Vertex, Vertex>,
}

impl TableIdent {
    pub fn new(pairs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        let mut t = TableIdent::default();
        for (v, s) in pairs {
            t.fwd.insert(v, s);
            t.back.insert(s, v);
        }
        t
    }
}

impl Identification for TableIdent {
    fn to_spine(&self, v: &Vertex) -> Option<Vertex> {
        self.fwd.get(v).copied()
    }
    fn from_spine(&self, s: &Vertex) -> Option<Vertex> {
        self.back.get(s).copied()
    }
}

#[derive(Clone)]
pub struct Page {
    pub name: String,
    pub graph: GraphRef,
    pub ident: Arc<dyn Identification>,
}

impl Page {
    pub fn new(name: &str, graph: GraphRef, ident: Arc<dyn Identification>) -> Self {
        Page { name: name.to_string(), graph, ident }
    }
}

/// Pages, spine, identifications and the declared compatibility constants c_I ≤ C_I.
#[derive(Clone)]
pub struct GluingSpec {
    pub name: String,
    pub pages: Vec<Page>,
    pub spine: GraphRef,
    pub c_compat: f64,
    pub big_c_compat: f64,
}

/// Window-certified facts about a glued graph.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct GlueReport {
    pub window_center: Vertex,
    pub window_radius: u32,
    /// Smallest α with [Γ₀]_α connected on the window (condition B).
    pub alpha_b: Option<u32>,
    pub spine_vertices_seen: usize,
    pub c_c_witness: f64,
    pub c_e_witness: f64,
}

/// The glued graph: π(x) = Σ_i π_i(x), μ_xy = Σ_i μ^i_xy.
///
/// Spine vertices keep their spine id (tag 0); a page-i vertex off the margin is its
/// local coordinate vector with tag i (pages are numbered from 1).
#[derive(Clone)]
pub struct GluedGraph {
    pub name: String,
    pub pages: Vec<Page>,
    pub spine: GraphRef,
    pub report: GlueReport,
}

type Pieces = SmallVec<[(usize, Vertex); 4]>;

/// Spine vertices carry tag 0 or a tag at or above this value; pages use tags 1..=255.
pub const SPINE_TAG_BASE: u16 = 256;

pub fn is_spine_tag(tag: u16) -> bool {
    tag == 0 || tag >= SPINE_TAG_BASE
}

impl GluedGraph {
    /// Assembles without validation; use [`glue`] for the checked constructor.
    pub fn assemble(spec: &GluingSpec) -> Self {
        GluedGraph {
            name: spec.name.clone(),
            pages: spec.pages.clone(),
            spine: spec.spine.clone(),
            report: GlueReport::default(),
        }
    }

    pub fn num_pages(&self) -> usize {
        self.pages.len()
    }

    /// The glued id of a page-local vertex.
    pub fn from_page(&self, i: usize, v: &Vertex) -> Vertex {
        match self.pages[i - 1].ident.to_spine(v) {
            Some(s) => s,
            None => v.with_tag(i as u16),
        }
    }

    /// The local vertex of page i at glued vertex x, if x ∈ Γ_i.
    pub fn to_page(&self, i: usize, x: &Vertex) -> Option<Vertex> {
        if is_spine_tag(x.tag) {
            if !self.spine.contains(x) {
                return None;
            }
            self.pages[i - 1].ident.from_spine(x)
        } else if x.tag as usize == i {
            let v = x.with_tag(0);
            (self.pages[i - 1].graph.contains(&v) && self.pages[i - 1].ident.to_spine(&v).is_none()).then_some(v)
        } else {
            None
        }
    }

    pub fn in_page(&self, i: usize, x: &Vertex) -> bool {
        self.to_page(i, x).is_some()
    }

    pub fn in_spine(&self, x: &Vertex) -> bool {
        is_spine_tag(x.tag) && self.spine.contains(x)
    }

    /// (page index or 0 for the spine, local vertex) for every piece containing x.
    fn pieces(&self, x: &Vertex) -> Pieces {
        let mut out = Pieces::new();
        if is_spine_tag(x.tag) {
            if !self.spine.contains(x) {
                return out;
            }
            out.push((0, *x));
            for (i, p) in self.pages.iter().enumerate() {
                if let Some(v) = p.ident.from_spine(x) {
                    out.push((i + 1, v));
                }
            }
        } else if let Some(v) = self.to_page(x.tag as usize, x) {
            out.push((x.tag as usize, v));
        }
        out
    }

    /// V_i(y, r) measured in page i's own weights.
    pub fn page_volume(&self, i: usize, local: &Vertex, r: u32) -> f64 {
        crate::graph::volume(&self.pages[i - 1].graph, local, r)
    }
}

impl Graph for GluedGraph {
    fn contains(&self, x: &Vertex) -> bool {
        !self.pieces(x).is_empty()
    }

    fn weight(&self, x: &Vertex) -> f64 {
        self.pieces(x)
            .iter()
            .map(|(i, v)| if *i == 0 { self.spine.weight(v) } else { self.pages[i - 1].graph.weight(v) })
            .sum()
    }

    fn neighbors(&self, x: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        let start = out.len();
        let mut local = Vec::new();
        for (i, v) in self.pieces(x) {
            local.clear();
            if i == 0 {
                self.spine.neighbors(&v, &mut local);
                out.extend(local.iter().copied());
            } else {
                self.pages[i - 1].graph.neighbors(&v, &mut local);
                out.extend(local.iter().map(|(w, mu)| (self.from_page(i, w), *mu)));
            }
        }
        let tail = &mut out[start..];
        tail.sort_by(|a, b| a.0.cmp(&b.0));
        let mut keep = start;
        for k in start..out.len() {
            if keep > start && out[keep - 1].0 == out[k].0 {
                out[keep - 1].1 += out[k].1;
            } else {
                out[keep] = out[k];
                keep += 1;
            }
        }
        out.truncate(keep);
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Glues the pages and certifies the gluing conditions on B(center, radius).
///
/// Checks: identification bijectivity, weight compatibility (against π₀ when positive,
/// otherwise across co-identified page vertices), every page attached to the window
/// (condition A), ∂_I Γ_i = G_i (condition C), the weight invariants, and records the
/// smallest α with [Γ₀]_α connected (condition B).
pub fn glue(spec: &GluingSpec, center: &Vertex, radius: u32) -> Result<GluedGraph> {
    let mut g = GluedGraph::assemble(spec);
    let verts = ball(&g, center, radius);
    if verts.is_empty() {
        return Err(Error::Gluing(format!("window centre {center} is not a vertex")));
    }
    let mut pages_seen = vec![false; g.pages.len()];
    let mut spine_seen = 0;
    for x in &verts {
        let pieces = g.pieces(x);
        for (i, v) in &pieces {
            if *i > 0 {
                pages_seen[i - 1] = true;
                let p = &g.pages[i - 1];
                if is_spine_tag(x.tag) && p.ident.to_spine(v) != Some(*x) {
                    return Err(Error::Gluing(format!("identification of page {i} is not a bijection at {x}")));
                }
            }
        }
        if is_spine_tag(x.tag) {
            spine_seen += 1;
            let pi0 = spec.spine.weight(x);
            let page_w: Vec<f64> =
                pieces.iter().filter(|p| p.0 > 0).map(|(i, v)| g.pages[i - 1].graph.weight(v)).collect();
            let refs: Vec<f64> = if pi0 > 0.0 { vec![pi0] } else { page_w.clone() };
            for a in &page_w {
                for b in &refs {
                    let ratio = a / b;
                    if ratio < spec.c_compat * (1.0 - 1e-12) || ratio > spec.big_c_compat * (1.0 + 1e-12) {
                        return Err(Error::Gluing(format!(
                            "weights at {x} not compatible: ratio {ratio} outside [{}, {}]",
                            spec.c_compat, spec.big_c_compat
                        )));
                    }
                }
            }
        }
        // Condition C: a page vertex off the margin only sees its own page.
        for i in 1..=g.pages.len() {
            if !g.in_page(i, x) {
                continue;
            }
            let leaves = g.neighbor_list(x).iter().any(|(w, _)| !g.in_page(i, w));
            let margin = is_spine_tag(x.tag);
            if leaves && !margin {
                return Err(Error::Gluing(format!("inner boundary of page {i} contains non-margin vertex {x}")));
            }
            if margin && !leaves && g.pages.len() > 1 {
                return Err(Error::Gluing(format!("margin vertex {x} of page {i} is not on its inner boundary")));
            }
        }
    }
    if let Some(i) = pages_seen.iter().position(|s| !s) {
        return Err(Error::Gluing(format!("page {} does not meet the window; result not connected there", i + 1)));
    }
    let w = check_weights(&g, center, radius.saturating_sub(1));
    if let Some((v, d)) = w.violations.first() {
        return Err(Error::Weights { vertex: *v, detail: d.clone() });
    }
    g.report = GlueReport {
        window_center: *center,
        window_radius: radius,
        alpha_b: alpha_connectivity(&g, &verts.iter().filter(|v| is_spine_tag(v.tag)).copied().collect::<Vec<_>>(), radius),
        spine_vertices_seen: spine_seen,
        c_c_witness: w.c_c_witness,
        c_e_witness: w.c_e_witness,
    };
    Ok(g)
}

/// Smallest α ≤ cap such that the α-neighbourhood of the given spine vertices is
/// connected; `Some(0)` when at most one spine vertex is given.
pub fn alpha_connectivity(g: &GluedGraph, spine: &[Vertex], cap: u32) -> Option<u32> {
    if spine.len() <= 1 {
        return Some(0);
    }
    (0..=cap).find(|a| neighbourhood_connected(g, spine, *a))
}

fn neighbourhood_connected(g: &GluedGraph, sources: &[Vertex], alpha: u32) -> bool {
    let mut dist: FxHashMap<Vertex, u32> = FxHashMap::default();
    let mut q = VecDeque::new();
    for s in sources {
        dist.insert(*s, 0);
        q.push_back(*s);
    }
    let mut nb = Vec::new();
    while let Some(v) = q.pop_front() {
        let d = dist[&v];
        if d == alpha {
            continue;
        }
        nb.clear();
        g.neighbors(&v, &mut nb);
        for (w, _) in &nb {
            if !dist.contains_key(w) {
                dist.insert(*w, d + 1);
                q.push_back(*w);
            }
        }
    }
    let set: FxHashSet<Vertex> = dist.keys().copied().collect();
    let mut seen: FxHashSet<Vertex> = FxHashSet::default();
    seen.insert(sources[0]);
    let mut stack = vec![sources[0]];
    while let Some(v) = stack.pop() {
        nb.clear();
        g.neighbors(&v, &mut nb);
        for (w, _) in &nb {
            if set.contains(w) && seen.insert(*w) {
                stack.push(*w);
            }
        }
    }
    sources.iter().all(|s| seen.contains(s))
}
