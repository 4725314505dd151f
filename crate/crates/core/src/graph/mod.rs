//! Weighted graphs given by on-demand neighbour generators.

mod finite;
mod kernel;
mod lattice;
mod metric;
mod subgraph;
mod weights;

use std::sync::Arc;

pub use finite::{FiniteGraph, FiniteGraphBuilder};
pub use kernel::{Chain, DirichletKernel, MarkovKernel};
pub use lattice::{lattice_ball_count, EdgelessSet, Lattice, LatticeRegion};
pub use metric::{ball, ball_with_dist, distance, volume};
pub use subgraph::Subgraph;
pub use weights::{check_weights, WeightReport};

use crate::vertex::Vertex;

/// A vertex-weighted, edge-weighted simple graph.
///
/// `neighbors` appends `(w, μ_vw)` for every edge at `v`; only vertices for which
/// `contains` holds are ever passed in.
pub trait Graph: Send + Sync {
    fn contains(&self, v: &Vertex) -> bool;
    fn weight(&self, v: &Vertex) -> f64;
    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>);
    fn label(&self) -> String;

    /// Closed-form V(c, r) when known.
    fn ball_volume(&self, _center: &Vertex, _r: u32) -> Option<f64> {
        None
    }

    fn neighbor_list(&self, v: &Vertex) -> Vec<(Vertex, f64)> {
        let mut out = Vec::new();
        self.neighbors(v, &mut out);
        out
    }
}

pub type GraphRef = Arc<dyn Graph>;

impl<G: Graph + ?Sized> Graph for Arc<G> {
    fn contains(&self, v: &Vertex) -> bool {
        (**self).contains(v)
    }
    fn weight(&self, v: &Vertex) -> f64 {
        (**self).weight(v)
    }
    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        (**self).neighbors(v, out)
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn ball_volume(&self, c: &Vertex, r: u32) -> Option<f64> {
        (**self).ball_volume(c, r)
    }
}

/// Scales every vertex and edge weight by the same factor.
pub struct Scaled<G> {
    pub inner: G,
    pub factor: f64,
}

impl<G: Graph> Graph for Scaled<G> {
    fn contains(&self, v: &Vertex) -> bool {
        self.inner.contains(v)
    }
    fn weight(&self, v: &Vertex) -> f64 {
        self.inner.weight(v) * self.factor
    }
    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        let start = out.len();
        self.inner.neighbors(v, out);
        for e in &mut out[start..] {
            e.1 *= self.factor;
        }
    }
    fn label(&self) -> String {
        format!("{}*{}", self.inner.label(), self.factor)
    }
    fn ball_volume(&self, c: &Vertex, r: u32) -> Option<f64> {
        self.inner.ball_volume(c, r).map(|v| v * self.factor)
    }
}
