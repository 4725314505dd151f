use std::sync::Arc;

use super::{ball, Graph, GraphRef};
use crate::error::{Error, Result};
use crate::vertex::Vertex;

type VertexPred = Arc<dyn Fn(&Vertex) -> bool + Send + Sync>;

/// An induced subgraph of a parent graph.
///
/// As a [`Graph`] it keeps the parent's vertex weights and the induced edges, so its
/// Markov kernel is the Neumann kernel (missing edges become laziness).
#[derive(Clone)]
pub struct Subgraph {
    parent: GraphRef,
    member: VertexPred,
    name: String,
}

impl Subgraph {
    pub fn new(parent: GraphRef, name: &str, member: impl Fn(&Vertex) -> bool + Send + Sync + 'static) -> Self {
        Subgraph { parent, member: Arc::new(member), name: name.to_string() }
    }

    /// Rejects subgraphs with no vertex near `probe` (within `radius`).
    pub fn nonempty(self, probe: &Vertex, radius: u32) -> Result<Self> {
        let near = ball(&self.parent, probe, radius);
        if near.iter().any(|v| (self.member)(v)) {
            Ok(self)
        } else {
            Err(Error::EmptySubgraph)
        }
    }

    pub fn parent(&self) -> &GraphRef {
        &self.parent
    }

    pub fn is_member(&self, v: &Vertex) -> bool {
        self.parent.contains(v) && (self.member)(v)
    }

    /// Vertices of the subgraph adjacent to its complement.
    pub fn is_inner_boundary(&self, v: &Vertex) -> bool {
        self.is_member(v) && self.parent.neighbor_list(v).iter().any(|(w, _)| !self.is_member(w))
    }

    /// Vertices outside adjacent to the subgraph.
    pub fn is_exterior_boundary(&self, v: &Vertex) -> bool {
        self.parent.contains(v)
            && !self.is_member(v)
            && self.parent.neighbor_list(v).iter().any(|(w, _)| self.is_member(w))
    }

    pub fn membership(&self) -> impl Fn(&Vertex) -> bool + Send + Sync + 'static {
        let m = self.member.clone();
        let p = self.parent.clone();
        move |v| p.contains(v) && m(v)
    }
}

impl Graph for Subgraph {
    fn contains(&self, v: &Vertex) -> bool {
        self.is_member(v)
    }
    fn weight(&self, v: &Vertex) -> f64 {
        self.parent.weight(v)
    }
    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        let start = out.len();
        self.parent.neighbors(v, out);
        let mut keep = start;
        for i in start..out.len() {
            if (self.member)(&out[i].0) {
                out[keep] = out[i];
                keep += 1;
            }
        }
        out.truncate(keep);
    }
    fn label(&self) -> String {
        format!("{}[{}]", self.parent.label(), self.name)
    }
}
