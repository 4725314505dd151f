use std::sync::Arc;

use super::{check_weights, Graph, GraphRef, Subgraph};
use crate::error::{Error, Result};
use crate::vertex::Vertex;

/// A (sub-)Markov chain with reversing measure `weight`.
///
/// `row` appends the off-diagonal transition probabilities and returns K(v,v).
/// Mass sent to vertices that are not `alive` is killed.
pub trait Chain: Send + Sync {
    fn weight(&self, v: &Vertex) -> f64;
    fn alive(&self, v: &Vertex) -> bool;
    fn row(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) -> f64;
    fn label(&self) -> String;

    /// Full row including the diagonal entry.
    fn full_row(&self, v: &Vertex) -> Vec<(Vertex, f64)> {
        let mut out = Vec::new();
        let d = self.row(v, &mut out);
        out.push((*v, d));
        out
    }
}

/// K(v,w) = μ_vw/π(v), K(v,v) = 1 − Σ_w μ_vw/π(v).
#[derive(Clone)]
pub struct MarkovKernel {
    graph: GraphRef,
}

impl MarkovKernel {
    /// Wraps a graph without validation.
    pub fn new(graph: GraphRef) -> Self {
        MarkovKernel { graph }
    }

    /// Builds the kernel after checking every weight invariant on B(probe, radius).
    pub fn build(graph: GraphRef, probe: &Vertex, radius: u32) -> Result<Self> {
        let report = check_weights(&graph, probe, radius);
        if let Some((vertex, detail)) = report.violations.first() {
            return Err(Error::Weights { vertex: *vertex, detail: detail.clone() });
        }
        Ok(MarkovKernel { graph })
    }

    /// Neumann kernel of a subgraph: missing edges are turned into laziness.
    pub fn neumann(sub: Subgraph) -> Self {
        MarkovKernel { graph: Arc::new(sub) }
    }

    pub fn graph(&self) -> &GraphRef {
        &self.graph
    }

    pub fn prob(&self, v: &Vertex, w: &Vertex) -> f64 {
        self.full_row(v).iter().filter(|e| e.0 == *w).map(|e| e.1).sum()
    }
}

impl Chain for MarkovKernel {
    fn weight(&self, v: &Vertex) -> f64 {
        self.graph.weight(v)
    }

    fn alive(&self, v: &Vertex) -> bool {
        self.graph.contains(v)
    }

    fn row(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) -> f64 {
        let pi = self.graph.weight(v);
        if pi == 0.0 {
            return 1.0;
        }
        let start = out.len();
        self.graph.neighbors(v, out);
        let mut s = 0.0;
        for e in &mut out[start..] {
            e.1 /= pi;
            s += e.1;
        }
        1.0 - s
    }

    fn label(&self) -> String {
        self.graph.label()
    }
}

/// The parent kernel restricted to a subgraph; mass leaving the subgraph is killed.
#[derive(Clone)]
pub struct DirichletKernel {
    parent: MarkovKernel,
    sub: Subgraph,
}

impl DirichletKernel {
    pub fn new(sub: Subgraph) -> Self {
        DirichletKernel { parent: MarkovKernel::new(sub.parent().clone()), sub }
    }

    pub fn subgraph(&self) -> &Subgraph {
        &self.sub
    }

    /// Σ_w K_D(v,w); strictly below one exactly on the inner boundary.
    pub fn row_sum(&self, v: &Vertex) -> f64 {
        self.full_row(v).iter().filter(|e| self.alive(&e.0)).map(|e| e.1).sum()
    }
}

impl Chain for DirichletKernel {
    fn weight(&self, v: &Vertex) -> f64 {
        self.parent.weight(v)
    }
    fn alive(&self, v: &Vertex) -> bool {
        self.sub.is_member(v)
    }
    fn row(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) -> f64 {
        self.parent.row(v, out)
    }
    fn label(&self) -> String {
        format!("D[{}]", self.sub.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgelessSet, Lattice};

    #[test]
    fn z2_row() {
        let k = MarkovKernel::build(Arc::new(Lattice::new(2)), &Vertex::ORIGIN, 3).unwrap();
        let row = k.full_row(&Vertex::ORIGIN);
        assert_eq!(row.len(), 5);
        assert_eq!(k.prob(&Vertex::ORIGIN, &Vertex::ORIGIN), 0.5);
        assert_eq!(k.prob(&Vertex::ORIGIN, &Vertex::at(&[0, 1])), 0.125);
    }

    #[test]
    fn z1_row() {
        let k = MarkovKernel::new(Arc::new(Lattice::new(1)));
        let o = Vertex::ORIGIN;
        assert_eq!(k.prob(&o, &Vertex::at(&[-1])), 0.25);
        assert_eq!(k.prob(&o, &o), 0.5);
        assert_eq!(k.prob(&o, &Vertex::at(&[1])), 0.25);
    }

    #[test]
    fn isolated_zero_weight_vertex_stays() {
        let k = MarkovKernel::new(Arc::new(EdgelessSet::axes(1)));
        assert_eq!(k.full_row(&Vertex::at(&[4])), vec![(Vertex::at(&[4]), 1.0)]);
    }

    #[test]
    fn half_plane_neumann_and_dirichlet() {
        let z2: GraphRef = Arc::new(Lattice::new(2));
        let sub = Subgraph::new(z2, "y>=0", |v| v.x[1] >= 0);
        let axis = Vertex::at(&[3, 0]);
        let n = MarkovKernel::neumann(sub.clone());
        assert_eq!(n.prob(&axis, &axis), 5.0 / 8.0);
        let d = DirichletKernel::new(sub.clone());
        assert_eq!(d.row_sum(&axis), 7.0 / 8.0);
        assert_eq!(d.row_sum(&Vertex::at(&[3, 2])), 1.0);
        assert!(sub.is_inner_boundary(&axis));
        assert!(sub.is_exterior_boundary(&Vertex::at(&[3, -1])));
    }
}
