use rustc_hash::FxHashMap;

use super::Graph;
use crate::vertex::Vertex;

/// A finite graph stored as an explicit adjacency table.
#[derive(Clone, Debug, Default)]
pub struct FiniteGraph {
    name: String,
    weight: FxHashMap<Vertex, f64>,
    adj: FxHashMap<Vertex, Vec<(Vertex, f64)>>,
    order: Vec<Vertex>,
}

impl FiniteGraph {
    pub fn builder(name: &str) -> FiniteGraphBuilder {
        FiniteGraphBuilder { g: FiniteGraph { name: name.to_string(), ..Default::default() } }
    }

    /// Vertices in insertion order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// A path 0..n on the first coordinate with the lazy SRW.
    pub fn lazy_path(n: usize) -> Self {
        let mut b = Self::builder(&format!("P{n}"));
        for i in 0..n {
            b = b.vertex(Vertex::at(&[i as i32]), 0.0);
        }
        for i in 1..n {
            b = b.edge(Vertex::at(&[i as i32 - 1]), Vertex::at(&[i as i32]), 1.0);
        }
        b.lazy_weights().build()
    }
}

pub struct FiniteGraphBuilder {
    g: FiniteGraph,
}

impl FiniteGraphBuilder {
    pub fn vertex(mut self, v: Vertex, pi: f64) -> Self {
        if self.g.weight.insert(v, pi).is_none() {
            self.g.order.push(v);
            self.g.adj.entry(v).or_default();
        }
        self
    }

    /// Adds the symmetric edge {v, w}; weights of repeated edges add up.
    pub fn edge(self, v: Vertex, w: Vertex, mu: f64) -> Self {
        self.directed(v, w, mu).directed(w, v, mu)
    }

    /// Adds only the (v → w) entry; meant for building malformed inputs in diagnostics.
    pub fn directed(mut self, v: Vertex, w: Vertex, mu: f64) -> Self {
        for u in [v, w] {
            if !self.g.weight.contains_key(&u) {
                self = self.vertex(u, 0.0);
            }
        }
        let row = self.g.adj.get_mut(&v).unwrap();
        match row.iter_mut().find(|(u, _)| *u == w) {
            Some(e) => e.1 += mu,
            None => row.push((w, mu)),
        }
        self
    }

    /// Sets π(v) = 2·Σ_w μ_vw, the lazy walk normalisation.
    pub fn lazy_weights(mut self) -> Self {
        for v in &self.g.order {
            let s: f64 = self.g.adj[v].iter().map(|e| e.1).sum();
            self.g.weight.insert(*v, 2.0 * s);
        }
        self
    }

    pub fn build(mut self) -> FiniteGraph {
        for row in self.g.adj.values_mut() {
            row.sort_by(|a, b| a.0.cmp(&b.0));
        }
        self.g
    }
}

impl Graph for FiniteGraph {
    fn contains(&self, v: &Vertex) -> bool {
        self.weight.contains_key(v)
    }
    fn weight(&self, v: &Vertex) -> f64 {
        self.weight.get(v).copied().unwrap_or(0.0)
    }
    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        if let Some(row) = self.adj.get(v) {
            out.extend_from_slice(row);
        }
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}
