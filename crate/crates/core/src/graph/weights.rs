use serde::Serialize;

use super::{ball, Graph};
use crate::vertex::Vertex;

const REL_TOL: f64 = 1e-12;

/// Weight diagnostics on an enumerated region.
#[derive(Clone, Debug, Serialize)]
pub struct WeightReport {
    pub vertices: usize,
    pub edges: usize,
    /// Smallest C_c with μ_vw/π(v) ≥ 1/C_c on every edge seen.
    pub c_c_witness: f64,
    /// Smallest diagonal K(v,v) seen over vertices with π > 0.
    pub c_e_witness: f64,
    pub symmetric: bool,
    pub subordinate: bool,
    pub adapted: bool,
    pub violations: Vec<(Vertex, String)>,
}

impl WeightReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks symmetry, adaptedness and subordination on B(center, radius), and reports
/// the tightest controlled-weight and laziness constants witnessed there.
pub fn check_weights<G: Graph + ?Sized>(g: &G, center: &Vertex, radius: u32) -> WeightReport {
    let verts = ball(g, center, radius);
    let mut rep = WeightReport {
        vertices: verts.len(),
        edges: 0,
        c_c_witness: 1.0,
        c_e_witness: 1.0,
        symmetric: true,
        subordinate: true,
        adapted: true,
        violations: Vec::new(),
    };
    let mut nb = Vec::new();
    let mut back = Vec::new();
    for v in &verts {
        let pi = g.weight(v);
        nb.clear();
        g.neighbors(v, &mut nb);
        if !(pi.is_finite() && pi >= 0.0) {
            rep.violations.push((*v, format!("vertex weight {pi} is not a nonnegative number")));
            continue;
        }
        let mut total = 0.0;
        for (w, mu) in &nb {
            rep.edges += 1;
            total += mu;
            if !(*mu > 0.0) || *w == *v {
                rep.adapted = false;
                rep.violations.push((*v, format!("edge to {w} has weight {mu}")));
            }
            back.clear();
            g.neighbors(w, &mut back);
            let rev: f64 = back.iter().filter(|e| e.0 == *v).map(|e| e.1).sum();
            if (rev - mu).abs() > REL_TOL * mu.abs().max(1.0) {
                rep.symmetric = false;
                rep.violations.push((*v, format!("μ({v},{w}) = {mu} but μ({w},{v}) = {rev}")));
            }
            if pi > 0.0 {
                rep.c_c_witness = rep.c_c_witness.max(pi / mu);
            }
        }
        if pi == 0.0 {
            if !nb.is_empty() {
                rep.subordinate = false;
                rep.violations.push((*v, "zero weight on a vertex with edges".into()));
            }
            continue;
        }
        if total > pi * (1.0 + REL_TOL) {
            rep.subordinate = false;
            rep.violations.push((*v, format!("edge weights sum to {total} > π = {pi}")));
        }
        rep.c_e_witness = rep.c_e_witness.min(1.0 - total / pi);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraph, Lattice};

    #[test]
    fn z3_constants() {
        let r = check_weights(&Lattice::new(3), &Vertex::ORIGIN, 2);
        assert!(r.ok());
        assert_eq!(r.c_c_witness, 12.0);
        assert_eq!(r.c_e_witness, 0.5);
    }

    #[test]
    fn asymmetric_detected() {
        let a = Vertex::at(&[0]);
        let b = Vertex::at(&[1]);
        let g = FiniteGraph::builder("bad")
            .vertex(a, 4.0)
            .vertex(b, 4.0)
            .directed(a, b, 1.0)
            .directed(b, a, 2.0)
            .build();
        let r = check_weights(&g, &a, 3);
        assert!(!r.symmetric);
        assert!(!r.ok());
    }

    #[test]
    fn over_subscribed_detected() {
        let a = Vertex::at(&[0]);
        let b = Vertex::at(&[1]);
        let g = FiniteGraph::builder("heavy").vertex(a, 1.0).vertex(b, 4.0).edge(a, b, 2.0).build();
        let r = check_weights(&g, &a, 1);
        assert!(!r.subordinate);
    }
}
