use std::sync::Arc;

use super::Graph;
use crate::vertex::{Vertex, MAX_DIM};

/// Z^d with the lazy simple random walk: π ≡ 4d, μ ≡ 1 on nearest-neighbour edges.
#[derive(Clone, Copy, Debug)]
pub struct Lattice {
    pub dim: usize,
}

impl Lattice {
    pub fn new(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "lattice dimension must be in 1..={MAX_DIM}");
        Lattice { dim }
    }
}

/// Number of points of Z^d at ℓ¹ distance at most r from a point.
///
/// Uses N_d(r) = Σ_k 2^k C(d,k) C(r,k).
pub fn lattice_ball_count(dim: usize, r: u32) -> u128 {
    let mut total: u128 = 0;
    let mut c_dk: u128 = 1;
    let mut c_rk: u128 = 1;
    for k in 0..=dim.min(r as usize) {
        if k > 0 {
            c_dk = c_dk * (dim - k + 1) as u128 / k as u128;
            c_rk = c_rk * (r as u128 - k as u128 + 1) / k as u128;
        }
        total += (1u128 << k) * c_dk * c_rk;
    }
    total
}

impl Graph for Lattice {
    fn contains(&self, v: &Vertex) -> bool {
        v.tag == 0 && v.x[self.dim..].iter().all(|c| *c == 0)
    }

    fn weight(&self, _v: &Vertex) -> f64 {
        4.0 * self.dim as f64
    }

    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        for a in 0..self.dim {
            out.push((v.shifted(a, 1), 1.0));
            out.push((v.shifted(a, -1), 1.0));
        }
    }

    fn label(&self) -> String {
        format!("Z{}", self.dim)
    }

    fn ball_volume(&self, _center: &Vertex, r: u32) -> Option<f64> {
        Some(4.0 * self.dim as f64 * lattice_ball_count(self.dim, r) as f64)
    }
}

type CoordPred = Arc<dyn Fn(&[i32]) -> bool + Send + Sync>;

/// An induced subgraph of Z^d carrying its own lazy SRW: π = 2·deg, μ ≡ 1.
///
/// Half-lines and half-planes are instances.
#[derive(Clone)]
pub struct LatticeRegion {
    pub dim: usize,
    member: CoordPred,
    name: String,
}

impl LatticeRegion {
    pub fn new(dim: usize, name: &str, member: impl Fn(&[i32]) -> bool + Send + Sync + 'static) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        LatticeRegion { dim, member: Arc::new(member), name: name.to_string() }
    }

    /// Z_{≥0}: π(0) = 2, π(k) = 4 otherwise.
    pub fn half_line() -> Self {
        Self::new(1, "Z>=0", |x| x[0] >= 0)
    }

    /// {x₂ ≥ 0} in Z² when `upper`, else {x₂ ≤ 0}.
    pub fn half_plane(upper: bool) -> Self {
        if upper {
            Self::new(2, "H+", |x| x[1] >= 0)
        } else {
            Self::new(2, "H-", |x| x[1] <= 0)
        }
    }

    fn in_region(&self, v: &Vertex) -> bool {
        v.tag == 0 && v.x[self.dim..].iter().all(|c| *c == 0) && (self.member)(&v.x[..self.dim])
    }

    fn degree(&self, v: &Vertex) -> usize {
        let mut d = 0;
        for a in 0..self.dim {
            for s in [1, -1] {
                if (self.member)(&v.shifted(a, s).x[..self.dim]) {
                    d += 1;
                }
            }
        }
        d
    }
}

impl Graph for LatticeRegion {
    fn contains(&self, v: &Vertex) -> bool {
        self.in_region(v)
    }

    fn weight(&self, v: &Vertex) -> f64 {
        2.0 * self.degree(v) as f64
    }

    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        for a in 0..self.dim {
            for s in [1, -1] {
                let w = v.shifted(a, s);
                if (self.member)(&w.x[..self.dim]) {
                    out.push((w, 1.0));
                }
            }
        }
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// A set of isolated vertices of weight zero (an edgeless spine).
#[derive(Clone)]
pub struct EdgelessSet {
    member: CoordPred,
    name: String,
}

impl EdgelessSet {
    pub fn new(name: &str, member: impl Fn(&[i32]) -> bool + Send + Sync + 'static) -> Self {
        EdgelessSet { member: Arc::new(member), name: name.to_string() }
    }

    /// The points of Z^k embedded as the first k coordinates.
    pub fn axes(k: usize) -> Self {
        Self::new(&format!("Z{k}*"), move |x| x[k..].iter().all(|c| *c == 0))
    }

    pub fn point() -> Self {
        Self::axes(0)
    }
}

impl Graph for EdgelessSet {
    fn contains(&self, v: &Vertex) -> bool {
        v.tag == 0 && (self.member)(&v.x)
    }
    fn weight(&self, _v: &Vertex) -> f64 {
        0.0
    }
    fn neighbors(&self, _v: &Vertex, _out: &mut Vec<(Vertex, f64)>) {}
    fn label(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ball, volume};

    #[test]
    fn ball_counts_match_enumeration() {
        for d in 1..=4 {
            let g = Lattice::new(d);
            for r in 0..5 {
                let n = ball(&g, &Vertex::ORIGIN, r).len() as u128;
                assert_eq!(n, lattice_ball_count(d, r), "d={d} r={r}");
            }
        }
        assert_eq!(lattice_ball_count(2, 1), 5);
        assert_eq!(lattice_ball_count(5, 4), 681);
        assert_eq!(lattice_ball_count(4, 16), 50049);
    }

    #[test]
    fn z2_volumes() {
        let g = Lattice::new(2);
        assert_eq!(volume(&g, &Vertex::ORIGIN, 0), 8.0);
        assert_eq!(volume(&g, &Vertex::ORIGIN, 1), 40.0);
    }

    #[test]
    fn region_weights() {
        let h = LatticeRegion::half_line();
        assert_eq!(h.weight(&Vertex::ORIGIN), 2.0);
        assert_eq!(h.weight(&Vertex::at(&[3])), 4.0);
        let p = LatticeRegion::half_plane(true);
        assert_eq!(p.weight(&Vertex::at(&[5, 0])), 6.0);
        assert_eq!(p.weight(&Vertex::at(&[5, 1])), 8.0);
        assert!(!p.contains(&Vertex::at(&[0, -1])));
    }
}
