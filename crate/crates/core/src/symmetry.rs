//! Graph automorphism groups used to lump heat evolution and harmonic solves.
//!
//! A symmetry maps each vertex to a canonical representative of its orbit. Lumping is
//! exact for masses that are uniform on orbits, e.g. a point mass at a fixed vertex.

use rustc_hash::FxHashMap;

use crate::graph::{ball, Chain, Graph};
use crate::vertex::Vertex;

pub trait Symmetry: Send + Sync {
    fn canonical(&self, v: &Vertex) -> Vertex;
    fn orbit_size(&self, v: &Vertex) -> f64;
}

/// The trivial group.
#[derive(Clone, Copy, Debug, Default)]
pub struct Trivial;

impl Symmetry for Trivial {
    fn canonical(&self, v: &Vertex) -> Vertex {
        *v
    }
    fn orbit_size(&self, _v: &Vertex) -> f64 {
        1.0
    }
}

/// Coordinates permuted among themselves, optionally with sign changes.
#[derive(Clone, Debug)]
pub struct Block {
    pub coords: Vec<usize>,
    pub signed: bool,
}

impl Block {
    pub fn signed(coords: impl IntoIterator<Item = usize>) -> Self {
        Block { coords: coords.into_iter().collect(), signed: true }
    }
}

#[derive(Clone, Debug)]
struct TagRule {
    blocks: Vec<Block>,
    canon_tag: u16,
    class_size: usize,
}

/// Products of hyperoctahedral groups acting on coordinate blocks, per vertex tag, plus
/// permutations of tags carrying isomorphic pages.
#[derive(Clone, Debug, Default)]
pub struct BlockSymmetry {
    rules: FxHashMap<u16, TagRule>,
}

impl BlockSymmetry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The full hyperoctahedral group of Z^dim fixing the origin.
    pub fn lattice(dim: usize) -> Self {
        Self::new().tag(0, vec![Block::signed(0..dim)])
    }

    pub fn tag(mut self, tag: u16, blocks: Vec<Block>) -> Self {
        self.rules.insert(tag, TagRule { blocks, canon_tag: tag, class_size: 1 });
        self
    }

    /// Declares the listed tags interchangeable; all must already share one block layout.
    pub fn interchangeable(mut self, tags: &[u16]) -> Self {
        let canon = *tags.iter().min().expect("nonempty tag class");
        for t in tags {
            let r = self.rules.entry(*t).or_insert(TagRule { blocks: Vec::new(), canon_tag: *t, class_size: 1 });
            r.canon_tag = canon;
            r.class_size = tags.len();
        }
        self
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Symmetry for BlockSymmetry {
    fn canonical(&self, v: &Vertex) -> Vertex {
        let Some(rule) = self.rules.get(&v.tag) else { return *v };
        let mut out = *v;
        out.tag = rule.canon_tag;
        let mut vals: Vec<i32> = Vec::with_capacity(6);
        for b in &rule.blocks {
            vals.clear();
            vals.extend(b.coords.iter().map(|c| if b.signed { v.x[*c].abs() } else { v.x[*c] }));
            vals.sort_unstable();
            for (c, val) in b.coords.iter().zip(&vals) {
                out.x[*c] = *val;
            }
        }
        out
    }

    fn orbit_size(&self, v: &Vertex) -> f64 {
        let Some(rule) = self.rules.get(&v.tag) else { return 1.0 };
        let mut size = rule.class_size as f64;
        let mut vals: Vec<i32> = Vec::with_capacity(6);
        for b in &rule.blocks {
            vals.clear();
            vals.extend(b.coords.iter().map(|c| if b.signed { v.x[*c].abs() } else { v.x[*c] }));
            vals.sort_unstable();
            let mut perms = factorial(vals.len());
            let mut run = 1;
            for i in 1..=vals.len() {
                if i < vals.len() && vals[i] == vals[i - 1] {
                    run += 1;
                } else {
                    perms /= factorial(run);
                    run = 1;
                }
            }
            size *= perms;
            if b.signed {
                size *= 2f64.powi(vals.iter().filter(|x| **x != 0).count() as i32);
            }
        }
        size
    }
}

/// Checks lumpability of a chain under a symmetry on B(center, radius): every vertex has
/// the same weight and the same orbit-aggregated row as its canonical representative.
/// Returns the first offending vertex.
pub fn check_lumpable<C: Chain + ?Sized, G: Graph + ?Sized, S: Symmetry + ?Sized>(
    chain: &C,
    graph: &G,
    sym: &S,
    center: &Vertex,
    radius: u32,
) -> Option<Vertex> {
    let lumped = |v: &Vertex| {
        let mut agg: FxHashMap<Vertex, f64> = FxHashMap::default();
        for (w, p) in chain.full_row(v) {
            *agg.entry(sym.canonical(&w)).or_default() += p;
        }
        let mut rows: Vec<_> = agg.into_iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        rows
    };
    for v in ball(graph, center, radius) {
        let c = sym.canonical(&v);
        if sym.canonical(&c) != c || (chain.weight(&v) - chain.weight(&c)).abs() > 1e-12 * chain.weight(&c).max(1.0) {
            return Some(v);
        }
        let (a, b) = (lumped(&v), lumped(&c));
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0 || (x.1 - y.1).abs() > 1e-14) {
            return Some(v);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Lattice, MarkovKernel};
    use std::sync::Arc;

    #[test]
    fn orbit_sizes_partition_lattice_balls() {
        for dim in 1..=4 {
            let sym = BlockSymmetry::lattice(dim);
            let g = Lattice::new(dim);
            let pts = ball(&g, &Vertex::ORIGIN, 4);
            let mut by_orbit: FxHashMap<Vertex, usize> = FxHashMap::default();
            for p in &pts {
                *by_orbit.entry(sym.canonical(p)).or_default() += 1;
            }
            for (rep, count) in by_orbit {
                assert_eq!(sym.orbit_size(&rep), count as f64, "dim {dim} rep {rep}");
            }
        }
    }

    #[test]
    fn lattice_is_lumpable() {
        let g: Arc<dyn Graph> = Arc::new(Lattice::new(3));
        let k = MarkovKernel::new(g.clone());
        assert_eq!(check_lumpable(&k, &g, &BlockSymmetry::lattice(3), &Vertex::ORIGIN, 4), None);
    }

    #[test]
    fn wrong_symmetry_is_caught() {
        use crate::graph::LatticeRegion;
        let g: Arc<dyn Graph> = Arc::new(LatticeRegion::half_plane(true));
        let k = MarkovKernel::new(g.clone());
        assert!(check_lumpable(&k, &g, &BlockSymmetry::lattice(2), &Vertex::ORIGIN, 3).is_some());
    }
}
