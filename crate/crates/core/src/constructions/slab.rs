//! Lattice-axis gluing re-cut so that the spine is a slab of thickness 2h+1 per page.
//!
//! Page i is Z^{D_i} minus its slab N_i = {|x_t| ≤ h for all transverse t}; its margin is
//! its inner boundary. The spine holds every N_i plus spine copies of the margins, with
//! the weights left over so that the glued graph is the plain lattice-axis gluing.

use std::sync::Arc;

use super::glue::{Identification, SPINE_TAG_BASE};
use crate::graph::{Graph, LatticeRegion};
use crate::vertex::Vertex;

#[derive(Clone, Debug)]
pub struct SlabGeometry {
    pub dims: Vec<usize>,
    pub k: usize,
    pub h: i32,
}

impl SlabGeometry {
    fn in_slab(&self, d: usize, v: &Vertex) -> bool {
        v.x[self.k..d].iter().all(|c| c.abs() <= self.h) && v.x[d..].iter().all(|c| *c == 0)
    }

    fn on_axis(&self, v: &Vertex) -> bool {
        v.x[self.k..].iter().all(|c| *c == 0)
    }

    /// Number of lattice neighbours of a page-i vertex lying in N_i.
    fn slab_neighbours(&self, d: usize, v: &Vertex) -> usize {
        (0..d)
            .flat_map(|a| [v.shifted(a, 1), v.shifted(a, -1)])
            .filter(|w| self.in_slab(d, w))
            .count()
    }

    fn in_margin(&self, d: usize, v: &Vertex) -> bool {
        !self.in_slab(d, v) && v.x[d..].iter().all(|c| *c == 0) && self.slab_neighbours(d, v) > 0
    }

    /// Page i as a lattice region with its own lazy SRW.
    pub fn page(&self, i: usize) -> LatticeRegion {
        let d = self.dims[i - 1];
        let (k, h) = (self.k, self.h);
        LatticeRegion::new(d, &format!("Z{d}-slab"), move |x| x[k..d].iter().any(|c| c.abs() > h))
    }

    /// Spine id of a page-i lattice point lying in N_i or on the margin.
    fn spine_id(&self, i: usize, v: &Vertex) -> Vertex {
        if self.on_axis(v) {
            v.with_tag(0)
        } else {
            v.with_tag(SPINE_TAG_BASE + i as u16)
        }
    }

    /// Page index and page-local point of a spine id.
    fn locate(&self, s: &Vertex) -> Option<(Option<usize>, Vertex)> {
        if s.tag == 0 {
            return self.on_axis(s).then_some((None, *s));
        }
        let i = s.tag.checked_sub(SPINE_TAG_BASE)? as usize;
        if i == 0 || i > self.dims.len() {
            return None;
        }
        let d = self.dims[i - 1];
        let v = s.with_tag(0);
        (!self.on_axis(&v) && (self.in_slab(d, &v) || self.in_margin(d, &v))).then_some((Some(i), v))
    }
}

/// The spine graph of the slab construction.
pub struct SlabSpine(pub Arc<SlabGeometry>);

impl Graph for SlabSpine {
    fn contains(&self, s: &Vertex) -> bool {
        self.0.locate(s).is_some()
    }

    fn weight(&self, s: &Vertex) -> f64 {
        let g = &self.0;
        match g.locate(s) {
            None => 0.0,
            Some((None, _)) => g.dims.iter().map(|d| 4.0 * *d as f64).sum(),
            Some((Some(i), v)) => {
                let d = g.dims[i - 1];
                if g.in_slab(d, &v) {
                    4.0 * d as f64
                } else {
                    2.0 * g.slab_neighbours(d, &v) as f64
                }
            }
        }
    }

    fn neighbors(&self, s: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        let g = &self.0;
        match g.locate(s) {
            None => {}
            Some((None, v)) => {
                let l = g.dims.len() as f64;
                for a in 0..g.k {
                    out.push((v.shifted(a, 1), l));
                    out.push((v.shifted(a, -1), l));
                }
                for (i, d) in g.dims.iter().enumerate() {
                    for a in g.k..*d {
                        for step in [1, -1] {
                            let w = v.shifted(a, step);
                            out.push((g.spine_id(i + 1, &w), 1.0));
                        }
                    }
                }
            }
            Some((Some(i), v)) => {
                let d = g.dims[i - 1];
                let from_slab = g.in_slab(d, &v);
                for a in 0..d {
                    for step in [1, -1] {
                        let w = v.shifted(a, step);
                        if g.in_slab(d, &w) || (from_slab && g.in_margin(d, &w)) {
                            out.push((g.spine_id(i, &w), 1.0));
                        }
                    }
                }
            }
        }
    }

    fn label(&self) -> String {
        format!("slab(h={})", self.0.h)
    }
}

/// Margin of page i ↔ its spine copy.
pub struct SlabIdent {
    pub geom: Arc<SlabGeometry>,
    pub page: usize,
}

impl Identification for SlabIdent {
    fn to_spine(&self, v: &Vertex) -> Option<Vertex> {
        let d = self.geom.dims[self.page - 1];
        (v.tag == 0 && self.geom.in_margin(d, v)).then(|| v.with_tag(SPINE_TAG_BASE + self.page as u16))
    }

    fn from_spine(&self, s: &Vertex) -> Option<Vertex> {
        if s.tag != SPINE_TAG_BASE + self.page as u16 {
            return None;
        }
        let d = self.geom.dims[self.page - 1];
        let v = s.with_tag(0);
        self.geom.in_margin(d, &v).then_some(v)
    }
}
