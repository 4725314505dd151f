use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::glue::{glue, CoordIdent, GluedGraph, GluingSpec, Page};
use super::slab::{SlabGeometry, SlabIdent, SlabSpine};
use crate::error::{Error, Result};
use crate::graph::{EdgelessSet, FiniteGraph, Graph, GraphRef, Lattice, LatticeRegion};
use crate::symmetry::{Block, BlockSymmetry, Symmetry, Trivial};
use crate::vertex::Vertex;

/// Parameters accepted by the gallery constructors; unused fields are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalleryParams {
    /// Page dimensions.
    pub dims: Option<Vec<usize>>,
    /// Spine dimension for lattice-axis gluings.
    pub k: Option<usize>,
    /// Parabola exponent as a reduced fraction p/q in (0, 1).
    pub alpha: Option<(u32, u32)>,
    /// Parabola gluing mode: "interior" or "curve".
    pub mode: Option<String>,
    /// Number of spine vertices for the finite gluing set.
    pub size: Option<usize>,
    /// Slab half-thickness h.
    pub slab: Option<u32>,
}

/// A named example with the metadata the analyses need.
#[derive(Clone)]
pub struct GalleryGraph {
    pub name: String,
    pub params: GalleryParams,
    pub graph: Arc<GluedGraph>,
    pub symmetry: Arc<dyn Symmetry>,
    /// Default base point on the spine.
    pub base: Vertex,
    /// Analytic certificate: every spine vertex lies in every page.
    pub book_like: bool,
    pub fixed_width: bool,
    /// Volume growth exponent of each page.
    pub page_dims: Vec<usize>,
    pub warnings: Vec<String>,
}

impl GalleryGraph {
    pub fn graph_ref(&self) -> GraphRef {
        self.graph.clone()
    }

    pub fn d_min(&self) -> usize {
        self.page_dims.iter().copied().min().unwrap_or(0)
    }

    /// A stable identifier for caches and manifests.
    pub fn id(&self) -> String {
        format!("{}{}", self.name, serde_json::to_string(&self.params).unwrap_or_default())
    }
}

pub const GALLERY: &[(&str, &str)] = &[
    ("lattice", "Z^d alone (dims=[d])"),
    ("half-planes", "upper and lower half-planes glued along an edgeless Z"),
    ("lattice-axis", "Z^D1 # ... # Z^Dl glued along shared Z^k axes (dims, k)"),
    ("lattice-slab", "lattice-axis gluing re-cut along a slab spine of half-thickness h (dims, k, slab)"),
    ("point", "lattices glued at their origins (dims)"),
    ("z3-z3", "two copies of Z^3 glued at the origin"),
    ("finite-set", "lattices glued along a lazy path of `size` spine vertices (dims, size)"),
    ("cross", "Z^4 and Z^6 glued to a central Z^5 along its x1 and x2 axes (dims)"),
    ("parabola", "two lattices glued along the planar parabola |x2| <= x1^alpha (dims, alpha, mode)"),
    ("z3-tail", "Z^3 with a half-line tail at the origin"),
    ("z3-z2", "Z^3 and Z^2 glued at the origin"),
];

pub fn gallery_names() -> impl Iterator<Item = &'static str> {
    GALLERY.iter().map(|e| e.0)
}

fn lattice_page(i: usize, d: usize, ident: CoordIdent) -> Page {
    Page::new(&format!("Z{d}#{i}"), Arc::new(Lattice::new(d)), Arc::new(ident))
}

fn spec(name: &str, pages: Vec<Page>, spine: GraphRef) -> GluingSpec {
    GluingSpec { name: name.to_string(), pages, spine, c_compat: 0.05, big_c_compat: 20.0 }
}

/// Lattice pages glued along shared Z^k axes; k = 0 glues at the origin.
fn lattice_axis(name: &str, dims: &[usize], k: usize) -> Result<(GluingSpec, BlockSymmetry)> {
    if dims.is_empty() || dims.iter().any(|d| *d <= k || *d > crate::vertex::MAX_DIM) {
        return Err(Error::Param(format!("page dimensions {dims:?} must exceed k = {k} and be at most 6")));
    }
    let spine: GraphRef = Arc::new(EdgelessSet::axes(k));
    let pages = dims.iter().enumerate().map(|(i, d)| lattice_page(i + 1, *d, CoordIdent::axes(k, spine.clone()))).collect();
    let mut sym = BlockSymmetry::new().tag(0, vec![Block::signed(0..k)]);
    for (i, d) in dims.iter().enumerate() {
        sym = sym.tag(i as u16 + 1, vec![Block::signed(0..k), Block::signed(k..*d)]);
    }
    let mut seen: Vec<usize> = Vec::new();
    for d in dims {
        if seen.contains(d) {
            continue;
        }
        seen.push(*d);
        let tags: Vec<u16> = dims.iter().enumerate().filter(|e| e.1 == d).map(|e| e.0 as u16 + 1).collect();
        if tags.len() > 1 {
            sym = sym.interchangeable(&tags);
        }
    }
    Ok((spec(name, pages, spine), sym))
}

fn finish(
    name: &str,
    params: &GalleryParams,
    spec: GluingSpec,
    symmetry: Arc<dyn Symmetry>,
    page_dims: Vec<usize>,
    book_like: bool,
    warnings: Vec<String>,
) -> Result<GalleryGraph> {
    let base = Vertex::ORIGIN;
    let graph = glue(&spec, &base, 3)?;
    Ok(GalleryGraph {
        name: name.to_string(),
        params: params.clone(),
        graph: Arc::new(graph),
        symmetry,
        base,
        book_like,
        fixed_width: true,
        page_dims,
        warnings,
    })
}

fn transience_warning(dims: &[usize], k: usize) -> Vec<String> {
    let dmin = dims.iter().copied().min().unwrap_or(0);
    if dmin < k + 3 {
        vec![format!("min D_i - k = {} < 3: pages are not uniformly S-transient", dmin as i64 - k as i64)]
    } else {
        Vec::new()
    }
}

/// |x2|^q ≤ x1^p in exact integer arithmetic (x1 ≥ 0).
pub fn inside_parabola(x1: i32, x2: i32, p: u32, q: u32) -> bool {
    if x1 < 0 {
        return false;
    }
    let lhs = (x2.unsigned_abs() as u128).checked_pow(q);
    let rhs = (x1 as u128).checked_pow(p);
    match (lhs, rhs) {
        (Some(l), Some(r)) => l <= r,
        _ => (x2.unsigned_abs() as f64).powi(q as i32) <= (x1 as f64).powi(p as i32),
    }
}

/// Euclidean distance from (x1, x2) to the curve x2 = ±x1^α, x1 ≥ 0.
pub fn distance_to_parabola(x1: f64, x2: f64, alpha: f64) -> f64 {
    let y = x2.abs();
    let f = |t: f64| ((x1 - t).powi(2) + (y - t.powf(alpha)).powi(2)).sqrt();
    let hi = x1.max(0.0) + y.powf(1.0 / alpha) + 2.0;
    let steps = 2000;
    let mut best_t = 0.0;
    let mut best = f(0.0);
    for s in 1..=steps {
        let t = hi * s as f64 / steps as f64;
        let v = f(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut a, mut b) = ((best_t - hi / steps as f64).max(0.0), best_t + hi / steps as f64);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    best.min(f(0.5 * (a + b)))
}

/// Builds a gallery example by name.
pub fn gallery(name: &str, params: &GalleryParams) -> Result<GalleryGraph> {
    let dims_or = |d: &[usize]| params.dims.clone().unwrap_or_else(|| d.to_vec());
    match name {
        "lattice" => {
            let dims = dims_or(&[2]);
            let (s, sym) = lattice_axis("lattice", &dims[..1], 0)?;
            finish(name, params, s, Arc::new(sym), dims[..1].to_vec(), true, vec![])
        }
        "half-planes" => {
            let spine: GraphRef = Arc::new(EdgelessSet::axes(1));
            let pages = vec![
                Page::new("H+", Arc::new(LatticeRegion::half_plane(true)), Arc::new(CoordIdent::axes(1, spine.clone()))),
                Page::new("H-", Arc::new(LatticeRegion::half_plane(false)), Arc::new(CoordIdent::axes(1, spine.clone()))),
            ];
            let sym = BlockSymmetry::new()
                .tag(0, vec![Block::signed([0])])
                .tag(1, vec![Block::signed([0])])
                .tag(2, vec![Block::signed([0])]);
            finish(name, params, spec("half-planes", pages, spine), Arc::new(sym), vec![2, 2], true, vec![])
        }
        "lattice-axis" => {
            let dims = dims_or(&[4, 5]);
            let k = params.k.unwrap_or(1);
            let (s, sym) = lattice_axis("lattice-axis", &dims, k)?;
            finish(name, params, s, Arc::new(sym), dims.clone(), true, transience_warning(&dims, k))
        }
        "point" | "z3-z3" => {
            let dims = if name == "z3-z3" { vec![3, 3] } else { dims_or(&[3, 3]) };
            let (s, sym) = lattice_axis(name, &dims, 0)?;
            finish(name, params, s, Arc::new(sym), dims.clone(), true, transience_warning(&dims, 0))
        }
        "finite-set" => {
            let dims = dims_or(&[3, 3]);
            let size = params.size.unwrap_or(3).max(1);
            let path = Arc::new(FiniteGraph::lazy_path(size));
            let spine: GraphRef = path.clone();
            let pages = dims
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let sp = spine.clone();
                    lattice_page(i + 1, *d, CoordIdent::new(vec![(0, 0)], move |s| sp.contains(s)))
                })
                .collect();
            let mut sym = BlockSymmetry::new();
            for (i, d) in dims.iter().enumerate() {
                sym = sym.tag(i as u16 + 1, vec![Block::signed(1..*d)]);
            }
            let mut s = spec("finite-set", pages, spine);
            s.c_compat = 1.0;
            s.big_c_compat = 4.0 * 6.0;
            finish(name, params, s, Arc::new(sym), dims.clone(), true, vec![])
        }
        "cross" => {
            let dims = dims_or(&[4, 5, 6]);
            if dims.len() != 3 || dims[1] < 3 || dims[0] < 2 || dims[2] < 2 {
                return Err(Error::Param("cross needs three page dimensions with a central page of dimension ≥ 3".into()));
            }
            let member = |s: &Vertex| s.x[2..].iter().all(|c| *c == 0) && (s.x[0] == 0 || s.x[1] == 0);
            let spine: GraphRef = Arc::new(EdgelessSet::new("cross", move |x| {
                x[2..].iter().all(|c| *c == 0) && (x[0] == 0 || x[1] == 0)
            }));
            let pages = vec![
                lattice_page(1, dims[0], CoordIdent::new(vec![(0, 0)], member)),
                lattice_page(2, dims[1], CoordIdent::new(vec![(0, 0), (1, 1)], member)),
                lattice_page(3, dims[2], CoordIdent::new(vec![(1, 1)], member)),
            ];
            let sym = BlockSymmetry::new()
                .tag(1, vec![Block::signed(1..dims[0])])
                .tag(2, vec![Block::signed(2..dims[1])])
                .tag(3, vec![Block::signed((0..dims[2]).filter(|c| *c != 1))]);
            let book = dims.iter().all(|d| *d == dims[0]);
            let mut gg = finish(name, params, spec("cross", pages, spine), Arc::new(sym), dims.clone(), false, vec![])?;
            gg.book_like = false;
            gg.warnings = if book { vec!["equal page volumes: spine bounds apply though not book-like".into()] } else { vec![] };
            Ok(gg)
        }
        "parabola" => {
            let dims = dims_or(&[5, 6]);
            let (p, q) = params.alpha.unwrap_or((1, 2));
            if dims.len() != 2 || p == 0 || p >= q {
                return Err(Error::Param("parabola needs two page dimensions and alpha = p/q in (0,1)".into()));
            }
            let mode = params.mode.clone().unwrap_or_else(|| "interior".into());
            let planar = |x: &[i32]| x[2..].iter().all(|c| *c == 0);
            let spine: GraphRef = match mode.as_str() {
                "interior" => Arc::new(EdgelessSet::new("parabola", move |x| planar(x) && inside_parabola(x[0], x[1], p, q))),
                "curve" => {
                    let rho = (*dims.iter().min().unwrap() as f64).sqrt();
                    let a = p as f64 / q as f64;
                    Arc::new(EdgelessSet::new("parabola-net", move |x| {
                        planar(x) && distance_to_parabola(x[0] as f64, x[1] as f64, a) <= rho
                    }))
                }
                m => return Err(Error::Param(format!("unknown parabola mode {m:?}"))),
            };
            let pages = dims
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let sp = spine.clone();
                    lattice_page(i + 1, *d, CoordIdent::new(vec![(0, 0), (1, 1)], move |s| sp.contains(s)))
                })
                .collect();
            let mut sym = BlockSymmetry::new().tag(0, vec![Block::signed([1])]);
            for (i, d) in dims.iter().enumerate() {
                sym = sym.tag(i as u16 + 1, vec![Block::signed([1]), Block::signed(2..*d)]);
            }
            let warn = if dims.iter().min() == Some(&4) {
                vec!["Z^4 page is S-transient but not uniformly so along the parabola".into()]
            } else {
                vec![]
            };
            finish(name, params, spec("parabola", pages, spine), Arc::new(sym), dims.clone(), true, warn)
        }
        "z3-tail" => {
            let spine: GraphRef = Arc::new(EdgelessSet::point());
            let pages = vec![
                lattice_page(1, 3, CoordIdent::axes(0, spine.clone())),
                Page::new("Z>=0", Arc::new(LatticeRegion::half_line()), Arc::new(CoordIdent::axes(0, spine.clone()))),
            ];
            let sym = BlockSymmetry::new().tag(1, vec![Block::signed(0..3)]);
            let warn = vec!["the half-line page is recurrent: not S-transient".to_string()];
            finish(name, params, spec("z3-tail", pages, spine), Arc::new(sym), vec![3, 1], true, warn)
        }
        "z3-z2" => {
            let spine: GraphRef = Arc::new(EdgelessSet::point());
            let pages = vec![
                lattice_page(1, 3, CoordIdent::axes(0, spine.clone())),
                lattice_page(2, 2, CoordIdent::axes(0, spine.clone())),
            ];
            let sym = BlockSymmetry::new().tag(1, vec![Block::signed(0..3)]).tag(2, vec![Block::signed(0..2)]);
            let warn = vec!["the Z^2 page is recurrent: not S-transient".to_string()];
            finish(name, params, spec("z3-z2", pages, spine), Arc::new(sym), vec![3, 2], true, warn)
        }
        "lattice-slab" => {
            let dims = dims_or(&[4, 4]);
            let k = params.k.unwrap_or(1);
            let h = params.slab.unwrap_or(1) as i32;
            if dims.iter().any(|d| *d < k + 2) || h < 1 {
                return Err(Error::Param("slab needs D_i ≥ k + 2 and h ≥ 1".into()));
            }
            let geom = Arc::new(SlabGeometry { dims: dims.clone(), k, h });
            let spine: GraphRef = Arc::new(SlabSpine(geom.clone()));
            let pages = (1..=dims.len())
                .map(|i| {
                    Page::new(
                        &format!("Z{}-slab#{i}", dims[i - 1]),
                        Arc::new(geom.page(i)),
                        Arc::new(SlabIdent { geom: geom.clone(), page: i }),
                    )
                })
                .collect();
            let mut s = spec("lattice-slab", pages, spine);
            s.c_compat = 0.0;
            s.big_c_compat = f64::INFINITY;
            let warn = transience_warning(&dims, k);
            finish(name, params, s, Arc::new(Trivial), dims.clone(), true, warn)
        }
        other => Err(Error::Param(format!(
            "unknown gallery graph {other:?}; known: {}",
            gallery_names().collect::<Vec<_>>().join(", ")
        ))),
    }
}
