//! Gluing and cutting constructions, spine-width predicates and the example gallery.

mod cut;
mod gallery;
mod glue;
mod slab;
mod width;

pub use cut::{cut, CutConditions, CutResult, Reweight};
pub use gallery::{distance_to_parabola, gallery, gallery_names, inside_parabola, GalleryGraph, GalleryParams, GALLERY};
pub use glue::{
    alpha_connectivity, glue, is_spine_tag, CoordIdent, GlueReport, GluedGraph, GluingSpec, Identification, Page,
    TableIdent, SPINE_TAG_BASE,
};
pub use slab::{SlabGeometry, SlabIdent, SlabSpine};
pub use width::{
    augmented_page, is_book_like, is_fixed_width, nearest_page_point, page_distance, page_subgraph, spine_width,
    Certificate, WidthReport,
};
