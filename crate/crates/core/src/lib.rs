//! Heat kernels, Faber-Krahn profiles and potential theory on graphs glued from pages
//! along a spine.

pub mod constructions;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod heat;
pub mod lab;
pub mod potential;
pub mod spectral;
pub mod symmetry;
pub mod vertex;

pub use error::{Error, Result};
pub use vertex::Vertex;
