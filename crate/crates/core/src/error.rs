use thiserror::Error;

use crate::vertex::Vertex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight invariant violated at {vertex}: {detail}")]
    Weights { vertex: Vertex, detail: String },

    #[error("subgraph is empty")]
    EmptySubgraph,

    #[error("vertex {0} is not in the graph")]
    NotInGraph(Vertex),

    #[error("window of radius {radius} needs more than {cap} states; largest feasible radius is {feasible}")]
    Budget { radius: u32, cap: usize, feasible: u32 },

    #[error("source {0} is not fixed by the symmetry (orbit size > 1)")]
    SourceNotFixed(Vertex),

    #[error("gluing: {0}")]
    Gluing(String),

    #[error("cutting: {0}")]
    Cutting(String),

    #[error("iteration cap {cap} reached with residual {residual:e}")]
    NoConvergence { cap: usize, residual: f64 },

    #[error("empty minimization set for ball centred at {center} radius {radius}")]
    EmptyMinimization { center: Vertex, radius: u32 },

    #[error("missing Faber-Krahn fit for page {0}")]
    MissingFit(usize),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("too few admissible points: {got} < {need}")]
    TooFewPoints { got: usize, need: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
