//! Hitting probabilities, Green functions, harmonic profiles and Doob h-transforms.

mod green;
mod harmonic;
mod hitting;
mod lattice;
mod montecarlo;
mod solve;

use std::sync::Arc;

use serde::Serialize;

pub use green::{dirichlet_green, green, DirichletGreen, GreenBracket, GreenScheme};
pub use harmonic::{
    build_h_z3_tail, build_h_z3_z2, check_h_identity, h_transform, potential_kernel_partial_sums, richardson, HTransform,
    HarmonicProfile, IdentitySample, PotentialKernel,
};
pub use hitting::{hitting_prob, hitting_sweep, s_transience_diagnose, HittingSolution, TransienceDiagnosis, Verdict};
pub use lattice::{return_bound, return_tail, transverse, LatticeGreen};
pub use montecarlo::{mc_hitting, McEstimate};
pub use solve::DENSE_ORACLE_LIMIT;

use crate::error::Result;
use crate::graph::{DirichletKernel, MarkovKernel, Subgraph};
use crate::heat::{series, Bracket, Exec};
use crate::symmetry::Symmetry;
use crate::vertex::Vertex;

/// ψ ≡ 1 outside the window: the bound that needs no information.
pub fn trivial_outer(_: &Vertex) -> f64 {
    1.0
}

/// p_D(n,x,x) and p_N(n,x,x) on a subgraph, with the bracket on their ratio.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSample {
    pub n: u32,
    pub dirichlet: Bracket,
    pub neumann: Bracket,
    pub ratio: Bracket,
}

/// The on-diagonal Dirichlet/Neumann ratio at x for every n in `times`.
pub fn dirichlet_neumann_ratio(
    sub: &Subgraph,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    times: &[u32],
    radius: u32,
) -> Result<Vec<RatioSample>> {
    let d = series(&DirichletKernel::new(sub.clone()), sym.clone(), x, x, times, radius, Exec::default())?;
    let n = series(&MarkovKernel::neumann(sub.clone()), sym, x, x, times, radius, Exec::default())?;
    Ok(d.iter()
        .zip(&n)
        .map(|(d, n)| RatioSample {
            n: d.n,
            dirichlet: d.bracket,
            neumann: n.bracket,
            ratio: Bracket::new(d.bracket.lower / n.bracket.upper, d.bracket.upper / n.bracket.lower),
        })
        .collect())
}

#[cfg(test)]
mod tests;
