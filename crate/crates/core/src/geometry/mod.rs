//! Doubling, Poincaré, (inner) uniformity and quasi-isometry diagnostics.

mod quasi;
mod uniform;

pub use quasi::{check_quasi_isometry, fk_transfer_check, QiFkConstants, QiReport, QiWindow, QuasiIsometryMap, TransferCheck};
pub use uniform::{check_uniform, verify_witness, UniformBudget, UniformMode, UniformStatus, UniformityResult, UniformityWitness};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ball, volume, Graph};
use crate::spectral::{lambda_nz, lambda_nz_dense};
use crate::vertex::Vertex;

/// V(x, 2r)/V(x, r) for each radius; radii must be ≥ 1.
pub fn doubling_profile<G: Graph + ?Sized>(g: &G, center: &Vertex, radii: &[u32]) -> Result<Vec<f64>> {
    if !g.contains(center) {
        return Err(Error::NotInGraph(*center));
    }
    radii
        .iter()
        .map(|&r| {
            if r == 0 {
                return Err(Error::Param("doubling ratios need r ≥ 1".into()));
            }
            Ok(volume(g, center, 2 * r) / volume(g, center, r))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareEstimate {
    pub center: Vertex,
    pub r: u32,
    pub size: usize,
    pub lambda_nz: f64,
    /// Best constant with κ = 1.
    pub c_p: f64,
    pub residual: f64,
}

/// Residual bound on the λ_NZ eigenpair.
pub const POINCARE_TOL: f64 = 1e-8;

/// Optimal C_p on B(x, r): Σ|f − f_B|²π ≤ C_p r² Σ_{y,z}|f(y) − f(z)|²μ_yz.
///
/// The right side runs over ordered pairs, twice the Dirichlet form, so C_p = 1/(2r²λ_NZ).
pub fn poincare_constant<G: Graph + ?Sized>(g: &G, center: &Vertex, r: u32) -> Result<PoincareEstimate> {
    let b = ball(g, center, r);
    if b.is_empty() {
        return Err(Error::NotInGraph(*center));
    }
    if b.len() == 1 {
        return Ok(PoincareEstimate { center: *center, r, size: 1, lambda_nz: 0.0, c_p: 0.0, residual: 0.0 });
    }
    let (lam, residual) = if b.len() <= 3 {
        (lambda_nz_dense(g, &b)?, 0.0)
    } else {
        let e = lambda_nz(g, &b, POINCARE_TOL)?;
        (e.value, e.residual)
    };
    let rr = (r.max(1) as f64).powi(2);
    Ok(PoincareEstimate { center: *center, r, size: b.len(), lambda_nz: lam, c_p: 1.0 / (2.0 * rr * lam), residual })
}

#[cfg(test)]
mod tests;
