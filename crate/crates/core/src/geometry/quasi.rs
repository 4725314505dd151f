use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ball, ball_with_dist, volume, Graph, GraphRef};
use crate::spectral::{enumerate_witnesses, HarnackFkFit, DEFAULT_SUBSET_CAP};
use crate::vertex::Vertex;

type VertexMap = Arc<dyn Fn(&Vertex) -> Vertex + Send + Sync>;

/// Φ: Γ₁ → Γ₂ with a chosen inverse Φ⁻¹: Γ₂ → Γ₁.
#[derive(Clone)]
pub struct QuasiIsometryMap {
    pub g1: GraphRef,
    pub g2: GraphRef,
    pub phi: VertexMap,
    pub inv: VertexMap,
}

impl QuasiIsometryMap {
    pub fn new(
        g1: GraphRef,
        g2: GraphRef,
        phi: impl Fn(&Vertex) -> Vertex + Send + Sync + 'static,
        inv: impl Fn(&Vertex) -> Vertex + Send + Sync + 'static,
    ) -> Self {
        QuasiIsometryMap { g1, g2, phi: Arc::new(phi), inv: Arc::new(inv) }
    }
}

/// Finite portions of both graphs on which the definition is checked.
#[derive(Clone, Debug, Serialize)]
pub struct QiWindow {
    pub center1: Vertex,
    pub radius1: u32,
    pub center2: Vertex,
    pub radius2: u32,
    /// Distances in Γ₂ are searched up to this radius.
    pub cap: u32,
}

/// Smallest constants witnessed on the window.
#[derive(Clone, Debug, Serialize)]
pub struct QiReport {
    pub a: f64,
    pub b: f64,
    pub eps: u32,
    pub c_q: f64,
    pub pairs: usize,
}

/// Witnesses the three quasi-isometry conditions on the window.
///
/// a = max d₂/d₁, b = max(d₁/a − d₂)⁺, ε = max d₂(z, Φ(Φ⁻¹(z))), C_q = max of the two
/// weight ratios.
pub fn check_quasi_isometry(map: &QuasiIsometryMap, w: &QiWindow) -> Result<QiReport> {
    let pts = ball(&map.g1, &w.center1, w.radius1);
    let images: Vec<Vertex> = pts.iter().map(|x| (map.phi)(x)).collect();
    let mut c_q: f64 = 1.0;
    for (x, fx) in pts.iter().zip(&images) {
        if !map.g2.contains(fx) {
            return Err(Error::Param(format!("Φ({x}) = {fx} is not a vertex of {}", map.g2.label())));
        }
        let ratio = map.g2.weight(fx) / map.g1.weight(x);
        c_q = c_q.max(ratio).max(1.0 / ratio);
    }
    let mut ratios = Vec::new();
    for (i, x) in pts.iter().enumerate() {
        let d1: FxHashMap<Vertex, u32> = ball_with_dist(&map.g1, x, 2 * w.radius1).into_iter().collect();
        let d2: FxHashMap<Vertex, u32> = ball_with_dist(&map.g2, &images[i], w.cap).into_iter().collect();
        for (j, y) in pts.iter().enumerate().skip(i + 1) {
            let a = d1[y];
            let b = *d2.get(&images[j]).ok_or_else(|| {
                Error::Param(format!("d₂(Φ({x}), Φ({y})) exceeds {}", w.cap))
            })?;
            ratios.push((a as f64, b as f64));
        }
    }
    let a = ratios.iter().map(|(d1, d2)| d2 / d1).fold(1.0, f64::max);
    let b = ratios.iter().map(|(d1, d2)| d1 / a - d2).fold(0.0, f64::max);
    let mut eps = 0;
    for z in ball(&map.g2, &w.center2, w.radius2) {
        let back = (map.phi)(&(map.inv)(&z));
        let d = ball_with_dist(&map.g2, &z, w.cap)
            .into_iter()
            .find(|e| e.0 == back)
            .map(|e| e.1)
            .ok_or_else(|| Error::Param(format!("d₂({z}, Φ(Φ⁻¹({z}))) exceeds {}", w.cap)))?;
        eps = eps.max(d);
    }
    Ok(QiReport { a, b, eps, c_q, pairs: ratios.len() })
}

/// Constants of the transferred FK function Λ̂(B̂(z, r), ν) = c₁Λ(B(Φ⁻¹(z), c₂r), c₃ν).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QiFkConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferCheck {
    pub checked: usize,
    pub violations: usize,
    pub min_ratio: f64,
}

/// λ₁(Ω) ≥ Λ̂(B̂, π₂(Ω)) for every connected Ω ⊆ B̂ up to `s_max` vertices, with Λ the
/// fitted Harnack-form FK function of Γ₁.
pub fn fk_transfer_check(
    map: &QuasiIsometryMap,
    fit1: &HarnackFkFit,
    k: &QiFkConstants,
    balls2: &[(Vertex, u32)],
    s_max: usize,
) -> Result<TransferCheck> {
    let mut rep = TransferCheck { checked: 0, violations: 0, min_ratio: f64::INFINITY };
    for (z, r) in balls2 {
        let (ws, _) = enumerate_witnesses(&map.g2, z, *r, s_max, DEFAULT_SUBSET_CAP)?;
        let rho = k.c2 * *r as f64;
        let v1 = volume(&map.g1, &(map.inv)(z), rho.floor() as u32);
        for w in ws {
            let lam = k.c1 * fit1.eval(rho.max(1.0), v1, k.c3 * w.mass);
            let ratio = w.lambda1 / lam;
            rep.checked += 1;
            rep.min_ratio = rep.min_ratio.min(ratio);
            if ratio < 1.0 {
                rep.violations += 1;
            }
        }
    }
    Ok(rep)
}
