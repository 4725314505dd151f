use serde::Serialize;

use super::eigen::{lambda1, lambda1_dense};
use super::enumerate::{connected_subsets, LocalGraph, DEFAULT_SUBSET_CAP};
use crate::error::{Error, Result};
use crate::graph::{ball, ball_with_dist, volume, Graph};
use crate::vertex::Vertex;

/// Below this size λ₁ is computed by a dense eigensolve.
pub const DENSE_LIMIT: usize = 64;

/// λ₁ of a small set, dense below [`DENSE_LIMIT`] vertices.
pub fn lambda1_small<G: Graph + ?Sized>(g: &G, omega: &[Vertex]) -> Result<f64> {
    if omega.len() <= DENSE_LIMIT {
        lambda1_dense(g, omega)
    } else {
        Ok(lambda1(g, omega)?.value)
    }
}

/// A connected Ω ⊆ B with its mass and first Dirichlet eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub size: usize,
    pub mass: f64,
    pub lambda1: f64,
}

/// All connected Ω ⊆ B(z, r) with |Ω| ≤ s_max.
pub fn enumerate_witnesses<G: Graph + ?Sized>(
    g: &G,
    z: &Vertex,
    r: u32,
    s_max: usize,
    cap: usize,
) -> Result<(Vec<Witness>, bool)> {
    let b = ball(g, z, r);
    let lg = LocalGraph::induced(g, &b);
    let mut out = Vec::new();
    let mut err = None;
    let mut buf = Vec::with_capacity(s_max);
    let (_, complete) = connected_subsets(&lg, s_max, cap, |sub| {
        if err.is_some() {
            return;
        }
        buf.clear();
        buf.extend(sub.iter().map(|i| lg.verts[*i as usize]));
        let mass = buf.iter().map(|v| g.weight(v)).sum();
        match lambda1_small(g, &buf) {
            Ok(l) => out.push(Witness { size: buf.len(), mass, lambda1: l }),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok((out, complete)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FkSample {
    pub nu: f64,
    /// inf λ₁ over the candidate Ω with π(Ω) ≤ ν.
    pub value: f64,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FkProfile {
    pub center: Vertex,
    pub radius: u32,
    pub samples: Vec<FkSample>,
}

/// Empirical relative FK profile of B(z, r): exhaustive over connected Ω up to `s_max`
/// vertices, then balls B(z, ρ) ∩ B as non-exhaustive candidates.
pub fn fk_profile<G: Graph + ?Sized>(g: &G, z: &Vertex, r: u32, s_max: usize) -> Result<FkProfile> {
    let (mut ws, complete) = enumerate_witnesses(g, z, r, s_max, DEFAULT_SUBSET_CAP)?;
    let b = ball_with_dist(g, z, r);
    let pi_min = b.iter().map(|(v, _)| g.weight(v)).fold(f64::INFINITY, f64::min);
    let exhaustive_mass = if complete { pi_min * (s_max + 1) as f64 } else { 0.0 };
    let mut extra = Vec::new();
    for rho in 0..=r {
        let set: Vec<Vertex> = b.iter().filter(|e| e.1 <= rho).map(|e| e.0).collect();
        if set.len() > s_max {
            let mass = set.iter().map(|v| g.weight(v)).sum();
            extra.push(Witness { size: set.len(), mass, lambda1: lambda1_small(g, &set)? });
        }
    }
    ws.extend(extra);
    ws.sort_by(|a, b| a.mass.total_cmp(&b.mass));
    let mut samples: Vec<FkSample> = Vec::new();
    let mut best = f64::INFINITY;
    for w in &ws {
        best = best.min(w.lambda1);
        let exhaustive = w.mass < exhaustive_mass;
        match samples.last_mut() {
            Some(s) if s.nu == w.mass => s.value = best,
            _ => samples.push(FkSample { nu: w.mass, value: best, exhaustive }),
        }
    }
    Ok(FkProfile { center: *z, radius: r, samples })
}

/// Λ(B(z, r), ν) = (a/r²)(V(z, r)/ν)^α.
#[derive(Clone, Copy, Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct HarnackFkFit {
    pub a: f64,
    pub alpha: f64,
    /// Mean of ln(λ₁/Λ) over the fit witnesses.
    pub residual: f64,
    pub witnesses: usize,
}

impl HarnackFkFit {
    pub fn eval(&self, r: f64, vol: f64, nu: f64) -> f64 {
        self.a / (r * r) * (vol / nu).powf(self.alpha)
    }
}

pub fn alpha_grid() -> Vec<f64> {
    (1..=40).map(|k| 0.05 * k as f64).collect()
}

/// One ball's fit data: (r, V(z, r), witnesses).
pub struct FitBall {
    pub r: u32,
    pub volume: f64,
    pub witnesses: Vec<Witness>,
}

pub fn fit_ball<G: Graph + ?Sized>(g: &G, z: &Vertex, r: u32, s_max: usize) -> Result<FitBall> {
    let (witnesses, _) = enumerate_witnesses(g, z, r, s_max, DEFAULT_SUBSET_CAP)?;
    Ok(FitBall { r, volume: volume(g, z, r), witnesses })
}

/// The largest admissible a at a fixed α, with its mean log-slack; None if no a > 0 works.
pub fn fit_at_alpha(balls: &[FitBall], alpha: f64) -> Option<HarnackFkFit> {
    let total: usize = balls.iter().map(|b| b.witnesses.len()).sum();
    let mut a = f64::INFINITY;
    for b in balls {
        let rr = (b.r as f64).powi(2);
        for w in &b.witnesses {
            a = a.min(w.lambda1 * rr * (w.mass / b.volume).powf(alpha));
        }
    }
    if !(a > 0.0 && a.is_finite()) {
        return None;
    }
    let fit = HarnackFkFit { a, alpha, residual: 0.0, witnesses: total };
    let mut slack = 0.0;
    for b in balls {
        for w in &b.witnesses {
            slack += (w.lambda1 / fit.eval(b.r as f64, b.volume, w.mass)).ln();
        }
    }
    Some(HarnackFkFit { residual: slack / total as f64, ..fit })
}

/// For each α on the grid the largest admissible a, then the α with the least mean
/// log-slack.
pub fn fit_harnack_fk_balls(balls: &[FitBall]) -> Result<HarnackFkFit> {
    if balls.iter().all(|b| b.witnesses.is_empty()) {
        return Err(Error::TooFewPoints { got: 0, need: 1 });
    }
    let mut best: Option<HarnackFkFit> = None;
    for fit in alpha_grid().into_iter().filter_map(|alpha| fit_at_alpha(balls, alpha)) {
        if best.is_none_or(|b| fit.residual < b.residual) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| Error::Param("no admissible (a, α) on the grid".into()))
}

pub fn fit_harnack_fk<G: Graph + ?Sized>(g: &G, balls: &[(Vertex, u32)], s_max: usize) -> Result<HarnackFkFit> {
    let data: Vec<FitBall> = balls.iter().map(|(z, r)| fit_ball(g, z, *r, s_max)).collect::<Result<_>>()?;
    fit_harnack_fk_balls(&data)
}
