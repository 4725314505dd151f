//! V_min, F and the glued relative Faber-Krahn function.

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::enumerate::DEFAULT_SUBSET_CAP;
use super::fk::{enumerate_witnesses, HarnackFkFit};
use crate::constructions::{page_distance, GluedGraph};
use crate::error::{Error, Result};
use crate::graph::{ball_with_dist, volume, Graph};
use crate::vertex::Vertex;

/// The geometry of B(z, r) relative to pages and spine, for every r ≤ r_max.
pub struct BallScan<'g> {
    g: &'g GluedGraph,
    pub center: Vertex,
    pub r_max: u32,
    pub delta: u32,
    dist: Vec<(Vertex, u32)>,
    near_spine: FxHashSet<Vertex>,
    /// Spine vertices within δ of page i, per page.
    spine_near_page: Vec<FxHashSet<Vertex>>,
    vol_cache: FxHashMap<(usize, Vertex, u32), f64>,
}

/// Why an inner minimum was skipped.
#[derive(Clone, Debug, Serialize)]
pub struct SkippedPage {
    pub page: usize,
    pub radius: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct VminValue {
    pub value: f64,
    pub j_b: Vec<usize>,
    /// (page, minimizing page-local y, V_i(y, r)) for each page that contributed.
    pub per_page: Vec<(usize, Vertex, f64)>,
    pub skipped: Vec<SkippedPage>,
}

impl<'g> BallScan<'g> {
    pub fn new(g: &'g GluedGraph, center: &Vertex, r_max: u32, delta: u32) -> Self {
        let dist = ball_with_dist(g, center, r_max + 2 * delta);
        let spine: Vec<Vertex> = dist.iter().filter(|(v, _)| g.in_spine(v)).map(|e| e.0).collect();
        let mut near_spine = FxHashSet::default();
        let mut frontier = spine.clone();
        near_spine.extend(spine.iter().copied());
        let mut nb = Vec::new();
        for _ in 0..delta {
            let mut next = Vec::new();
            for v in &frontier {
                nb.clear();
                g.neighbors(v, &mut nb);
                for (w, _) in &nb {
                    if near_spine.insert(*w) {
                        next.push(*w);
                    }
                }
            }
            frontier = next;
        }
        let spine_near_page = (1..=g.num_pages())
            .map(|i| spine.iter().filter(|s| page_distance(g, s, i, delta).is_some()).copied().collect())
            .collect();
        BallScan { g, center: *center, r_max, delta, dist, near_spine, spine_near_page, vol_cache: FxHashMap::default() }
    }

    fn within(&self, r: u32) -> impl Iterator<Item = &Vertex> {
        self.dist.iter().filter(move |e| e.1 <= r).map(|e| &e.0)
    }

    /// The page containing all of B(z, r), if any.
    pub fn inside_page(&self, r: u32) -> Option<usize> {
        (1..=self.g.num_pages()).find(|i| self.within(r).all(|v| self.g.in_page(*i, v)))
    }

    /// J_B = {i : B ∩ Γ̂_i ≠ ∅}.
    pub fn j_b(&self, r: u32) -> Vec<usize> {
        (1..=self.g.num_pages())
            .filter(|i| {
                self.within(r).any(|v| self.g.in_page(*i, v) || self.spine_near_page[i - 1].contains(v))
            })
            .collect()
    }

    /// [B]_δ ∩ Γ_i ∩ [Γ₀]_δ as page-local vertices.
    pub fn min_set(&self, i: usize, r: u32) -> Vec<Vertex> {
        self.within(r + self.delta)
            .filter(|v| self.near_spine.contains(v))
            .filter_map(|v| self.g.to_page(i, v))
            .collect()
    }

    fn page_volume(&mut self, i: usize, y: &Vertex, rho: u32) -> f64 {
        let g = self.g;
        *self.vol_cache.entry((i, *y, rho)).or_insert_with(|| g.page_volume(i, y, rho))
    }

    /// min over y in the inner set of V_i(y, ρ), with the minimizer.
    pub fn inner_min(&mut self, i: usize, r: u32, rho: u32) -> Option<(Vertex, f64)> {
        let set = self.min_set(i, r);
        let mut best: Option<(Vertex, f64)> = None;
        for y in set {
            let v = self.page_volume(i, &y, rho);
            if best.is_none_or(|b| v < b.1 || (v == b.1 && y < b.0)) {
                best = Some((y, v));
            }
        }
        best
    }

    fn check_r(&self, r: u32) -> Result<()> {
        if r > self.r_max {
            return Err(Error::Param(format!("radius {r} beyond scanned radius {}", self.r_max)));
        }
        Ok(())
    }

    /// V_min(z, r); empty inner minima are skipped and reported.
    pub fn v_min(&mut self, r: u32) -> Result<VminValue> {
        self.check_r(r)?;
        let j_b = self.j_b(r);
        let mut per_page = Vec::new();
        let mut skipped = Vec::new();
        for &i in &j_b {
            match self.inner_min(i, r, r) {
                Some((y, v)) => per_page.push((i, y, v)),
                None => skipped.push(SkippedPage { page: i, radius: r }),
            }
        }
        let value = per_page.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        if per_page.is_empty() {
            return Err(Error::EmptyMinimization { center: self.center, radius: r });
        }
        Ok(VminValue { value, j_b, per_page, skipped })
    }

    /// F(z, r) = V(z, r) when B(z, r) lies in one page, else V_min(z, r).
    pub fn big_f(&mut self, r: u32) -> Result<f64> {
        self.check_r(r)?;
        if self.inside_page(r).is_some() {
            Ok(volume(self.g, &self.center, r))
        } else {
            Ok(self.v_min(r)?.value)
        }
    }
}

pub fn v_min(g: &GluedGraph, z: &Vertex, r: u32, delta: u32) -> Result<f64> {
    Ok(BallScan::new(g, z, r, delta).v_min(r)?.value)
}

pub fn big_f(g: &GluedGraph, z: &Vertex, r: u32, delta: u32) -> Result<f64> {
    BallScan::new(g, z, r, delta).big_f(r)
}

/// Existence constants of the gluing lemma, exposed for calibration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GluedFkConstants {
    pub a1: f64,
    pub a2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Prefactor of the closed form (C/r²)(F/ν)^α.
    pub big_c: f64,
}

impl Default for GluedFkConstants {
    fn default() -> Self {
        GluedFkConstants { a1: 1.0, a2: 1.0, c1: 1.0, c2: 1.0, c3: 1.0, big_c: 1.0 }
    }
}

/// Λ(B(z, r), ν) of the gluing lemma for the scanned ball.
pub fn glued_fk(scan: &mut BallScan, r: u32, nu: f64, fits: &[HarnackFkFit], k: &GluedFkConstants) -> Result<f64> {
    scan.check_r(r)?;
    let g = scan.g;
    if fits.len() != g.num_pages() {
        return Err(Error::MissingFit(fits.len() + 1));
    }
    let rf = r.max(1) as f64;
    if let Some(i) = scan.inside_page(r) {
        let local = g.to_page(i, &scan.center).ok_or(Error::NotInGraph(scan.center))?;
        let v = scan.page_volume(i, &local, r);
        return Ok(k.a1 * fits[i - 1].eval(rf, v, k.a2 * nu));
    }
    let rho = (k.c2 * rf).floor().max(0.0) as u32;
    let mut best = f64::INFINITY;
    for i in scan.j_b(r) {
        if let Some((_, v)) = scan.inner_min(i, r, rho) {
            best = best.min(fits[i - 1].eval((k.c2 * rf).max(1.0), v, k.c3 * nu));
        }
    }
    if best.is_infinite() {
        return Err(Error::EmptyMinimization { center: scan.center, radius: r });
    }
    Ok(k.c1 * best)
}

/// Closed form (C/r²)(F(z, r)/ν)^α with α = min_i α_i.
pub fn closed_form_fk(scan: &mut BallScan, r: u32, nu: f64, fits: &[HarnackFkFit], k: &GluedFkConstants) -> Result<f64> {
    let alpha = fits.iter().map(|f| f.alpha).fold(f64::INFINITY, f64::min);
    let f = scan.big_f(r)?;
    let rf = r.max(1) as f64;
    Ok(k.big_c / (rf * rf) * (f / nu).powf(alpha))
}

#[derive(Clone, Debug, Serialize)]
pub struct FkCheck {
    pub balls: usize,
    pub checked: usize,
    pub violations: usize,
    /// min λ₁(Ω)/Λ(B, π(Ω)) over the sample (lemma form and closed form).
    pub min_ratio: f64,
    pub min_ratio_closed: f64,
    pub first_violation: Option<String>,
}

/// Ratios λ₁(Ω)/Λ for every connected Ω ⊆ B(z, r) with |Ω| ≤ s_max, in both forms.
fn ball_ratios(
    g: &GluedGraph,
    z: &Vertex,
    r: u32,
    delta: u32,
    s_max: usize,
    fits: &[HarnackFkFit],
    k: &GluedFkConstants,
) -> Result<(bool, Vec<(f64, f64, f64)>)> {
    let (ws, _) = enumerate_witnesses(g, z, r, s_max, DEFAULT_SUBSET_CAP)?;
    let mut scan = BallScan::new(g, z, r, delta);
    let inside = scan.inside_page(r).is_some();
    let mut out = Vec::with_capacity(ws.len());
    for w in ws {
        let lam = glued_fk(&mut scan, r, w.mass, fits, k)?;
        let closed = closed_form_fk(&mut scan, r, w.mass, fits, k)?;
        out.push((w.mass, w.lambda1 / lam, w.lambda1 / closed));
    }
    Ok((inside, out))
}

/// Calibrates (a1, c1, C) on training balls with a2 = c2 = c3 = 1: each is `safety`
/// times the smallest ratio λ₁/Λ observed in its branch.
pub fn calibrate(
    g: &GluedGraph,
    fits: &[HarnackFkFit],
    training: &[(Vertex, u32)],
    delta: u32,
    s_max: usize,
    safety: f64,
) -> Result<GluedFkConstants> {
    let unit = GluedFkConstants::default();
    let (mut inside_min, mut spine_min, mut closed_min) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for (z, r) in training {
        let (inside, ratios) = ball_ratios(g, z, *r, delta, s_max, fits, &unit)?;
        for (_, lemma, closed) in ratios {
            if inside {
                inside_min = inside_min.min(lemma);
            } else {
                spine_min = spine_min.min(lemma);
            }
            closed_min = closed_min.min(closed);
        }
    }
    if spine_min.is_infinite() {
        return Err(Error::TooFewPoints { got: 0, need: 1 });
    }
    let c1 = safety * spine_min;
    let a1 = if inside_min.is_finite() { safety * inside_min } else { c1 };
    Ok(GluedFkConstants { a1, c1, big_c: safety * closed_min, ..unit })
}

/// λ₁(Ω) ≥ Λ(B, π(Ω)) for every enumerated Ω in the validation balls, both forms.
pub fn validate_fk(
    g: &GluedGraph,
    fits: &[HarnackFkFit],
    k: &GluedFkConstants,
    balls: &[(Vertex, u32)],
    delta: u32,
    s_max: usize,
) -> Result<FkCheck> {
    let mut rep = FkCheck {
        balls: balls.len(),
        checked: 0,
        violations: 0,
        min_ratio: f64::INFINITY,
        min_ratio_closed: f64::INFINITY,
        first_violation: None,
    };
    for (z, r) in balls {
        let (_, ratios) = ball_ratios(g, z, *r, delta, s_max, fits, k)?;
        for (mass, lemma, closed) in ratios {
            rep.checked += 1;
            rep.min_ratio = rep.min_ratio.min(lemma);
            rep.min_ratio_closed = rep.min_ratio_closed.min(closed);
            if lemma < 1.0 || closed < 1.0 {
                rep.violations += 1;
                if rep.first_violation.is_none() {
                    rep.first_violation =
                        Some(format!("B({z}, {r}), π(Ω) = {mass}: λ₁/Λ = {lemma:.4}, closed form {closed:.4}"));
                }
            }
        }
    }
    Ok(rep)
}
