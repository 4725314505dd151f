//! Smallest envelope constants for two-parameter heat-kernel bound families.
//!
//! For each exponent constant c on a log-spaced grid the prefactor is optimized over the
//! sample; the pair returned is the tightest exponent whose prefactor is within a factor
//! 2 of the best prefactor.

use serde::Serialize;

use super::Bracket;
use crate::constructions::{is_book_like, nearest_page_point, Certificate, GluedGraph};
use crate::error::{Error, Result};
use crate::vertex::Vertex;

/// One measured heat-kernel value.
#[derive(Clone, Debug, Serialize)]
pub struct HeatSample {
    pub n: u32,
    pub x: Vertex,
    pub y: Vertex,
    pub d: u32,
    pub p: Bracket,
}

impl HeatSample {
    fn gauss_arg(&self) -> f64 {
        (self.d as f64).powi(2) / self.n as f64
    }
}

/// Envelope `pre · exp(−d²/(exp · n))` fitted to one side of the sample.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeFit {
    /// (exponent constant, optimal prefactor) along the grid.
    pub curve: Vec<(f64, f64)>,
    pub pre: f64,
    pub exp: f64,
    pub used: usize,
    pub excluded: usize,
}

pub fn c2_grid() -> Vec<f64> {
    (0..=60).map(|i| 0.05 * 10f64.powf(i as f64 * 3.3 / 60.0)).collect()
}

/// Upper envelope: pre(c) = max amp·exp(g/c) over (amp, g).
fn fit_upper(points: &[(f64, f64)], excluded: usize) -> EnvelopeFit {
    let curve: Vec<(f64, f64)> = c2_grid()
        .into_iter()
        .map(|c| (c, points.iter().map(|(a, g)| a * (g / c).exp()).fold(0.0, f64::max)))
        .collect();
    let best = curve.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let (exp, pre) = *curve.iter().find(|e| e.1 <= 2.0 * best).unwrap_or(curve.last().unwrap());
    EnvelopeFit { curve, pre, exp, used: points.len(), excluded }
}

/// Lower envelope: pre(c) = min amp·exp(g/c).
fn fit_lower(points: &[(f64, f64)], excluded: usize) -> EnvelopeFit {
    let curve: Vec<(f64, f64)> = c2_grid()
        .into_iter()
        .map(|c| (c, points.iter().map(|(a, g)| a * (g / c).exp()).fold(f64::INFINITY, f64::min)))
        .collect();
    let best = curve.iter().map(|e| e.1).fold(0.0, f64::max);
    let (exp, pre) = *curve.iter().rev().find(|e| e.1 >= 0.5 * best).unwrap_or(&curve[0]);
    EnvelopeFit { curve, pre, exp, used: points.len(), excluded }
}

/// Two-sided Gaussian envelope normalized by V(x, √n).
#[derive(Clone, Debug, Serialize)]
pub struct GaussianFit {
    pub lower: EnvelopeFit,
    pub upper: EnvelopeFit,
    /// max / min of p·V(x, √n) over on-diagonal samples.
    pub diagonal_spread: f64,
}

/// Fits both sides of the Gaussian bound; samples with n < d or p = 0 are excluded.
pub fn check_gaussian(samples: &[HeatSample], volume: &dyn Fn(&Vertex, f64) -> f64) -> GaussianFit {
    let mut up = Vec::new();
    let mut lo = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut excluded = 0;
    for s in samples {
        if s.n < s.d || s.p.upper <= 0.0 {
            excluded += 1;
            continue;
        }
        let v = volume(&s.x, (s.n as f64).sqrt());
        up.push((s.p.upper * v, s.gauss_arg()));
        lo.push((s.p.lower * v, s.gauss_arg()));
        if s.x == s.y {
            diag.push(s.p.mid() * v);
        }
    }
    let spread = if diag.is_empty() {
        1.0
    } else {
        diag.iter().fold(0.0f64, |a, b| a.max(*b)) / diag.iter().fold(f64::INFINITY, |a, b| a.min(*b))
    };
    GaussianFit { lower: fit_lower(&lo, excluded), upper: fit_upper(&up, excluded), diagonal_spread: spread }
}

/// Upper envelope normalized by √(F(x, √n) F(y, √n)).
pub fn check_fk_upper(samples: &[HeatSample], big_f: &dyn Fn(&Vertex, f64) -> f64) -> EnvelopeFit {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.p.upper > 0.0)
        .map(|s| {
            let r = (s.n as f64).sqrt();
            (s.p.upper * (big_f(&s.x, r) * big_f(&s.y, r)).sqrt(), s.gauss_arg())
        })
        .collect();
    fit_upper(&pts, samples.len() - pts.len())
}

#[derive(Clone, Debug, Serialize)]
pub struct SpineBoundsParams {
    pub delta: u32,
    /// "m ≫ d + δ" is read as m ≥ big_c · (d + δ).
    pub big_c: f64,
    pub center: Vertex,
    pub radius: u32,
}

impl Default for SpineBoundsParams {
    fn default() -> Self {
        SpineBoundsParams { delta: 1, big_c: 8.0, center: Vertex::ORIGIN, radius: 4 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpineBounds {
    pub upper: EnvelopeFit,
    pub lower: EnvelopeFit,
    /// max / min of p · min_i V_i(v_i, √m) over the admitted samples.
    pub ratio_spread: f64,
}

/// min_i V_i(v_i, r) with v_i the nearest point of page i.
pub fn min_page_volume(g: &GluedGraph, v: &Vertex, r: f64) -> Option<f64> {
    let mut best = f64::INFINITY;
    for i in 1..=g.num_pages() {
        let (vi, _) = nearest_page_point(g, v, i, 64)?;
        let local = g.to_page(i, &vi)?;
        best = best.min(g.page_volume(i, &local, r.floor() as u32));
    }
    Some(best)
}

/// Two-sided spine-to-spine envelope against min_i V_i(v_i, √m); book-like graphs only.
pub fn check_spine_bounds(g: &GluedGraph, samples: &[HeatSample], params: &SpineBoundsParams) -> Result<SpineBounds> {
    match is_book_like(g, params.delta, &params.center, params.radius) {
        Certificate::Holds { .. } => {}
        other => {
            return Err(Error::Param(format!(
                "{} is not certified book-like with δ = {} ({other:?}); use check_fk_upper instead",
                g.name, params.delta
            )))
        }
    }
    let mut up = Vec::new();
    let mut lo = Vec::new();
    let mut excluded = 0;
    for s in samples {
        if (s.n as f64) < params.big_c * (s.d + params.delta) as f64 || !g.in_spine(&s.x) || !g.in_spine(&s.y) {
            excluded += 1;
            continue;
        }
        let v = min_page_volume(g, &s.x, (s.n as f64).sqrt())
            .ok_or_else(|| Error::Param(format!("no page near {}", s.x)))?;
        up.push((s.p.upper * v, s.gauss_arg()));
        lo.push((s.p.lower * v, s.gauss_arg()));
    }
    let amps: Vec<f64> = up.iter().map(|e| e.0).collect();
    let spread = if amps.is_empty() {
        1.0
    } else {
        amps.iter().fold(0.0f64, |a, b| a.max(*b)) / lo.iter().map(|e| e.0).fold(f64::INFINITY, f64::min)
    };
    Ok(SpineBounds { upper: fit_upper(&up, excluded), lower: fit_lower(&lo, excluded), ratio_spread: spread })
}
