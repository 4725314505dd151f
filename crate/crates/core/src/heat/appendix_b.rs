//! Integrated maximum principle, Gaussian weights and the E_D estimate.
//!
//! The weight f_k(x) = exp(−ρ²(x)/(D(n+1−k))) with ρ = max(d(o, ·), 1) must satisfy
//! ∂_k f + |∇f_{k+1}|²/(4α f_{k+1}) ≤ 0, where |∇f|²(x) = Σ_y (f(y) − f(x))² K(x, y) and
//! α is the laziness constant. Since f only depends on ρ, the condition at x only depends
//! on ρ(x) and the transition mass to the shells ρ(x) ± 1.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::Serialize;

use super::{evolve, Exec, HeatState, Window, DEFAULT_MAX_STATES};
use crate::error::Result;
use crate::graph::{ball, distance, volume, Chain, GraphRef, MarkovKernel};
use crate::symmetry::{Symmetry, Trivial};
use crate::vertex::Vertex;

/// (ρ, mass to ρ−1, mass to ρ+1) classes of window states strictly inside the radius.
fn shell_signatures(w: &Window) -> Vec<(f64, f64, f64)> {
    let rho = |d: u32| d.max(1) as f64;
    let mut seen = FxHashSet::default();
    let mut out = Vec::new();
    for s in 0..w.len() {
        if w.dist(s) >= w.radius {
            continue;
        }
        let r = rho(w.dist(s));
        let (mut down, mut up) = (0.0, 0.0);
        let (dst, p) = w.fwd_row(s);
        for (t, q) in dst.iter().zip(p) {
            let rt = rho(w.dist(*t as usize));
            if rt < r {
                down += q;
            } else if rt > r {
                up += q;
            }
        }
        if seen.insert((r as u32, down.to_bits(), up.to_bits())) {
            out.push((r, down, up));
        }
    }
    out
}

/// ln |e^a − 1| for a ≠ 0.
fn ln_abs_expm1(a: f64) -> f64 {
    if a > 0.0 {
        a + (-(-a).exp_m1()).ln()
    } else {
        (-a.exp_m1()).ln()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Checks the weight condition for every shell class and every k ∈ [0, n);
/// returns the first failing (ρ, k).
fn weight_condition(sigs: &[(f64, f64, f64)], n: u32, d: f64, alpha: f64) -> Option<(f64, u32)> {
    for &(r, down, up) in sigs {
        for k in 0..n {
            let m = (n - k) as f64;
            // Divided by f_{k+1}(ρ): Σ_t p_t (e^{a_t} − 1)²/(4α) ≤ e^b − 1.
            let b = r * r / (d * m * (m + 1.0));
            let lhs_log = b + (-(-b).exp_m1()).ln();
            let mut terms = Vec::with_capacity(2);
            for (p, rt) in [(down, r - 1.0), (up, r + 1.0)] {
                if p > 0.0 {
                    let a = -(rt * rt - r * r) / (d * m);
                    terms.push(p.ln() + 2.0 * ln_abs_expm1(a) - (4.0 * alpha).ln());
                }
            }
            let rhs_log = log_sum_exp(&terms);
            if rhs_log > lhs_log + 1e-12 {
                return Some((r, k));
            }
        }
    }
    None
}

/// Whether f^D satisfies the weight condition on the window for horizon n.
pub fn gaussian_weight_ok(w: &Window, n: u32, d: f64, alpha: f64) -> bool {
    weight_condition(&shell_signatures(w), n, d, alpha).is_none()
}

/// Smallest D (to relative precision 1e-3) such that the weight condition holds on the
/// window for D and for every grid value above it up to 2^20.
pub fn scan_d(w: &Window, n: u32, alpha: f64) -> Option<f64> {
    let sigs = shell_signatures(w);
    let ok = |d: f64| weight_condition(&sigs, n, d, alpha).is_none();
    let grid: Vec<f64> = (-12..=20).map(|e| 2f64.powi(e)).collect();
    let first = grid.iter().rposition(|d| !ok(*d));
    let (mut lo, mut hi) = match first {
        None => return Some(grid[0]),
        Some(i) if i + 1 == grid.len() => return None,
        Some(i) => (grid[i], grid[i + 1]),
    };
    while hi / lo > 1.0 + 1e-3 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// J_k = Σ_x u_k(x)² f_k(x) π(x) for a solution given state-wise.
///
/// `u[k][i]` and `pi[i]` index the same vertices; `f(k, i)` is the weight.
pub fn j_values(pi: &[f64], u: &[Vec<f64>], f: &dyn Fn(usize, usize) -> f64) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(k, uk)| uk.iter().enumerate().map(|(i, v)| v * v * f(k, i) * pi[i]).sum())
        .collect()
}

/// J_k for u_k = p(k, o, ·) with the Gaussian weight f^D, k = 0..=n (exact window).
pub fn j_series<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    o: &Vertex,
    n: u32,
    d: f64,
    exec: Exec,
) -> Result<Vec<f64>> {
    let w = Arc::new(Window::compile(chain, sym, o, n + 1, DEFAULT_MAX_STATES)?);
    let mut st = HeatState::start(w.clone());
    let mut out = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let m = (n + 1 - k) as f64;
        let mut j = 0.0;
        for s in 0..w.len() {
            let mass = st.mass[s];
            if mass != 0.0 {
                let rho = w.dist(s).max(1) as f64;
                // orbit · (mass/orbit/π)² · f · π
                j += mass * mass / (w.orbit(s) * w.weight(s)) * (-rho * rho / (d * m)).exp();
            }
        }
        out.push(j);
        if k < n {
            st.step(exec);
        }
    }
    Ok(out)
}

/// E_D(k, x) = Σ_z p(k, x, z)² exp(ρ²(x, z)/(Dk)) π(z).
pub fn e_d<C: Chain + ?Sized>(chain: &C, x: &Vertex, k: u32, d: f64) -> Result<f64> {
    let st = evolve(chain, Arc::new(Trivial), x, k, k, Exec::Sequential)?;
    let w = st.window();
    let mut e = 0.0;
    for s in 0..w.len() {
        let pz = w.weight(s);
        let p = st.mass[s] / pz;
        let rho = w.dist(s).max(1) as f64;
        e += p * p * (rho * rho / (d * k as f64)).exp() * pz;
    }
    Ok(e)
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientSample {
    pub x: Vertex,
    pub y: Vertex,
    pub k: u32,
    pub lhs: f64,
    pub rhs: f64,
}

impl GradientSample {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
    }
}

/// p(2k, x, y) against √(E_D(k, x) E_D(k, y)) exp(−d²(x, y)/(4Dk)).
pub fn gradient_bound(g: &GraphRef, x: &Vertex, y: &Vertex, k: u32, d: f64) -> Result<GradientSample> {
    let chain = MarkovKernel::new(g.clone());
    let st = evolve(&chain, Arc::new(Trivial), x, 2 * k, 2 * k, Exec::Sequential)?;
    let lhs = st.u(y) / g.weight(y);
    let dist = distance(g, x, y, 4 * k + 4).unwrap_or(u32::MAX) as f64;
    let rhs = (e_d(&chain, x, k, d)? * e_d(&chain, y, k, d)?).sqrt() * (-dist * dist / (4.0 * d * k as f64)).exp();
    Ok(GradientSample { x: *x, y: *y, k, lhs, rhs })
}

/// max and min over (T, R) of u²(T, z) F(z, R) min{T^{1/α+1} R^{−2/α}, R²} / Σ_{k≤2T} Σ_{B(z,R)} u²π
/// for u = p_{B(z,2R),D}(·, z, ·), with F = V.
pub fn mean_value_constant(g: &GraphRef, z: &Vertex, alpha_fk: f64, pairs: &[(u32, u32)]) -> Result<(f64, f64)> {
    let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
    for &(t, r) in pairs {
        let zz = *z;
        let g2 = g.clone();
        let member = move |v: &Vertex| distance(&g2, &zz, v, 2 * r).is_some();
        let sub = crate::graph::Subgraph::new(g.clone(), "mv-ball", member);
        let chain = crate::graph::DirichletKernel::new(sub);
        let w = Arc::new(Window::compile(&chain, Arc::new(Trivial), z, 2 * r + 1, DEFAULT_MAX_STATES)?);
        let mut st = HeatState::start(w.clone());
        let mut energy = 0.0;
        let mut u_t = 0.0;
        for k in 0..=2 * t {
            for s in 0..w.len() {
                if w.dist(s) <= r {
                    let p = st.mass[s] / w.weight(s);
                    energy += p * p * w.weight(s);
                }
            }
            if k == t {
                u_t = st.u(z) / g.weight(z);
            }
            st.step(Exec::Sequential);
        }
        let (tf, rf) = (t as f64, r as f64);
        let scale = (tf.powf(1.0 / alpha_fk + 1.0) * rf.powf(-2.0 / alpha_fk)).min(rf * rf);
        let c = u_t * u_t * volume(g, z, r) * scale / energy;
        hi = hi.max(c);
        lo = lo.min(c);
    }
    Ok((hi, lo))
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixBParams {
    /// Horizon n for the J_k check.
    pub horizon: u32,
    /// D used for J_k is `d_factor` times the scanned D.
    pub d_factor: f64,
    pub gradient_samples: usize,
    pub gradient_max_k: u32,
    pub gradient_spread: u32,
    pub seed: u64,
    pub fk_alpha: f64,
    pub mean_value_pairs: Vec<(u32, u32)>,
}

impl Default for AppendixBParams {
    fn default() -> Self {
        AppendixBParams {
            horizon: 512,
            d_factor: 4.0,
            gradient_samples: 100,
            gradient_max_k: 32,
            gradient_spread: 8,
            seed: 7,
            fk_alpha: 1.0,
            mean_value_pairs: vec![(4, 4), (16, 4), (16, 8), (64, 8)],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixBReport {
    pub alpha: f64,
    pub d_scan: Option<f64>,
    pub d_used: f64,
    pub j: Vec<f64>,
    pub j_violations: usize,
    pub gradient: Vec<GradientSample>,
    pub gradient_violations: usize,
    pub mean_value: (f64, f64),
}

impl AppendixBReport {
    pub fn ok(&self) -> bool {
        self.d_scan.is_some() && self.j_violations == 0 && self.gradient_violations == 0
    }
}

/// Full report: D scan, J_k monotonicity, gradient-bound samples and the mean-value constant.
pub fn check_appendix_b(
    g: &GraphRef,
    sym: Arc<dyn Symmetry>,
    o: &Vertex,
    params: &AppendixBParams,
    exec: Exec,
) -> Result<AppendixBReport> {
    let chain = MarkovKernel::new(g.clone());
    let n = params.horizon;
    let w = Window::compile(&chain, sym.clone(), o, n + 1, DEFAULT_MAX_STATES)?;
    let alpha = (0..w.len())
        .map(|s| {
            let (dst, p) = w.fwd_row(s);
            dst.iter().zip(p).find(|(t, _)| **t as usize == s).map_or(0.0, |e| *e.1)
        })
        .fold(1.0, f64::min);
    let d_scan = scan_d(&w, n, alpha);
    let d_used = params.d_factor * d_scan.unwrap_or(f64::NAN);
    let j = if d_used.is_finite() { j_series(&chain, sym, o, n, d_used, exec)? } else { Vec::new() };
    let j_violations = j.windows(2).filter(|p| p[1] > p[0] * (1.0 + 1e-12)).count();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let near = ball(g, o, params.gradient_spread);
    let mut gradient = Vec::with_capacity(params.gradient_samples);
    for _ in 0..params.gradient_samples {
        let x = near[rng.random_range(0..near.len())];
        let y = near[rng.random_range(0..near.len())];
        let k = rng.random_range(1..=params.gradient_max_k);
        gradient.push(gradient_bound(g, &x, &y, k, d_used)?);
    }
    let gradient_violations = gradient.iter().filter(|s| !s.holds()).count();
    let mean_value = mean_value_constant(g, o, params.fk_alpha, &params.mean_value_pairs)?;
    Ok(AppendixBReport { alpha, d_scan, d_used, j, j_violations, gradient, gradient_violations, mean_value })
}
