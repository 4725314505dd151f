use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use super::solve::{exterior_rhs, Problem, DENSE_ORACLE_LIMIT};
use crate::error::{Error, Result};
use crate::graph::Chain;
use crate::heat::{Window, DEFAULT_MAX_STATES};
use crate::symmetry::Symmetry;
use crate::vertex::Vertex;

/// Brackets ψ⁻ ≤ ψ_K ≤ ψ⁺ for ψ_K(x) = P^x(τ_K < ∞) on the ball B(center, R).
///
/// ψ⁻ sends the exterior to 0; ψ⁺ sends an exterior vertex y to a certified upper bound
/// on ψ_K(y) (1 when nothing better is known). Both are harmonic off K inside the ball,
/// so the maximum principle gives the bracket. Fields are per lumped window state and
/// already widened by the solver error bound, so they are certified as stored.
pub struct HittingSolution {
    pub radius: u32,
    pub center: Vertex,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub in_k: Vec<bool>,
    /// Largest equation residual of either solve.
    pub residual: f64,
    /// Largest expected time to hit K or leave the ball.
    pub max_exit_time: f64,
    /// Largest gap between the iterative and dense solves (small problems only).
    pub oracle_gap: Option<f64>,
    window: Arc<Window>,
}

impl HittingSolution {
    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    /// Pointwise solver error: |f − f_exact| ≤ residual·max exit time.
    pub fn error_bound(&self) -> f64 {
        self.residual * self.max_exit_time
    }

    /// Certified lower bound on ψ_K(v), if v is in the window.
    pub fn lower_at(&self, v: &Vertex) -> Option<f64> {
        self.window.state(v).map(|s| self.lower[s])
    }

    /// Certified upper bound on ψ_K(v), if v is in the window.
    pub fn upper_at(&self, v: &Vertex) -> Option<f64> {
        self.window.state(v).map(|s| self.upper[s])
    }

    /// Graph distance to K for every state, by BFS inside the window.
    pub fn distance_to_k(&self) -> Vec<u32> {
        let w = &*self.window;
        let mut dist = vec![u32::MAX; w.len()];
        let mut queue = VecDeque::new();
        for (s, k) in self.in_k.iter().enumerate() {
            if *k {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        // Lumped rows are symmetric in support, so forward rows serve as adjacency.
        while let Some(s) = queue.pop_front() {
            let (dst, p) = w.fwd_row(s);
            for (t, q) in dst.iter().zip(p) {
                let t = *t as usize;
                if *q > 0.0 && dist[t] == u32::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}

/// Solves for ψ⁻ and ψ⁺ on B(center, radius) to residual `tol`.
///
/// `k` must be invariant under `sym`, and `center` fixed by it. `outer(y)` is a
/// certified upper bound on ψ_K(y) for y outside the ball.
pub fn hitting_prob<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    center: &Vertex,
    k: &dyn Fn(&Vertex) -> bool,
    radius: u32,
    outer: &dyn Fn(&Vertex) -> f64,
    tol: f64,
) -> Result<HittingSolution> {
    let window = Arc::new(Window::compile(chain, sym, center, radius, DEFAULT_MAX_STATES)?);
    let w = &*window;
    let in_k: Vec<bool> = w.reps().iter().map(k).collect();
    if !in_k.iter().any(|b| *b) {
        return Err(Error::Param(format!("target set does not meet B({center}, {radius})")));
    }
    let fixed_one: Vec<Option<f64>> = in_k.iter().map(|b| b.then_some(1.0)).collect();
    let fixed_zero: Vec<Option<f64>> = in_k.iter().map(|b| b.then_some(0.0)).collect();
    let zeros = vec![0.0; w.len()];
    let outer_rhs = exterior_rhs(chain, w, outer, &in_k);
    let ones = vec![1.0; w.len()];

    let lower_p = Problem { window: w, fixed: &fixed_one, rhs: &zeros };
    let upper_p = Problem { window: w, fixed: &fixed_one, rhs: &outer_rhs };
    let time_p = Problem { window: w, fixed: &fixed_zero, rhs: &ones };
    let lower = lower_p.solve_cg(tol)?;
    let upper = upper_p.solve_cg(tol)?;
    // The exit time only scales the error bound, so a loose solve is enough.
    let time = time_p.solve_cg(1e-6)?;
    let max_exit_time = time.f.iter().fold(0.0f64, |a, b| a.max(*b)) * (1.0 + 1e-3) + 1e-6 * time.f.len() as f64;

    let free = in_k.iter().filter(|b| !**b).count();
    let oracle_gap = if free <= DENSE_ORACLE_LIMIT {
        let dl = lower_p.solve_dense()?;
        let du = upper_p.solve_dense()?;
        let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        Some(gap(&dl.f, &lower.f).max(gap(&du.f, &upper.f)))
    } else {
        None
    };
    let residual = lower.residual.max(upper.residual);
    let err = residual * max_exit_time;
    let cert = |f: Vec<f64>, shift: f64| -> Vec<f64> {
        f.iter().zip(&in_k).map(|(v, k)| if *k { 1.0 } else { (v + shift).clamp(0.0, 1.0) }).collect()
    };
    Ok(HittingSolution {
        radius,
        center: *center,
        lower: cert(lower.f, -err),
        upper: cert(upper.f, err),
        in_k,
        residual,
        max_exit_time,
        oracle_gap,
        window,
    })
}

/// Solutions for increasing radii, each upper field intersected with the previous one.
///
/// Any certified upper bound stays valid, so ψ⁺ is made nonincreasing in R this way;
/// ψ⁻ is left as solved, where monotonicity comes from the maximum principle alone.
pub fn hitting_sweep<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    center: &Vertex,
    k: &dyn Fn(&Vertex) -> bool,
    radii: &[u32],
    outer: &dyn Fn(&Vertex) -> f64,
    tol: f64,
) -> Result<Vec<HittingSolution>> {
    let mut out: Vec<HittingSolution> = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sol = hitting_prob(chain, sym.clone(), center, k, r, outer, tol)?;
        if let Some(prev) = out.last() {
            for s in 0..sol.upper.len() {
                if let Some(u) = prev.upper_at(&sol.window.rep(s)) {
                    sol.upper[s] = sol.upper[s].min(u);
                }
            }
        }
        out.push(sol);
    }
    Ok(out)
}

/// Outcome of a uniform S-transience check on a shell around K.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    /// sup ψ⁺ ≤ 1 − ε on the shell.
    Uniform,
    /// sup ψ⁻ > 1 − ε on the shell: no witness at this ε exists.
    NotUniform,
    Inconclusive(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct TransienceDiagnosis {
    pub shell: (u32, u32),
    pub points: usize,
    pub sup_lower: f64,
    pub sup_upper: f64,
    /// 1 − sup ψ⁺: the witnessed ε (≤ 0 when there is none).
    pub epsilon: f64,
    pub verdict: Verdict,
}

/// Checks sup ψ⁺ ≤ 1 − `eps_min` over {x : d(x, K) ∈ [l, ⌊R/2⌋]}.
pub fn s_transience_diagnose(sol: &HittingSolution, l: u32, eps_min: f64) -> Result<TransienceDiagnosis> {
    let hi = sol.radius / 2;
    if l > hi {
        return Err(Error::Param(format!("empty shell [{l}, {hi}]")));
    }
    let dist = sol.distance_to_k();
    let (mut sup_lower, mut sup_upper, mut points) = (0.0f64, 0.0f64, 0);
    for s in 0..dist.len() {
        if dist[s] >= l && dist[s] <= hi {
            points += 1;
            sup_lower = sup_lower.max(sol.lower[s]);
            sup_upper = sup_upper.max(sol.upper[s]);
        }
    }
    if points == 0 {
        return Err(Error::Param(format!("no window vertex at distance [{l}, {hi}] from K")));
    }
    let verdict = if sup_upper <= 1.0 - eps_min {
        Verdict::Uniform
    } else if sup_lower > 1.0 - eps_min {
        Verdict::NotUniform
    } else {
        Verdict::Inconclusive(format!(
            "bracket [{sup_lower:.4}, {sup_upper:.4}] straddles 1 − ε = {:.4}",
            1.0 - eps_min
        ))
    };
    Ok(TransienceDiagnosis { shell: (l, hi), points, sup_lower, sup_upper, epsilon: 1.0 - sup_upper, verdict })
}
