use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::graph::{ball_with_dist, distance, Graph, Subgraph};
use crate::vertex::Vertex;

/// Which distance the path length is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UniformMode {
    /// k ≤ C_U · d_Γ̂(x, y).
    Uniform,
    /// k ≤ C_U · d_Γ(x, y).
    Inner,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformBudget {
    /// Largest C_U searched.
    pub c_max: f64,
    /// Cap on (path length + 1) · window size.
    pub max_states: usize,
    /// Clearances beyond this are reported as cap + 1 (a lower bound).
    pub clearance_cap: u32,
}

impl Default for UniformBudget {
    fn default() -> Self {
        UniformBudget { c_max: 4.0, max_states: 20_000_000, clearance_cap: 64 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityWitness {
    pub x: Vertex,
    pub y: Vertex,
    pub mode: UniformMode,
    pub path: Vec<Vertex>,
    /// d_Γ̂ or d_Γ per mode.
    pub d: u32,
    pub c_u: f64,
    /// k/d (0 when x = y).
    pub c_upper: f64,
    pub clearance_capped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum UniformStatus {
    Witness,
    /// No path in Γ of length ≤ c_max · d.
    Refuted,
    /// The search window exceeded the budget; nothing is claimed.
    Inconclusive(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityResult {
    pub status: UniformStatus,
    /// Best achievable c_u for each path length k, exact over all paths of that length.
    pub profile: Vec<(u32, f64)>,
    pub best: Option<UniformityWitness>,
}

/// d_Γ̂(v, Γ̂ ∖ Γ), or None if the complement is farther than `cap`.
fn clearance(sub: &Subgraph, v: &Vertex, cap: u32) -> Option<u32> {
    let parent = sub.parent();
    let mut seen: FxHashMap<Vertex, u32> = FxHashMap::default();
    seen.insert(*v, 0);
    let mut queue = VecDeque::from([*v]);
    let mut nb = Vec::new();
    while let Some(u) = queue.pop_front() {
        let d = seen[&u];
        if !sub.is_member(&u) {
            return Some(d);
        }
        if d == cap {
            continue;
        }
        nb.clear();
        parent.neighbors(&u, &mut nb);
        for (w, _) in &nb {
            if !seen.contains_key(w) {
                seen.insert(*w, d + 1);
                queue.push_back(*w);
            }
        }
    }
    None
}

/// Searches all paths from x to y in Γ of length ≤ c_max · d for the one maximizing
/// min_j clearance(x_j)/(1 + min(j, k − j)), by a max-min dynamic program over
/// (vertex, step) for each length k. Paths may revisit vertices.
pub fn check_uniform(
    sub: &Subgraph,
    mode: UniformMode,
    pairs: &[(Vertex, Vertex)],
    budget: &UniformBudget,
) -> Vec<UniformityResult> {
    pairs.iter().map(|(x, y)| check_pair(sub, mode, x, y, budget)).collect()
}

fn check_pair(sub: &Subgraph, mode: UniformMode, x: &Vertex, y: &Vertex, budget: &UniformBudget) -> UniformityResult {
    let fail = |status| UniformityResult { status, profile: vec![], best: None };
    if !sub.is_member(x) || !sub.is_member(y) {
        return fail(UniformStatus::Inconclusive(format!("{x} or {y} is not in the subgraph")));
    }
    let cap = budget.clearance_cap.max(1) * 64;
    let d = match mode {
        UniformMode::Uniform => distance(sub.parent(), x, y, cap),
        UniformMode::Inner => distance(sub, x, y, cap),
    };
    let Some(d) = d else {
        return fail(UniformStatus::Inconclusive(format!("d({x}, {y}) exceeds {cap}")));
    };
    let k_max = (budget.c_max * d as f64 + 1e-9).floor() as u32;
    let from_x = ball_with_dist(sub, x, k_max);
    if from_x.len().saturating_mul(k_max as usize + 1) > budget.max_states {
        return fail(UniformStatus::Inconclusive(format!(
            "window of {} vertices × {} steps exceeds {} states",
            from_x.len(),
            k_max + 1,
            budget.max_states
        )));
    }
    let to_y: FxHashMap<Vertex, u32> = ball_with_dist(sub, y, k_max).into_iter().collect();
    let window: Vec<(Vertex, u32, u32)> =
        from_x.into_iter().filter_map(|(v, dx)| to_y.get(&v).filter(|dy| dx + **dy <= k_max).map(|dy| (v, dx, *dy))).collect();
    let Some(k_min) = to_y.get(x).copied() else {
        return fail(UniformStatus::Refuted);
    };
    let index: FxHashMap<Vertex, usize> = window.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
    let mut capped = false;
    let clear: Vec<f64> = window
        .iter()
        .map(|(v, _, _)| match clearance(sub, v, budget.clearance_cap) {
            Some(c) => c as f64,
            None => {
                capped = true;
                budget.clearance_cap as f64 + 1.0
            }
        })
        .collect();
    let mut nb = Vec::new();
    let adj: Vec<Vec<usize>> = window
        .iter()
        .map(|(v, _, _)| {
            nb.clear();
            sub.neighbors(v, &mut nb);
            nb.iter().filter_map(|(w, _)| index.get(w).copied()).filter(|w| window[*w].0 != *v).collect()
        })
        .collect();
    let (ix, iy) = (index[x], index[y]);
    let mut profile = Vec::new();
    let mut best: Option<(f64, u32, Vec<usize>)> = None;
    for k in k_min..=k_max {
        let weight = |j: u32| 1.0 + j.min(k - j) as f64;
        let mut val = vec![f64::NEG_INFINITY; window.len()];
        val[ix] = clear[ix] / weight(0);
        let mut parents: Vec<Vec<u32>> = Vec::with_capacity(k as usize);
        for j in 1..=k {
            let mut next = vec![f64::NEG_INFINITY; window.len()];
            let mut par = vec![u32::MAX; window.len()];
            for (v, &cur) in val.iter().enumerate() {
                if cur == f64::NEG_INFINITY {
                    continue;
                }
                for &w in &adj[v] {
                    if window[w].2 > k - j {
                        continue;
                    }
                    let cand = cur.min(clear[w] / weight(j));
                    if cand > next[w] || (cand == next[w] && (v as u32) < par[w]) {
                        next[w] = cand;
                        par[w] = v as u32;
                    }
                }
            }
            parents.push(par);
            val = next;
        }
        let c = val[iy];
        if c == f64::NEG_INFINITY {
            continue;
        }
        profile.push((k, c));
        if best.as_ref().is_none_or(|b| c > b.0) {
            let mut path = vec![iy];
            let mut cur = iy;
            for par in parents.iter().rev() {
                cur = par[cur] as usize;
                path.push(cur);
            }
            path.reverse();
            best = Some((c, k, path));
        }
    }
    let best = best.map(|(c_u, k, path)| UniformityWitness {
        x: *x,
        y: *y,
        mode,
        path: path.into_iter().map(|i| window[i].0).collect(),
        d,
        c_u,
        c_upper: if d == 0 { 0.0 } else { k as f64 / d as f64 },
        clearance_capped: capped,
    });
    let status = if best.is_some() { UniformStatus::Witness } else { UniformStatus::Refuted };
    UniformityResult { status, profile, best }
}

fn bfs_distance(g: &dyn Graph, from: &Vertex, hit: &dyn Fn(&Vertex) -> bool, cap: u32) -> Option<u32> {
    let mut seen = FxHashSet::from_iter([*from]);
    let mut frontier = vec![*from];
    for d in 0..=cap {
        if frontier.iter().any(hit) {
            return Some(d);
        }
        let mut next = Vec::new();
        for v in &frontier {
            for (w, _) in g.neighbor_list(v) {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    None
}

/// Re-checks a witness from scratch: path in Γ, endpoints, length bound and the
/// clearance condition at every step.
pub fn verify_witness(sub: &Subgraph, w: &UniformityWitness, clearance_cap: u32) -> Result<(), String> {
    let path = &w.path;
    if path.first() != Some(&w.x) || path.last() != Some(&w.y) {
        return Err("path endpoints differ from the pair".into());
    }
    for (j, v) in path.iter().enumerate() {
        if !sub.is_member(v) {
            return Err(format!("x_{j} = {v} is outside the subgraph"));
        }
        if j > 0 && !sub.neighbor_list(&path[j - 1]).iter().any(|(u, _)| u == v) {
            return Err(format!("x_{} and x_{j} are not adjacent", j - 1));
        }
    }
    let k = path.len() as u32 - 1;
    let target = w.y;
    let is_y = move |v: &Vertex| *v == target;
    let d = match w.mode {
        UniformMode::Uniform => bfs_distance(&**sub.parent(), &w.x, &is_y, k),
        UniformMode::Inner => bfs_distance(sub, &w.x, &is_y, k),
    }
    .ok_or("y is farther than the path length")?;
    if k as f64 > w.c_upper * d as f64 + 1e-9 && !(d == 0 && k == 0) {
        return Err(format!("k = {k} > C_U · d = {} · {d}", w.c_upper));
    }
    let outside = |v: &Vertex| !sub.is_member(v);
    for (j, v) in path.iter().enumerate() {
        let c = bfs_distance(&**sub.parent(), v, &outside, clearance_cap)
            .map(|c| c as f64)
            .unwrap_or(clearance_cap as f64 + 1.0);
        let need = w.c_u * (1.0 + (j as u32).min(k - j as u32) as f64);
        if c < need * (1.0 - 1e-12) {
            return Err(format!("clearance {c} at x_{j} = {v} below c_u·(1 + min) = {need}"));
        }
    }
    Ok(())
}
