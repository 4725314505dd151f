use std::sync::Arc;

use serde::Serialize;

use super::{evolve, heat_kernel, Bracket, Exec, HeatState, Window, DEFAULT_MAX_STATES};
use crate::error::Result;
use crate::graph::{Chain, DirichletKernel, GraphRef, MarkovKernel, Subgraph};
use crate::symmetry::{Symmetry, Trivial};
use crate::vertex::Vertex;

/// Outcome of an invariant check: how many comparisons were made and how many failed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct InvariantReport {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub max_error: f64,
    pub first_violation: Option<String>,
}

impl InvariantReport {
    pub fn new(name: &str) -> Self {
        InvariantReport { name: name.to_string(), ..Default::default() }
    }

    /// Records one comparison with error `err` against tolerance `tol`.
    pub fn record(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
        if !(err <= tol) {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(what());
            }
        }
    }

    pub fn merge(&mut self, other: InvariantReport) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.max_error = self.max_error.max(other.max_error);
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
    }

    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

fn exact<C: Chain + ?Sized>(chain: &C, x: &Vertex, n: u32) -> Result<HeatState> {
    evolve(chain, Arc::new(Trivial), x, n, n, Exec::default())
}

/// p(n+m, x, y) = Σ_z p(n, x, z) p(m, z, y) π(z), all in exact mode.
pub fn check_semigroup<C: Chain + ?Sized>(chain: &C, x: &Vertex, y: &Vertex, n: u32, m: u32) -> Result<InvariantReport> {
    let mut rep = InvariantReport::new("semigroup");
    let from_x = exact(chain, x, n)?;
    let from_y = exact(chain, y, m)?;
    let whole = exact(chain, x, n + m)?;
    let pi_y = chain.weight(y);
    let mut sum = 0.0;
    for z in from_x.window().reps() {
        let pz = chain.weight(z);
        if pz > 0.0 {
            // p(m, z, y) = p(m, y, z) by reversibility.
            sum += (from_x.u(z) / pz) * (from_y.u(z) / pz) * pz;
        }
    }
    let direct = whole.u(y) / pi_y;
    rep.record((direct - sum).abs(), 1e-12 * direct.max(1.0), || format!("{x}->{y} n={n} m={m}: {direct} vs {sum}"));
    Ok(rep)
}

/// p(n, x, y) = p(n, y, x) in exact mode.
pub fn check_symmetry<C: Chain + ?Sized>(chain: &C, x: &Vertex, y: &Vertex, n: u32) -> Result<InvariantReport> {
    let mut rep = InvariantReport::new("symmetry");
    let a = exact(chain, x, n)?.u(y) / chain.weight(y);
    let b = exact(chain, y, n)?.u(x) / chain.weight(x);
    rep.record((a - b).abs(), 1e-12, || format!("{x},{y} n={n}: {a} vs {b}"));
    Ok(rep)
}

/// Heat-equation residual p_{n+1}(y) − Σ_x K(y, x) p_n(x) at every window vertex whose
/// neighbours all lie in the window.
pub fn check_residual<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    n: u32,
    radius: u32,
    exec: Exec,
) -> Result<InvariantReport> {
    let mut rep = InvariantReport::new("heat-equation residual");
    let w = Arc::new(Window::compile(chain, sym, x, radius, DEFAULT_MAX_STATES)?);
    let mut st = HeatState::start(w.clone());
    st.advance_to(n, exec);
    let before = st.clone();
    st.step(exec);
    let mut row = Vec::new();
    for (s, y) in w.reps().iter().enumerate() {
        if w.dist(s) + 1 > radius {
            continue;
        }
        let py = chain.weight(y);
        if py <= 0.0 {
            continue;
        }
        row.clear();
        let diag = chain.row(y, &mut row);
        let mut rhs = diag * before.u(y) / py;
        for (v, p) in &row {
            if chain.alive(v) {
                rhs += p * before.u(v) / chain.weight(v);
            }
        }
        let lhs = st.u(y) / py;
        rep.record((lhs - rhs).abs(), 1e-12, || format!("{y} at n={n}: {lhs} vs {rhs}"));
    }
    Ok(rep)
}

/// Brackets from growing radii are nested; the last one must contain `exact` when given.
pub fn check_nesting<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    y: &Vertex,
    n: u32,
    radii: &[u32],
    exec: Exec,
) -> Result<(InvariantReport, Vec<Bracket>)> {
    let mut rep = InvariantReport::new("bracket nesting");
    let mut out: Vec<Bracket> = Vec::new();
    for r in radii {
        let b = heat_kernel(chain, sym.clone(), n, x, y, *r, exec)?;
        if let Some(prev) = out.last() {
            let tol = 1e-13 * prev.upper.abs();
            let err = (prev.lower - b.lower).max(b.upper - prev.upper).max(0.0);
            rep.record(err, tol, || format!("radius {r}: {b:?} not inside {prev:?}"));
        }
        out.push(b);
    }
    let exact_val = heat_kernel(chain, sym, n, x, y, n, exec)?.lower;
    for (b, r) in out.iter().zip(radii) {
        let err = (b.lower - exact_val).max(exact_val - b.upper).max(0.0);
        rep.record(err, 1e-13 * exact_val.abs(), || format!("radius {r}: {b:?} misses exact {exact_val}"));
    }
    Ok((rep, out))
}

/// p_{Ω,D} ≤ p_{Ω',D} ≤ p for Ω ⊆ Ω', exact mode.
pub fn check_domain_monotonicity(
    g: &GraphRef,
    inner: &Subgraph,
    outer: &Subgraph,
    x: &Vertex,
    n: u32,
) -> Result<InvariantReport> {
    let mut rep = InvariantReport::new("domain monotonicity");
    let a = exact(&DirichletKernel::new(inner.clone()), x, n)?;
    let b = exact(&DirichletKernel::new(outer.clone()), x, n)?;
    let c = exact(&MarkovKernel::new(g.clone()), x, n)?;
    for y in c.window().reps() {
        let (ua, ub, uc) = (a.u(y), b.u(y), c.u(y));
        let tol = 1e-14 * uc.max(1e-300);
        rep.record((ua - ub).max(0.0), tol, || format!("{y}: inner {ua} > outer {ub}"));
        rep.record((ub - uc).max(0.0), tol, || format!("{y}: outer {ub} > whole {uc}"));
    }
    Ok(rep)
}

/// |Σ u_n + L(n) + killed − 1| and monotonicity of L(n), u_n ≥ 0, support in B(x, n).
pub fn check_conservation<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    n: u32,
    radius: u32,
    exec: Exec,
) -> Result<InvariantReport> {
    let mut rep = InvariantReport::new("conservation");
    let w = Arc::new(Window::compile(chain, sym, x, radius, DEFAULT_MAX_STATES)?);
    let mut st = HeatState::start(w.clone());
    let mut last_lost = 0.0;
    for k in 1..=n {
        st.step(exec);
        rep.record(st.conservation_error(), 1e-12, || format!("n={k}: mass defect {}", st.conservation_error()));
        rep.record((last_lost - st.lost).max(0.0), 0.0, || format!("n={k}: lost mass decreased"));
        if k <= radius {
            rep.record(st.lost, 0.0, || format!("n={k} ≤ R={radius} but lost = {}", st.lost));
        }
        last_lost = st.lost;
        let neg = st.mass.iter().fold(0.0f64, |a, m| a.max(-m));
        rep.record(neg, 0.0, || format!("n={k}: negative mass {neg}"));
        let outside: f64 = st.mass.iter().enumerate().filter(|(s, _)| w.dist(*s) > k).map(|(_, m)| m.abs()).sum();
        rep.record(outside, 0.0, || format!("n={k}: mass beyond distance n"));
    }
    Ok(rep)
}
