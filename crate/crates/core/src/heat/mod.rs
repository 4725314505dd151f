//! Heat kernels p(n, x, y) = K^n(x, y)/π(y) on truncation windows with certified error.

mod appendix_b;
mod cache;
mod checks;
mod envelope;
mod evolve;
mod window;

use std::sync::Arc;

use serde::Serialize;

pub use appendix_b::{
    check_appendix_b, e_d, gaussian_weight_ok, j_series, j_values, gradient_bound, mean_value_constant, scan_d, AppendixBParams,
    AppendixBReport, GradientSample,
};
pub use cache::{write_csv, HeatCache, CACHE_VERSION};
pub use checks::{
    check_conservation, check_domain_monotonicity, check_nesting, check_residual, check_semigroup, check_symmetry, InvariantReport,
};
pub use envelope::{
    c2_grid, check_fk_upper, check_gaussian, check_spine_bounds, min_page_volume, EnvelopeFit, GaussianFit, HeatSample, SpineBounds,
    SpineBoundsParams,
};
pub use evolve::{Bracket, Exec, HeatState};
pub use window::{Window, DEFAULT_MAX_STATES};

use crate::error::{Error, Result};
use crate::graph::{Chain, DirichletKernel, MarkovKernel, Subgraph};
use crate::symmetry::{Symmetry, Trivial};
use crate::vertex::Vertex;

/// K^n_W(x, ·) on the window of radius `radius` around x.
pub fn evolve<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    n: u32,
    radius: u32,
    exec: Exec,
) -> Result<HeatState> {
    let w = Window::compile(chain, sym, x, radius, DEFAULT_MAX_STATES)?;
    let mut st = HeatState::start(Arc::new(w));
    st.advance_to(n, exec);
    Ok(st)
}

/// Certified bracket on p(n, x, y).
pub fn heat_kernel<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    n: u32,
    x: &Vertex,
    y: &Vertex,
    radius: u32,
    exec: Exec,
) -> Result<Bracket> {
    let st = evolve(chain, sym, x, n, radius, exec)?;
    Ok(st.bracket(y, chain.weight(y)))
}

/// Exact p(n, x, y) (window radius n, no truncation).
pub fn heat_kernel_exact<C: Chain + ?Sized>(chain: &C, n: u32, x: &Vertex, y: &Vertex) -> Result<f64> {
    let b = heat_kernel(chain, Arc::new(Trivial), n, x, y, n, Exec::default())?;
    Ok(b.lower)
}

/// One row of a heat-kernel time series.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesPoint {
    pub n: u32,
    pub bracket: Bracket,
    pub lost: f64,
}

/// Brackets on p(n, x, y) for every n in `times` from a single evolution.
pub fn series<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    y: &Vertex,
    times: &[u32],
    radius: u32,
    exec: Exec,
) -> Result<Vec<SeriesPoint>> {
    let w = Window::compile(chain, sym, x, radius, DEFAULT_MAX_STATES)?;
    let pi_y = chain.weight(y);
    let mut st = HeatState::start(Arc::new(w));
    let mut sorted = times.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::with_capacity(sorted.len());
    for n in sorted {
        st.advance_to(n, exec);
        out.push(SeriesPoint { n, bracket: st.bracket(y, pi_y), lost: st.lost });
    }
    Ok(out)
}

/// Smallest window radius (from a growing schedule) with lost mass ≤ `rel`·u_n(y).
///
/// Returns the radius and the evolved state; the last attempt is reported on failure.
pub fn auto_window<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    y: &Vertex,
    n: u32,
    rel: f64,
    max_states: usize,
    exec: Exec,
) -> Result<(u32, HeatState)> {
    let mut r = ((6.0 * (n as f64).sqrt()).ceil() as u32 + 4).min(n);
    loop {
        let w = Window::compile(chain, sym.clone(), x, r, max_states)?;
        let mut st = HeatState::start(Arc::new(w));
        st.advance_to(n, exec);
        if st.lost <= rel * st.u(y) || r >= n {
            return Ok((r, st));
        }
        r = ((r as f64 * 1.5).ceil() as u32).min(n);
    }
}

fn check_member(sub: &Subgraph, v: &Vertex) -> Result<()> {
    if sub.is_member(v) {
        Ok(())
    } else {
        Err(Error::NotInGraph(*v))
    }
}

/// p_{Ω,D}(n, x, y) for the Dirichlet kernel of `sub`.
pub fn dirichlet_heat(sub: &Subgraph, n: u32, x: &Vertex, y: &Vertex, radius: u32) -> Result<Bracket> {
    check_member(sub, x)?;
    check_member(sub, y)?;
    heat_kernel(&DirichletKernel::new(sub.clone()), Arc::new(Trivial), n, x, y, radius, Exec::default())
}

/// p_{Ω,N}(n, x, y) for the Neumann kernel of `sub`.
pub fn neumann_heat(sub: &Subgraph, n: u32, x: &Vertex, y: &Vertex, radius: u32) -> Result<Bracket> {
    check_member(sub, x)?;
    check_member(sub, y)?;
    heat_kernel(&MarkovKernel::neumann(sub.clone()), Arc::new(Trivial), n, x, y, radius, Exec::default())
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
