use std::sync::Arc;

use serde::Serialize;

use super::lattice::LatticeGreen;
use super::solve::{exterior_rhs, Problem};
use crate::error::{Error, Result};
use crate::graph::Chain;
use crate::heat::{Bracket, Window, DEFAULT_MAX_STATES};
use crate::symmetry::Symmetry;
use crate::vertex::Vertex;

/// G_R(·, o): the Green function of the walk killed on leaving B(o, R).
pub struct DirichletGreen {
    pub radius: u32,
    pub values: Vec<f64>,
    pub residual: f64,
    window: Arc<Window>,
}

impl DirichletGreen {
    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    /// G_R(x, o), zero outside the ball.
    pub fn at(&self, x: &Vertex) -> f64 {
        self.window.state(x).map_or(0.0, |s| self.values[s])
    }
}

/// Solves (I − K)G_R(·, o) = δ_o/π(o) on B(o, R) with G_R = 0 outside.
pub fn dirichlet_green<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    o: &Vertex,
    radius: u32,
    tol: f64,
) -> Result<DirichletGreen> {
    let window = Arc::new(Window::compile(chain, sym, o, radius, DEFAULT_MAX_STATES)?);
    let fixed = vec![None; window.len()];
    let mut rhs = vec![0.0; window.len()];
    rhs[0] = 1.0 / window.weight(0);
    let solved = Problem { window: &window, fixed: &fixed, rhs: &rhs }.solve_cg(tol)?;
    Ok(DirichletGreen { radius, values: solved.f, residual: solved.residual, window })
}

/// How to bracket G(x, o).
pub enum GreenScheme<'a> {
    /// G_R from a Dirichlet solve; the upper end needs certified bounds ψ_{o}(y) ≤ outer(y)
    /// at exterior vertices y.
    Dirichlet { radius: u32, outer: &'a dyn Fn(&Vertex) -> f64, tol: f64 },
    /// Partial Green sums with a certified tail (lazy SRW on Z^d only).
    Series(&'a LatticeGreen),
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenBracket {
    pub bracket: Bracket,
    /// max of the exterior bound ψ̄ (Dirichlet scheme; 0 for the series scheme).
    pub psi_bar: f64,
    /// The upper end could not be certified and is +∞.
    pub lower_only: bool,
}

impl GreenBracket {
    pub fn rel_width(&self) -> f64 {
        self.bracket.rel_width()
    }
}

/// Certified bracket on G(x, o) = Σ_n p(n, x, o).
///
/// Dirichlet scheme: G(x,o) = G_R(x,o) + E^x[G(X_τ, o)] with X_τ the exit point and
/// G(y,o) = ψ_{o}(y)G(o,o) ≤ outer(y)G(o,o). Writing e(x) = E^x[outer(X_τ)] gives
/// G(o,o) ≤ G_R(o,o)/(1 − e(o)) and G(x,o) ≤ G_R(x,o) + e(x)G⁺(o,o). Since e ≤ ψ̄ this
/// is never looser than propagating the single constant ψ̄ = max outer.
pub fn green<C: Chain + ?Sized>(
    chain: &C,
    sym: Arc<dyn Symmetry>,
    x: &Vertex,
    o: &Vertex,
    scheme: &GreenScheme,
) -> Result<GreenBracket> {
    match scheme {
        GreenScheme::Series(lg) => {
            if *o != Vertex::ORIGIN {
                return Err(Error::Param("the series scheme is centred at the origin".into()));
            }
            let b = lg.green(x).ok_or_else(|| Error::Param(format!("{x} beyond the series window")))?;
            Ok(GreenBracket { bracket: b, psi_bar: 0.0, lower_only: false })
        }
        GreenScheme::Dirichlet { radius, outer, tol } => {
            let gr = dirichlet_green(chain, sym, o, *radius, *tol)?;
            let w = gr.window();
            let lower = gr.at(x);
            let no_skip = vec![false; w.len()];
            let rhs = exterior_rhs(chain, w, *outer, &no_skip);
            let fixed = vec![None; w.len()];
            let e = Problem { window: w, fixed: &fixed, rhs: &rhs }.solve_cg(*tol)?;
            // Exterior vertices reachable in one step from the boundary layer.
            let mut psi_bar: f64 = 0.0;
            let mut row = Vec::new();
            for s in 0..w.len() {
                if w.exit(s) > 0.0 {
                    row.clear();
                    chain.row(&w.rep(s), &mut row);
                    for (v, _) in &row {
                        if chain.alive(v) && w.state(v).is_none() {
                            psi_bar = psi_bar.max(outer(v).clamp(0.0, 1.0));
                        }
                    }
                }
            }
            let e_o = e.f[0] + e.residual;
            let e_x = w.state(x).map_or(psi_bar, |s| e.f[s] + e.residual);
            if e_o >= 1.0 {
                return Ok(GreenBracket { bracket: Bracket::new(lower, f64::INFINITY), psi_bar, lower_only: true });
            }
            let g_oo = gr.values[0] / (1.0 - e_o);
            Ok(GreenBracket { bracket: Bracket::new(lower, lower + e_x.min(psi_bar) * g_oo), psi_bar, lower_only: false })
        }
    }
}
