use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphRef, Lattice, MarkovKernel};
use crate::heat::{Bracket, Exec, HeatState, Window, DEFAULT_MAX_STATES};
use crate::symmetry::BlockSymmetry;
use crate::vertex::Vertex;

/// sin(1/4)/(1/4): on [0, 1/2], sin(t/2) ≥ S0·t/2.
const S0: f64 = 0.989_615_837_018_091_7;

/// Certified upper bound on K^n(o, o) for lazy SRW on Z^d.
///
/// The characteristic function is (1/d)Σcos²(θ_i/2) ≤ Π exp(−sin²(θ_i/2)/d), so
/// K^n(o,o) ≤ (e^{−a}I₀(a))^d with a = n/(2d), and e^{−a}I₀(a) ≤ 1/(S0√(2πa)) + e^{−2a sin²(1/4)}
/// by splitting the integral at t = 1/2.
pub fn return_bound(dim: usize, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let a = n as f64 / (2.0 * dim as f64);
    let one = 1.0 / (S0 * (2.0 * std::f64::consts::PI * a).sqrt()) + (-2.0 * a * (0.25f64).sin().powi(2)).exp();
    one.min(1.0).powi(dim as i32)
}

/// Certified upper bound on Σ_{n > big_n} K^n(o, o) for lazy SRW on Z^d, d ≥ 3.
pub fn return_tail(dim: usize, big_n: u64) -> Result<f64> {
    if dim < 3 {
        return Err(Error::Param("the return tail diverges for d < 3".into()));
    }
    let d = dim as f64;
    let c = 2.0 * (0.25f64).sin().powi(2) / (2.0 * d);
    // The exponential part is dominated by the power part once n ≥ 1/(2c).
    let n0 = (1.0 / (2.0 * c)).ceil() as u64;
    if big_n < n0 {
        return Err(Error::Param(format!("tail bound needs N ≥ {n0}")));
    }
    let amp = 1.0 / (S0 * (std::f64::consts::PI / d).sqrt());
    let nf = big_n as f64;
    let eta = (-c * nf).exp() * nf.sqrt() / amp;
    // Σ_{n>N} f(n) ≤ ∫_N^∞ f for decreasing f.
    Ok(((1.0 + eta) * amp).powf(d) * nf.powf(1.0 - d / 2.0) / (d / 2.0 - 1.0))
}

/// Partial Green sums Σ_{n ≤ N} p(n, o, y) of lazy SRW on Z^d with a certified tail.
///
/// Uses two facts about the lazy walk: the kernel is positive semidefinite, so
/// p(n, y, o) ≤ p(n, o, o) for every n, and the return tail bound above. Together they
/// bracket G(y, o) and bound ψ_{o}(y) = G(y, o)/G(o, o) from above.
#[derive(Clone, Serialize)]
pub struct LatticeGreen {
    pub dim: usize,
    pub steps: u32,
    /// Certified Σ_{n>N} p(n, o, o).
    pub tail: f64,
    #[serde(skip)]
    window: Arc<Window>,
    #[serde(skip)]
    sum: Vec<f64>,
    lost_sum: f64,
    pi: f64,
}

impl LatticeGreen {
    /// Accumulates N steps on a window that reaches `reach` with room for the spread.
    pub fn new(dim: usize, steps: u32, reach: u32) -> Result<Self> {
        let g: GraphRef = Arc::new(Lattice::new(dim));
        let pi = g.weight(&Vertex::ORIGIN);
        let k = MarkovKernel::new(g);
        let radius = (reach + (4.5 * (steps as f64).sqrt()).ceil() as u32 + 4).min(steps.max(reach));
        let window =
            Arc::new(Window::compile(&k, Arc::new(BlockSymmetry::lattice(dim)), &Vertex::ORIGIN, radius, DEFAULT_MAX_STATES)?);
        let mut st = HeatState::start(window.clone());
        let mut sum = vec![0.0; window.len()];
        let mut lost_sum = 0.0;
        loop {
            let active = window.active(st.n);
            for (s, acc) in sum[..active].iter_mut().enumerate() {
                *acc += st.mass[s] / window.orbit(s);
            }
            lost_sum += st.lost;
            if st.n == steps {
                break;
            }
            st.step(Exec::default());
        }
        let tail = return_tail(dim, steps as u64)? / pi;
        Ok(LatticeGreen { dim, steps, tail, window, sum, lost_sum, pi })
    }

    fn partial(&self, y: &Vertex) -> Option<Bracket> {
        let s = self.window.state(y)?;
        Some(Bracket::new(self.sum[s] / self.pi, (self.sum[s] + self.lost_sum) / self.pi))
    }

    /// Certified bracket on G(y, o) = Σ_n p(n, y, o).
    pub fn green(&self, y: &Vertex) -> Option<Bracket> {
        let b = self.partial(y)?;
        Some(Bracket::new(b.lower, b.upper + self.tail))
    }

    /// Certified upper bound on ψ_{o}(y); 1 outside the computed window.
    pub fn psi_upper(&self, y: &Vertex) -> f64 {
        if *y == Vertex::ORIGIN {
            return 1.0;
        }
        let (Some(py), Some(po)) = (self.partial(y), self.partial(&Vertex::ORIGIN)) else {
            return 1.0;
        };
        // ψ = G(y)/G(o) ≤ (T_N(y) + tail)/S_N, and ψ = 1 − (G(o) − G(y))/G(o) with
        // G(o) − G(y) ≥ Σ_{n≤N} [p(n,o,o) − p(n,y,o)] term by term.
        let ratio = (py.upper + self.tail) / po.lower;
        let gap = 1.0 - (po.lower - py.upper).max(0.0) / (po.upper + self.tail);
        ratio.min(gap).min(1.0)
    }

    /// Largest ℓ¹ radius this object can answer for.
    pub fn reach(&self) -> u32 {
        self.window.radius
    }
}

/// The coordinates of x transverse to the first k axes, as a vertex of Z^{d−k}.
///
/// For lazy SRW on Z^d the transverse walk is a lazier SRW on Z^{d−k} with the same jump
/// chain, so the probability of ever hitting the axis Z^k × {0} from x equals ψ_{o}(x_⊥)
/// on Z^{d−k}.
pub fn transverse(x: &Vertex, k: usize) -> Vertex {
    let mut c = [0i32; crate::vertex::MAX_DIM];
    c[..crate::vertex::MAX_DIM - k].copy_from_slice(&x.x[k..]);
    Vertex::new(x.tag, &c)
}
