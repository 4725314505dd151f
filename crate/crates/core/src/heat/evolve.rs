use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::window::Window;
use crate::vertex::Vertex;

/// Rows are processed in fixed chunks; partial sums are combined in chunk order so the
/// result does not depend on the execution mode or thread count.
const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Certified enclosure of a scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "bracket [{lower}, {upper}]");
        Bracket { lower, upper }
    }

    pub fn exact(v: f64) -> Self {
        Bracket { lower: v, upper: v }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Width relative to the lower end (infinite when lower is 0 and width > 0).
    pub fn rel_width(&self) -> f64 {
        if self.width() == 0.0 {
            0.0
        } else {
            self.width() / self.lower
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// `self ⊆ other`, up to `tol`.
    pub fn within(&self, other: &Bracket, tol: f64) -> bool {
        self.lower >= other.lower - tol && self.upper <= other.upper + tol
    }

    pub fn overlaps(&self, other: &Bracket) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// K^n_W(x, ·) on a window, lumped by orbits.
///
/// `mass[s]` is the total mass on orbit s; `lost` is the mass that left the window
/// (truncation error), `killed` the mass absorbed by the chain itself (Dirichlet deaths).
#[derive(Clone)]
pub struct HeatState {
    pub n: u32,
    pub mass: Vec<f64>,
    pub lost: f64,
    pub killed: f64,
    window: Arc<Window>,
    scratch: Vec<f64>,
}

impl HeatState {
    pub fn start(window: Arc<Window>) -> Self {
        let mut mass = vec![0.0; window.len()];
        mass[0] = 1.0;
        let scratch = vec![0.0; window.len()];
        HeatState { n: 0, mass, lost: 0.0, killed: 0.0, window, scratch }
    }

    /// Rebuilds a state from stored parts (used by the cache).
    pub fn from_parts(window: Arc<Window>, n: u32, mass: Vec<f64>, lost: f64, killed: f64) -> Self {
        let scratch = vec![0.0; window.len()];
        HeatState { n, mass, lost, killed, window, scratch }
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn source(&self) -> Vertex {
        self.window.source
    }

    pub fn step(&mut self, exec: Exec) {
        let w = &*self.window;
        let targets = w.active(self.n + 1);
        let sources = w.active(self.n);
        let mass = &self.mass;
        let row = |t: usize| {
            let (src, p) = w.in_row(t);
            let mut acc = 0.0;
            for (s, q) in src.iter().zip(p) {
                acc += mass[*s as usize] * q;
            }
            acc
        };
        let loss = |c: usize| {
            let (mut e, mut k) = (0.0, 0.0);
            for s in c * CHUNK..((c + 1) * CHUNK).min(sources) {
                e += mass[s] * w.exit(s);
                k += mass[s] * w.kill(s);
            }
            (e, k)
        };
        let n_chunks = sources.div_ceil(CHUNK);
        let partials: Vec<(f64, f64)> = match exec {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                self.scratch[..targets].par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
                    for (k, o) in out.iter_mut().enumerate() {
                        *o = row(c * CHUNK + k);
                    }
                });
                (0..n_chunks).into_par_iter().map(loss).collect()
            }
            _ => {
                for (t, o) in self.scratch[..targets].iter_mut().enumerate() {
                    *o = row(t);
                }
                (0..n_chunks).map(loss).collect()
            }
        };
        for (e, k) in partials {
            self.lost += e;
            self.killed += k;
        }
        std::mem::swap(&mut self.mass, &mut self.scratch);
        self.n += 1;
    }

    pub fn advance_to(&mut self, n: u32, exec: Exec) {
        while self.n < n {
            self.step(exec);
        }
    }

    /// Estimate of K^n(x, y) from the window (the lower end of its bracket).
    pub fn u(&self, y: &Vertex) -> f64 {
        match self.window.state(y) {
            Some(s) => self.mass[s] / self.window.orbit(s),
            None => 0.0,
        }
    }

    /// Certified bracket on p(n, x, y) = K^n(x, y)/π(y) for the untruncated chain.
    pub fn bracket(&self, y: &Vertex, pi_y: f64) -> Bracket {
        let u = self.u(y);
        Bracket::new(u / pi_y, (u + self.lost) / pi_y)
    }

    /// Bracket at a vertex inside the window (π read from the window).
    pub fn p(&self, y: &Vertex) -> Option<Bracket> {
        let s = self.window.state(y)?;
        Some(self.bracket(y, self.window.weight(s)))
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// |Σ mass + lost + killed − 1|.
    pub fn conservation_error(&self) -> f64 {
        (self.total_mass() + self.lost + self.killed - 1.0).abs()
    }
}
