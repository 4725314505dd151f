use std::collections::VecDeque;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::Chain;
use crate::symmetry::Symmetry;
use crate::vertex::Vertex;

/// Default cap on the number of lumped states in a window.
pub const DEFAULT_MAX_STATES: usize = 8_000_000;

/// A finite truncation window around a source, compiled to sparse rows over orbit
/// representatives.
///
/// States are the orbits of alive vertices within BFS distance `radius` of the source,
/// ordered by distance. The lumped transition from state s to state t is
/// Σ_{w ∈ orbit t} K(rep s, w); mass leaving the radius is recorded as `exit`, mass sent
/// to dead vertices as `kill`.
pub struct Window {
    pub source: Vertex,
    pub radius: u32,
    pub label: String,
    sym: Arc<dyn Symmetry>,
    reps: Vec<Vertex>,
    dist: Vec<u32>,
    orbit: Vec<f64>,
    pi: Vec<f64>,
    index: FxHashMap<Vertex, u32>,
    layer_end: Vec<usize>,
    fwd_ptr: Vec<usize>,
    fwd_dst: Vec<u32>,
    fwd_p: Vec<f64>,
    in_ptr: Vec<usize>,
    in_src: Vec<u32>,
    in_p: Vec<f64>,
    exit: Vec<f64>,
    kill: Vec<f64>,
}

impl Window {
    pub fn compile<C: Chain + ?Sized>(
        chain: &C,
        sym: Arc<dyn Symmetry>,
        source: &Vertex,
        radius: u32,
        max_states: usize,
    ) -> Result<Self> {
        if !chain.alive(source) {
            return Err(Error::NotInGraph(*source));
        }
        if sym.canonical(source) != *source || sym.orbit_size(source) != 1.0 {
            return Err(Error::SourceNotFixed(*source));
        }
        let mut w = Window {
            source: *source,
            radius,
            label: chain.label(),
            sym,
            reps: Vec::new(),
            dist: Vec::new(),
            orbit: Vec::new(),
            pi: Vec::new(),
            index: FxHashMap::default(),
            layer_end: Vec::new(),
            fwd_ptr: vec![0],
            fwd_dst: Vec::new(),
            fwd_p: Vec::new(),
            in_ptr: Vec::new(),
            in_src: Vec::new(),
            in_p: Vec::new(),
            exit: Vec::new(),
            kill: Vec::new(),
        };
        w.push_state(*source, 0, chain);
        let mut queue = VecDeque::from([0u32]);
        let mut row = Vec::new();
        let mut acc: Vec<(u32, f64)> = Vec::new();
        while let Some(s) = queue.pop_front() {
            let s = s as usize;
            let d = w.dist[s];
            while w.layer_end.len() < d as usize {
                w.layer_end.push(s);
            }
            row.clear();
            let rep = w.reps[s];
            let diag = chain.row(&rep, &mut row);
            acc.clear();
            acc.push((s as u32, diag));
            let (mut exit, mut kill) = (0.0, 0.0);
            for (v, p) in &row {
                if !chain.alive(v) {
                    kill += p;
                    continue;
                }
                let c = w.sym.canonical(v);
                let t = match w.index.get(&c) {
                    Some(t) => *t,
                    None if d < radius => {
                        if w.reps.len() >= max_states {
                            return Err(Error::Budget { radius, cap: max_states, feasible: d.saturating_sub(1) });
                        }
                        let t = w.push_state(c, d + 1, chain);
                        queue.push_back(t);
                        t
                    }
                    None => {
                        exit += p;
                        continue;
                    }
                };
                acc.push((t, *p));
            }
            acc.sort_by_key(|e| e.0);
            let mut last = u32::MAX;
            for (t, p) in &acc {
                if *t == last {
                    *w.fwd_p.last_mut().unwrap() += p;
                } else {
                    w.fwd_dst.push(*t);
                    w.fwd_p.push(*p);
                    last = *t;
                }
            }
            w.fwd_ptr.push(w.fwd_dst.len());
            w.exit.push(exit);
            w.kill.push(kill);
        }
        while w.layer_end.len() <= radius as usize {
            w.layer_end.push(w.reps.len());
        }
        w.build_transpose();
        Ok(w)
    }

    fn push_state<C: Chain + ?Sized>(&mut self, c: Vertex, d: u32, chain: &C) -> u32 {
        let t = self.reps.len() as u32;
        self.index.insert(c, t);
        self.reps.push(c);
        self.dist.push(d);
        self.orbit.push(self.sym.orbit_size(&c));
        self.pi.push(chain.weight(&c));
        t
    }

    fn build_transpose(&mut self) {
        let n = self.reps.len();
        let mut count = vec![0usize; n + 1];
        for t in &self.fwd_dst {
            count[*t as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        self.in_ptr = count.clone();
        self.in_src = vec![0; self.fwd_dst.len()];
        self.in_p = vec![0.0; self.fwd_dst.len()];
        let mut fill = count;
        for s in 0..n {
            for k in self.fwd_ptr[s]..self.fwd_ptr[s + 1] {
                let t = self.fwd_dst[k] as usize;
                self.in_src[fill[t]] = s as u32;
                self.in_p[fill[t]] = self.fwd_p[k];
                fill[t] += 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn symmetry(&self) -> &Arc<dyn Symmetry> {
        &self.sym
    }

    /// State index of the orbit containing `v`.
    pub fn state(&self, v: &Vertex) -> Option<usize> {
        self.index.get(&self.sym.canonical(v)).map(|i| *i as usize)
    }

    pub fn rep(&self, i: usize) -> Vertex {
        self.reps[i]
    }
    pub fn reps(&self) -> &[Vertex] {
        &self.reps
    }
    pub fn dist(&self, i: usize) -> u32 {
        self.dist[i]
    }
    pub fn orbit(&self, i: usize) -> f64 {
        self.orbit[i]
    }
    pub fn weight(&self, i: usize) -> f64 {
        self.pi[i]
    }
    pub fn exit(&self, i: usize) -> f64 {
        self.exit[i]
    }
    pub fn kill(&self, i: usize) -> f64 {
        self.kill[i]
    }

    /// Number of states at distance ≤ min(d, radius).
    pub fn active(&self, d: u32) -> usize {
        self.layer_end[d.min(self.radius) as usize]
    }

    /// Lumped outgoing row (targets ascending, diagonal included).
    pub fn fwd_row(&self, s: usize) -> (&[u32], &[f64]) {
        let r = self.fwd_ptr[s]..self.fwd_ptr[s + 1];
        (&self.fwd_dst[r.clone()], &self.fwd_p[r])
    }

    /// Lumped incoming row (sources ascending).
    pub fn in_row(&self, t: usize) -> (&[u32], &[f64]) {
        let r = self.in_ptr[t]..self.in_ptr[t + 1];
        (&self.in_src[r.clone()], &self.in_p[r])
    }

    pub fn nnz(&self) -> usize {
        self.fwd_dst.len()
    }
}
