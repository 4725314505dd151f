use nalgebra::{DMatrix, SymmetricEigen};
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::vertex::Vertex;

/// A symmetric sub-Markov operator D^{1/2} Q D^{-1/2} on a finite vertex set, where Q is
/// either the Dirichlet restriction of the graph kernel or the Neumann kernel of the
/// induced subgraph.
pub struct LocalOperator {
    pub verts: Vec<Vertex>,
    pub sqrt_pi: Vec<f64>,
    ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl LocalOperator {
    fn build<G: Graph + ?Sized>(g: &G, set: &[Vertex], neumann: bool) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySubgraph);
        }
        let index: FxHashMap<Vertex, u32> = set.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let mut ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut sqrt_pi = Vec::with_capacity(set.len());
        let mut nb = Vec::new();
        for (i, v) in set.iter().enumerate() {
            if !g.contains(v) {
                return Err(Error::NotInGraph(*v));
            }
            let pi = g.weight(v);
            if pi <= 0.0 {
                return Err(Error::Weights { vertex: *v, detail: "zero vertex weight in eigen problem".into() });
            }
            sqrt_pi.push(pi.sqrt());
            nb.clear();
            g.neighbors(v, &mut nb);
            let mut off = 0.0;
            let mut inside = 0.0;
            for (w, mu) in &nb {
                off += mu;
                if let Some(j) = index.get(w) {
                    inside += mu;
                    col.push(*j);
                    val.push(*mu);
                }
            }
            let diag = if neumann { 1.0 - inside / pi } else { 1.0 - off / pi };
            col.push(i as u32);
            val.push(diag * pi);
            ptr.push(col.len());
        }
        for i in 0..set.len() {
            for k in ptr[i]..ptr[i + 1] {
                let j = col[k] as usize;
                val[k] /= sqrt_pi[i] * sqrt_pi[j];
            }
        }
        Ok(LocalOperator { verts: set.to_vec(), sqrt_pi, ptr, col, val })
    }

    /// Dirichlet kernel of Ω (rows of the graph kernel restricted to Ω).
    pub fn dirichlet<G: Graph + ?Sized>(g: &G, omega: &[Vertex]) -> Result<Self> {
        Self::build(g, omega, false)
    }

    /// Neumann kernel of the induced subgraph on `set`.
    pub fn neumann<G: Graph + ?Sized>(g: &G, set: &[Vertex]) -> Result<Self> {
        Self::build(g, set, true)
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.ptr[i]..self.ptr[i + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            *yi = acc;
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.ptr[i]..self.ptr[i + 1] {
                m[(i, self.col[k] as usize)] += self.val[k];
            }
        }
        m
    }

    /// Largest eigenvalue of the operator on the complement of `deflate` (unit vector),
    /// by power iteration on (S + I)/2 until ‖Sv − βv‖ ≤ tol.
    pub fn top(&self, start: Vec<f64>, deflate: Option<&[f64]>, tol: f64, cap: usize) -> Result<Eigen> {
        let n = self.len();
        let project = |v: &mut [f64]| {
            if let Some(d) = deflate {
                let c: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(d) {
                    *a -= c * b;
                }
            }
        };
        let normalize = |v: &mut [f64]| {
            let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if s > 0.0 {
                v.iter_mut().for_each(|a| *a /= s);
            }
            s
        };
        let mut v = start;
        project(&mut v);
        if normalize(&mut v) == 0.0 {
            return Err(Error::Param("start vector vanishes after deflation".into()));
        }
        let mut sv = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for it in 0..cap {
            self.apply(&v, &mut sv);
            project(&mut sv);
            let beta: f64 = v.iter().zip(&sv).map(|(a, b)| a * b).sum();
            residual = v.iter().zip(&sv).map(|(a, b)| (b - beta * a).powi(2)).sum::<f64>().sqrt();
            if residual <= tol {
                return Ok(Eigen { value: beta, vector: v, residual, iterations: it + 1 });
            }
            for (a, b) in v.iter_mut().zip(&sv) {
                *a = 0.5 * (*a + b);
            }
            normalize(&mut v);
        }
        Err(Error::NoConvergence { cap, residual })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigen {
    pub value: f64,
    #[serde(skip)]
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub const LAMBDA1_TOL: f64 = 1e-10;
const ITER_CAP: usize = 5_000_000;

/// λ₁(Ω) = 1 − β, β the Perron eigenvalue of the Dirichlet kernel on Ω.
pub fn lambda1<G: Graph + ?Sized>(g: &G, omega: &[Vertex]) -> Result<Eigen> {
    let op = LocalOperator::dirichlet(g, omega)?;
    let start = op.sqrt_pi.clone();
    let mut e = op.top(start, None, LAMBDA1_TOL, ITER_CAP)?;
    e.value = 1.0 - e.value;
    Ok(e)
}

/// λ₁(Ω) by a dense symmetric eigensolve.
pub fn lambda1_dense<G: Graph + ?Sized>(g: &G, omega: &[Vertex]) -> Result<f64> {
    let op = LocalOperator::dirichlet(g, omega)?;
    let top = SymmetricEigen::new(op.dense()).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 - top)
}

/// Smallest nonzero eigenvalue of I − N, N the Neumann kernel of the induced subgraph.
///
/// Equals the infimum of ½Σ|f(y) − f(z)|²μ_yz / Σ|f − f_B|²π over non-constant f on the set.
pub fn lambda_nz<G: Graph + ?Sized>(g: &G, set: &[Vertex], tol: f64) -> Result<Eigen> {
    let op = LocalOperator::neumann(g, set)?;
    let norm = op.sqrt_pi.iter().map(|a| a * a).sum::<f64>().sqrt();
    let constant: Vec<f64> = op.sqrt_pi.iter().map(|a| a / norm).collect();
    // Deterministic start with no special structure.
    let start: Vec<f64> = (0..op.len()).map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5).collect();
    let mut e = op.top(start, Some(&constant), tol, ITER_CAP)?;
    e.value = 1.0 - e.value;
    Ok(e)
}

pub fn lambda_nz_dense<G: Graph + ?Sized>(g: &G, set: &[Vertex]) -> Result<f64> {
    let op = LocalOperator::neumann(g, set)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(op.dense()).eigenvalues.iter().map(|b| 1.0 - b).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev.get(1).copied().unwrap_or(0.0))
}
