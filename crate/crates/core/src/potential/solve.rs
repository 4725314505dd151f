use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Chain;
use crate::heat::Window;
use crate::vertex::Vertex;

/// Unknown counts at or below this are also solved densely as an oracle.
pub const DENSE_ORACLE_LIMIT: usize = 2000;

const CG_CAP: usize = 2_000_000;

/// A Dirichlet problem on the lumped states of a window:
/// f(s) − Σ_t M(s,t) f(t) = b(s) on free states, f = fixed value elsewhere.
pub(crate) struct Problem<'a> {
    pub window: &'a Window,
    pub fixed: &'a [Option<f64>],
    pub rhs: &'a [f64],
}

#[derive(Clone, Debug)]
pub(crate) struct Solved {
    pub f: Vec<f64>,
    pub residual: f64,
}

impl Problem<'_> {
    fn free(&self) -> (Vec<usize>, Vec<u32>) {
        let mut free = Vec::new();
        let mut slot = vec![u32::MAX; self.window.len()];
        for s in 0..self.window.len() {
            if self.fixed[s].is_none() {
                slot[s] = free.len() as u32;
                free.push(s);
            }
        }
        (free, slot)
    }

    /// Right-hand side with the fixed values moved over.
    fn effective_rhs(&self, free: &[usize]) -> Vec<f64> {
        free.iter()
            .map(|&s| {
                let (dst, p) = self.window.fwd_row(s);
                let moved: f64 = dst.iter().zip(p).filter_map(|(t, q)| self.fixed[*t as usize].map(|v| v * q)).sum();
                self.rhs[s] + moved
            })
            .collect()
    }

    fn assemble(&self, f_free: &[f64], free: &[usize]) -> Vec<f64> {
        let mut f: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (k, s) in free.iter().enumerate() {
            f[*s] = f_free[k];
        }
        f
    }

    /// max over free states of |f − Mf − b|.
    pub fn residual(&self, f: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.window.len() {
            if self.fixed[s].is_some() {
                continue;
            }
            let (dst, p) = self.window.fwd_row(s);
            let mf: f64 = dst.iter().zip(p).map(|(t, q)| q * f[*t as usize]).sum();
            worst = worst.max((f[s] - mf - self.rhs[s]).abs());
        }
        worst
    }

    /// Conjugate gradients on D^{1/2}(I − M)D^{-1/2}, D = orbit·π (symmetric by
    /// reversibility). Stops when the unscaled residual is at most `tol`.
    pub fn solve_cg(&self, tol: f64) -> Result<Solved> {
        let w = self.window;
        let (free, slot) = self.free();
        let m = free.len();
        let mut sqrt_d = Vec::with_capacity(m);
        for &s in &free {
            let d = w.orbit(s) * w.weight(s);
            if d <= 0.0 {
                return Err(Error::Weights { vertex: w.rep(s), detail: "zero weight in a Dirichlet problem".into() });
            }
            sqrt_d.push(d.sqrt());
        }
        let mut ptr = vec![0usize];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for (k, &s) in free.iter().enumerate() {
            let (dst, p) = w.fwd_row(s);
            let mut diag = 1.0;
            for (t, q) in dst.iter().zip(p) {
                let j = slot[*t as usize];
                if j == u32::MAX {
                    continue;
                }
                if j as usize == k {
                    diag -= q;
                } else {
                    col.push(j);
                    val.push(-q * sqrt_d[k] / sqrt_d[j as usize]);
                }
            }
            col.push(k as u32);
            val.push(diag);
            ptr.push(col.len());
        }
        let apply = |x: &[f64], y: &mut [f64]| {
            for (i, yi) in y.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in ptr[i]..ptr[i + 1] {
                    acc += val[k] * x[col[k] as usize];
                }
                *yi = acc;
            }
        };
        let b: Vec<f64> = self.effective_rhs(&free).iter().zip(&sqrt_d).map(|(b, d)| b * d).collect();
        let unscaled = |r: &[f64]| r.iter().zip(&sqrt_d).map(|(r, d)| (r / d).abs()).fold(0.0, f64::max);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut x = vec![0.0; m];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut ap = vec![0.0; m];
        let mut rr = dot(&r, &r);
        let mut it = 0;
        while unscaled(&r) > tol {
            if it >= CG_CAP {
                return Err(Error::NoConvergence { cap: CG_CAP, residual: unscaled(&r) });
            }
            apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::NoConvergence { cap: it, residual: unscaled(&r) });
            }
            let alpha = rr / pap;
            for i in 0..m {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            it += 1;
            // Recompute the true residual now and then to stop drift.
            if it % 200 == 0 {
                apply(&x, &mut ap);
                for i in 0..m {
                    r[i] = b[i] - ap[i];
                }
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..m {
                p[i] = r[i] + beta * p[i];
            }
        }
        let f_free: Vec<f64> = x.iter().zip(&sqrt_d).map(|(y, d)| y / d).collect();
        let f = self.assemble(&f_free, &free);
        let residual = self.residual(&f);
        Ok(Solved { f, residual })
    }

    /// Dense LU solve of the same system.
    pub fn solve_dense(&self) -> Result<Solved> {
        let (free, slot) = self.free();
        let m = free.len();
        if m > DENSE_ORACLE_LIMIT {
            return Err(Error::Param(format!("{m} unknowns exceed the dense oracle limit {DENSE_ORACLE_LIMIT}")));
        }
        let mut a = DMatrix::<f64>::identity(m, m);
        for (k, &s) in free.iter().enumerate() {
            let (dst, p) = self.window.fwd_row(s);
            for (t, q) in dst.iter().zip(p) {
                let j = slot[*t as usize];
                if j != u32::MAX {
                    a[(k, j as usize)] -= q;
                }
            }
        }
        let b = DVector::from_vec(self.effective_rhs(&free));
        let x = a.lu().solve(&b).ok_or_else(|| Error::Param("singular Dirichlet problem".into()))?;
        let f = self.assemble(x.as_slice(), &free);
        let residual = self.residual(&f);
        Ok(Solved { f, residual })
    }
}

/// Σ_{y outside the window} K(rep s, y)·outer(y) for every state not in `skip`.
pub(crate) fn exterior_rhs<C: Chain + ?Sized>(
    chain: &C,
    w: &Window,
    outer: &dyn Fn(&Vertex) -> f64,
    skip: &[bool],
) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    let mut row = Vec::new();
    for (s, rhs) in out.iter_mut().enumerate() {
        if w.exit(s) == 0.0 || skip[s] {
            continue;
        }
        row.clear();
        chain.row(&w.rep(s), &mut row);
        *rhs = row
            .iter()
            .filter(|(v, _)| chain.alive(v) && w.state(v).is_none())
            .map(|(v, p)| p * outer(v).clamp(0.0, 1.0))
            .sum();
    }
    out
}
