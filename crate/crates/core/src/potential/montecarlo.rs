use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::Chain;
use crate::heat::Window;
use crate::vertex::Vertex;

/// Walks per independent stream.
const SHARD: u64 = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub walks: u64,
    pub hits: u64,
    pub mean: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// Whether `v` lies within `k` standard errors of the estimate.
    pub fn agrees(&self, v: f64, k: f64) -> bool {
        // A floor keeps estimates of 0 or 1 from demanding exact agreement.
        let se = self.std_err.max(1.0 / self.walks as f64);
        (v - self.mean).abs() <= k * se
    }
}

/// Fraction of walks from `start` that reach K before leaving the window.
///
/// Shard i uses stream i of a ChaCha8 generator seeded with `seed`, so the result does
/// not depend on how shards are scheduled.
pub fn mc_hitting<C: Chain + ?Sized>(
    chain: &C,
    window: &Window,
    start: &Vertex,
    k: &dyn Fn(&Vertex) -> bool,
    walks: u64,
    seed: u64,
) -> McEstimate {
    let mut hits = 0u64;
    let mut row = Vec::new();
    let mut done = 0u64;
    let mut shard = 0u64;
    while done < walks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard);
        for _ in 0..SHARD.min(walks - done) {
            let mut v = *start;
            loop {
                if k(&v) {
                    hits += 1;
                    break;
                }
                if window.state(&v).is_none() || !chain.alive(&v) {
                    break;
                }
                row.clear();
                let diag = chain.row(&v, &mut row);
                let mut u: f64 = rng.random();
                if u < diag {
                    continue;
                }
                u -= diag;
                let mut next = None;
                for (w, p) in &row {
                    if u < *p {
                        next = Some(*w);
                        break;
                    }
                    u -= p;
                }
                // Rounding can leave u just past the last entry.
                v = next.unwrap_or_else(|| row.last().map(|e| e.0).unwrap_or(v));
            }
            done += 1;
        }
        shard += 1;
    }
    let mean = hits as f64 / walks as f64;
    McEstimate { walks, hits, mean, std_err: (mean * (1.0 - mean) / walks as f64).sqrt() }
}
