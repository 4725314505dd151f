use std::sync::Arc;

use super::*;
use crate::constructions::{augmented_page, gallery, GalleryParams};
use crate::graph::{FiniteGraph, Graph, GraphRef, Lattice, LatticeRegion, Scaled, Subgraph};
use crate::spectral::{fit_harnack_fk, lambda_nz_dense};

fn z(d: usize) -> GraphRef {
    Arc::new(Lattice::new(d))
}

#[test]
fn z2_doubling_at_radius_one() {
    let r = doubling_profile(&Lattice::new(2), &Vertex::ORIGIN, &[1]).unwrap();
    assert!((r[0] - 13.0 / 5.0).abs() < 1e-15);
    assert!(doubling_profile(&Lattice::new(2), &Vertex::ORIGIN, &[0]).is_err());
}

#[test]
fn z1_doubling_tends_to_two() {
    let radii = [1, 10, 100, 1000];
    let r = doubling_profile(&Lattice::new(1), &Vertex::ORIGIN, &radii).unwrap();
    for (ratio, rad) in r.iter().zip(radii) {
        let want = (4 * rad + 1) as f64 / (2 * rad + 1) as f64;
        assert!((ratio - want).abs() < 1e-12);
    }
    assert!((r[3] - 2.0).abs() < 1e-3);
}

#[test]
fn single_vertex_ball_has_zero_constant() {
    let p = poincare_constant(&Lattice::new(2), &Vertex::ORIGIN, 0).unwrap();
    assert_eq!((p.size, p.c_p), (1, 0.0));
}

#[test]
fn two_vertex_path() {
    let g = FiniteGraph::lazy_path(2);
    let p = poincare_constant(&g, &Vertex::at(&[0]), 1).unwrap();
    // Neumann kernel [[1 − μ/π₀, μ/π₀], [μ/π₁, 1 − μ/π₁]] has eigenvalues 1 and 1 − μ/π₀ − μ/π₁.
    let (p0, p1) = (g.weight(&Vertex::at(&[0])), g.weight(&Vertex::at(&[1])));
    let lam = 1.0 / p0 + 1.0 / p1;
    assert!((p.lambda_nz - lam).abs() < 1e-14);
    assert!((p.c_p - 1.0 / (2.0 * lam)).abs() < 1e-14);
}

#[test]
fn z2_poincare_stabilizes() {
    let g = Lattice::new(2);
    let cs: Vec<f64> = [4, 8, 16].iter().map(|r| poincare_constant(&g, &Vertex::ORIGIN, *r).unwrap().c_p).collect();
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |a, c| (a.0.min(*c), a.1.max(*c)));
    assert!(hi / lo <= 2.0, "{cs:?}");
    let b = crate::graph::ball(&g, &Vertex::ORIGIN, 4);
    let dense = lambda_nz_dense(&g, &b).unwrap();
    let it = poincare_constant(&g, &Vertex::ORIGIN, 4).unwrap();
    assert!((it.lambda_nz - dense).abs() < 1e-8);
    assert!(it.residual <= POINCARE_TOL);
}

#[test]
fn poincare_scale_invariant() {
    let a = poincare_constant(&Lattice::new(2), &Vertex::ORIGIN, 5).unwrap().c_p;
    let b = poincare_constant(&Scaled { inner: Lattice::new(2), factor: 3.0 }, &Vertex::ORIGIN, 5).unwrap().c_p;
    assert!((a - b).abs() < 1e-6 * a);
}

fn box6() -> Subgraph {
    Subgraph::new(z(2), "box", |v| (0..6).contains(&v.x[0]) && (0..6).contains(&v.x[1]))
}

/// Exhaustive search over all walks of exactly k steps in the subgraph.
fn brute_best(sub: &Subgraph, x: &Vertex, y: &Vertex, k: u32, cap: u32) -> f64 {
    let memo = std::cell::RefCell::new(std::collections::HashMap::new());
    let clear = |v: &Vertex| -> f64 {
        *memo.borrow_mut().entry(*v).or_insert_with(|| {
            let mut best = cap + 1;
            for c in crate::graph::ball_with_dist(&**sub.parent(), v, cap) {
                if !sub.is_member(&c.0) {
                    best = best.min(c.1);
                }
            }
            best as f64
        })
    };
    fn go(sub: &Subgraph, v: Vertex, y: &Vertex, j: u32, k: u32, cur: f64, clear: &dyn Fn(&Vertex) -> f64) -> f64 {
        if j == k {
            return if v == *y { cur } else { f64::NEG_INFINITY };
        }
        let mut best = f64::NEG_INFINITY;
        for (w, _) in sub.neighbor_list(&v) {
            let c = cur.min(clear(&w) / (1.0 + (j + 1).min(k - j - 1) as f64));
            best = best.max(go(sub, w, y, j + 1, k, c, clear));
        }
        best
    }
    go(sub, *x, y, 0, k, clear(x), &clear)
}

#[test]
fn uniform_dp_matches_brute_force_on_box() {
    let sub = box6();
    let budget = UniformBudget { c_max: 3.0, ..Default::default() };
    let pairs = [(Vertex::at(&[0, 0]), Vertex::at(&[3, 0])), (Vertex::at(&[1, 0]), Vertex::at(&[2, 2]))];
    for res in check_uniform(&sub, UniformMode::Uniform, &pairs, &budget) {
        let w = res.best.clone().unwrap();
        for (k, c) in &res.profile {
            assert!(*k <= 9);
            let b = brute_best(&sub, &w.x, &w.y, *k, budget.clearance_cap);
            assert!((b - c).abs() < 1e-15, "k={k}: dp {c} vs brute {b}");
        }
        verify_witness(&sub, &w, budget.clearance_cap).unwrap();
    }
}

#[test]
fn half_plane_axis_pairs() {
    let sub = Subgraph::new(z(2), "H+", |v| v.x[1] >= 0);
    let budget = UniformBudget { c_max: 3.0, ..Default::default() };
    for a in [2, 4, 8] {
        let pair = (Vertex::at(&[0, 0]), Vertex::at(&[a, 0]));
        let r = &check_uniform(&sub, UniformMode::Uniform, &[pair], &budget)[0];
        let w = r.best.as_ref().unwrap();
        // The straight path has c_u = 1/(1 + a/2); lifting off the axis does better.
        let straight = r.profile.iter().find(|e| e.0 == a as u32).unwrap().1;
        assert!((straight - 1.0 / (1.0 + (a / 2) as f64)).abs() < 1e-12);
        assert!(w.c_u > straight && w.c_u >= 0.5, "{w:?}");
        verify_witness(&sub, w, budget.clearance_cap).unwrap();
    }
}

#[test]
fn identical_endpoints_are_trivial() {
    let sub = box6();
    let x = Vertex::at(&[2, 3]);
    let r = &check_uniform(&sub, UniformMode::Inner, &[(x, x)], &UniformBudget::default())[0];
    let w = r.best.as_ref().unwrap();
    assert_eq!((w.path.len(), w.d), (1, 0));
    assert_eq!(w.c_u, 3.0);
    verify_witness(&sub, w, 64).unwrap();
}

#[test]
fn slit_plane_is_inner_uniform_only() {
    let sub = Subgraph::new(z(2), "slit", |v| !(v.x[1] == 0 && v.x[0] > 0));
    let budget = UniformBudget { c_max: 4.0, ..Default::default() };
    for a in [2, 4, 8] {
        let pair = (Vertex::at(&[a, 1]), Vertex::at(&[a, -1]));
        let inner = &check_uniform(&sub, UniformMode::Inner, &[pair], &budget)[0];
        let w = inner.best.as_ref().unwrap();
        assert!(w.c_u >= 0.2, "a={a}: {w:?}");
        verify_witness(&sub, w, budget.clearance_cap).unwrap();
        let uni = &check_uniform(&sub, UniformMode::Uniform, &[pair], &budget)[0];
        match &uni.best {
            // Any path has length ≥ 2a + 2 against d_Γ̂ = 2.
            Some(u) => assert!(u.c_upper >= (a + 1) as f64),
            None => assert_eq!(uni.status, UniformStatus::Refuted),
        }
    }
    let far = (Vertex::at(&[8, 1]), Vertex::at(&[8, -1]));
    assert_eq!(check_uniform(&sub, UniformMode::Uniform, &[far], &budget)[0].status, UniformStatus::Refuted);
}

#[test]
fn uniform_witness_is_inner_witness() {
    let sub = Subgraph::new(z(2), "H+", |v| v.x[1] >= 0);
    let pair = (Vertex::at(&[-2, 1]), Vertex::at(&[3, 2]));
    let r = &check_uniform(&sub, UniformMode::Uniform, &[pair], &UniformBudget::default())[0];
    let mut w = r.best.clone().unwrap();
    w.mode = UniformMode::Inner;
    verify_witness(&sub, &w, 64).unwrap();
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let sub = Subgraph::new(z(2), "H+", |v| v.x[1] >= 0);
    let budget = UniformBudget { max_states: 100, ..Default::default() };
    let r = &check_uniform(&sub, UniformMode::Uniform, &[(Vertex::at(&[0, 0]), Vertex::at(&[5, 0]))], &budget)[0];
    assert!(matches!(r.status, UniformStatus::Inconclusive(_)));
    assert!(r.best.is_none());
}

#[test]
fn verifier_rejects_tampered_witness() {
    let sub = box6();
    let r = &check_uniform(&sub, UniformMode::Uniform, &[(Vertex::at(&[0, 0]), Vertex::at(&[3, 0]))], &UniformBudget::default())[0];
    let mut w = r.best.clone().unwrap();
    w.c_u *= 1.5;
    assert!(verify_witness(&sub, &w, 64).is_err());
    let mut w = r.best.clone().unwrap();
    w.path.insert(1, Vertex::at(&[5, 5]));
    assert!(verify_witness(&sub, &w, 64).is_err());
}

fn window(r: u32) -> QiWindow {
    QiWindow { center1: Vertex::ORIGIN, radius1: r, center2: Vertex::ORIGIN, radius2: r, cap: 8 * r }
}

#[test]
fn identity_map() {
    let m = QuasiIsometryMap::new(z(2), z(2), |v| *v, |v| *v);
    let q = check_quasi_isometry(&m, &window(3)).unwrap();
    assert_eq!((q.a, q.b, q.eps, q.c_q), (1.0, 0.0, 0, 1.0));
}

fn doubling_map() -> QuasiIsometryMap {
    let g2: GraphRef = Arc::new(Scaled { inner: Lattice::new(1), factor: 2.0 });
    QuasiIsometryMap::new(z(1), g2, |v| Vertex::at(&[2 * v.x[0]]), |v| Vertex::at(&[v.x[0].div_euclid(2)]))
}

#[test]
fn doubling_map_constants() {
    let q = check_quasi_isometry(&doubling_map(), &window(6)).unwrap();
    assert_eq!((q.a, q.b, q.eps, q.c_q), (2.0, 0.0, 1, 2.0));
}

#[test]
fn augmented_page_inclusion() {
    let gg = gallery("half-planes", &GalleryParams::default()).unwrap();
    let aug: GraphRef = Arc::new(augmented_page(&gg.graph, 1, 1));
    let (g1, g2) = (gg.graph.clone(), gg.graph.clone());
    let m = QuasiIsometryMap::new(
        Arc::new(LatticeRegion::half_plane(true)),
        aug,
        move |v| g1.from_page(1, v),
        move |v| g2.to_page(1, v).unwrap(),
    );
    let q = check_quasi_isometry(&m, &window(3)).unwrap();
    // Axis weights add up over the two pages.
    assert_eq!((q.a, q.b, q.eps), (1.0, 0.0, 0));
    assert_eq!(q.c_q, 2.0);
}

#[test]
fn fk_transfers_across_the_doubling_map() {
    let m = doubling_map();
    let fit = fit_harnack_fk(&Lattice::new(1), &[(Vertex::ORIGIN, 2), (Vertex::ORIGIN, 4), (Vertex::ORIGIN, 8)], 17).unwrap();
    let balls = [(Vertex::ORIGIN, 4), (Vertex::at(&[3]), 6)];
    let good = QiFkConstants { c1: 0.1, c2: 0.5, c3: 0.5 };
    let rep = fk_transfer_check(&m, &fit, &good, &balls, 13).unwrap();
    assert!(rep.checked > 50);
    assert_eq!(rep.violations, 0, "{rep:?}");
    let bad = QiFkConstants { c1: 100.0, ..good };
    assert!(fk_transfer_check(&m, &fit, &bad, &balls, 13).unwrap().violations > 0);
}
