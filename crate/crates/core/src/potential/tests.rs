use std::sync::{Arc, OnceLock};

use super::*;
use crate::constructions::{gallery, GalleryParams};
use crate::graph::{Graph, GraphRef, Lattice, MarkovKernel, Subgraph};
use crate::heat::{evolve, Exec};
use crate::symmetry::{Block, BlockSymmetry, Symmetry, Trivial};

fn lat(d: usize) -> MarkovKernel {
    MarkovKernel::new(Arc::new(Lattice::new(d)))
}

fn lsym(d: usize) -> Arc<dyn Symmetry> {
    Arc::new(BlockSymmetry::lattice(d))
}

fn origin(v: &Vertex) -> bool {
    *v == Vertex::ORIGIN
}

/// Green sums on Z³ shared by every test that needs certified exterior bounds.
fn z3_green() -> &'static LatticeGreen {
    static G: OnceLock<LatticeGreen> = OnceLock::new();
    G.get_or_init(|| LatticeGreen::new(3, 1024, 45).unwrap())
}

#[test]
fn z1_matches_gamblers_ruin() {
    let r = 50;
    let sol = hitting_prob(&lat(1), lsym(1), &Vertex::ORIGIN, &origin, r, &trivial_outer, 1e-13).unwrap();
    for x in 1..=r as i32 {
        let v = Vertex::at(&[x]);
        let exact = 1.0 - x as f64 / (r as f64 + 1.0);
        assert!((sol.lower_at(&v).unwrap() - exact).abs() < 1e-9, "x = {x}");
        assert_eq!(sol.upper_at(&v).unwrap(), 1.0);
    }
    assert!(sol.oracle_gap.unwrap() < 1e-10);
}

#[test]
fn z1_lower_bounds_climb_to_one() {
    let x = Vertex::at(&[3]);
    let mut last = 0.0;
    for r in [10, 40, 160, 640] {
        let sol = hitting_prob(&lat(1), lsym(1), &Vertex::ORIGIN, &origin, r, &trivial_outer, 1e-13).unwrap();
        let lo = sol.lower_at(&x).unwrap();
        assert!(lo > last);
        last = lo;
    }
    assert!(last > 0.995);
}

#[test]
fn target_vertices_have_probability_one() {
    let k = |v: &Vertex| v.l1() <= 1;
    let sol = hitting_prob(&lat(2), lsym(2), &Vertex::ORIGIN, &k, 6, &trivial_outer, 1e-12).unwrap();
    for v in [Vertex::ORIGIN, Vertex::at(&[1, 0]), Vertex::at(&[0, -1])] {
        assert_eq!(sol.lower_at(&v), Some(1.0));
        assert_eq!(sol.upper_at(&v), Some(1.0));
    }
}

#[test]
fn iterative_and_dense_solves_agree() {
    let sol = hitting_prob(&lat(3), lsym(3), &Vertex::ORIGIN, &origin, 12, &|_: &Vertex| 0.3, 1e-13).unwrap();
    assert!(sol.oracle_gap.unwrap() < 1e-10);
}

#[test]
fn return_bound_dominates_exact_returns() {
    let mut st = evolve(&lat(3), lsym(3), &Vertex::ORIGIN, 0, 121, Exec::Sequential).unwrap();
    let mut sum = 0.0;
    for n in 1..=120u64 {
        st.step(Exec::Sequential);
        let k = st.u(&Vertex::ORIGIN);
        assert!(k <= return_bound(3, n), "n = {n}");
        if n > 30 {
            sum += k;
        }
    }
    assert!(sum <= return_tail(3, 30).unwrap());
    assert!(return_tail(2, 100).is_err());
    assert!(return_tail(3, 5).is_err());
}

#[test]
fn z3_point_is_uniformly_transient() {
    let lg = z3_green();
    let outer = |v: &Vertex| lg.psi_upper(v);
    let sweep = hitting_sweep(&lat(3), lsym(3), &Vertex::ORIGIN, &origin, &[20, 30, 40], &outer, 1e-12).unwrap();
    for pair in sweep.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for v in a.window().reps() {
            let (la, lb) = (a.lower_at(v).unwrap(), b.lower_at(v).unwrap());
            let (ua, ub) = (a.upper_at(v).unwrap(), b.upper_at(v).unwrap());
            assert!(lb >= la - 1e-12 && ub <= ua && lb <= ub, "{v}");
        }
    }
    let x = Vertex::at(&[5, 0, 0]);
    assert!(sweep[2].upper_at(&x).unwrap() < 0.1);
    assert!(sweep[2].lower_at(&x).unwrap() > 0.05);
    let diag = s_transience_diagnose(&sweep[1], 5, 0.01).unwrap();
    assert_eq!(diag.shell, (5, 15));
    assert_eq!(diag.verdict, Verdict::Uniform);
    assert!(diag.epsilon > 0.85);
}

#[test]
fn z1_is_not_uniformly_transient() {
    let sol = hitting_prob(&lat(1), lsym(1), &Vertex::ORIGIN, &origin, 400, &trivial_outer, 1e-13).unwrap();
    let diag = s_transience_diagnose(&sol, 1, 0.01).unwrap();
    assert_eq!(diag.verdict, Verdict::NotUniform);
}

#[test]
fn wide_bracket_is_inconclusive() {
    let sol = hitting_prob(&lat(3), lsym(3), &Vertex::ORIGIN, &origin, 10, &trivial_outer, 1e-12).unwrap();
    let diag = s_transience_diagnose(&sol, 2, 0.01).unwrap();
    assert!(matches!(diag.verdict, Verdict::Inconclusive(_)));
}

#[test]
fn axis_in_z4_reduces_to_a_point_in_z3() {
    // Hitting the x₁-axis of Z⁴ from x is hitting o in Z³ from the transverse part of x.
    let lg = z3_green();
    let axis = |v: &Vertex| v.x[1..].iter().all(|c| *c == 0);
    let sym: Arc<dyn Symmetry> = Arc::new(BlockSymmetry::new().tag(0, vec![Block::signed(0..1), Block::signed(1..4)]));
    let direct = hitting_prob(&lat(4), sym, &Vertex::ORIGIN, &axis, 16, &trivial_outer, 1e-12).unwrap();
    let outer = |v: &Vertex| lg.psi_upper(v);
    let reduced = hitting_prob(&lat(3), lsym(3), &Vertex::ORIGIN, &origin, 30, &outer, 1e-12).unwrap();
    for v in [Vertex::at(&[0, 2, 0, 0]), Vertex::at(&[3, 1, 1, 0]), Vertex::at(&[1, 4, 0, 1])] {
        let t = transverse(&v, 1);
        let (lo, hi) = (direct.lower_at(&v).unwrap(), reduced.upper_at(&t).unwrap());
        assert!(lo <= hi, "{v}: {lo} > {hi}");
    }
    assert_eq!(s_transience_diagnose(&reduced, 5, 0.01).unwrap().verdict, Verdict::Uniform);
}

#[test]
fn parabola_in_z4_is_hit_more_easily_where_it_widens() {
    let parabola =
        |v: &Vertex| v.x[2] == 0 && v.x[3] == 0 && v.x[0] >= 0 && (v.x[1] as i64).pow(2) <= v.x[0] as i64;
    let sym: Arc<dyn Symmetry> =
        Arc::new(BlockSymmetry::new().tag(0, vec![Block::signed(1..2), Block::signed(2..4)]));
    let mut last = 0.0;
    for m in [4, 36, 144] {
        let c = Vertex::at(&[m, 0, 0, 0]);
        let sol = hitting_prob(&lat(4), sym.clone(), &c, &parabola, 14, &trivial_outer, 1e-11).unwrap();
        let above = sol.lower_at(&Vertex::at(&[m, 0, 1, 0])).unwrap();
        assert!(above > last, "m = {m}: {above} after {last}");
        last = above;
    }
}

#[test]
fn monte_carlo_agrees_with_linear_solves() {
    let cases: Vec<(MarkovKernel, Arc<dyn Symmetry>, u32, Vertex)> = vec![
        (lat(1), lsym(1), 20, Vertex::at(&[5])),
        (lat(2), lsym(2), 8, Vertex::at(&[2, 1])),
        (lat(3), lsym(3), 6, Vertex::at(&[1, 1, 0])),
    ];
    for (i, (k, sym, r, x)) in cases.into_iter().enumerate() {
        let sol = hitting_prob(&k, sym, &Vertex::ORIGIN, &origin, r, &trivial_outer, 1e-13).unwrap();
        let mc = mc_hitting(&k, sol.window(), &x, &origin, 100_000, 7 + i as u64);
        let psi = sol.lower_at(&x).unwrap();
        assert!(mc.agrees(psi, 3.0), "case {i}: {mc:?} vs {psi}");
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let sol = hitting_prob(&lat(2), lsym(2), &Vertex::ORIGIN, &origin, 5, &trivial_outer, 1e-12).unwrap();
    let a = mc_hitting(&lat(2), sol.window(), &Vertex::at(&[1, 1]), &origin, 20_000, 3);
    let b = mc_hitting(&lat(2), sol.window(), &Vertex::at(&[1, 1]), &origin, 20_000, 3);
    assert_eq!(a.hits, b.hits);
}

#[test]
fn dirichlet_green_grows_with_radius() {
    let x = Vertex::at(&[4, 0, 0]);
    let upper = z3_green().green(&x).unwrap().upper;
    let mut last = 0.0;
    for r in [10, 20, 40, 80] {
        let g = dirichlet_green(&lat(3), lsym(3), &Vertex::ORIGIN, r, 1e-13).unwrap();
        assert!(g.at(&x) > last && g.at(&x) <= upper);
        last = g.at(&x);
    }
}

#[test]
fn z3_green_decays_like_inverse_distance() {
    let lg = z3_green();
    let outer = |v: &Vertex| lg.psi_upper(v);
    let scheme = GreenScheme::Dirichlet { radius: 40, outer: &outer, tol: 1e-13 };
    for r in [4, 8, 16] {
        let x = Vertex::at(&[r, 0, 0]);
        let g = green(&lat(3), lsym(3), &x, &Vertex::ORIGIN, &scheme).unwrap();
        let s = lg.green(&x).unwrap();
        assert!(g.bracket.overlaps(&s));
        let (lo, hi) = (g.bracket.lower.max(s.lower) * r as f64, g.bracket.upper.min(s.upper) * r as f64);
        // The continuum constant for this walk is 3/(4π·3) ≈ 0.080.
        let c = 3.0 / (12.0 * std::f64::consts::PI);
        assert!(lo < c && hi > c && (lo + hi) / 2.0 > 0.04 && (lo + hi) / 2.0 < 0.2, "|x| = {r}: [{lo}, {hi}]");
    }
}

#[test]
fn green_bracket_narrows_with_radius() {
    let lg = z3_green();
    let outer = |v: &Vertex| lg.psi_upper(v);
    let x = Vertex::at(&[4, 0, 0]);
    let mut last = f64::INFINITY;
    for r in [20, 30, 40] {
        let scheme = GreenScheme::Dirichlet { radius: r, outer: &outer, tol: 1e-13 };
        let g = green(&lat(3), lsym(3), &x, &Vertex::ORIGIN, &scheme).unwrap();
        assert!(!g.lower_only && g.rel_width() < last);
        last = g.rel_width();
    }
    // 0.30 at R = 40: the certified exterior bound ψ̄ ≈ 0.02 dominates the width.
    assert!(last < 0.35, "{last}");
}

#[test]
fn green_without_exterior_information_is_lower_only() {
    let scheme = GreenScheme::Dirichlet { radius: 10, outer: &trivial_outer, tol: 1e-12 };
    let g = green(&lat(3), lsym(3), &Vertex::at(&[2, 0, 0]), &Vertex::ORIGIN, &scheme).unwrap();
    assert!(g.lower_only && g.bracket.upper.is_infinite());
}

#[test]
fn constant_profile_gives_the_identity_transform() {
    let host = gallery("lattice", &GalleryParams::default()).unwrap();
    let p = HarmonicProfile::from_fn(host.clone(), 10, 1e-12, Arc::new(|_: &Vertex| 1.0)).unwrap();
    assert!(p.max_residual < 1e-15);
    let t = h_transform(&p).unwrap();
    let v = host.graph.from_page(1, &Vertex::at(&[2, -1]));
    assert_eq!(t.weight(&v), host.graph.weight(&v));
    assert_eq!(t.neighbor_list(&v), host.graph.neighbor_list(&v));
}

#[test]
fn nonpositive_profile_is_rejected() {
    let host = gallery("lattice", &GalleryParams::default()).unwrap();
    let p = HarmonicProfile::from_fn(host, 5, 1e-12, Arc::new(|v: &Vertex| 1.0 - v.l1() as f64 / 3.0));
    assert!(p.is_err() || h_transform(&p.unwrap()).is_err());
}

#[test]
fn z3_tail_profile_is_harmonic_with_positive_slope() {
    let tol = 1e-9;
    let p = build_h_z3_tail(40, tol).unwrap();
    assert!(p.a > 0.0);
    // 1 + G(o,o) with G(o,o) ≈ 0.25 for this walk.
    assert!(p.h_o > 1.2 && p.h_o < 1.3);
    assert!(p.max_residual <= tol);
    let tail = p.host.graph.from_page(2, &Vertex::at(&[7]));
    assert!((p.h(&tail) - (p.h_o + 7.0 * p.a)).abs() < 1e-12);
    let ys = [p.host.base, p.host.graph.from_page(1, &Vertex::at(&[2, 1, 0])), tail];
    for s in check_h_identity(&p, &ys, &[4, 16, 40], 40).unwrap() {
        assert!(s.rel_error <= 2.0 * tol, "{s:?}");
    }
}

#[test]
fn z3_z2_profile_is_harmonic_with_positive_slope() {
    let tol = 1e-9;
    let p = build_h_z3_z2(40, tol).unwrap();
    assert!(p.a > 0.0);
    assert!(p.max_residual <= tol);
    let far = p.host.graph.from_page(2, &Vertex::at(&[9, 4]));
    assert!(p.h(&far) > p.h_o);
    for s in check_h_identity(&p, &[p.host.base, far], &[8, 24], 30).unwrap() {
        assert!(s.rel_error <= 2.0 * tol, "{s:?}");
    }
}

#[test]
fn identity_window_must_stay_verified() {
    let p = build_h_z3_tail(10, 1e-9).unwrap();
    assert!(check_h_identity(&p, &[p.host.base], &[4], 11).is_err());
}

#[test]
fn potential_kernel_grows_like_log() {
    let pk = PotentialKernel::new(400, 1e-12).unwrap();
    let xs: Vec<Vertex> = [4, 8, 16].iter().map(|r| Vertex::at(&[*r, 0])).collect();
    let sums = potential_kernel_partial_sums(&xs, &[2048, 4096]).unwrap();
    for (x, s) in xs.iter().zip(&sums) {
        let g = pk.at(x);
        let oracle = richardson(s[0].1, s[1].1);
        assert!((g - oracle).abs() / g < 0.01, "{x}: {g} vs {oracle}");
    }
    for r in [4, 8, 16, 32] {
        let ratio = pk.at(&Vertex::at(&[r, 0])) / (r as f64).ln();
        assert!(ratio > 0.2 && ratio < 0.4, "|x| = {r}: {ratio}");
    }
}

#[test]
fn dirichlet_over_neumann_stays_in_a_band() {
    let g: GraphRef = Arc::new(Lattice::new(3));
    let sub = Subgraph::new(g, "Z3 minus o", |v| *v != Vertex::ORIGIN);
    let sym: Arc<dyn Symmetry> = Arc::new(BlockSymmetry::new().tag(0, vec![Block::signed(1..3)]));
    let samples = dirichlet_neumann_ratio(&sub, sym, &Vertex::at(&[1, 0, 0]), &[16, 32, 64, 128], 70).unwrap();
    for s in &samples {
        assert!(s.dirichlet.lower <= s.neumann.upper);
        // The limit is about (1 − ψ(e₁))² ≥ (1 − 0.341)².
        assert!(s.ratio.lower >= 0.4 && s.ratio.upper <= 1.0, "{s:?}");
    }
}

#[test]
fn trivial_symmetry_matches_lumped_solve() {
    let a = hitting_prob(&lat(2), lsym(2), &Vertex::ORIGIN, &origin, 9, &trivial_outer, 1e-13).unwrap();
    let b = hitting_prob(&lat(2), Arc::new(Trivial), &Vertex::ORIGIN, &origin, 9, &trivial_outer, 1e-13).unwrap();
    for v in b.window().reps() {
        assert!((a.lower_at(v).unwrap() - b.lower_at(v).unwrap()).abs() < 1e-10);
    }
}
