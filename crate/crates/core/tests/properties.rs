use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use spine_core::constructions::{gallery, gallery_names, GalleryGraph, GalleryParams};
use spine_core::geometry::poincare_constant;
use spine_core::graph::{ball, volume, Chain, DirichletKernel, GraphRef, Lattice, MarkovKernel, Scaled, Subgraph};
use spine_core::heat::{check_nesting, check_semigroup, check_symmetry, heat_kernel, heat_kernel_exact, Exec};
use spine_core::lab::fit_exponent;
use spine_core::potential::{build_h_z3_tail, h_transform, hitting_prob, trivial_outer, HarmonicProfile};
use spine_core::spectral::lambda1;
use spine_core::symmetry::Trivial;
use spine_core::Vertex;

fn galleries() -> &'static [GalleryGraph] {
    static G: OnceLock<Vec<GalleryGraph>> = OnceLock::new();
    G.get_or_init(|| gallery_names().map(|n| gallery(n, &GalleryParams::default()).unwrap()).collect())
}

fn tail_profile() -> &'static HarmonicProfile {
    static P: OnceLock<HarmonicProfile> = OnceLock::new();
    P.get_or_init(|| build_h_z3_tail(12, 1e-11).unwrap())
}

/// A vertex of some gallery graph within `r` of its base point.
fn pick(g: usize, i: usize, r: u32) -> (&'static GalleryGraph, Vertex) {
    let gg = &galleries()[g % galleries().len()];
    let b = ball(&*gg.graph, &gg.base, r);
    (gg, b[i % b.len()])
}

fn arb_site() -> impl Strategy<Value = (usize, usize)> {
    (0usize..64, 0usize..4096)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn kernel_rows_are_stochastic_and_reversible((g, i) in arb_site(), r in 0u32..4) {
        let (gg, v) = pick(g, i, r);
        let k = MarkovKernel::new(gg.graph_ref());
        let row = k.full_row(&v);
        prop_assert!((row.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(row.iter().all(|e| e.1 >= 0.0));
        let pv = k.weight(&v);
        for (w, p) in row {
            let back = k.prob(&w, &v) * k.weight(&w);
            prop_assert!((p * pv - back).abs() <= 1e-12 * pv, "{v} -> {w}");
        }
    }

    #[test]
    fn balls_and_volumes_grow((g, i) in arb_site(), r in 0u32..4) {
        let (gg, v) = pick(g, i, 2);
        let (small, large) = (ball(&*gg.graph, &v, r), ball(&*gg.graph, &v, r + 1));
        prop_assert!(small.iter().all(|x| large.contains(x)));
        prop_assert!(volume(&*gg.graph, &v, r) <= volume(&*gg.graph, &v, r + 1));
    }

    #[test]
    fn dirichlet_rows_never_exceed_neumann(x in -4i32..4, y in -4i32..4, cut in -3i32..3, box_r in 1i32..4) {
        let g: GraphRef = Arc::new(Lattice::new(2));
        let sub = Subgraph::new(g, "box", move |v: &Vertex| v.x[0] >= cut && v.x[0].abs() <= 4 && v.x[1].abs() <= box_r);
        let v = Vertex::at(&[x, y]);
        prop_assume!(sub.is_member(&v));
        let d = DirichletKernel::new(sub.clone()).row_sum(&v);
        let n: f64 = MarkovKernel::neumann(sub.clone()).full_row(&v).iter().map(|e| e.1).sum();
        prop_assert!(d <= n + 1e-15 && (n - 1.0).abs() <= 1e-12);
        prop_assert_eq!(d < 1.0 - 1e-15, sub.is_inner_boundary(&v));
    }

    #[test]
    fn heat_kernel_is_symmetric((g, i) in arb_site(), j in 0usize..4096, n in 0u32..9) {
        let (gg, x) = pick(g, i, 2);
        let (_, y) = pick(g, j, 2);
        let rep = check_symmetry(&MarkovKernel::new(gg.graph_ref()), &x, &y, n).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep.first_violation);
    }

    #[test]
    fn semigroup_identity_holds((g, i) in arb_site(), j in 0usize..4096, n in 0u32..6, m in 0u32..6) {
        let (gg, x) = pick(g, i, 2);
        let (_, y) = pick(g, j, 2);
        let rep = check_semigroup(&MarkovKernel::new(gg.graph_ref()), &x, &y, n, m).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep.first_violation);
    }

    #[test]
    fn brackets_nest_and_contain_the_exact_value((g, i) in arb_site(), n in 4u32..14, r in 1u32..4) {
        let (gg, y) = pick(g, i, 2);
        let x = gg.base;
        let k = MarkovKernel::new(gg.graph_ref());
        let (rep, brackets) = check_nesting(&k, Arc::new(Trivial), &x, &y, n, &[r, r + 2, n], Exec::default()).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep.first_violation);
        let exact = heat_kernel_exact(&k, n, &x, &y).unwrap();
        for b in brackets {
            prop_assert!(b.lower <= exact * (1.0 + 1e-12) && exact <= b.upper * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn execution_modes_agree_bitwise((g, i) in arb_site(), n in 1u32..20) {
        let (gg, y) = pick(g, i, 3);
        let k = MarkovKernel::new(gg.graph_ref());
        let a = heat_kernel(&k, gg.symmetry.clone(), n, &gg.base, &y, 8, Exec::Sequential).unwrap();
        let b = heat_kernel(&k, gg.symmetry.clone(), n, &gg.base, &y, 8, Exec::default()).unwrap();
        prop_assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        prop_assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    }

    #[test]
    fn lambda1_is_scale_invariant((g, i) in arb_site(), r in 1u32..3, c in 0.01f64..100.0) {
        let (gg, z) = pick(g, i, 2);
        let omega = ball(&*gg.graph, &z, r);
        let scaled = Scaled { inner: gg.graph.clone(), factor: c };
        let (a, b) = (lambda1(&*gg.graph, &omega).unwrap().value, lambda1(&scaled, &omega).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-3), "{a} vs {b}");
    }

    #[test]
    fn poincare_constant_is_scale_invariant(d in 1usize..4, r in 1u32..4, c in 0.01f64..100.0) {
        let a = poincare_constant(&Lattice::new(d), &Vertex::ORIGIN, r).unwrap();
        let b = poincare_constant(&Scaled { inner: Lattice::new(d), factor: c }, &Vertex::ORIGIN, r).unwrap();
        prop_assert!((a.c_p - b.c_p).abs() <= 1e-8 * a.c_p, "{} vs {}", a.c_p, b.c_p);
    }

    #[test]
    fn hitting_brackets_nest_in_radius(x in 1i32..6, y in 0i32..4, r in 8u32..12) {
        let k = MarkovKernel::new(Arc::new(Lattice::new(2)));
        let o = |v: &Vertex| *v == Vertex::ORIGIN;
        let v = Vertex::at(&[x, y]);
        let small = hitting_prob(&k, Arc::new(Trivial), &Vertex::ORIGIN, &o, r, &trivial_outer, 1e-13).unwrap();
        let large = hitting_prob(&k, Arc::new(Trivial), &Vertex::ORIGIN, &o, r + 3, &trivial_outer, 1e-13).unwrap();
        let (l0, u0) = (small.lower_at(&v).unwrap(), small.upper_at(&v).unwrap());
        let (l1, u1) = (large.lower_at(&v).unwrap(), large.upper_at(&v).unwrap());
        prop_assert!(l0 <= l1 + 1e-10 && u1 <= u0 + 1e-10 && l1 <= u1 + 1e-10, "[{l0}, {u0}] vs [{l1}, {u1}]");
    }

    #[test]
    fn h_transform_keeps_laziness_up_to_the_residual(i in 0usize..4096) {
        let p = tail_profile();
        let reps = p.window().reps();
        let v = reps[i % reps.len()];
        let th = MarkovKernel::new(Arc::new(h_transform(p).unwrap()));
        let base = MarkovKernel::new(p.host.graph_ref());
        let row = th.full_row(&v);
        prop_assert!((row.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() <= 1e-12);
        let diag = |k: &MarkovKernel| k.full_row(&v).last().unwrap().1;
        prop_assert!((diag(&th) - diag(&base)).abs() <= p.max_residual + 1e-12);
    }

    #[test]
    fn fit_recovers_power_laws(alpha in -3.0f64..-0.1, c in 1e-6f64..1e3, k0 in 2u32..6) {
        let series: Vec<_> = (k0..k0 + 8).map(|k| {
            let n = f64::from(1u32 << k);
            (n, c * n.powf(alpha), 0.0)
        }).collect();
        let fit = fit_exponent(&series, None).unwrap();
        prop_assert!((fit.slope - alpha).abs() < 1e-9 && fit.drift < 1e-9);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
    }
}
