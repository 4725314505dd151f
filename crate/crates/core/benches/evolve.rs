use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spine_core::constructions::{gallery, GalleryParams};
use spine_core::graph::{Lattice, MarkovKernel};
use spine_core::heat::{Exec, HeatState, Window, DEFAULT_MAX_STATES};
use spine_core::symmetry::{BlockSymmetry, Symmetry, Trivial};
use spine_core::Vertex;

const STEPS: u32 = 64;

fn windows() -> Vec<(&'static str, Arc<Window>)> {
    let z2 = MarkovKernel::new(Arc::new(Lattice::new(2)));
    let z3 = MarkovKernel::new(Arc::new(Lattice::new(3)));
    let glued = gallery("z3-z3", &GalleryParams::default()).unwrap();
    let glued_chain = MarkovKernel::new(glued.graph_ref());
    let build = |chain: &MarkovKernel, sym: Arc<dyn Symmetry>, x: &Vertex, r| {
        Arc::new(Window::compile(chain, sym, x, r, DEFAULT_MAX_STATES).unwrap())
    };
    vec![
        ("z2-full-r120", build(&z2, Arc::new(Trivial), &Vertex::ORIGIN, 120)),
        ("z3-lumped-r160", build(&z3, Arc::new(BlockSymmetry::lattice(3)), &Vertex::ORIGIN, 160)),
        ("z3z3-lumped-r120", build(&glued_chain, glued.symmetry.clone(), &glued.base, 120)),
    ]
}

fn evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    for (name, w) in windows() {
        let modes: &[(&str, Exec)] = if cfg!(feature = "parallel") {
            &[("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
        } else {
            &[("sequential", Exec::Sequential)]
        };
        for &(mode, exec) in modes {
            group.bench_with_input(BenchmarkId::new(mode, name), &w, |b, w| {
                b.iter(|| {
                    let mut st = HeatState::start(w.clone());
                    st.advance_to(STEPS, exec);
                    st.mass[0]
                })
            });
        }
    }
    group.finish();
}

fn compile(c: &mut Criterion) {
    let z3 = MarkovKernel::new(Arc::new(Lattice::new(3)));
    let mut group = c.benchmark_group("window");
    group.sample_size(10);
    for r in [40u32, 80] {
        group.bench_with_input(BenchmarkId::new("z3-lumped", r), &r, |b, &r| {
            b.iter(|| Window::compile(&z3, Arc::new(BlockSymmetry::lattice(3)), &Vertex::ORIGIN, r, DEFAULT_MAX_STATES).unwrap().len())
        });
    }
    group.finish();
}

criterion_group!(benches, evolve, compile);
criterion_main!(benches);
