use std::sync::Arc;

use serde::Serialize;

use super::green::{dirichlet_green, DirichletGreen};
use crate::constructions::{gallery, GalleryGraph, GalleryParams, GluedGraph};
use crate::error::{Error, Result};
use crate::graph::{Chain, Graph, GraphRef, Lattice, MarkovKernel};
use crate::heat::{Exec, HeatState, Window, DEFAULT_MAX_STATES};
use crate::symmetry::{BlockSymmetry, Symmetry};
use crate::vertex::Vertex;

type HFn = Arc<dyn Fn(&Vertex) -> f64 + Send + Sync>;

/// A positive function on a glued graph, harmonic within `tol` on B(o, verified_radius).
#[derive(Clone)]
pub struct HarmonicProfile {
    pub name: String,
    /// Slope of h along the attached page (the tail slope a).
    pub a: f64,
    pub h_o: f64,
    pub tol: f64,
    pub verified_radius: u32,
    /// Largest |h − Kh|/h over the verified window.
    pub max_residual: f64,
    /// Relative residual per lumped state of the verified window.
    pub residual_map: Vec<f64>,
    pub green_part: String,
    pub host: GalleryGraph,
    h: HFn,
    window: Arc<Window>,
}

impl HarmonicProfile {
    pub fn h(&self, v: &Vertex) -> f64 {
        (self.h)(v)
    }

    pub fn function(&self) -> HFn {
        self.h.clone()
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    /// A profile from an arbitrary positive function (used for h ≡ 1 and tests).
    pub fn from_fn(host: GalleryGraph, radius: u32, tol: f64, h: HFn) -> Result<Self> {
        let k = MarkovKernel::new(host.graph.clone());
        let window = Arc::new(Window::compile(&k, host.symmetry.clone(), &host.base, radius, DEFAULT_MAX_STATES)?);
        let residual_map = residuals(&k, &window, &*h)?;
        let max_residual = residual_map.iter().copied().fold(0.0, f64::max);
        Ok(HarmonicProfile {
            name: host.name.clone(),
            a: 0.0,
            h_o: h(&host.base),
            tol,
            verified_radius: radius,
            max_residual,
            residual_map,
            green_part: "user function".into(),
            host,
            h,
            window,
        })
    }
}

/// |h(v) − Σ K(v,w)h(w)|/h(v) at every window representative; errors on h ≤ 0.
fn residuals<C: Chain + ?Sized>(chain: &C, w: &Window, h: &dyn Fn(&Vertex) -> f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(w.len());
    let mut row = Vec::new();
    for v in w.reps() {
        let hv = h(v);
        if hv <= 0.0 || !hv.is_finite() {
            return Err(Error::Param(format!("h({v}) = {hv} is not positive")));
        }
        row.clear();
        let diag = chain.row(v, &mut row);
        let kh: f64 = diag * hv + row.iter().map(|(u, p)| p * h(u)).sum::<f64>();
        out.push((hv - kh).abs() / hv);
    }
    Ok(out)
}

/// Green part on page 1 (Z³) plus a·φ on page 2, with a solved so h is harmonic at o.
fn build(
    name: &str,
    radius: u32,
    tol: f64,
    phi: impl Fn(&Vertex) -> f64 + Send + Sync + 'static,
    green_part: String,
) -> Result<HarmonicProfile> {
    let host = gallery(name, &GalleryParams::default())?;
    let g3 = Arc::new(lattice_green(3, radius, tol)?);
    let h_o = 1.0 + g3.at(&Vertex::ORIGIN);
    let glued: Arc<GluedGraph> = host.graph.clone();
    let phi = Arc::new(phi);
    let make = |a: f64| -> HFn {
        let (g3, glued, phi) = (g3.clone(), glued.clone(), phi.clone());
        Arc::new(move |v: &Vertex| {
            if let Some(x) = glued.to_page(1, v) {
                1.0 + g3.at(&x)
            } else if let Some(x) = glued.to_page(2, v) {
                h_o + a * phi(&x)
            } else {
                f64::NAN
            }
        })
    };
    let kernel = MarkovKernel::new(host.graph.clone());
    let o = host.base;
    let mut row = Vec::new();
    let diag = kernel.row(&o, &mut row);
    let h0 = make(0.0);
    let slack = h_o - diag * h_o - row.iter().map(|(v, p)| p * h0(v)).sum::<f64>();
    let weight: f64 = row.iter().filter(|(v, _)| glued.in_page(2, v) && !glued.in_spine(v)).map(|(v, p)| {
        p * phi(&glued.to_page(2, v).unwrap())
    }).sum();
    if weight <= 0.0 || slack <= 0.0 {
        return Err(Error::Param(format!("no positive slope: slack {slack}, attached weight {weight}")));
    }
    let a = slack / weight;
    let h = make(a);
    let window = Arc::new(Window::compile(&kernel, host.symmetry.clone(), &o, radius, DEFAULT_MAX_STATES)?);
    let residual_map = residuals(&kernel, &window, &*h)?;
    let max_residual = residual_map.iter().copied().fold(0.0, f64::max);
    if max_residual > tol {
        return Err(Error::Param(format!("harmonic residual {max_residual:e} exceeds tol {tol:e}")));
    }
    Ok(HarmonicProfile {
        name: name.into(),
        a,
        h_o,
        tol,
        verified_radius: radius,
        max_residual,
        residual_map,
        green_part,
        host,
        h,
        window,
    })
}

fn lattice_green(dim: usize, radius: u32, tol: f64) -> Result<DirichletGreen> {
    let k = MarkovKernel::new(Arc::new(Lattice::new(dim)));
    // h ≥ 1, so an absolute residual well below tol keeps the relative one below tol.
    dirichlet_green(&k, Arc::new(BlockSymmetry::lattice(dim)), &Vertex::ORIGIN, radius, tol * 1e-2)
}

/// h = 1 + G_R(x, o) on Z³ and a·t + h(o) on the tail, for Z³ with a half-line at o.
///
/// G_R is the Green function of Z³ killed outside B(o, R). It is exactly harmonic on the
/// ball minus o and vanishes outside, which is also its extension beyond the window.
pub fn build_h_z3_tail(radius: u32, tol: f64) -> Result<HarmonicProfile> {
    build("z3-tail", radius, tol, |x: &Vertex| x.x[0] as f64, format!("1 + G_R on Z^3, R = {radius}"))
}

/// h = 1 + G_R(x, o) on Z³ and a·g_R(x) + h(o) on Z², g_R(x) = G_R(o,o) − G_R(x,o) the
/// Dirichlet approximation of the potential kernel.
pub fn build_h_z3_z2(radius: u32, tol: f64) -> Result<HarmonicProfile> {
    let pk = Arc::new(PotentialKernel::new(radius, tol * 1e-2)?);
    build("z3-z2", radius, tol, move |x: &Vertex| pk.at(x), format!("1 + G_R on Z^3 and potential kernel on Z^2, R = {radius}"))
}

/// g_R(x) = G_R(o,o) − G_R(x,o) on Z², harmonic on B(o,R) ∖ {o} with (Kg)(o) = 1/π(o).
pub struct PotentialKernel {
    green: DirichletGreen,
}

impl PotentialKernel {
    pub fn new(radius: u32, tol: f64) -> Result<Self> {
        let k = MarkovKernel::new(Arc::new(Lattice::new(2)));
        let green = dirichlet_green(&k, Arc::new(BlockSymmetry::lattice(2)), &Vertex::ORIGIN, radius, tol)?;
        Ok(PotentialKernel { green })
    }

    pub fn at(&self, x: &Vertex) -> f64 {
        self.green.values[0] - self.green.at(x)
    }

    pub fn radius(&self) -> u32 {
        self.green.radius
    }
}

/// Partial sums S_N(x) = Σ_{n≤N}[p(n,o,o) − p(n,o,x)] on Z² for each x and each N in
/// `checkpoints`, from one evolution.
pub fn potential_kernel_partial_sums(xs: &[Vertex], checkpoints: &[u32]) -> Result<Vec<Vec<(u32, f64)>>> {
    let g: GraphRef = Arc::new(Lattice::new(2));
    let pi = g.weight(&Vertex::ORIGIN);
    let k = MarkovKernel::new(g);
    let n_max = *checkpoints.iter().max().ok_or(Error::TooFewPoints { got: 0, need: 1 })?;
    let reach = xs.iter().map(|x| x.l1() as u32).max().unwrap_or(0);
    let radius = ((7.0 * (n_max as f64).sqrt()) as u32 + reach + 4).min(n_max.max(reach));
    let w = Arc::new(Window::compile(&k, Arc::new(BlockSymmetry::lattice(2)), &Vertex::ORIGIN, radius, DEFAULT_MAX_STATES)?);
    let states = xs.iter().map(|x| w.state(x).ok_or(Error::NotInGraph(*x))).collect::<Result<Vec<_>>>()?;
    let mut st = HeatState::start(w.clone());
    let mut acc = vec![0.0; xs.len()];
    let mut out = vec![Vec::new(); xs.len()];
    loop {
        for (i, &sx) in states.iter().enumerate() {
            acc[i] += (st.mass[0] - st.mass[sx] / w.orbit(sx)) / pi;
            if checkpoints.contains(&st.n) {
                out[i].push((st.n, acc[i]));
            }
        }
        if st.n == n_max {
            break;
        }
        st.step(Exec::default());
    }
    Ok(out)
}

/// Richardson extrapolation of S_N assuming S_∞ − S_N ≈ c/N: 2S_{2N} − S_N.
pub fn richardson(s_n: f64, s_2n: f64) -> f64 {
    2.0 * s_2n - s_n
}

/// The Doob transform Γ_h: π_h = h²π and μ_h(x,y) = μ_xy h(x)h(y).
///
/// Its Markov kernel is K(x,y)h(y)/h(x) off the diagonal; the diagonal absorbs the
/// harmonic residual, so rows are exactly stochastic and differ from the formula
/// K(x,x) by (h − Kh)(x)/h(x).
pub struct HTransform {
    base: GraphRef,
    h: HFn,
}

impl HTransform {
    pub fn h(&self, v: &Vertex) -> f64 {
        (self.h)(v)
    }
}

impl Graph for HTransform {
    fn contains(&self, v: &Vertex) -> bool {
        self.base.contains(v)
    }
    fn weight(&self, v: &Vertex) -> f64 {
        let h = (self.h)(v);
        h * h * self.base.weight(v)
    }
    fn neighbors(&self, v: &Vertex, out: &mut Vec<(Vertex, f64)>) {
        let start = out.len();
        self.base.neighbors(v, out);
        let hv = (self.h)(v);
        for e in &mut out[start..] {
            e.1 *= hv * (self.h)(&e.0);
        }
    }
    fn label(&self) -> String {
        format!("{}^h", self.base.label())
    }
}

/// Γ_h for a profile; fails if h is not positive on the verified window.
pub fn h_transform(profile: &HarmonicProfile) -> Result<HTransform> {
    for v in profile.window().reps() {
        let hv = profile.h(v);
        if hv <= 0.0 || !hv.is_finite() {
            return Err(Error::Param(format!("h({v}) = {hv} is not positive")));
        }
    }
    Ok(HTransform { base: profile.host.graph.clone(), h: profile.function() })
}

/// One sampled instance of p_Γ(n,x,y) = h(x)h(y)p_{Γ_h}(n,x,y).
#[derive(Clone, Debug, Serialize)]
pub struct IdentitySample {
    pub n: u32,
    pub y: Vertex,
    pub p: f64,
    pub p_h: f64,
    pub rel_error: f64,
}

/// Compares both sides from the host's base point on a common window inside the verified
/// zone. Paths that stay in the window telescope exactly, so lower ends are compared.
pub fn check_h_identity(profile: &HarmonicProfile, ys: &[Vertex], times: &[u32], radius: u32) -> Result<Vec<IdentitySample>> {
    if radius > profile.verified_radius {
        return Err(Error::Param(format!("window {radius} leaves the verified radius {}", profile.verified_radius)));
    }
    let host = &profile.host;
    let sym: Arc<dyn Symmetry> = host.symmetry.clone();
    let base = MarkovKernel::new(host.graph.clone());
    let th = MarkovKernel::new(Arc::new(h_transform(profile)?));
    let w1 = Arc::new(Window::compile(&base, sym.clone(), &host.base, radius, DEFAULT_MAX_STATES)?);
    let w2 = Arc::new(Window::compile(&th, sym, &host.base, radius, DEFAULT_MAX_STATES)?);
    let (mut s1, mut s2) = (HeatState::start(w1), HeatState::start(w2));
    let mut sorted = times.to_vec();
    sorted.sort_unstable();
    let hx = profile.h(&host.base);
    let mut out = Vec::new();
    for n in sorted {
        s1.advance_to(n, Exec::default());
        s2.advance_to(n, Exec::default());
        for y in ys {
            let hy = profile.h(y);
            let p = s1.u(y) / base.weight(y);
            let p_h = s2.u(y) / th.weight(y);
            let rhs = hx * hy * p_h;
            let rel_error = if p == 0.0 { rhs.abs() } else { (p - rhs).abs() / p };
            out.push(IdentitySample { n, y: *y, p, p_h, rel_error });
        }
    }
    Ok(out)
}
