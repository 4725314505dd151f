use std::sync::Arc;

use serde::Serialize;

use crate::constructions::{gallery, gallery_names, GalleryGraph, GalleryParams};
use crate::error::{Error, Result};
use crate::graph::{ball, Graph, GraphRef, Lattice, MarkovKernel, Subgraph};
use crate::heat::{
    check_appendix_b, check_conservation, check_nesting, check_residual, check_semigroup, check_spine_bounds, check_symmetry,
    series, AppendixBParams, Exec, HeatSample, InvariantReport, SpineBoundsParams,
};
use crate::potential::{
    build_h_z3_tail, check_h_identity, dirichlet_neumann_ratio, hitting_prob, hitting_sweep, mc_hitting, s_transience_diagnose,
    trivial_outer, LatticeGreen, Verdict,
};
use crate::spectral::{calibrate, fit_harnack_fk, lambda1, lambda1_dense, validate_fk, HarnackFkFit};
use crate::symmetry::{Block, BlockSymmetry, Symmetry};
use crate::vertex::Vertex;

pub const SUITES: &[&str] = &["core-invariants", "fk", "spine-bounds", "appendix-b", "potential"];

/// Dense and iterative λ₁ must agree to this.
pub const EIGEN_AGREEMENT: f64 = 1e-8;

/// Lower end of the Dirichlet/Neumann band on Z³∖{o} at e₁: (1 − ψ⁺(e₁))² ≈ 0.434.
pub const RATIO_BAND_LOW: f64 = 0.4;

/// Fewest Ω the FK suite must check.
pub const FK_MIN_SETS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }

    fn from_report(prefix: &str, r: &InvariantReport) -> Self {
        let detail = match &r.first_violation {
            Some(v) => format!("{} of {} violated; first: {v}", r.violations, r.checked),
            None => format!("{} comparisons, max error {:.3e}", r.checked, r.max_error),
        };
        Check::new(format!("{prefix}/{}", r.name), r.ok(), detail)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, exec: Exec::default() }
    }
}

/// Runs one suite; failures are reported in the checks, errors only for unknown suites.
pub fn verify(suite: &str, opts: &VerifyOptions) -> Result<VerifyReport> {
    let checks = match suite {
        "core-invariants" => core_invariants(opts),
        "fk" => fk_suite(),
        "spine-bounds" => spine_bounds(opts),
        "appendix-b" => appendix_b(opts),
        "potential" => potential(opts),
        other => return Err(Error::Param(format!("unknown suite \"{other}\"; one of {SUITES:?}"))),
    };
    Ok(VerifyReport { suite: suite.to_string(), checks })
}

/// Turns an error inside a check into a failed check.
fn guard(name: &str, out: &mut Vec<Check>, f: impl FnOnce(&mut Vec<Check>) -> Result<()>) {
    if let Err(e) = f(out) {
        out.push(Check::new(name, false, format!("error: {e}")));
    }
}

/// A neighbour of the base point inside page 1, off the spine when possible.
fn probe(gg: &GalleryGraph) -> Vertex {
    let nb = gg.graph.neighbor_list(&gg.base);
    nb.iter().map(|e| e.0).find(|v| !gg.graph.in_spine(v)).or_else(|| nb.first().map(|e| e.0)).unwrap_or(gg.base)
}

fn core_invariants(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for name in gallery_names() {
        guard(name, &mut out, |out| {
            let gg = gallery(name, &GalleryParams::default())?;
            let chain = MarkovKernel::new(gg.graph_ref());
            let (x, y) = (gg.base, probe(&gg));
            let sym = gg.symmetry.clone();
            out.push(Check::from_report(name, &check_conservation(&chain, sym.clone(), &x, 12, 8, opts.exec)?));
            out.push(Check::from_report(name, &check_symmetry(&chain, &x, &y, 7)?));
            out.push(Check::from_report(name, &check_semigroup(&chain, &x, &y, 3, 4)?));
            out.push(Check::from_report(name, &check_residual(&chain, sym.clone(), &x, 10, 8, opts.exec)?));
            out.push(Check::from_report(name, &check_nesting(&chain, sym, &x, &y, 10, &[3, 5, 7, 10], opts.exec)?.0));

            let mut mono = InvariantReport::new("lambda1 monotone");
            let mut agree = InvariantReport::new("lambda1 dense vs iterative");
            let mut prev = f64::INFINITY;
            for r in 1..=3 {
                let b = ball(&*gg.graph, &x, r);
                let it = lambda1(&*gg.graph, &b)?.value;
                mono.record((it - prev).max(0.0), 1e-12, || format!("λ₁(B(x,{r})) = {it} > λ₁(B(x,{})) = {prev}", r - 1));
                prev = it;
                if b.len() <= 400 {
                    let d = lambda1_dense(&*gg.graph, &b)?;
                    agree.record((d - it).abs(), EIGEN_AGREEMENT, || format!("r = {r}: dense {d} vs iterative {it}"));
                }
            }
            out.push(Check::from_report(name, &mono));
            out.push(Check::from_report(name, &agree));
            Ok(())
        });
    }
    out
}

/// Lattice-like page graphs get fits from balls around their base point.
fn page_fits(gg: &GalleryGraph, s_max: usize) -> Result<Vec<HarnackFkFit>> {
    gg.graph
        .pages
        .iter()
        .map(|p| {
            let c = p.ident.from_spine(&gg.base).unwrap_or(Vertex::ORIGIN);
            let far = c.shifted(1, 3);
            fit_harnack_fk(&*p.graph, &[(c, 1), (c, 2), (far, 1), (far, 2)], s_max)
        })
        .collect()
}

fn fk_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let mut total = 0;
    let s_max = 4;
    for name in ["lattice-axis", "z3-z3", "half-planes"] {
        guard(name, &mut out, |out| {
            let gg = gallery(name, &GalleryParams::default())?;
            let g = &gg.graph;
            let fits = page_fits(&gg, s_max)?;
            let page_pt = |i: usize, c: &[i32]| g.from_page(i, &Vertex::at(c));
            let train = [(gg.base, 1), (page_pt(1, &[0, 1]), 1), (page_pt(2, &[0, 1]), 1)];
            let k = calibrate(g, &fits, &train, 1, s_max, 0.5)?;
            let validate = [
                (gg.base, 2),
                (page_pt(1, &[1, 1]), 2),
                (page_pt(2, &[1, 1]), 2),
                (page_pt(1, &[3, 2]), 2),
                (page_pt(2, &[0, 5]), 1),
            ];
            let check = validate_fk(g, &fits, &k, &validate, 1, s_max)?;
            total += check.checked;
            let detail = format!(
                "{} sets in {} balls, min λ₁/Λ = {:.3} (closed form {:.3}){}",
                check.checked,
                check.balls,
                check.min_ratio,
                check.min_ratio_closed,
                check.first_violation.as_ref().map_or(String::new(), |v| format!("; first violation {v}"))
            );
            out.push(Check::new(format!("{name}/glued FK"), check.violations == 0 && check.checked > 0, detail));
            Ok(())
        });
    }
    out.push(Check::new("sets checked", total >= FK_MIN_SETS, format!("{total} ≥ {FK_MIN_SETS}")));
    out
}

fn spine_bounds(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    guard("z3-z3", &mut out, |out| {
        let gg = gallery("z3-z3", &GalleryParams::default())?;
        let chain = MarkovKernel::new(gg.graph_ref());
        let times = [16, 32, 64, 128, 256, 512];
        let pts = series(&chain, gg.symmetry.clone(), &gg.base, &gg.base, &times, 104, opts.exec)?;
        let samples: Vec<HeatSample> =
            pts.iter().map(|p| HeatSample { n: p.n, x: gg.base, y: gg.base, d: 0, p: p.bracket }).collect();
        let sb = check_spine_bounds(&gg.graph, &samples, &SpineBoundsParams::default())?;
        let admitted = samples.len() - sb.upper.excluded;
        out.push(Check::new(
            "z3-z3/two-sided envelope",
            sb.ratio_spread.is_finite() && sb.ratio_spread >= 1.0 && admitted >= 4,
            format!(
                "ratio spread {:.4} over {admitted} samples, upper exponent {:.3}, lower exponent {:.3}",
                sb.ratio_spread, sb.upper.exp, sb.lower.exp
            ),
        ));
        Ok(())
    });
    out
}

fn appendix_b(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    guard("Z2", &mut out, |out| {
        let g: GraphRef = Arc::new(Lattice::new(2));
        let params = AppendixBParams { seed: opts.seed, ..Default::default() };
        let rep = check_appendix_b(&g, Arc::new(BlockSymmetry::lattice(2)), &Vertex::ORIGIN, &params, opts.exec)?;
        out.push(Check::new(
            "Z2/weight scan",
            rep.d_scan.is_some(),
            format!("α = {}, scanned D = {:?}, used D = {}", rep.alpha, rep.d_scan, rep.d_used),
        ));
        out.push(Check::new(
            "Z2/J_k non-increasing",
            rep.j_violations == 0 && rep.j.len() > params.horizon as usize,
            format!("{} violations over k ≤ {}", rep.j_violations, rep.j.len() - 1),
        ));
        out.push(Check::new(
            "Z2/gradient bound pointwise",
            rep.gradient_violations == 0 && rep.gradient.len() == params.gradient_samples,
            format!("{} violations over {} samples", rep.gradient_violations, rep.gradient.len()),
        ));
        Ok(())
    });
    out
}

fn potential(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let origin = |v: &Vertex| *v == Vertex::ORIGIN;
    guard("Z3 point", &mut out, |out| {
        let lg = LatticeGreen::new(3, 1024, 35)?;
        let outer = |v: &Vertex| lg.psi_upper(v);
        let chain = MarkovKernel::new(Arc::new(Lattice::new(3)));
        let sweep = hitting_sweep(&chain, Arc::new(BlockSymmetry::lattice(3)), &Vertex::ORIGIN, &origin, &[20, 30], &outer, 1e-12)?;
        let d = s_transience_diagnose(&sweep[1], 5, 0.01)?;
        out.push(Check::new(
            "Z3/uniform S-transience on d ∈ [5,15]",
            d.verdict == Verdict::Uniform,
            format!("sup ψ⁺ = {:.4}, ε = {:.4}, {} states, {:?}", d.sup_upper, d.epsilon, d.points, d.verdict),
        ));
        Ok(())
    });
    guard("Z recurrent", &mut out, |out| {
        let chain = MarkovKernel::new(Arc::new(Lattice::new(1)));
        let sol = hitting_prob(&chain, Arc::new(BlockSymmetry::lattice(1)), &Vertex::ORIGIN, &origin, 10_000, &trivial_outer, 1e-14)?;
        let worst = (1..=100).map(|x| sol.lower_at(&Vertex::at(&[x])).unwrap_or(0.0)).fold(1.0, f64::min);
        out.push(Check::new("Z/ψ⁻ ≥ 0.99 for |x| ≤ 100 at R = 10⁴", worst >= 0.99, format!("min ψ⁻ = {worst:.7}")));
        Ok(())
    });
    guard("Dirichlet/Neumann", &mut out, |out| {
        let g: GraphRef = Arc::new(Lattice::new(3));
        let sub = Subgraph::new(g, "Z3 minus o", |v| *v != Vertex::ORIGIN);
        let sym: Arc<dyn Symmetry> = Arc::new(BlockSymmetry::new().tag(0, vec![Block::signed(1..3)]));
        let s = dirichlet_neumann_ratio(&sub, sym, &Vertex::at(&[1, 0, 0]), &[32, 64, 128, 256, 512], 140)?;
        let lo = s.iter().map(|r| r.ratio.lower).fold(f64::INFINITY, f64::min);
        let hi = s.iter().map(|r| r.ratio.upper).fold(0.0, f64::max);
        out.push(Check::new(
            "Z3∖{o}/p_D/p_N in [c, 1] for n ∈ [32, 512]",
            lo >= RATIO_BAND_LOW && hi <= 1.0,
            format!("ratio in [{lo:.4}, {hi:.4}], c = {RATIO_BAND_LOW}"),
        ));
        Ok(())
    });
    guard("h-transform", &mut out, |out| {
        let tol = 1e-9;
        let p = build_h_z3_tail(40, tol)?;
        let ys = [p.host.base, p.host.graph.from_page(2, &Vertex::at(&[5]))];
        let s = check_h_identity(&p, &ys, &[8, 16, 32], 40)?;
        let worst = s.iter().map(|s| s.rel_error).fold(0.0, f64::max);
        out.push(Check::new(
            "z3-tail/h-transform identity",
            worst <= 2.0 * tol && p.a > 0.0,
            format!("a = {}, residual {:.2e}, max rel error {worst:.2e}", p.a, p.max_residual),
        ));
        Ok(())
    });
    guard("Monte Carlo", &mut out, |out| {
        let chain = MarkovKernel::new(Arc::new(Lattice::new(2)));
        let sol = hitting_prob(&chain, Arc::new(BlockSymmetry::lattice(2)), &Vertex::ORIGIN, &origin, 8, &trivial_outer, 1e-13)?;
        let x = Vertex::at(&[2, 1]);
        let mc = mc_hitting(&chain, sol.window(), &x, &origin, 100_000, opts.seed);
        let psi = sol.lower_at(&x).unwrap_or(f64::NAN);
        out.push(Check::new(
            "Z2/Monte Carlo within 3σ",
            mc.agrees(psi, 3.0),
            format!("ψ = {psi:.5}, estimate {:.5} ± {:.5}", mc.mean, mc.std_err),
        ));
        Ok(())
    });
    out
}
