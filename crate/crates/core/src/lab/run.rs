use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{resolve, ExperimentConfig, TaskKind, TaskSpec};
use super::fit::fit_exponent;
use super::verify::{verify, Check, VerifyOptions};
use crate::constructions::GalleryGraph;
use crate::error::{Error, Result};
use crate::graph::{ball, Graph, MarkovKernel};
use crate::heat::{check_spine_bounds, Exec, HeatCache, HeatSample, HeatState, SpineBoundsParams, Window, DEFAULT_MAX_STATES};
use crate::potential::{green, hitting_sweep, s_transience_diagnose, trivial_outer, GreenScheme, LatticeGreen, Verdict};
use crate::spectral::{fk_profile, lambda1, lambda1_dense};
use crate::symmetry::{Symmetry, Trivial};
use crate::vertex::Vertex;

/// Environment variable naming the cache directory; `--cache-dir` takes precedence.
pub const CACHE_ENV: &str = "SPINE_LAB_CACHE";

/// Window sets at or below this size get a dense eigen cross-check.
const EIGEN_DENSE_CHECK: usize = 400;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; `None` keeps the default pool.
    pub threads: Option<usize>,
    /// Overrides every task seed.
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    pub out_dir: Option<PathBuf>,
}

impl RunOptions {
    /// `cache_dir`, else the environment variable, else no cache.
    pub fn resolved_cache_dir(&self) -> Option<PathBuf> {
        self.cache_dir.clone().or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowInfo {
    pub source: String,
    pub radius: u32,
    pub states: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskOutcome {
    pub id: String,
    pub kind: TaskKind,
    pub files: Vec<FileRecord>,
    pub metrics: BTreeMap<String, f64>,
    pub windows: Vec<WindowInfo>,
    pub tolerances: BTreeMap<String, f64>,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssertOutcome {
    pub task: String,
    pub metric: String,
    pub value: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub config_sha256: String,
    pub graph: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub cache: bool,
    pub tasks: Vec<TaskOutcome>,
    pub asserts: Vec<AssertOutcome>,
    pub passed: bool,
}

pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

impl RunOutcome {
    /// Every assertion and every verify check passed.
    pub fn passed(&self) -> bool {
        self.manifest.passed
    }

    pub fn task(&self, id: &str) -> Option<&TaskOutcome> {
        self.manifest.tasks.iter().find(|t| t.id == id)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits: every f64 round-trips.
fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs the config at `path`; outputs go next to it unless overridden.
pub fn run(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let (cfg, text) = ExperimentConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let stem = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    let out = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| base.join("out").join(stem));
    run_config(&cfg, &text, &out, opts)
}

/// Runs a parsed config, writing every artifact and `manifest.json` into `out_dir`.
pub fn run_config(cfg: &ExperimentConfig, text: &str, out_dir: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let gg = cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let cache = opts.resolved_cache_dir().map(HeatCache::new).transpose()?;
    let ctx = Ctx { gg: &gg, out: out_dir, cache: cache.as_ref(), seed: opts.seed };
    let (tasks, threads) = schedule(&cfg.tasks, &ctx, opts.threads)?;

    let asserts: Vec<AssertOutcome> = cfg
        .asserts
        .iter()
        .map(|a| {
            let value = tasks.iter().find(|t| t.id == a.task).and_then(|t| t.metrics.get(&a.metric)).copied();
            let pass = value.is_some_and(|v| a.min.is_none_or(|m| v >= m) && a.max.is_none_or(|m| v <= m));
            AssertOutcome { task: a.task.clone(), metric: a.metric.clone(), value, min: a.min, max: a.max, pass }
        })
        .collect();
    let passed = asserts.iter().all(|a| a.pass) && tasks.iter().all(|t| t.checks.iter().all(|c| c.pass));
    let manifest = Manifest {
        schema: cfg.schema.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        graph: gg.id(),
        seed: opts.seed,
        threads,
        cache: cache.is_some(),
        tasks,
        asserts,
        passed,
    };
    let manifest_path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Param(e.to_string()))?;
    fs::write(&manifest_path, json + "\n")?;
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), manifest_path, manifest })
}

struct Ctx<'a> {
    gg: &'a GalleryGraph,
    out: &'a Path,
    cache: Option<&'a HeatCache>,
    seed: Option<u64>,
}

/// Runs `f` on a pool of `threads` workers (default pool size when `None`) and reports
/// the worker count. Without the `parallel` feature everything runs on one thread.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<(T, usize)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Param(format!("thread pool: {e}")))?;
    Ok((pool.install(f), pool.current_num_threads()))
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<(T, usize)> {
    Ok((f(), 1))
}

fn schedule(tasks: &[TaskSpec], ctx: &Ctx, threads: Option<usize>) -> Result<(Vec<TaskOutcome>, usize)> {
    let (out, workers) = with_threads(threads, || {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            tasks.par_iter().map(|t| run_task(t, ctx)).collect::<Result<Vec<_>>>()
        }
        #[cfg(not(feature = "parallel"))]
        {
            tasks.iter().map(|t| run_task(t, ctx)).collect::<Result<Vec<_>>>()
        }
    })?;
    Ok((out?, workers))
}

struct Writer<'a> {
    out: &'a Path,
    files: Vec<FileRecord>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.out.join(name), bytes)?;
        self.files.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }
}

fn run_task(t: &TaskSpec, ctx: &Ctx) -> Result<TaskOutcome> {
    let kind = t.kind.expect("validated");
    let mut o = TaskOutcome {
        id: t.id.clone(),
        kind,
        files: Vec::new(),
        metrics: BTreeMap::new(),
        windows: Vec::new(),
        tolerances: BTreeMap::new(),
        cache_hits: 0,
        cache_misses: 0,
        checks: Vec::new(),
    };
    let mut w = Writer { out: ctx.out, files: Vec::new() };
    let at = |field: &str| format!("task[{}].{field}", t.id);
    let gg = ctx.gg;
    let x = t.x.as_ref().map_or(Ok(gg.base), |v| resolve(gg, v, &at("x")))?;
    match kind {
        TaskKind::Heat | TaskKind::Exponent => heat_task(t, ctx, &x, &mut o, &mut w)?,
        TaskKind::Eigen => {
            let mut csv = String::from("r,size,lambda1,residual,dense\n");
            let mut prev = f64::INFINITY;
            let (mut monotone, mut gap) = (true, 0.0f64);
            for &r in t.radii.as_ref().expect("validated") {
                let b = ball(&*gg.graph, &x, r);
                let e = lambda1(&*gg.graph, &b)?;
                let dense = if b.len() <= EIGEN_DENSE_CHECK { Some(lambda1_dense(&*gg.graph, &b)?) } else { None };
                if let Some(d) = dense {
                    gap = gap.max((d - e.value).abs());
                }
                monotone &= e.value <= prev + 1e-12;
                prev = e.value;
                let dense_s = dense.map_or(String::new(), f17);
                writeln!(csv, "{r},{},{},{},{dense_s}", b.len(), f17(e.value), f17(e.residual)).unwrap();
                o.metrics.insert(format!("lambda1_r{r}"), e.value);
            }
            o.metrics.insert("monotone".into(), monotone as u8 as f64);
            o.metrics.insert("max_dense_gap".into(), gap);
            o.tolerances.insert("lambda1".into(), crate::spectral::LAMBDA1_TOL);
            w.write(&format!("{}.csv", t.id), csv.as_bytes())?;
        }
        TaskKind::Fkprofile => {
            let r = t.radius.expect("validated");
            let p = fk_profile(&*gg.graph, &x, r, t.s_max.unwrap_or(6))?;
            let mut csv = String::from("nu,value,exhaustive\n");
            for s in &p.samples {
                writeln!(csv, "{},{},{}", f17(s.nu), f17(s.value), s.exhaustive).unwrap();
            }
            o.metrics.insert("samples".into(), p.samples.len() as f64);
            if let Some(last) = p.samples.last() {
                o.metrics.insert("min_value".into(), last.value);
            }
            w.write(&format!("{}.csv", t.id), csv.as_bytes())?;
        }
        TaskKind::Hitprob => hitprob_task(t, ctx, &x, &mut o, &mut w)?,
        TaskKind::Green => {
            let r = t.radius.expect("validated");
            let tol = t.tol.unwrap_or(1e-12);
            let chain = MarkovKernel::new(gg.graph_ref());
            let lg = lattice_green(gg, r + 1)?;
            let outer = |v: &Vertex| lg.as_ref().map_or(1.0, |lg| lg.psi_upper(&v.with_tag(0)));
            let scheme = GreenScheme::Dirichlet { radius: r, outer: &outer, tol };
            let mut csv = String::from("x,lower,upper,rel_width\n");
            let mut worst = 0.0f64;
            for (j, p) in t.points.as_ref().expect("validated").iter().enumerate() {
                let y = resolve(gg, p, &at(&format!("points[{j}]")))?;
                let b = green(&chain, symmetry_for(gg, &x), &y, &x, &scheme)?;
                worst = worst.max(b.rel_width());
                writeln!(csv, "\"{y}\",{},{},{}", f17(b.bracket.lower), f17(b.bracket.upper), f17(b.rel_width())).unwrap();
            }
            o.metrics.insert("max_rel_width".into(), worst);
            o.tolerances.insert("solver".into(), tol);
            o.windows.push(WindowInfo { source: x.to_string(), radius: r, states: 0 });
            w.write(&format!("{}.csv", t.id), csv.as_bytes())?;
        }
        TaskKind::Verify => {
            let suite = t.suite.as_deref().expect("validated");
            let vo = VerifyOptions { seed: ctx.seed.or(t.seed).unwrap_or(0), ..Default::default() };
            let rep = verify(suite, &vo)?;
            let mut txt = String::new();
            for c in &rep.checks {
                writeln!(txt, "{} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
            }
            o.metrics.insert("failures".into(), rep.checks.iter().filter(|c| !c.pass).count() as f64);
            o.checks = rep.checks;
            w.write(&format!("{}.txt", t.id), txt.as_bytes())?;
        }
    }
    o.files = w.files;
    Ok(o)
}

/// The gallery symmetry when it fixes `x`, otherwise none.
fn symmetry_for(gg: &GalleryGraph, x: &Vertex) -> Arc<dyn Symmetry> {
    if gg.symmetry.canonical(x) == *x && gg.symmetry.orbit_size(x) == 1.0 {
        gg.symmetry.clone()
    } else {
        Arc::new(Trivial)
    }
}

/// Certified exterior bounds, available for a single lattice page of dimension ≥ 3 hit at o.
fn lattice_green(gg: &GalleryGraph, reach: u32) -> Result<Option<LatticeGreen>> {
    match (gg.name.as_str(), gg.page_dims.as_slice()) {
        ("lattice", [d]) if *d >= 3 => Ok(Some(LatticeGreen::new(*d, 1024, reach)?)),
        _ => Ok(None),
    }
}

/// Default window radius: a Gaussian margin of 4.3√n past the source, capped at n.
pub fn default_radius(n: u32) -> u32 {
    ((4.3 * (n as f64).sqrt()).ceil() as u32 + 4).min(n.max(1))
}

fn heat_task(t: &TaskSpec, ctx: &Ctx, x: &Vertex, o: &mut TaskOutcome, w: &mut Writer) -> Result<()> {
    let gg = ctx.gg;
    let y = t.y.as_ref().map_or(Ok(gg.base), |v| resolve(gg, v, &format!("task[{}].y", t.id)))?;
    let mut times = t.times.as_ref().expect("validated").times();
    times.sort_unstable();
    times.dedup();
    let nmax = *times.last().expect("validated");
    let radius = t.radius.unwrap_or_else(|| default_radius(nmax));
    let chain = MarkovKernel::new(gg.graph_ref());
    let window = Arc::new(Window::compile(&chain, symmetry_for(gg, x), x, radius, t.max_states.unwrap_or(DEFAULT_MAX_STATES))?);
    o.windows.push(WindowInfo { source: x.to_string(), radius, states: window.len() });
    let pi_y = gg.graph.weight(&y);
    let id = gg.id();
    let mut st = HeatState::start(window.clone());
    let mut rows = Vec::with_capacity(times.len());
    for &n in &times {
        match ctx.cache.map(|c| c.load(&id, &window, n)).transpose()?.flatten() {
            Some(cached) => {
                st = cached;
                o.cache_hits += 1;
            }
            None => {
                st.advance_to(n, Exec::default());
                if let Some(c) = ctx.cache {
                    c.store(&id, &st)?;
                    o.cache_misses += 1;
                }
            }
        }
        rows.push((n, st.bracket(&y, pi_y), st.lost));
    }
    let worst = rows.iter().map(|r| r.1.rel_width()).fold(0.0, f64::max);
    o.metrics.insert("max_rel_width".into(), worst);
    o.metrics.insert("points".into(), rows.len() as f64);

    let mut csv = String::from("n,x,y,lower,upper,lost\n");
    for (n, b, lost) in &rows {
        writeln!(csv, "{n},\"{x}\",\"{y}\",{},{},{}", f17(b.lower), f17(b.upper), f17(*lost)).unwrap();
    }
    w.write(&format!("{}.csv", t.id), csv.as_bytes())?;

    if t.spine_envelope == Some(true) {
        let d = crate::graph::distance(&*gg.graph, x, &y, 4 * nmax).unwrap_or(0);
        let samples: Vec<HeatSample> = rows.iter().map(|(n, p, _)| HeatSample { n: *n, x: *x, y, d, p: *p }).collect();
        let params = SpineBoundsParams {
            delta: t.delta.unwrap_or(1),
            big_c: t.big_c.unwrap_or(8.0),
            center: *x,
            ..Default::default()
        };
        let sb = check_spine_bounds(&gg.graph, &samples, &params)?;
        o.metrics.insert("ratio_spread".into(), sb.ratio_spread);
        w.write(&format!("{}.envelope.json", t.id), json(&sb)?.as_bytes())?;
    }

    if t.kind == Some(TaskKind::Exponent) {
        let series: Vec<(f64, f64, f64)> = rows.iter().map(|(n, b, _)| (*n as f64, b.lower, b.width())).collect();
        let fit = fit_exponent(&series, t.fit.map(|[a, b]| (a as f64, b as f64)))?;
        o.metrics.insert("slope".into(), fit.slope);
        o.metrics.insert("intercept".into(), fit.intercept);
        o.metrics.insert("drift".into(), fit.drift);
        o.tolerances.insert("max_rel_width".into(), super::fit::MAX_REL_WIDTH);
        w.write(&format!("{}.fit.json", t.id), json(&fit)?.as_bytes())?;
    }
    Ok(())
}

fn hitprob_task(t: &TaskSpec, ctx: &Ctx, x: &Vertex, o: &mut TaskOutcome, w: &mut Writer) -> Result<()> {
    let gg = ctx.gg;
    let mut radii = t.radii.clone().expect("validated");
    radii.sort_unstable();
    let tol = t.tol.unwrap_or(1e-12);
    let chain = MarkovKernel::new(gg.graph_ref());
    let lg = lattice_green(gg, radii.last().copied().unwrap_or(1) + 1)?;
    let outer = |v: &Vertex| lg.as_ref().map_or_else(|| trivial_outer(v), |lg| lg.psi_upper(&v.with_tag(0)));
    let spine = |v: &Vertex| gg.graph.in_spine(v);
    let sweep = hitting_sweep(&chain, symmetry_for(gg, x), x, &spine, &radii, &outer, tol)?;
    let sol = sweep.last().expect("non-empty radii");
    for s in &sweep {
        o.windows.push(WindowInfo { source: x.to_string(), radius: s.radius, states: s.window().len() });
    }
    o.tolerances.insert("solver".into(), tol);
    o.metrics.insert("error_bound".into(), sol.error_bound());
    let dist = sol.distance_to_k();
    let mut csv = String::from("radius,dist,vertex,lower,upper\n");
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by_key(|s| (dist[*s], sol.window().rep(*s)));
    for s in order {
        writeln!(csv, "{},{},\"{}\",{},{}", sol.radius, dist[s], sol.window().rep(s), f17(sol.lower[s]), f17(sol.upper[s])).unwrap();
    }
    w.write(&format!("{}.csv", t.id), csv.as_bytes())?;
    if let Some(l) = t.shell {
        let d = s_transience_diagnose(sol, l, 0.01)?;
        o.metrics.insert("epsilon".into(), d.epsilon);
        o.metrics.insert("sup_lower".into(), d.sup_lower);
        o.metrics.insert("sup_upper".into(), d.sup_upper);
        o.metrics.insert("uniform".into(), (d.verdict == Verdict::Uniform) as u8 as f64);
        w.write(&format!("{}.diagnosis.json", t.id), json(&d)?.as_bytes())?;
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Param(e.to_string()))
}
