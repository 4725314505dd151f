use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constructions::{gallery, GalleryGraph, GalleryParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::vertex::Vertex;

/// Schema id every config must declare.
pub const SCHEMA: &str = "spine-lab/1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub graph: GraphSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(rename = "task")]
    pub tasks: Vec<TaskSpec>,
    #[serde(default, rename = "assert")]
    pub asserts: Vec<AssertSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub name: String,
    #[serde(default)]
    pub params: GalleryParams,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory, relative to the config file. Defaults to `out/<config stem>`.
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Heat,
    Eigen,
    Fkprofile,
    Hitprob,
    Green,
    Exponent,
    Verify,
}

/// A vertex as `"tag:c1,c2,..."` or as page-local coordinates `{ page = i, at = [...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexSpec {
    Id(String),
    Page { page: usize, at: Vec<i32> },
}

/// Dyadic times `from, 2·from, …, ≤ to`, or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Dyadic { from: u32, to: u32 },
    List(Vec<u32>),
}

impl TimeSpec {
    pub fn times(&self) -> Vec<u32> {
        match self {
            TimeSpec::List(v) => v.clone(),
            TimeSpec::Dyadic { from, to } => {
                let mut out = Vec::new();
                let mut n = *from;
                while n <= *to && n > 0 {
                    out.push(n);
                    n = n.saturating_mul(2);
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub kind: Option<TaskKind>,
    /// Source vertex (heat, exponent), ball centre (eigen, fkprofile, hitprob, green).
    pub x: Option<VertexSpec>,
    /// Target vertex (heat, exponent).
    pub y: Option<VertexSpec>,
    /// Evaluation points (green).
    pub points: Option<Vec<VertexSpec>>,
    pub times: Option<TimeSpec>,
    /// Fit window [from, to] in n (exponent).
    pub fit: Option<[u32; 2]>,
    pub radius: Option<u32>,
    pub radii: Option<Vec<u32>>,
    pub s_max: Option<usize>,
    pub max_states: Option<usize>,
    pub tol: Option<f64>,
    /// Inner shell radius L (hitprob).
    pub shell: Option<u32>,
    pub seed: Option<u64>,
    /// Suite name (verify).
    pub suite: Option<String>,
    /// Two-sided spine envelope on the heat series (heat).
    pub spine_envelope: Option<bool>,
    pub delta: Option<u32>,
    /// "m ≫ d + δ" read as m ≥ big_c·(d + δ) (heat with spine_envelope).
    pub big_c: Option<f64>,
}

/// `min ≤ metric(task) ≤ max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertSpec {
    pub task: String,
    pub metric: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

fn cfg_err(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config { path: path.into(), msg: msg.into() }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let at = e.span().map(|s| format!("byte {}", s.start)).unwrap_or_else(|| "document".into());
            cfg_err(at, e.message().to_string())
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config { path: p, msg } => cfg_err(format!("{}: {p}", path.display()), msg),
            other => other,
        })?;
        Ok((cfg, text))
    }

    /// Builds the graph and checks every task against it.
    pub fn validate(&self) -> Result<GalleryGraph> {
        if self.schema != SCHEMA {
            return Err(cfg_err("schema", format!("expected \"{SCHEMA}\", found \"{}\"", self.schema)));
        }
        let gg = gallery(&self.graph.name, &self.graph.params).map_err(|e| cfg_err("graph", e.to_string()))?;
        if self.tasks.is_empty() {
            return Err(cfg_err("task", "at least one [[task]] is required"));
        }
        let mut ids: Vec<&str> = Vec::new();
        for (i, t) in self.tasks.iter().enumerate() {
            let at = format!("task[{i}]");
            if t.id.is_empty() || !t.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(cfg_err(format!("{at}.id"), "ids are non-empty and use [A-Za-z0-9_-]"));
            }
            if ids.contains(&t.id.as_str()) {
                return Err(cfg_err(format!("{at}.id"), format!("duplicate id \"{}\"", t.id)));
            }
            ids.push(&t.id);
            self.validate_task(&gg, t, &at)?;
        }
        for (i, a) in self.asserts.iter().enumerate() {
            if !ids.contains(&a.task.as_str()) {
                return Err(cfg_err(format!("assert[{i}].task"), format!("no task \"{}\"", a.task)));
            }
            if a.min.is_none() && a.max.is_none() {
                return Err(cfg_err(format!("assert[{i}]"), "needs min or max"));
            }
        }
        Ok(gg)
    }

    fn validate_task(&self, gg: &GalleryGraph, t: &TaskSpec, at: &str) -> Result<()> {
        let kind = t.kind.ok_or_else(|| cfg_err(format!("{at}.kind"), "missing"))?;
        for (name, v) in [("x", &t.x), ("y", &t.y)] {
            if let Some(v) = v {
                resolve(gg, v, &format!("{at}.{name}"))?;
            }
        }
        for (j, v) in t.points.iter().flatten().enumerate() {
            resolve(gg, v, &format!("{at}.points[{j}]"))?;
        }
        let need = |field: &str, ok: bool| if ok { Ok(()) } else { Err(cfg_err(format!("{at}.{field}"), format!("required for {kind:?}"))) };
        match kind {
            TaskKind::Heat | TaskKind::Exponent => {
                need("times", t.times.is_some())?;
                let times = t.times.as_ref().unwrap().times();
                if times.is_empty() {
                    return Err(cfg_err(format!("{at}.times"), "empty time range"));
                }
                if t.spine_envelope == Some(true) {
                    let x = t.x.as_ref().map_or(Ok(gg.base), |v| resolve(gg, v, at))?;
                    let y = t.y.as_ref().map_or(Ok(gg.base), |v| resolve(gg, v, at))?;
                    if !gg.graph.in_spine(&x) || !gg.graph.in_spine(&y) {
                        return Err(cfg_err(format!("{at}.x"), "spine bounds need x and y on the spine"));
                    }
                    let d = crate::graph::distance(&*gg.graph, &x, &y, 4 * times[0].max(4))
                        .ok_or_else(|| cfg_err(format!("{at}.y"), "y not reachable from x"))?;
                    let need = t.big_c.unwrap_or(8.0) * (d + t.delta.unwrap_or(1)) as f64;
                    let first = *times.iter().min().unwrap();
                    if (first as f64) < need {
                        return Err(cfg_err(format!("{at}.times"), format!("spine bounds need m ≥ C(d + δ) = {need}, got {first}")));
                    }
                }
                if let Some([a, b]) = t.fit {
                    if a > b {
                        return Err(cfg_err(format!("{at}.fit"), "empty fit window"));
                    }
                }
            }
            TaskKind::Eigen => need("radii", t.radii.is_some())?,
            TaskKind::Fkprofile => need("radius", t.radius.is_some())?,
            TaskKind::Hitprob => need("radii", t.radii.is_some())?,
            TaskKind::Green => {
                need("points", t.points.is_some())?;
                need("radius", t.radius.is_some())?;
            }
            TaskKind::Verify => {
                let s = t.suite.as_deref().unwrap_or("");
                if !super::SUITES.contains(&s) {
                    return Err(cfg_err(format!("{at}.suite"), format!("unknown suite \"{s}\"; one of {:?}", super::SUITES)));
                }
            }
        }
        Ok(())
    }
}

/// Resolves a vertex spec on the graph, failing with the config path.
pub fn resolve(gg: &GalleryGraph, v: &VertexSpec, at: &str) -> Result<Vertex> {
    let x = match v {
        VertexSpec::Id(s) => Vertex::from_str(s).map_err(|e| cfg_err(at, e.to_string()))?,
        VertexSpec::Page { page, at: c } => {
            if *page == 0 || *page > gg.graph.num_pages() || c.len() > crate::vertex::MAX_DIM {
                return Err(cfg_err(at, format!("no page {page} with {} coordinates", c.len())));
            }
            gg.graph.from_page(*page, &Vertex::at(c))
        }
    };
    if !gg.graph.contains(&x) {
        return Err(cfg_err(at, format!("{x} is not a vertex of {}", gg.name)));
    }
    Ok(x)
}
