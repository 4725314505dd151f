//! Experiment runner: declarative configs, exponent fits, verification suites and
//! deterministic, cacheable result files.

mod config;
mod fit;
mod run;
mod verify;

pub use config::{resolve, AssertSpec, ExperimentConfig, GraphSpec, OutputSpec, TaskKind, TaskSpec, TimeSpec, VertexSpec, SCHEMA};
pub use fit::{fit_exponent, ExponentFit, FitPoint, MAX_REL_WIDTH, MIN_POINTS};
pub use run::{
    default_radius, run, run_config, with_threads, AssertOutcome, FileRecord, Manifest, RunOptions, RunOutcome, TaskOutcome, WindowInfo,
    CACHE_ENV,
};
pub use verify::{verify, Check, VerifyOptions, VerifyReport, EIGEN_AGREEMENT, FK_MIN_SETS, RATIO_BAND_LOW, SUITES};

#[cfg(test)]
mod tests;
