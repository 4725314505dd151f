use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spine_core::constructions::{gallery, GalleryParams, GALLERY};
use spine_core::lab::{run, verify, with_threads, RunOptions, VerifyOptions, CACHE_ENV, SUITES};

#[derive(Parser)]
#[command(name = "spine-lab", version, about = "Heat-kernel and potential-theory experiments on glued graphs")]
struct Cli {
    /// Directory for cached heat states.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every randomized step; overrides config seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSVs plus manifest.json.
    Run {
        config: PathBuf,
        /// Output directory (default: [output].dir, else out/<config stem> next to the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite, or `all`.
    Verify { suite: String },
    /// Show the example gallery.
    Gallery {
        #[arg(long)]
        list: bool,
        /// Describe one example.
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> spine_core::Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let opts = RunOptions { cache_dir: cli.cache_dir, threads: cli.threads, seed: cli.seed, out_dir: out };
            let res = run(&config, &opts)?;
            for t in &res.manifest.tasks {
                let metrics: Vec<String> = t.metrics.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
                println!("task {} ({:?}): {}", t.id, t.kind, metrics.join(" "));
                for c in t.checks.iter().filter(|c| !c.pass) {
                    println!("  FAIL {} {}", c.name, c.detail);
                }
            }
            for a in &res.manifest.asserts {
                let status = if a.pass { "PASS" } else { "FAIL" };
                let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v}"));
                println!("{status} {}.{} = {} in [{}, {}]", a.task, a.metric, show(a.value), show(a.min), show(a.max));
            }
            println!("manifest: {}", res.manifest_path.display());
            Ok(res.passed())
        }
        Command::Verify { suite } => {
            let suites: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let opts = VerifyOptions { seed: cli.seed.unwrap_or(0), ..Default::default() };
            let (reports, _) = with_threads(cli.threads, || suites.iter().map(|s| verify(s, &opts)).collect::<Vec<_>>())?;
            let mut ok = true;
            for rep in reports {
                let rep = rep?;
                for c in &rep.checks {
                    println!("{} [{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, rep.suite, c.name, c.detail);
                }
                ok &= rep.passed();
            }
            Ok(ok)
        }
        Command::Gallery { list, name } => {
            match name {
                Some(n) => {
                    let gg = gallery(&n, &GalleryParams::default())?;
                    println!("{}: pages {:?}, book-like {}, base {}", gg.name, gg.page_dims, gg.book_like, gg.base);
                    for w in &gg.warnings {
                        println!("warning: {w}");
                    }
                }
                None if list => {
                    for (n, d) in GALLERY {
                        println!("{n:<14} {d}");
                    }
                }
                None => {
                    eprintln!("use `gallery --list` or `gallery <name>`");
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
