use super::*;
use std::fs;
use std::path::Path;

const HEADER: &str = "schema = \"spine-lab/1\"\n";

fn run_in(dir: &Path, text: &str, opts: &RunOptions) -> RunOutcome {
    let cfg = ExperimentConfig::parse(text).unwrap();
    run_config(&cfg, text, dir, opts).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn config_error(text: &str) -> String {
    let e = match ExperimentConfig::parse(text) {
        Err(e) => e,
        Ok(cfg) => cfg.validate().err().expect("config should be rejected"),
    };
    match e {
        crate::Error::Config { path, .. } => path,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn exact_power_law_has_exact_slope() {
    let series: Vec<_> = (4..12).map(|k| (f64::from(1u32 << k), 3.0 * f64::from(1u32 << k).powi(-2), 0.0)).collect();
    let fit = fit_exponent(&series, None).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-12, "{}", fit.slope);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
    assert!(fit.drift < 1e-12);
    assert_eq!(fit.points, 8);
}

#[test]
fn fit_needs_six_points() {
    let series: Vec<_> = (1..6).map(|k| (k as f64, 1.0 / k as f64, 0.0)).collect();
    assert!(matches!(fit_exponent(&series, None), Err(crate::Error::TooFewPoints { got: 5, need: 6 })));
}

#[test]
fn wide_and_out_of_window_points_are_not_fitted() {
    let mut series: Vec<_> = (1..=10).map(|k| (k as f64, (k as f64).powf(-1.5), 0.0)).collect();
    // A wide bracket on an outlier must not bend the slope.
    series[4].1 *= 10.0;
    series[4].2 = 0.06 * series[4].1;
    let fit = fit_exponent(&series, None).unwrap();
    assert!(!fit.series[4].used);
    assert!((fit.slope + 1.5).abs() < 1e-12);

    let fit = fit_exponent(&series, Some((2.0, 9.0))).unwrap();
    assert_eq!(fit.points, 7);
    assert!(!fit.series[0].used && !fit.series[9].used);
}

#[test]
fn dyadic_times_double_up_to_the_bound() {
    assert_eq!(TimeSpec::Dyadic { from: 16, to: 200 }.times(), vec![16, 32, 64, 128]);
    assert_eq!(TimeSpec::Dyadic { from: 0, to: 8 }.times(), Vec::<u32>::new());
    assert_eq!(TimeSpec::List(vec![3, 1]).times(), vec![3, 1]);
}

#[test]
fn default_radius_caps_at_time() {
    assert_eq!(default_radius(4), 4);
    assert_eq!(default_radius(64), 39);
    assert_eq!(default_radius(4096), 280);
}

#[test]
fn malformed_configs_name_the_offending_field() {
    let cases = [
        ("schema = \"other\"\n[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\n", "schema"),
        ("[graph]\nname = \"nowhere\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\n", "graph"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\n", "task[0].times"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\n", "task[1].id"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"verify\"\nsuite = \"nope\"\n", "task[0].suite"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\nx = \"1:0,0,0\"\n", "task[0].x"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\nx = { page = 3, at = [0, 0] }\n", "task[0].x"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\n[[assert]]\ntask = \"b\"\nmetric = \"points\"\nmin = 1\n", "assert[0].task"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\n[[assert]]\ntask = \"a\"\nmetric = \"points\"\n", "assert[0]"),
        ("[graph]\nname = \"z3-z3\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [4, 8]\nspine_envelope = true\n", "task[0].times"),
        ("[graph]\nname = \"lattice\"\n[[task]]\nid = \"a\"\nkind = \"heat\"\ntimes = [1]\nbogus = 1\n", "byte"),
    ];
    for (body, want) in cases {
        let text = if body.starts_with("schema") { body.to_string() } else { format!("{HEADER}{body}") };
        let path = config_error(&text);
        assert!(path.starts_with(want), "{want:?} vs {path:?} for\n{text}");
    }
}

/// Lazy walk on Z: K^n(0,0) = C(2n, n)/4^n and π(0) = 4.
fn z1_return(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * (2 * k - 1) as f64 / (2 * k) as f64) / 4.0
}

#[test]
fn z1_series_brackets_the_binomial_and_decays_like_root_n() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEADER}[graph]\nname = \"lattice\"\nparams = {{ dims = [1] }}\n\
         [[task]]\nid = \"z1\"\nkind = \"exponent\"\ntimes = {{ from = 64, to = 4096 }}\n\
         [[assert]]\ntask = \"z1\"\nmetric = \"slope\"\nmin = -0.55\nmax = -0.45\n"
    );
    let out = run_in(dir.path(), &text, &RunOptions::default());
    assert!(out.passed());
    for row in csv_rows(&dir.path().join("z1.csv")) {
        let n: u32 = row[0].parse().unwrap();
        let (lo, hi): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
        let exact = z1_return(n);
        assert!(lo <= exact * (1.0 + 1e-12) && exact <= hi * (1.0 + 1e-12), "n={n}: {lo} {exact} {hi}");
        // Only mass past the ~6σ window edge is unaccounted for.
        assert!((hi - lo) / exact < 1e-6, "n={n}: width {}", (hi - lo) / exact);
    }
    let t = out.task("z1").unwrap();
    // Exact slope over 64..4096 is -0.5 up to the O(1/n) correction.
    assert!((t.metrics["slope"] + 0.5).abs() < 2e-3, "{}", t.metrics["slope"]);
}

#[test]
fn z2_series_decays_like_inverse_n() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEADER}[graph]\nname = \"lattice\"\nparams = {{ dims = [2] }}\n\
         [[task]]\nid = \"z2\"\nkind = \"exponent\"\ntimes = {{ from = 64, to = 4096 }}\n"
    );
    let out = run_in(dir.path(), &text, &RunOptions::default());
    let slope = out.task("z2").unwrap().metrics["slope"];
    assert!((-1.1..=-0.9).contains(&slope), "{slope}");
    // Local limit: each coordinate has variance n/4, so K^n(0,0) ≈ 2/(π n) and π(0) = 8.
    let rows = csv_rows(&dir.path().join("z2.csv"));
    let last = rows.last().unwrap();
    let lo: f64 = last[3].parse().unwrap();
    let llt = 1.0 / (4.0 * std::f64::consts::PI * 4096.0);
    assert!((lo / llt - 1.0).abs() < 1e-3, "{lo} vs {llt}");
}

const SMALL: &str = "[graph]\nname = \"z3-z2\"\n\
    [[task]]\nid = \"heat\"\nkind = \"heat\"\ntimes = { from = 4, to = 64 }\n\
    [[task]]\nid = \"off\"\nkind = \"heat\"\ntimes = [5, 9, 17]\nx = { page = 1, at = [1, 0, 0] }\ny = { page = 2, at = [0, 2] }\n\
    [[task]]\nid = \"eig\"\nkind = \"eigen\"\nradii = [1, 2, 3]\n\
    [[task]]\nid = \"hit\"\nkind = \"hitprob\"\nradii = [6, 8]\n\
    [[assert]]\ntask = \"eig\"\nmetric = \"monotone\"\nmin = 1\n";

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let text = format!("{HEADER}{SMALL}");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_in(a.path(), &text, &RunOptions { threads: Some(1), ..Default::default() });
    let rb = run_in(b.path(), &text, &RunOptions { threads: Some(3), ..Default::default() });
    assert!(ra.passed() && rb.passed());
    for (ta, tb) in ra.manifest.tasks.iter().zip(&rb.manifest.tasks) {
        for (fa, fb) in ta.files.iter().zip(&tb.files) {
            assert_eq!(fa.path, fb.path);
            assert_eq!(fa.sha256, fb.sha256, "{}", fa.path);
            assert_eq!(fs::read(a.path().join(&fa.path)).unwrap(), fs::read(b.path().join(&fb.path)).unwrap());
        }
    }
    assert_eq!(ra.manifest.config_sha256, rb.manifest.config_sha256);
}

#[test]
fn cached_states_reproduce_fresh_results_bit_for_bit() {
    let text = format!("{HEADER}{SMALL}");
    let cache = tempfile::tempdir().unwrap();
    let fresh = tempfile::tempdir().unwrap();
    let opts = RunOptions { cache_dir: Some(cache.path().to_path_buf()), ..Default::default() };

    let first = run_in(fresh.path(), &text, &opts);
    let heat = first.task("heat").unwrap();
    assert_eq!((heat.cache_hits, heat.cache_misses), (0, 5));

    let again = tempfile::tempdir().unwrap();
    let second = run_in(again.path(), &text, &opts);
    let heat = second.task("heat").unwrap();
    assert_eq!((heat.cache_hits, heat.cache_misses), (5, 0));
    assert_eq!(second.task("off").unwrap().cache_hits, 3);
    for f in ["heat.csv", "off.csv"] {
        assert_eq!(fs::read(fresh.path().join(f)).unwrap(), fs::read(again.path().join(f)).unwrap(), "{f}");
    }

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(again.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["cache"], true);
    assert_eq!(manifest["tasks"][0]["cache_hits"], 5);
    assert!(manifest["tasks"][0]["windows"][0]["states"].as_u64().unwrap() > 0);
}

#[test]
fn failing_or_missing_metrics_fail_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEADER}[graph]\nname = \"lattice\"\nparams = {{ dims = [1] }}\n\
         [[task]]\nid = \"h\"\nkind = \"heat\"\ntimes = [2, 4]\n\
         [[assert]]\ntask = \"h\"\nmetric = \"points\"\nmin = 2\nmax = 2\n\
         [[assert]]\ntask = \"h\"\nmetric = \"points\"\nmin = 3\n\
         [[assert]]\ntask = \"h\"\nmetric = \"slope\"\nmax = 0\n"
    );
    let out = run_in(dir.path(), &text, &RunOptions::default());
    let pass: Vec<bool> = out.manifest.asserts.iter().map(|a| a.pass).collect();
    assert_eq!(pass, [true, false, false]);
    assert!(out.manifest.asserts[2].value.is_none());
    assert!(!out.passed());
}

#[test]
fn unattainable_fit_is_an_error_not_a_pass() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEADER}[graph]\nname = \"lattice\"\nparams = {{ dims = [1] }}\n\
         [[task]]\nid = \"e\"\nkind = \"exponent\"\ntimes = [2, 4, 8]\n"
    );
    let cfg = ExperimentConfig::parse(&text).unwrap();
    assert!(matches!(run_config(&cfg, &text, dir.path(), &RunOptions::default()), Err(crate::Error::TooFewPoints { .. })));
}

#[test]
fn explicit_cache_dir_wins() {
    let opts = RunOptions { cache_dir: Some("/tmp/explicit".into()), ..Default::default() };
    assert_eq!(opts.resolved_cache_dir().unwrap(), Path::new("/tmp/explicit"));
}

#[test]
fn every_suite_passes() {
    for s in SUITES {
        let r = verify(s, &VerifyOptions::default()).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        assert!(r.passed() && !r.checks.is_empty(), "{s}: {failed:?}");
    }
    assert!(verify("nope", &VerifyOptions::default()).is_err());
}
