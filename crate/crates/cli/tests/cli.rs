use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spine-lab"));
    c.env_remove("SPINE_LAB_CACHE");
    c
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, min_points: f64) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(
        &path,
        format!(
            "schema = \"spine-lab/1\"\n\
             [graph]\nname = \"lattice\"\nparams = {{ dims = [1] }}\n\
             [[task]]\nid = \"h\"\nkind = \"heat\"\ntimes = {{ from = 8, to = 256 }}\n\
             [[assert]]\ntask = \"h\"\nmetric = \"points\"\nmin = {min_points}\n"
        ),
    )
    .unwrap();
    path
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn gallery_list_names_every_example() {
    let o = lab().args(["gallery", "--list"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for name in ["lattice", "z3-z3", "z3-tail", "z3-z2", "cross", "parabola", "half-planes"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn unknown_gallery_entry_is_an_error() {
    let o = lab().args(["gallery", "moebius"]).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn exit_code_tracks_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.toml", 6.0);
    let bad = write_config(dir.path(), "bad.toml", 7.0);

    let o = lab().arg("run").arg(&good).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS h.points"));
    assert!(dir.path().join("out/good/h.csv").exists());
    assert_eq!(manifest(&dir.path().join("out/good"))["passed"], true);

    let o = lab().arg("run").arg(&bad).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL h.points"));
}

#[test]
fn invalid_config_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    fs::write(&path, "schema = \"spine-lab/1\"\n[graph]\nname = \"lattice\"\n[[task]]\nid = \"h\"\nkind = \"heat\"\n").unwrap();
    let o = lab().arg("run").arg(&path).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("task[0].times"));
}

#[test]
fn cache_dir_comes_from_the_environment_unless_given() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", 1.0);
    let env_cache = dir.path().join("env-cache");
    let flag_cache = dir.path().join("flag-cache");
    let out = dir.path().join("o");

    let o = lab().env("SPINE_LAB_CACHE", &env_cache).arg("run").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(fs::read_dir(&env_cache).unwrap().next().is_some());
    let m = manifest(&out);
    assert_eq!(m["cache"], true);
    assert_eq!(m["tasks"][0]["cache_misses"], 6);

    let o = lab().env("SPINE_LAB_CACHE", &env_cache).arg("run").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(manifest(&out)["tasks"][0]["cache_hits"], 6);

    let o = lab()
        .env("SPINE_LAB_CACHE", &env_cache)
        .args(["--cache-dir".as_ref(), flag_cache.as_os_str()])
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(fs::read_dir(&flag_cache).unwrap().next().is_some());
    assert_eq!(manifest(&out)["tasks"][0]["cache_misses"], 6);
}

#[test]
fn outputs_do_not_depend_on_threads_and_record_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.toml", 1.0);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = lab().args(["--threads", threads, "--seed", "7", "run"]).arg(&cfg).arg("--out").arg(out).output().unwrap();
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(a.join("h.csv")).unwrap(), fs::read(b.join("h.csv")).unwrap());
    let m = manifest(&a);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["tasks"][0]["files"][0]["sha256"], manifest(&b)["tasks"][0]["files"][0]["sha256"]);
}

#[test]
fn verify_reports_each_check() {
    let o = lab().args(["verify", "core-invariants"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.lines().count() > 10);
    assert!(text.lines().all(|l| l.starts_with("PASS [core-invariants]")), "{text}");

    let o = lab().args(["verify", "nope"]).output().unwrap();
    assert_eq!(code(&o), 2);
}
