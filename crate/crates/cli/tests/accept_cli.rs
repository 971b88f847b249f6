use std::path::Path;
use std::process::{Command, Output};

fn dyadlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DYADLAB_SEED")
        .output()
        .expect("binary runs")
}

fn only_file(dir: &Path, ext: &str) -> std::path::PathBuf {
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == ext)).collect();
    assert_eq!(v.len(), 1, "{v:?}");
    v.pop().unwrap()
}

#[test]
fn algebra_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = dyadlab(&["verify-algebra", "--depth", "2", "--trials", "3", "--backend", "rational"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = only_file(dir.path(), "csv");
    assert!(csv.file_name().unwrap().to_str().unwrap().starts_with("verify-algebra-"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(only_file(dir.path(), "json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
}

#[test]
fn same_config_gives_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["tested-operators", "--depth", "2", "--trials", "2", "--seed", "8"];
    assert!(dyadlab(&args, a.path()).status.success());
    assert!(dyadlab(&args, b.path()).status.success());
    let (ca, cb) = (only_file(a.path(), "csv"), only_file(b.path(), "csv"));
    assert_eq!(ca.file_name(), cb.file_name());
    assert_eq!(std::fs::read(ca).unwrap(), std::fs::read(cb).unwrap());
}

#[test]
fn sample_symbol_exact_norm() {
    let dir = tempfile::tempdir().unwrap();
    let o = dyadlab(&["bmo", "--depth", "2", "--strategy", "exact", "--trials", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(only_file(dir.path(), "csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("chf-squared,2,")), "{csv}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dyadlab(&["no-such-suite"], dir.path()).status.code(), Some(2));
    assert_eq!(dyadlab(&["schur", "--lambda", "5/4"], dir.path()).status.code(), Some(2));
    assert_eq!(dyadlab(&["counterexample", "--eps-grid", "3:4"], dir.path()).status.code(), Some(2));
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "seed = x\n").unwrap();
    assert_eq!(dyadlab(&["schur", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = dyadlab(&["theorem-mainskip", "--depth", "4", "--trials", "20"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("enlarge growth"), "{err}");
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# one-variable run\ndepth = 4\ntrials = 5\nseed = 2\n").unwrap();
    let a = dyadlab(&["one-param", "--config", cfg.to_str().unwrap()], &dir.path().join("a"));
    let b = dyadlab(&["one-param", "--depth", "4", "--trials", "5", "--seed", "2"], &dir.path().join("b"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(only_file(&dir.path().join("a"), "csv").file_name(), only_file(&dir.path().join("b"), "csv").file_name());
    let c = dyadlab(&["one-param", "--config", cfg.to_str().unwrap(), "--seed", "3"], &dir.path().join("c"));
    assert!(c.status.success());
    assert_ne!(only_file(&dir.path().join("a"), "csv").file_name(), only_file(&dir.path().join("c"), "csv").file_name());
}
