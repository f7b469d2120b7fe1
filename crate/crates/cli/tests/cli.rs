use std::path::Path;
use std::process::{Command, Output};

use llmsched_cli::config::{cluster_preset, load_catalog, load_cluster};
use llmsched_core::workload::{default_catalog, Preset};

fn llmsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llmsched")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_profile_run_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.ndjson");
    let profiles = dir.path().join("profiles.json");
    let out = dir.path().join("out");

    let o = llmsched(&["generate", "--num-jobs", "600", "--seed", "3", "--out", s(&trace)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 600);

    let o = llmsched(&["profile", "--traces", s(&trace), "--out", s(&profiles)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("seqsort"));

    let o = llmsched(&[
        "run", "--scheduler", "llmsched", "--num-jobs", "40", "--seeds", "0..2", "--dump-scores",
        "--profiles", s(&profiles), "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for seed in 0..2 {
        for kind in ["jobs", "summary", "timing", "scores"] {
            assert!(out.join(format!("llmsched-seed{seed}-{kind}.csv")).exists(), "{kind}");
        }
    }
    let jobs = std::fs::read_to_string(out.join("llmsched-seed0-jobs.csv")).unwrap();
    assert_eq!(jobs.lines().count(), 41);
    let config = std::fs::read_to_string(out.join("run-config.toml")).unwrap();
    assert!(config.contains("epsilon = 0.2"));
}

#[test]
fn reruns_write_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = llmsched(&["run", "--scheduler", "srtf", "--num-jobs", "30", "--seed", "9", "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        bodies.push(std::fs::read(out.join("srtf-seed9-jobs.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn bad_arguments_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let o = llmsched(&["run", "--scheduler", "lottery", "--out", out]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("lottery"));

    let o = llmsched(&["run", "--epsilon", "1.5", "--num-jobs", "5", "--out", out]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("epsilon"));

    let o = llmsched(&["compare", "--workload", "batch", "--out", out]);
    assert!(!o.status.success());

    let o = llmsched(&["sweep", "--param", "temperature", "--values", "1", "--out", out]);
    assert!(!o.status.success());
}

#[test]
fn malformed_traces_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.ndjson");
    let good = llmsched(&["generate", "--num-jobs", "2", "--out", s(&trace)]);
    assert!(good.status.success());
    let mut text = std::fs::read_to_string(&trace).unwrap();
    text.push_str("{not json}\n");
    std::fs::write(&trace, text).unwrap();
    let o = llmsched(&["profile", "--traces", s(&trace), "--out", s(&dir.path().join("p.json"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains(":3:"), "{}", stderr(&o));
}

#[test]
fn sweep_and_ablate_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = llmsched(&["sweep", "--param", "epsilon", "--values", "0,0.5", "--num-jobs", "20", "--seeds", "0,1", "--out", s(out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = std::fs::read_to_string(out.join("sweep-epsilon.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);

    let o = llmsched(&["ablate", "--num-jobs", "20", "--seed", "1", "--out", s(out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("ablation.csv")).unwrap();
    assert!(table.contains("without-bn") && table.contains("without-uncertainty"));
}

#[test]
fn shipped_configs_match_the_built_in_defaults() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    assert_eq!(load_catalog(&root.join("apps.toml")).unwrap(), default_catalog());
    for p in Preset::ALL {
        let c = load_cluster(&root.join(format!("clusters/{}.toml", p.name()))).unwrap();
        assert_eq!(c, cluster_preset(p), "{}", p.name());
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("apps.toml");
    assert!(llmsched(&["catalog", "--out", s(&path)]).status.success());
    assert_eq!(load_catalog(&path).unwrap(), default_catalog());
}
