mod common;

use std::path::Path;
use std::process::{Command, Output};

fn cogplay(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogplay"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const COHORT: &str = r#"{
  "games": ["NK", "BB"],
  "players": [
    {"id": "a1", "sessions": 2, "params": {"latency_mu": 6.5}},
    {"id": "a2", "sessions": 2, "params": {"latency_mu": 6.7, "gaze_policy": "late_fix"}},
    {"id": "a3", "sessions": 2, "params": {"latency_mu": 6.9, "path_style": "indirect"}},
    {"id": "a4", "sessions": 2, "params": {"latency_mu": 7.0, "off_style_rate": 0.5}},
    {"id": "a5", "sessions": 2, "params": {"latency_mu": 6.6, "off_gaze_rate": 0.5}}
  ]
}"#;

#[test]
fn staged_commands_match_run() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("cohort.json"), COHORT).unwrap();
    ok(&cogplay(
        &[
            "simulate",
            "--cohort",
            "cohort.json",
            "--seed",
            "9",
            "--out",
            "logs",
        ],
        d,
    ));
    assert_eq!(count_logs(&d.join("logs")), 20);
    ok(&cogplay(&["validate", "logs"], d));
    ok(&cogplay(
        &[
            "clean",
            "logs",
            "--out",
            "clean.json",
            "--report",
            "exclusions.csv",
        ],
        d,
    ));
    ok(&cogplay(
        &[
            "endpoints",
            "logs",
            "--clean",
            "clean.json",
            "--out",
            "endpoints.csv",
        ],
        d,
    ));
    ok(&cogplay(
        &[
            "stats",
            "endpoints.csv",
            "--correlations",
            "corr.csv",
            "--icc",
            "icc.csv",
        ],
        d,
    ));
    ok(&cogplay(
        &[
            "trajectory",
            "logs",
            "--seed",
            "9",
            "--min-samples",
            "10",
            "--out-dir",
            "traj",
        ],
        d,
    ));

    std::fs::write(
        d.join("run.json"),
        r#"{"log_dir": "logs", "output_dir": "bundle", "seed": 9, "trajectory": {"cluster": {"min_samples": 10}}}"#,
    )
    .unwrap();
    ok(&cogplay(&["run", "--config", "run.json"], d));
    let same = |a: &str, b: &str| {
        assert_eq!(
            std::fs::read(d.join(a)).unwrap(),
            std::fs::read(d.join(b)).unwrap(),
            "{a} vs {b}"
        );
    };
    same("exclusions.csv", "bundle/exclusions.csv");
    same("endpoints.csv", "bundle/endpoints.csv");
    same("corr.csv", "bundle/correlations.csv");
    same("icc.csv", "bundle/icc.csv");
    same(
        "traj/trajectory_embedding.csv",
        "bundle/trajectory_embedding.csv",
    );
    same("traj/confusion_matrix.csv", "bundle/confusion_matrix.csv");

    ok(&cogplay(
        &["report", "corr.csv", "icc.csv", "--out-dir", "rep"],
        d,
    ));
    assert!(d.join("rep").join("manifest.json").is_file());
}

fn count_logs(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "pxlog")
        })
        .count()
}

#[test]
fn validate_reports_corrupt_logs_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let good = common::fixtures_dir().join("p01-NK-s1.pxlog");
    let text = std::fs::read_to_string(&good).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(40);
    std::fs::write(d.join("gap.pxlog"), lines.join("\n") + "\n").unwrap();
    std::fs::write(d.join("junk.pxlog"), "{\"rec\":\"hdr\"\nnot json\n").unwrap();

    let out = cogplay(&["validate", good.to_str().unwrap()], d);
    ok(&out);
    let out = cogplay(&["validate", "gap.pxlog", "junk.pxlog"], d);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("invalid gap.pxlog"), "{stdout}");
    assert!(stdout.contains("invalid junk.pxlog: line 1"), "{stdout}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = cogplay(&["validate", "nowhere.pxlog"], d);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.pxlog"));

    std::fs::write(d.join("bad.json"), "{\"players\": []}").unwrap();
    let out = cogplay(
        &[
            "simulate", "--cohort", "bad.json", "--seed", "1", "--out", "x",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));

    // one participant: nothing can be correlated
    std::fs::write(
        d.join("endpoints.csv"),
        "participant,session,measure,kind,value,n_trials\np1,s1,NK,RT,1.2,40\np1,s1,BB,RT,0.8,48\n",
    )
    .unwrap();
    std::fs::write(
        d.join("pairs.json"),
        r#"[{"a": {"measure": "NK", "kind": "RT"}, "b": {"measure": "BB", "kind": "RT"}}]"#,
    )
    .unwrap();
    let out = cogplay(
        &[
            "stats",
            "endpoints.csv",
            "--pairings",
            "pairs.json",
            "--correlations",
            "c.csv",
            "--icc",
            "i.csv",
        ],
        d,
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!d.join("c.csv").exists());
}

#[test]
fn shipped_configs_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let run = cfg.join("run.json");
    let cohort = cfg.join("cohort.json");
    let d = tmp.path();
    ok(&cogplay(
        &[
            "run",
            "--config",
            run.to_str().unwrap(),
            "--out-dir",
            "bundle",
        ],
        d,
    ));
    assert!(d.join("bundle/correlations.csv").is_file());
    ok(&cogplay(
        &[
            "simulate",
            "--cohort",
            cohort.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            "logs",
        ],
        d,
    ));
    assert_eq!(count_logs(&d.join("logs")), 48);
}
