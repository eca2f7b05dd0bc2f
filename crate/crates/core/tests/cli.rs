use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ftvgs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftvgs"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = ftvgs(dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

#[test]
fn bounds_prints_the_row_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &[
            "bounds", "--r", "2", "--mu1", "1", "--delta", "0.1", "--eps", "0.5",
        ],
    );
    assert!(out.lines().any(|l| l == "min_rows 89"), "{out}");
}

#[test]
fn bounds_report_with_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &[
            "bounds", "--r", "2", "--mu1", "1", "--delta", "0.1", "--eps", "0.5", "--n", "100",
            "--t", "200", "--json", "b.json",
        ],
    );
    assert!(out.contains("min_samples"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(v["min_rows"], 89);
    assert_eq!(v["rows"], 89);
}

#[test]
fn plan_table_for_the_benchmark_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &[
            "experiment",
            "--grid",
            "table2",
            "--synthetic",
            "r=3",
            "--plan-only",
        ],
    );
    for pct in ["72.81%", "51.37%", "21.55%"] {
        assert!(out.contains(pct), "{out}");
    }
}

#[test]
fn exhaustive_plan_selects_every_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth", "--n", "8", "--t", "10", "--rank", "2", "-o", "x.csv",
        ],
    );
    ok(
        d,
        &[
            "sample",
            "-i",
            "x.csv",
            "--plan",
            "rc=1.0,sub=1.0",
            "-o",
            "s.json",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("s.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert_eq!(v["cols"].as_array().unwrap().len(), 10);
    assert_eq!(v["entries"].as_array().unwrap().len(), 80);
}

#[test]
fn full_observation_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth", "--n", "12", "--t", "16", "--rank", "2", "-o", "x.csv",
        ],
    );
    ok(
        d,
        &["sample", "-i", "x.csv", "--scheme", "full", "-o", "s.json"],
    );
    let original = fs::read(d.join("x.csv")).unwrap();
    for method in ["joint", "two_stage", "svt", "tnnr"] {
        let out = format!("{method}.csv");
        ok(
            d,
            &[
                "reconstruct",
                "-s",
                "s.json",
                "--truth",
                "x.csv",
                "--method",
                method,
                "-o",
                &out,
            ],
        );
        assert_eq!(fs::read(d.join(&out)).unwrap(), original, "{method}");
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d.join(format!("{method}.json"))).unwrap())
                .unwrap();
        assert_eq!(report["nrmse"], 0.0);
        assert_eq!(report["converged"], true);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let run = |d: &Path| {
        ok(
            d,
            &[
                "--seed", "9", "synth", "--n", "12", "--t", "16", "--rank", "2", "-o", "x.csv",
            ],
        );
        ok(
            d,
            &[
                "--seed",
                "9",
                "sample",
                "-i",
                "x.csv",
                "--plan",
                "rc=0.9,sub=0.8",
                "-o",
                "s.json",
            ],
        );
        ok(
            d,
            &[
                "--seed",
                "9",
                "reconstruct",
                "-s",
                "s.json",
                "--truth",
                "x.csv",
                "-o",
                "xh.csv",
            ],
        );
        ok(
            d,
            &[
                "--seed",
                "9",
                "experiment",
                "--synthetic",
                "r=2",
                "--n",
                "12",
                "--t",
                "16",
                "--ratios",
                "0.9:0.8",
                "--methods",
                "svt,joint",
                "--trials",
                "2",
                "-o",
                "exp",
            ],
        );
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path());
    run(b.path());
    for f in [
        "x.csv",
        "s.json",
        "xh.csv",
        "xh.json",
        "exp/summary.csv",
        "exp/trials.csv",
        "exp/report.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn seed_changes_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "--seed", "1", "synth", "--n", "10", "--t", "12", "-o", "a.csv",
        ],
    );
    ok(
        d,
        &[
            "--seed", "2", "synth", "--n", "10", "--t", "12", "-o", "b.csv",
        ],
    );
    assert_ne!(
        fs::read(d.join("a.csv")).unwrap(),
        fs::read(d.join("b.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ftvgs(d, &["--help"]).status.code(), Some(0));
    assert_eq!(ftvgs(d, &[]).status.code(), Some(1));
    assert_eq!(ftvgs(d, &["bounds", "--r", "2"]).status.code(), Some(1));
    assert_eq!(
        ftvgs(
            d,
            &["sample", "-i", "x.csv", "--plan", "rc=2", "-o", "s.json"]
        )
        .status
        .code(),
        Some(1)
    );

    fs::write(d.join("ragged.csv"), "1,2,3\n4,5\n").unwrap();
    let o = ftvgs(d, &["sample", "-i", "ragged.csv", "-o", "s.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(
        ftvgs(d, &["sample", "-i", "missing.csv", "-o", "s.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ftvgs(
            d,
            &["bounds", "--r", "2", "--mu1", "0.5", "--delta", "0.1", "--eps", "0.5"]
        )
        .status
        .code(),
        Some(2)
    );

    ok(
        d,
        &[
            "synth", "--n", "12", "--t", "16", "--rank", "2", "-o", "x.csv",
        ],
    );
    ok(
        d,
        &[
            "sample",
            "-i",
            "x.csv",
            "--plan",
            "rc=0.8,sub=0.6",
            "-o",
            "s.json",
        ],
    );
    fs::write(
        d.join("short.json"),
        r#"{"max_iters": 2, "patience": 1000}"#,
    )
    .unwrap();
    let o = ftvgs(
        d,
        &[
            "reconstruct",
            "-s",
            "s.json",
            "--shape",
            "12x16",
            "--config",
            "short.json",
            "-o",
            "partial.csv",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(d.join("partial.csv").exists());
    assert!(d.join("partial.json").exists());

    fs::write(d.join("typo.json"), r#"{"max_iter": 2}"#).unwrap();
    let o = ftvgs(
        d,
        &[
            "reconstruct",
            "-s",
            "s.json",
            "--shape",
            "12x16",
            "--config",
            "typo.json",
            "-o",
            "t.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &[
            "verify", "--lemma", "1", "--n", "40", "--t", "50", "--rank", "2", "--trials", "20",
            "-o", "l1.json",
        ],
    );
    assert!(out.contains("rows_success"), "{out}");
    let out = ok(
        d,
        &[
            "verify", "--lemma", "2", "--n", "40", "--t", "50", "--rank", "2", "--trials", "20",
            "--sizing", "rc=0.8", "-o", "l2.json",
        ],
    );
    assert!(out.contains("both_fraction"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("l2.json")).unwrap()).unwrap();
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 20);
}
