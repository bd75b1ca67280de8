use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flowsep::cli::Report;

fn flowsep(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowsep"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const PSI_SEP: &[&str] = &[
    "classify",
    "--system",
    "annulus-psi",
    "--preset",
    "separating",
    "--delta",
    "0.3",
    "--horizon",
    "200",
    "--dt",
    "0.02",
    "--grid",
    "6",
];

#[test]
fn violation_writes_a_replayable_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = flowsep(PSI_SEP, dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("VIOLATED"));

    let witness = dir.path().join("annulus-psi.separating.witness");
    assert!(witness.exists());
    let replay = flowsep(&["witness-replay", witness.to_str().unwrap()], dir.path());
    assert_eq!(replay.status.code(), Some(0));
    assert!(stdout(&replay).contains("confirmed"));
}

#[test]
fn tampered_witness_reports_drift() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(flowsep(PSI_SEP, dir.path()).status.code(), Some(2));
    let path = dir.path().join("annulus-psi.separating.witness");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"delta\":0.3"));
    fs::write(&path, text.replace("\"delta\":0.3", "\"delta\":0.1")).unwrap();

    let replay = flowsep(&["witness-replay", path.to_str().unwrap()], dir.path());
    assert_eq!(replay.status.code(), Some(2));
    assert!(stdout(&replay).contains("drift"));
}

#[test]
fn malformed_witness_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.witness");
    fs::write(&path, "not a witness\n").unwrap();
    let out = flowsep(&["witness-replay", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn consistent_and_inconclusive_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "classify",
        "--system",
        "annulus-phi",
        "--preset",
        "kinematic",
    ];

    let ok = flowsep(&base, dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).starts_with("CONSISTENT"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

    let mut coarse = base.to_vec();
    coarse.extend(["--dt", "0.1"]);
    let out = flowsep(&coarse, dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("INCONCLUSIVE"));
}

#[test]
fn unknown_names_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_preset = flowsep(
        &["classify", "--system", "annulus-phi", "--preset", "bogus"],
        dir.path(),
    );
    assert_eq!(bad_preset.status.code(), Some(1));
    let bad_system = flowsep(
        &[
            "classify",
            "--system",
            "klein-bottle",
            "--preset",
            "kinematic",
        ],
        dir.path(),
    );
    assert_eq!(bad_system.status.code(), Some(1));
    let missing = flowsep(&["classify", "--system", "annulus-phi"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"system": "annulus-psi", "preset": "separating", "delta": 0.3,
            "horizon": 200, "dt": 0.02, "grid": 6, "out": "from-config"}"#,
    )
    .unwrap();

    let out = flowsep(&["classify", "--config", "run.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(dir
        .path()
        .join("from-config/annulus-psi.separating.witness")
        .exists());

    // At δ = 0.02 the Lipschitz margin of Δt = 0.02 swallows δ.
    let out = flowsep(
        &["classify", "--config", "run.json", "--delta", "0.02"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));

    fs::write(&cfg, r#"{"system": "annulus-psi", "colour": "red"}"#).unwrap();
    let out = flowsep(&["classify", "--config", "run.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_is_deterministic_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = flowsep(
            &["report", "--system", "annulus-psi", "--out", sub],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        fs::read_to_string(dir.path().join(sub).join("report.jsonl")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);

    let report = Report {
        records: Report::parse_jsonl(&a).unwrap(),
        seconds: Default::default(),
    };
    assert_eq!(report.to_jsonl(), a);
    assert_eq!(report.contradictions(), 0);
    assert_eq!(report.mismatches(), 0);
    assert!(dir.path().join("a/report.txt").exists());
    assert!(
        fs::read_dir(dir.path().join("a/witnesses"))
            .unwrap()
            .count()
            > 0
    );
}

#[test]
fn catalog_filters_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let all = stdout(&flowsep(&["catalog"], dir.path()));
    for name in flowsep::systems::CATALOG_NAMES {
        assert!(all.contains(name), "{name} missing");
    }
    let some = stdout(&flowsep(&["catalog", "torus"], dir.path()));
    assert!(some.contains("torus-irrational") && some.contains("torus-fake-saddle"));
    assert!(!some.contains("annulus"));
}

#[test]
fn help_lists_default_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let help = stdout(&flowsep(&["classify", "--help"], dir.path()));
    assert!(help.contains("Default budgets"));
    assert!(help.contains("sus-ext-plane"));
}
