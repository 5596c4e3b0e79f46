use std::process::{Command, Output};

fn wsum(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wsum"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("WSUM_THREADS", t),
        None => cmd.env_remove("WSUM_THREADS"),
    };
    cmd.output().expect("binary runs")
}

const DOMINANCE: &[&str] = &[
    "dominance",
    "--dist",
    "gamma:alpha=1,beta=1",
    "--mode",
    "thm1",
    "--a",
    "1,1",
    "--b",
    "2,0.5",
    "--t-grid",
    "auto",
    "--samples",
    "1000000",
    "--seed",
    "42",
];

#[test]
fn dominance_example_exits_zero_and_is_reproducible() {
    let one = wsum(DOMINANCE, Some("1"));
    assert_eq!(
        one.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&one.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(report["holds"], true);
    let four = wsum(DOMINANCE, Some("4"));
    let auto = wsum(DOMINANCE, Some("0"));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);
}

#[test]
fn premise_violation_exits_two() {
    let o = wsum(
        &[
            "check-premise",
            "--mode",
            "thm1",
            "--a",
            "1,1",
            "--b",
            "0.5,1.5",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn appendix_closed_form_case_exits_zero() {
    let o = wsum(
        &["verify-appendix", "--p", "2", "--beta", "0.75", "--t", "1"],
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let reports: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["holds"] == true));
}

#[test]
fn bad_input_exits_one_with_position() {
    let o = wsum(
        &[
            "dominance",
            "--dist",
            "gamma:alpha=x,beta=1",
            "--mode",
            "thm1",
            "--a",
            "1",
            "--b",
            "1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("column 13"));

    let o = wsum(
        &[
            "dominance",
            "--dist",
            "gamma:alpha=1,beta=1",
            "--mode",
            "thm1",
            "--a",
            "1,1",
            "--b",
            "0.5,1.5",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Theorem 1"));

    let o = wsum(&["gen-pair", "--mode", "thm1", "--n", "3"], Some("many"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("wsum-cli-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let o = wsum(
        &[
            "bounds",
            "--dist",
            "weibull:p=2",
            "--a",
            "2,0.5",
            "--q",
            "2",
            "--samples",
            "50000",
            "--t-grid",
            "0.5:4:8",
            "--format",
            "csv",
            "--out",
            p,
        ],
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    assert!(csv.starts_with("t,lower,target,upper\n"));
    assert_eq!(csv.lines().count(), 9);
}
