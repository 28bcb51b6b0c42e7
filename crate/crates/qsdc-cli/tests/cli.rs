//! End-to-end tests of the `qsdc` binary: schema goldens, exit statuses,
//! scenario files, and byte-level output determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsdc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    bin().args(args).env(key, value).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("qsdc-cli-test-{}-{name}", std::process::id()));
    path
}

const CSV_HEADER: &str = "trials,delivered,aborted_first,aborted_second,error_rate,error_ci_low,error_ci_high,abort_rate,adversary_accuracy";

#[test]
fn csv_header_is_golden() {
    let out = run(&["--n", "16", "--delta", "8", "--trials", "5", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let row = lines.next().unwrap();
    assert!(row.starts_with("5,5,0,0,0,"), "row: {row}");
    assert_eq!(lines.next(), None);
}

#[test]
fn json_contains_schema_and_scenario_echo() {
    let out = run(&[
        "--n",
        "64",
        "--delta",
        "64",
        "--adversary2",
        "substitution",
        "--variant",
        "original",
        "--trials",
        "50",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"adversary_accuracy\": 1.0"), "{text}");
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let object = value.as_object().unwrap();
    let keys: Vec<&String> = object.keys().collect();
    assert_eq!(
        keys,
        [
            "scenario",
            "trials",
            "delivered",
            "aborted_first",
            "aborted_second",
            "error_rate",
            "error_ci_low",
            "error_ci_high",
            "abort_rate",
            "adversary_accuracy",
        ]
        .iter()
        .collect::<Vec<_>>()
    );
    let scenario = value["scenario"].as_object().unwrap();
    let scenario_keys: Vec<&String> = scenario.keys().collect();
    assert_eq!(
        scenario_keys,
        [
            "n",
            "delta",
            "variant",
            "controllers",
            "adversary1",
            "adversary2",
            "trials",
            "seed",
            "threshold",
        ]
        .iter()
        .collect::<Vec<_>>()
    );
    assert_eq!(value["scenario"]["adversary2"], "substitution");
    assert_eq!(value["abort_rate"], 1.0);
}

#[test]
fn same_seed_gives_byte_identical_output_across_parallelism() {
    let args = [
        "--n",
        "32",
        "--delta",
        "16",
        "--adversary2",
        "intercept",
        "--variant",
        "improved",
        "--trials",
        "40",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let first = run_with_env(&args, "RAYON_NUM_THREADS", "1");
    let second = run_with_env(&args, "RAYON_NUM_THREADS", "4");
    let third = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn out_flag_writes_identical_bytes_to_file() {
    let path = temp_path("out.csv");
    let args = [
        "--n",
        "16",
        "--delta",
        "8",
        "--trials",
        "10",
        "--seed",
        "3",
        "--adversary2",
        "substitution",
    ];
    let piped = run(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let path_str = path.to_str().unwrap().to_string();
    with_out.extend(["--out", &path_str]);
    let filed = run(&with_out);
    assert!(filed.status.success());
    let file_bytes = std::fs::read(&path).unwrap();
    assert_eq!(piped.stdout, file_bytes);
    std::fs::remove_file(&path).ok();
}

#[test]
fn scenario_file_is_read_and_flags_override() {
    let path = temp_path("scenario.txt");
    std::fs::write(
        &path,
        "# demo scenario\nn = 16\ndelta = 8\nvariant = original\ncontrollers = single\n\
         adversary1 = honest\nadversary2 = substitution\ntrials = 10\nseed = 3\nthreshold = 0\n",
    )
    .unwrap();
    let path_str = path.to_str().unwrap().to_string();

    let from_file = run(&["--scenario", &path_str]);
    let from_flags = run(&[
        "--n",
        "16",
        "--delta",
        "8",
        "--trials",
        "10",
        "--seed",
        "3",
        "--adversary2",
        "substitution",
    ]);
    assert_eq!(from_file.stdout, from_flags.stdout);

    // An inline flag wins over the file entry.
    let overridden = run(&["--scenario", &path_str, "--adversary2", "honest"]);
    assert_ne!(overridden.stdout, from_file.stdout);
    let text = stdout(&overridden);
    assert!(text.lines().nth(1).unwrap().starts_with("10,10,"), "{text}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn scenario_file_unknown_key_is_usage_error() {
    let path = temp_path("bad-scenario.txt");
    std::fs::write(&path, "frobnicate = 12\n").unwrap();
    let out = run(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn exit_codes_are_distinct() {
    // Usage: out-of-range value.
    assert_eq!(run(&["--delta", "0"]).status.code(), Some(2));
    // Usage: unknown enum value, message names the flag.
    let bad_variant = run(&["--variant", "improvedd"]);
    assert_eq!(bad_variant.status.code(), Some(2));
    let err = String::from_utf8(bad_variant.stderr).unwrap();
    assert!(err.contains("--variant"), "{err}");
    // Usage: unknown flag.
    assert_eq!(run(&["--frobnicate"]).status.code(), Some(2));
    // Usage: substitution cannot tap the first transmission.
    assert_eq!(run(&["--adversary1", "substitution"]).status.code(), Some(2));
    // I/O: unreadable scenario file.
    assert_eq!(
        run(&["--scenario", "/no/such/file"]).status.code(),
        Some(3)
    );
    // I/O: unwritable output path.
    assert_eq!(
        run(&["--trials", "2", "--out", "/no-such-dir/report.csv"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn transcript_dump_reflects_trial_zero() {
    let path = temp_path("transcript.txt");
    let out = run(&[
        "--n",
        "8",
        "--delta",
        "4",
        "--variant",
        "improved",
        "--trials",
        "3",
        "--seed",
        "5",
        "--transcript",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("Charlie -> Alice: quantum transmission of 12 qubits"));
    assert!(text.contains("Alice -> Bob: quantum transmission of 12 qubits"));
    assert!(text.contains("announces mask key"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_emits_ordered_rows_with_leading_param() {
    let out = run(&[
        "--adversary2",
        "substitution",
        "--n",
        "16",
        "--trials",
        "20",
        "--seed",
        "9",
        "--sweep",
        "delta",
        "--values",
        "4,8,16",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], format!("delta,{CSV_HEADER}"));
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("4,20,"));
    assert!(lines[2].starts_with("8,20,"));
    assert!(lines[3].starts_with("16,20,"));
}

#[test]
fn single_value_sweep_matches_execute_plus_sweep_column() {
    let base = [
        "--n",
        "16",
        "--delta",
        "8",
        "--trials",
        "15",
        "--seed",
        "2",
        "--adversary2",
        "intercept",
    ];
    let execute = run(&base);
    let mut sweep_args = base.to_vec();
    sweep_args.extend(["--sweep", "delta", "--values", "8"]);
    let sweep = run(&sweep_args);
    let exec_lines: Vec<String> = stdout(&execute).lines().map(String::from).collect();
    let sweep_lines: Vec<String> = stdout(&sweep).lines().map(String::from).collect();
    assert_eq!(sweep_lines[0], format!("delta,{}", exec_lines[0]));
    assert_eq!(sweep_lines[1], format!("8,{}", exec_lines[1]));
}

#[test]
fn sweep_abort_rate_grows_with_delta_under_substitution() {
    // Detection probability is 1 - (1/2)^conclusive, so the abort-rate
    // column must climb with the check size. (Below delta = 4 a second
    // effect dominates: checks with zero conclusive measurements abort
    // honest runs, so the curve is only monotone from there up.)
    let out = run(&[
        "--adversary2",
        "substitution",
        "--n",
        "64",
        "--trials",
        "300",
        "--seed",
        "13",
        "--sweep",
        "delta",
        "--values",
        "4,8,16,32,64",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let abort_rates: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            cols[8].parse().unwrap()
        })
        .collect();
    assert_eq!(abort_rates.len(), 5);
    for pair in abort_rates.windows(2) {
        assert!(pair[0] <= pair[1], "abort rates not monotone: {abort_rates:?}");
    }
    assert!(abort_rates[4] >= 0.999);
}

#[test]
fn sweep_rejects_empty_values() {
    let out = run(&["--sweep", "delta", "--values", " , "]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--sweep", "delta", "--values", "4,zero"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_json_lists_rows() {
    let out = run(&[
        "--adversary2",
        "substitution",
        "--trials",
        "10",
        "--seed",
        "4",
        "--sweep",
        "delta",
        "--values",
        "8,16",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["sweep"], "delta");
    let rows = value["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["value"], 8);
    assert_eq!(rows[1]["value"], 16);
    assert_eq!(rows[0]["trials"], 10);
}
