use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn tapebot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tapebot")).args(args).output().unwrap()
}

fn tapebot_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tapebot"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// 1.2 m of tape at 2 mm cells, robot at its start.
fn write_fixture(dir: &Path, extra: &str) -> PathBuf {
    let (w, h) = (650, 100);
    let mut track = format!("TRACK v1\ncells_per_meter 500\nsize {w} {h}\n");
    for row in (0..h).rev() {
        for col in 0..w {
            let y = (row as f64 + 0.5) / 500.0;
            let x = (col as f64 + 0.5) / 500.0;
            track.push(if x <= 1.2 && (y - 0.1).abs() <= 0.009 { '#' } else { '.' });
        }
        track.push('\n');
    }
    fs::write(dir.join("line.track"), track).unwrap();
    let scenario = dir.join("line.json");
    fs::write(
        &scenario,
        format!(
            r#"{{
  "track": "line.track",
  "initial_pose": {{ "x": 0.0, "y": 0.1, "heading_deg": 0 }},
  "max_time": 2.0,
  "assertions": [
    {{ "kind": "on_line_fraction", "min_fraction": 0.9, "start_t": 0.0, "end_t": 2.0 }},
    {{ "kind": "pose_in_region", "t": 2.0, "x_min": 0.4, "x_max": 0.6, "y_min": 0.09, "y_max": 0.11 }}
  ]{extra}
}}
"#
        ),
    )
    .unwrap();
    scenario
}

#[test]
fn resistor_worked_example() {
    let o = tapebot(&["resistor", "5", "2", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("computed: 150 ohm"), "{text}");
    assert!(text.contains("kit: 220 ohm"), "{text}");
}

#[test]
fn ir_encode_then_decode() {
    for code in ["0x00FF6897", "0x00FF9867"] {
        let enc = tapebot(&["ir", "encode", code]);
        assert!(enc.status.success());
        let train = stdout(&enc);
        assert_eq!(train.split_whitespace().count(), 67);
        let dec = tapebot_stdin(&["ir", "decode"], &train);
        assert!(dec.status.success());
        assert_eq!(stdout(&dec).trim(), code);
    }
    let rep = tapebot_stdin(&["ir", "decode"], "+9000 -2250 +560\n");
    assert_eq!(stdout(&rep).trim(), "REPEAT");
    let bad = tapebot_stdin(&["ir", "decode"], "+4000 -4500 +560\n");
    assert_eq!(bad.status.code(), Some(2));
    let junk = tapebot_stdin(&["ir", "decode"], "nine thousand\n");
    assert_eq!(junk.status.code(), Some(2));
}

#[test]
fn truth_table_has_sixteen_rows() {
    let o = tapebot(&["truth-table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows.iter().filter(|r| r.ends_with("Standby")).count(), 8);
    assert!(rows.contains(&"  H   L 255    H  CW"));
    assert!(rows.contains(&"  L   H 255    H  CCW"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(tapebot(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tapebot(&["simulate"]).status.code(), Some(2));
    assert_eq!(tapebot(&["simulate", "x.json", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(tapebot(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_scenario_is_input_error() {
    let o = tapebot(&["simulate", "definitely-missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("definitely-missing.json"));
}

#[test]
fn simulate_passes_and_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_fixture(dir.path(), "");
    let s = scenario.to_str().unwrap();
    let jsonl = dir.path().join("t.jsonl");
    let o = tapebot(&["simulate", s, "--trace", jsonl.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let lines: Vec<_> = fs::read_to_string(&jsonl).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 201);
    let first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(first["t"], 0.0);
    assert_eq!(first["sensors"], serde_json::json!([0, 1, 0]));

    let csv = dir.path().join("t.csv");
    let o = tapebot(&["simulate", s, "--trace", csv.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x,y,heading,sensors,"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn failing_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_fixture(dir.path(), "");
    let s = scenario.to_str().unwrap();
    let o = tapebot(&["simulate", s, "--override", "assertions.1.x_min=0.9"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
    let o = tapebot(&["simulate", s, "--max-time", "1.0"]);
    assert_eq!(o.status.code(), Some(2), "assertion beyond max_time is an input error");
}

#[test]
fn override_matches_file_edit() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_fixture(dir.path(), "");
    let via_flag = dir.path().join("flag.jsonl");
    tapebot(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--override",
        "control.speed=120",
        "--trace",
        via_flag.to_str().unwrap(),
    ]);

    let edited_dir = tempfile::tempdir().unwrap();
    fs::copy(dir.path().join("line.track"), edited_dir.path().join("line.track")).unwrap();
    let edited = write_fixture(edited_dir.path(), ",\n  \"control\": { \"speed\": 120 }");
    let via_file = edited_dir.path().join("file.jsonl");
    tapebot(&["simulate", edited.to_str().unwrap(), "--trace", via_file.to_str().unwrap()]);

    let a = fs::read(&via_flag).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, fs::read(&via_file).unwrap());
    let baseline = dir.path().join("base.jsonl");
    tapebot(&["simulate", scenario.to_str().unwrap(), "--trace", baseline.to_str().unwrap()]);
    assert_ne!(a, fs::read(&baseline).unwrap());
}

#[test]
fn validate_reports_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_fixture(dir.path(), ",\n  \"ir_events\": [ { \"time\": 0.5, \"button\": \"Button2\" } ]");
    let o = tapebot(&["validate", scenario.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("1 ir events, 2 assertions"));

    let o = tapebot(&["validate", scenario.to_str().unwrap(), "--override", "physics_dt=-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tapebot(&["validate", scenario.to_str().unwrap(), "--override", "control.speed=999"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tapebot(&["validate", scenario.to_str().unwrap(), "--override", "noequals"]);
    assert_eq!(o.status.code(), Some(2));
}
