use std::path::Path;
use std::process::{Command, Output};

fn henon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henon")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn green_far_out_is_ten() {
    let x = format!("{},0", 10f64.exp());
    let out = henon(&["green", "--point", &x]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = v["value"].as_f64().unwrap();
    assert!((g - 10.0).abs() < 1e-3, "{g}");
}

#[test]
fn bad_point_reports_json_error() {
    let out = henon(&["green", "--point", "1,2,3"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["kind"].is_string());
    assert!(err["error"]["message"].as_str().unwrap().contains("X,Y"));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = henon(&["green", "--config", "/nonexistent/cfg.json", "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_graph_table() {
    let out = henon(&["model-graph", "--depth", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows, ["k\thandles", "1\t1", "2\t2", "3\t4", "4\t8"]);
}

#[test]
fn render_of_empty_stream() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.jsonl");
    let svg = dir.path().join("plot.svg");
    std::fs::write(&input, "").unwrap();
    let out = henon(&["render", "--in", path(&input), "--proj", "potential-angle", "--out", path(&svg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn far_piece_matches_its_model() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("far.json");
    let out = henon(&["check-model", "--upsilon", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["matchesModel"], true);
}

#[test]
fn trace_continue_render() {
    let dir = tempfile::tempdir().unwrap();
    let traced = dir.path().join("trace.jsonl");
    let out = henon(&["trace", "--component", "", "--out", path(&traced)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(&traced).unwrap();
    assert!(first.lines().next().unwrap().contains("\"record\":\"header\""));

    let spec = dir.path().join("path.json");
    std::fs::write(
        &spec,
        r#"{"schemaVersion":1,"nodes":[{"a":[1e-4,0],"c":[-6,0]},{"a":[1.04e-4,0],"c":[-6,0]}],"maxParamStep":2e-6}"#,
    )
    .unwrap();
    let tracks = dir.path().join("tracks.jsonl");
    let out = henon(&["continue", "--path", path(&spec), "--seeds", path(&traced), "--out", path(&tracks)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&tracks).unwrap();
    let waypoints = text.lines().filter(|l| l.contains("\"record\":\"waypoint\"")).count();
    let tracks_n = text.lines().filter(|l| l.contains("\"record\":\"track\"")).count();
    assert!(tracks_n > 0);
    assert_eq!(waypoints, 3 * tracks_n);

    let svg = dir.path().join("tracks.svg");
    let out = henon(&["render", "--in", path(&tracks), "--proj", "y-plane", "--out", path(&svg)]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}
