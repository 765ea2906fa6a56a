use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn tm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm"))
        .args(args)
        .output()
        .expect("run tm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_clean_corpus() {
    for name in [
        "underpants.tm",
        "order.tm",
        "carservice.tm",
        "letter.tm",
        "brutus.tm",
    ] {
        let o = tm(&["validate", corpus(name).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", stdout(&o));
        assert!(stdout(&o).contains("0 errors, 0 warnings"));
    }
}

#[test]
fn validate_mode_flag() {
    let f = corpus("order_simplified.tm");
    let f = f.to_str().unwrap();
    assert_eq!(code(&tm(&["validate", f])), 1);
    assert_eq!(code(&tm(&["validate", f, "--mode", "simplified"])), 0);
}

#[test]
fn validate_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "bad.tm",
        "model M {\n  thimac A { create a; }\n  thimac B { process b; }\n  flow A.a -> B.b;\n}\n",
    );
    let o = tm(&["validate", &f, "--json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["errors"], 1);
    assert_eq!(v["violations"][0]["rule"], "V1");
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "broken.tm",
        "model M {\n  thimac T {\n    grow a;\n  }\n}\n",
    );
    let o = tm(&["validate", &f]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("broken.tm:3:"), "{}", stderr(&o));
}

#[test]
fn io_and_schema_errors_exit_3() {
    assert_eq!(code(&tm(&["validate", "/nonexistent/model.tm"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir, "m.json", r#"{"version": 9}"#);
    let o = tm(&["validate", &f]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("VERSION"));
    let ad = write(
        &dir,
        "ad.json",
        r#"{"nodes": [{"id": "a", "name": "A", "kind": "fork"}]}"#,
    );
    let o = tm(&["import-ad", &ad]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("UNSUPPORTED"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&tm(&["simulate"])), 2);
    assert_eq!(code(&tm(&["simulate", "x.tm", "--loop-bound", "0"])), 2);
}

#[test]
fn letter_trace_has_eleven_lines() {
    let o = tm(&[
        "simulate",
        corpus("letter.tm").to_str().unwrap(),
        "--loop-bound",
        "5",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[10].starts_with("10\tE3\t"), "{out}");
    assert!(lines[0].starts_with("0\tE1\tLetter.Word.word"), "{out}");
}

#[test]
fn simulate_json_and_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let o = tm(&[
        "simulate",
        corpus("carservice.tm").to_str().unwrap(),
        "--loop-bound",
        "3",
        "--json",
        "--trace-out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["steps"].as_array().unwrap().len(), 11);
    assert_eq!(std::fs::read_to_string(out).unwrap(), stdout(&o));
}

#[test]
fn budget_exits_4_with_partial_trace() {
    let o = tm(&[
        "simulate",
        corpus("order.tm").to_str().unwrap(),
        "--max-steps",
        "3",
    ]);
    assert_eq!(code(&o), 4);
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(stderr(&o).contains("BUDGET"));
}

#[test]
fn invalid_behavior_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "cycle.tm",
        "model M { thimac T { create a; create b; } }\nevents {\n  event E1 { region: T.a; }\n  event E2 { region: T.b; }\n}\nbehavior {\n  E1 -> E2;\n  E2 -> E1;\n}\n",
    );
    let o = tm(&["simulate", &f]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("INVALID_INPUT"), "{}", stderr(&o));
}

#[test]
fn events_listing() {
    let o = tm(&["events", corpus("order.tm").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with('E')).count(), 9);
    assert!(out.ends_with("9 events, 0 uncovered actions\n"), "{out}");
    let o = tm(&["events", corpus("order.tm").to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["events"].as_array().unwrap().len(), 9);
}

#[test]
fn export_formats() {
    let f = corpus("brutus.tm");
    let o = tm(&[
        "export",
        f.to_str().unwrap(),
        "--format",
        "dot",
        "--show-events",
    ]);
    assert_eq!(code(&o), 0);
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph \"Brutus\" {"));
    assert!(dot.contains("style=dashed"));

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("brutus.json");
    let o = tm(&[
        "export",
        f.to_str().unwrap(),
        "--format",
        "json",
        "-o",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = tm(&["validate", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn import_activity_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("carservice.tm");
    let o = tm(&[
        "import-ad",
        corpus("carservice_ad.json").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("model CarserviceAd {"), "{text}");
    assert_eq!(code(&tm(&["validate", out.to_str().unwrap()])), 0);
    let o = tm(&["simulate", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn normalize_simplified_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("order_strict.tm");
    let o = tm(&[
        "normalize",
        corpus("order_simplified.tm").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = tm(&["validate", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 errors"));
}
