use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lce-trace"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn replay_prints_one_line_per_query() {
    let trace = "insert 1 1\ninsert 2 1\ninsert 3 2\nlcp 1 2\nlcs 1 2\neq 1 2 1\nsettle\nvalidate\n";
    for mode in ["pipelined", "eager"] {
        let o = run(&["replay", "-", "--n", "16", "--mode", mode, "--crosscheck", "on"], trace);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), "1\n1\ntrue\nvalid\n");
    }
}

#[test]
fn applications_replay() {
    let trace = "d1set 1 <\nd1set 4 >\nd1member\nseset 1 2 5\nseequal\nseset 2 7 5\nseequal\nsqset 2 3\nsqquery\n";
    let o = run(&["replay", "-", "--n", "8", "--crosscheck", "on"], trace);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "true\nfalse\ntrue\nfalse\n");
}

#[test]
fn bad_input_exits_with_2_and_names_the_line() {
    let o = run(&["replay", "-"], "insert 1 1\nlcp 1\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&["replay", "-", "--n", "4"], "lcp 1 1\n");
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["replay", "/nonexistent/trace"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_writes_json() {
    let dir = std::env::temp_dir().join(format!("lce-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bench.json");
    let o = run(&["bench", "--sizes", "64,128", "--updates", "10", "--json", path.to_str().unwrap()], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fitted exponent"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
