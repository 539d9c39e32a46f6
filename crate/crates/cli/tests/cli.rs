use std::fs;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use pourgoal_core::harness::TRACE_HEADER;
use serde_json::Value;

fn pourgoal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pourgoal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_trace_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "{}");
    let out = dir.path().join("run");
    let res = pourgoal(&[
        "run",
        "--config",
        &config,
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER);
    let metrics = read_json(&out.join("metrics.json"));
    assert_eq!(
        metrics["ticks"].as_u64().unwrap() as usize,
        trace.lines().count() - 1
    );
    assert!(metrics["human_effort"].as_f64().unwrap() >= 0.0);
    assert_eq!(read_json(&out.join("config.json"))["seed"], 4);

    // same seed, same bytes
    let again = dir.path().join("again");
    pourgoal(&[
        "run",
        "--config",
        &config,
        "--seed",
        "4",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(out.join("trace.csv")).unwrap(),
        fs::read(again.join("trace.csv")).unwrap()
    );
}

#[test]
fn batch_writes_per_episode_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "{}");
    for (name, extra) in [
        ("adaptive", vec![]),
        ("baseline", vec!["--baseline", "fixed-rate"]),
    ] {
        let out = dir.path().join(name);
        let mut args = vec![
            "batch",
            "--config",
            &config,
            "--episodes",
            "6",
            "--seed-base",
            "20",
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend(extra);
        let res = pourgoal(&args);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        for seed in 20..26 {
            assert!(out.join(format!("trace_seed{seed}.csv")).exists());
        }
        let summary = read_json(&out.join("summary.json"));
        assert_eq!(summary["summary"]["episodes"], 6);
        assert_eq!(summary["summary"]["seed_base"], 20);
        assert_eq!(summary["episodes"].as_array().unwrap().len(), 6);
        let kind = &summary["summary"]["policy"]["kind"];
        if name == "baseline" {
            assert_eq!(kind, "fixed_rate");
            assert_eq!(summary["summary"]["policy"]["tilt_rate"], 0.3);
        } else {
            assert_eq!(kind, "adaptive");
        }
    }
}

#[test]
fn oracle_check_accepts_genuine_trace_and_rejects_tampered_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"seed": 11}"#);
    let out = dir.path().join("run");
    assert!(
        pourgoal(&["run", "--config", &config, "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    let trace = out.join("trace.csv");

    let ok = pourgoal(&[
        "oracle-check",
        "--trace",
        trace.to_str().unwrap(),
        "--config",
        &config,
    ]);
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["max_weight_diff"].as_f64().unwrap() <= 1e-9);

    // claim a different MAP on the last row
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.last_mut().unwrap();
    let mut cols: Vec<String> = last.split(',').map(str::to_string).collect();
    cols[7] = "495.0".into();
    *last = cols.join(",");
    let tampered = dir.path().join("tampered.csv");
    fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    let bad = pourgoal(&[
        "oracle-check",
        "--trace",
        tampered.to_str().unwrap(),
        "--config",
        &config,
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let bad = write_config(dir.path(), r#"{"env": {"dt": 0.5}}"#);
    assert_eq!(
        pourgoal(&["run", "--config", &bad, "--out", out])
            .status
            .code(),
        Some(2)
    );
    let unknown = write_config(dir.path(), r#"{"speed": 3}"#);
    assert_eq!(
        pourgoal(&["run", "--config", &unknown, "--out", out])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("nope.json");
    assert_eq!(
        pourgoal(&["run", "--config", missing.to_str().unwrap(), "--out", out])
            .status
            .code(),
        Some(2)
    );
    let ok = write_config(dir.path(), "{}");
    assert_eq!(
        pourgoal(&["batch", "--config", &ok, "--episodes", "0", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pourgoal(&["serve", "--port", "0", "--tick-hz", "200"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn degenerate_posterior_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    // the filter believes in near-perfect corrections, the human is sloppy
    let config = write_config(
        dir.path(),
        r#"{"obs": {"sigma_h": 0.0001}, "human": {"p_intervene": 1.0, "obs": {"sigma_h": 0.3}}}"#,
    );
    let out = dir.path().join("o");
    let res = pourgoal(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn serve_answers_healthz() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_pourgoal"))
        .args(["serve", "--port", &port.to_string(), "--tick-hz", "10"])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let response = loop {
        if let Ok(mut stream) = TcpStream::connect(("127.0.0.1", port)) {
            stream
                .write_all(b"GET /healthz HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
                .unwrap();
            let mut text = String::new();
            stream.read_to_string(&mut text).unwrap();
            break text;
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with("ok"));
}
