use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn sortflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sortflow"))
        .args(args)
        .env_remove("SORTFLOW_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn no_arguments_prints_usage() {
    let o = sortflow(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_inputs_exit_with_one() {
    let map = fixture("sortation_24x30.map");
    let map = map.to_str().unwrap();
    for args in [
        vec!["--map", "/nonexistent/map"],
        vec!["--map", map, "--algo", "pbs"],
        vec!["--map", map, "--stride", "25"],
        vec!["--map", map, "--horizon", "100"],
    ] {
        let o = sortflow(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn oneshot_running_example() {
    let map = fixture("running_example.map");
    let agents = fixture("running_example.agents");
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.txt");
    let o = sortflow(&[
        "--map",
        map.to_str().unwrap(),
        "--oneshot",
        "--scenario",
        agents.to_str().unwrap(),
        "--algo",
        "pito,ito-l",
        "--T",
        "2",
        "--K",
        "3",
        "--dump-network",
        net.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("idle_time=8").count(), 2, "{text}");
    assert_eq!(text.matches("admit=4").count(), 4, "{text}");
    let dump = fs::read_to_string(net).unwrap();
    assert!(dump.starts_with("# vertices="));
    assert!(dump.lines().count() > 10);
}

#[test]
fn sweep_writes_metrics_and_timeline() {
    let map = fixture("sortation_24x30.map");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = sortflow(&[
        "--map",
        map.to_str().unwrap(),
        "--algo",
        "ito-l,h-inf-l",
        "--reps",
        "2",
        "--horizon",
        "90",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert_eq!(lines[0], "algo,seed,agents,W,total_idle_time,parcels,avg_solve_ms,workload_pct");
    assert!(lines[1..].iter().all(|l| l.split(',').nth(6) == Some("NA")));
    let timeline = fs::read_to_string(dir.path().join("m.csv.timeline.csv")).unwrap();
    // t = 0, 30, 60, 90 per run
    assert_eq!(timeline.lines().count(), 1 + 4 * 4);
}

#[test]
fn sweep_is_reproducible() {
    let map = fixture("sortation_24x30.map");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_sortflow"))
            .args(["--map", map.to_str().unwrap(), "--algo", "pito-l,h-q-l", "--horizon", "60", "--jobs", "2"])
            .args(["--out", out.to_str().unwrap()])
            .env("SORTFLOW_LOG", "events")
            .output()
            .unwrap();
        assert!(o.status.success());
        let events = fs::read_to_string(dir.path().join(format!("{name}.events.log"))).unwrap();
        assert!(events.contains("event=admit"));
        outputs.push((fs::read(&out).unwrap(), events));
    }
    assert_eq!(outputs[0], outputs[1]);
}
