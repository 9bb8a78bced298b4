use std::path::Path;
use std::process::{Command, Output};

fn lvrep(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvrep"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvrep(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["run-online", "run-offline", "check-theory", "eval"] {
        assert!(text.contains(sub), "{text}");
    }
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvrep(&["run-online", "--config", "nowhere/exp.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nowhere/exp.cfg"), "{}", stderr(&out));
}

#[test]
fn bad_config_lines_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "env = chain\nagent.n_episodes = lots\n").unwrap();
    let out = lvrep(&["run-online", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    std::fs::write(dir.path().join("task.cfg"), "task = eval\n").unwrap();
    let out = lvrep(&["run-online", "--config", "task.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = lvrep(&["check-theory", "--suite", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nonsense"));
}

#[test]
fn simulation_suite_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvrep(&["check-theory", "--suite", "simulation", "--out", "reports", "--seed", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = read_json(&dir.path().join("reports/report_simulation.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 4);
    let residual = report["checks"][0]["report"]["max_residual"].as_f64().unwrap();
    assert!(residual < 1e-8, "{residual}");
}

#[test]
fn online_run_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("online.cfg"),
        "# small chain run\nenv = chain\nenv.n_states = 6\nseeds = 1, 2\nagent.n_episodes = 15\nagent.n_latent = 3\noutput_dir = runs\n",
    )
    .unwrap();
    let out = lvrep(&["run-online", "--config", "online.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let runs = dir.path().join("runs");
    for seed in [1, 2] {
        let csv = std::fs::read_to_string(runs.join(format!("runlog_{seed}.csv"))).unwrap();
        assert!(csv.starts_with("episode,value,v_star,regret,"));
        assert_eq!(csv.lines().count(), 16);
        for file in ["runlog_{}.json", "model_{}.json", "policy_{}.json"] {
            assert!(runs.join(file.replace("{}", &seed.to_string())).exists(), "{file}");
        }
    }

    std::fs::write(dir.path().join("eval.cfg"), "env = chain\nenv.n_states = 6\nseeds = 1, 2\noutput_dir = runs\n").unwrap();
    let out = lvrep(&["eval", "--config", "eval.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = read_json(&runs.join("report_eval.json"));
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    let log = read_json(&runs.join("runlog_1.json"));
    let last = log["records"].as_array().unwrap().last().unwrap()["value"].as_f64().unwrap();
    assert!((entries[0]["value"].as_f64().unwrap() - last).abs() < 1e-9);

    let out = lvrep(&["eval", "--config", "eval.cfg", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    // Evaluating against a mismatched environment is a configuration error.
    std::fs::write(dir.path().join("eval8.cfg"), "env = chain\nenv.n_states = 8\noutput_dir = runs\n").unwrap();
    let out = lvrep(&["eval", "--config", "eval8.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn offline_run_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("offline.cfg"),
        "task = run_offline\nenv = block\nenv.n_states = 8\nenv.n_latent = 2\noffline.n_samples = 400\nagent.n_latent = 2\n",
    )
    .unwrap();
    let out = lvrep(&["run-offline", "--config", "offline.cfg", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let diag = read_json(&dir.path().join("o/diagnostics_1.json"));
    assert_eq!(diag["n_samples"], 400);
    assert!(diag["value"].as_f64().unwrap() <= diag["v_star"].as_f64().unwrap() + 1e-8);
}
