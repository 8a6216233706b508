use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fairbandit::traces::{read_summaries, read_traces};

fn fairbandit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairbandit"))
        .args(args)
        .env_remove("FAIRBANDIT_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lp_and_gamma_on_the_four_arm_instance() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("p.toml");
    fs::write(
        &poly,
        "k = 4\ngroups = [[0, 1], [2, 3]]\nlower = [0.25, 0.25]\nupper = [0.75, 0.75]\n",
    )
    .unwrap();
    let out = fairbandit(&["lp", "--polytope", path_str(&poly), "--mu", "0.9,0.5,0.8,0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(fields[0], "partition-greedy");
    assert!((fields[1].parse::<f64>().unwrap() - 0.875).abs() < 1e-12);
    let p: Vec<f64> = fields[2..].iter().map(|f| f.parse().unwrap()).collect();
    assert_eq!(p, vec![0.75, 0.0, 0.25, 0.0]);

    let brute = fairbandit(&["lp", "--polytope", path_str(&poly), "--mu", "0.9,0.5,0.8,0.1", "--brute-force"]);
    assert!(stdout(&brute).contains("brute-force,0.875"));

    let out = fairbandit(&["gamma", "--polytope", path_str(&poly), "--mu", "0.9,0.5,0.8,0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let gamma: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((gamma - 0.05).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    // lower bounds summing past one
    let out = fairbandit(&["run", "--lower", "0.7", "--reps", "1", "--horizon", "10"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "horizon = 10\nunknown_key = 3\n").unwrap();
    let out = fairbandit(&["run", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));

    let out = fairbandit(&["run", "--algo", "greedy", "--reps", "1", "--horizon", "10"]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("nope.csv");
    let out = fairbandit(&["audit", path_str(&missing), "--lower", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn audit_passes_fair_runs_and_flags_unc() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out = fairbandit(&[
        "run", "--algo", "fair-oful,fair-eps,ran,naive,opt,unc", "--reps", "2", "--horizon", "150", "--lower", "0.25",
        "--trace", path_str(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for prefix in ["fair-oful", "fair-eps", "ran", "naive", "opt"] {
        let out = fairbandit(&["audit", path_str(&trace), "--lower", "0.25", "--run-prefix", prefix]);
        assert_eq!(out.status.code(), Some(0), "{prefix}");
    }
    let out = fairbandit(&["audit", path_str(&trace), "--lower", "0.25", "--run-prefix", "unc"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn summaries_agree_with_the_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let summary = dir.path().join("s.csv");
    let out = fairbandit(&[
        "run", "--algo", "fair-eps,ran,unc", "--reps", "4", "--horizon", "120", "--lower", "0.2", "--trace",
        path_str(&trace), "--summary", path_str(&summary),
    ]);
    assert!(out.status.success());
    let rows = read_traces(fs::File::open(&trace).unwrap(), &trace).unwrap();
    let summaries = read_summaries(fs::File::open(&summary).unwrap(), &summary).unwrap();

    // run id -> (last cumulative reward, horizon, regret sum)
    let mut runs: BTreeMap<String, (f64, u64, f64)> = BTreeMap::new();
    for r in &rows {
        let e = runs.entry(r.run_id.clone()).or_insert((0.0, 0, 0.0));
        e.0 = r.record.cum_reward;
        e.1 = r.record.t;
        e.2 += r.record.regret;
    }
    assert_eq!(runs.len(), 3 * 4 * 2);
    for s in &summaries {
        let mine: Vec<&(f64, u64, f64)> = runs
            .iter()
            .filter(|(id, _)| id.split('/').next() == Some(s.algo.as_str()))
            .map(|(_, v)| v)
            .collect();
        assert_eq!(mine.len(), 8);
        let n = mine.len() as f64;
        let ncr = mine.iter().map(|(c, t, _)| c / *t as f64).sum::<f64>() / n;
        let regret = mine.iter().map(|(_, _, r)| r).sum::<f64>() / n;
        assert!((ncr - s.mean_ncr.unwrap()).abs() <= 1e-12, "{}", s.algo);
        assert!((regret - s.mean_regret.unwrap()).abs() <= 1e-12, "{}", s.algo);
    }
}

#[test]
fn sweeps_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let trace = dir.path().join(format!("t{workers}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_fairbandit"))
            .args([
                "sweep", "--preset", "lower-bound", "--grid", "0,0.3,0.6", "--algo", "fair-eps,ran,unc", "--reps", "3",
                "--horizon", "100", "--seed", "42", "--trace", path_str(&trace),
            ])
            .env("FAIRBANDIT_WORKERS", workers)
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push((out.stdout, fs::read(&trace).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    // the infeasible grid point becomes error rows, the rest still report
    assert_eq!(text.lines().filter(|l| l.contains("infeasible")).count(), 3);
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "algorithms = [\"opt\", \"naive\"]\nhorizon = 50\nrepetitions = 2\nseed = 9\n\n[environment]\nkind = \"synthetic\"\nalpha = 0.2\n\n[polytope]\nmode = \"uniform\"\nlower = 0.3\n",
    )
    .unwrap();
    let out = fairbandit(&["run", "--config", path_str(&cfg), "--algo", "opt"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("run,opt,0.3,1.0,0.2,"), "{row}");
}
