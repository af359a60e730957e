use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{"id": "small", "nodes": 200, "graphs": 1, "replications": 3, "pg_replications": 2,
    "omega": {"kind": "grid", "lo": 0.15, "hi": 0.55, "step": 0.1}}"#;

fn trustseed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trustseed"))
        .arg("--config")
        .arg(dir.join("config.json"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = trustseed(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), config).unwrap();
    dir
}

#[test]
fn generate_seed_simulate() {
    let dir = setup(SMALL);
    let d = dir.path();
    let stats = ok(d, &["generate", "--graphs", "2", "--stats"]);
    assert_eq!(stats.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(stats.lines().next().unwrap()).unwrap();
    assert_eq!(first["nodes"], 200);
    let graph = d.join("graph_0.txt");
    let graph = graph.to_str().unwrap();

    for seeder in ["random", "high-degree", "projected"] {
        ok(d, &["seed", "--graph", graph, "--seeder", seeder, "--reps", "2"]);
        let seeds = std::fs::read_to_string(d.join("seeds.txt")).unwrap();
        assert!(seeds.split_whitespace().any(|t| t.parse::<usize>().is_ok()), "{seeder}");
    }
    assert!(d.join("projection.csv").exists());
    assert!(d.join("seeds_t0.txt").exists());

    let printed = ok(
        d,
        &["seed", "--graph", graph, "--seeder", "greedy", "--threshold", "0.3"],
    );
    assert!(printed.starts_with("projected coverage"));

    let sim = ok(
        d,
        &[
            "simulate",
            "--graph",
            graph,
            "--seeds",
            d.join("seeds.txt").to_str().unwrap(),
            "--trace",
        ],
    );
    let last: serde_json::Value = serde_json::from_str(sim.lines().last().unwrap()).unwrap();
    assert_eq!(last["samples"], 10);
    assert!(last["mean"].as_f64().unwrap() >= 10.0);
    assert!(sim.lines().count() > 2);

    // exhaustive search over 200 nodes is refused, not attempted
    let out = trustseed(d, &["seed", "--graph", graph, "--seeder", "brute-force"]);
    assert!(!out.status.success());
    let out = trustseed(d, &["seed", "--graph", graph, "--seeder", "greedy"]);
    assert!(!out.status.success());
}

#[test]
fn experiment_regret_is_recomputable() {
    let dir = setup(
        r#"{"seed": 2, "scenarios": [{"id": "e", "nodes": 200, "graphs": 2, "replications": 3, "pg_replications": 2,
            "budget_fracs": [0.05, 0.25]}]}"#,
    );
    let d = dir.path();
    ok(d, &["experiment"]);
    let text = std::fs::read_to_string(d.join("results.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario_id,network,trust_scenario,tl,th,lambda_d,budget_frac,seeder,evac_frac_mean,evac_frac_stderr,regret_pct,wallclock_s"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let mut best: HashMap<&str, f64> = HashMap::new();
    for r in &rows {
        let m: f64 = r[8].parse().unwrap();
        let b = best.entry(r[0]).or_insert(m);
        *b = b.max(m);
    }
    for r in &rows {
        let m: f64 = r[8].parse().unwrap();
        let regret: f64 = r[10].parse().unwrap();
        let b = best[r[0]];
        assert!((regret - (b - m) / b * 100.0).abs() < 1e-9, "{r:?}");
        assert_eq!(r[11], "");
    }
    for id in best.keys() {
        assert!(rows.iter().any(|r| r[0] == *id && r[10].parse::<f64>().unwrap() == 0.0));
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 2);
}

#[test]
fn sweep_threshold_writes_one_best_per_curve() {
    let dir = setup(SMALL);
    let d = dir.path();
    let printed = ok(d, &["sweep-threshold", "--lambda-ds", "0,0.1"]);
    assert_eq!(printed.lines().count(), 2);
    let text = std::fs::read_to_string(d.join("threshold_curves.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 5);
    for ld in ["0", "0.1"] {
        let want: f64 = ld.parse().unwrap();
        let best = rows
            .iter()
            .filter(|r| r[0].parse::<f64>().unwrap() == want && r[4] == "1")
            .count();
        assert_eq!(best, 1);
    }
}

#[test]
fn bad_config_is_reported() {
    let dir = setup(r#"{"id": "bad", "budget_frac": 1.5}"#);
    let out = trustseed(dir.path(), &["sweep-threshold"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget fraction"));
}
