use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qca")).current_dir(dir).args(args).output().expect("spawn qca")
}

fn run_config(text: &str) -> (TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), text).unwrap();
    let out = qca(dir.path(), &["run", "run.toml"]);
    (dir, out)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SMALL: &str = r#"
dim = 2
lattice = [2, 2]
k = 2
coupling_mode = "free"
epsilon = 0.3
mass = 0.4
g_electric = 0.7
g_magnetic = 0.0
steps = 10
initial_state = ["vacuum", "particle@(0,0);0"]
observables = ["occ[0;0]", "occ[1;0]", "E[0;mu]", "Eenergy"]
"#;

#[test]
fn one_row_per_step() {
    let (_d, out) = run_config(SMALL);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,t,occ[0;0],occ[1;0],E[0;mu],Eenergy");
    assert_eq!(lines.len(), 12);
    for (i, l) in lines[1..].iter().enumerate() {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[0], i.to_string());
        cols[1..].iter().for_each(|c| {
            c.parse::<f64>().unwrap();
        });
    }
    assert_eq!(lines[1].split(',').nth(2), Some("1"));
}

#[test]
fn zero_steps_gives_the_initial_row() {
    let (_d, out) = run_config(&SMALL.replace("steps = 10", "steps = 0"));
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn runs_are_bit_identical() {
    let (_d, a) = run_config(SMALL);
    let (_e, b) = run_config(SMALL);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (_f, c) = run_config(&format!("{SMALL}workers = 3\n"));
    assert_eq!(c.stdout, a.stdout);
}

#[test]
fn unknown_key_is_named() {
    let (_d, out) = run_config(&format!("{SMALL}temperature = 3\n"));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("temperature"), "{}", stderr(&out));
}

#[test]
fn bad_values_name_their_key() {
    let cases = [
        (SMALL.replace("k = 2", "k = 3"), "`k`"),
        (SMALL.replace("coupling_mode = \"free\"", "coupling_mode = \"locked\""), "`epsilon`"),
        (SMALL.replace("\"occ[1;0]\"", "\"occ[7;0]\""), "`observables`"),
        (SMALL.replace("particle@(0,0);0", "particle@(5,0);0"), "`initial_state`"),
        (SMALL.replace("lattice = [2, 2]", "lattice = [2, 2, 2]"), "`lattice`"),
        (SMALL.replace("epsilon = 0.3", "epsilon = -0.3"), "`epsilon`"),
    ];
    for (text, key) in cases {
        let (_d, out) = run_config(&text);
        assert!(!out.status.success(), "{key}");
        assert!(stderr(&out).contains(key), "{key}: {}", stderr(&out));
    }
}

#[test]
fn locked_mode_derives_epsilon() {
    // k = 4, g_E = 1: eps^2 = 4 pi / (k g_E^2) = pi.
    let eps = std::f64::consts::PI.sqrt();
    let text = format!("dim = 2\nlattice = [2, 2]\nk = 4\ng_electric = 1.0\nepsilon = {eps}\ng_magnetic = 0.0\nsteps = 2\n");
    let (_d, out) = run_config(&text);
    assert!(out.status.success(), "{}", stderr(&out));
    let last = stdout(&out).lines().last().unwrap().to_string();
    assert!(last.starts_with(&format!("2,{}", 2.0 * eps)), "{last}");
}

#[test]
fn free_particle_stays_in_its_light_cone() {
    // g_E = g_M = 0 on 6x6: after t steps nothing outside the l1 ball of
    // radius 2t around the start.
    let obs: Vec<String> = (0..36).flat_map(|x| (0..2).map(move |j| format!("\"occ[{x};{j}]\""))).collect();
    let text = format!(
        "dim = 2\nlattice = [6, 6]\nk = 2\ncoupling_mode = \"free\"\nepsilon = 0.5\nmass = 0.3\ng_electric = 0.0\ng_magnetic = 0.0\nsteps = 2\ninitial_state = \"particle@(0,0);0\"\nobservables = [{}]\n",
        obs.join(",")
    );
    let (_d, out) = run_config(&text);
    assert!(out.status.success(), "{}", stderr(&out));
    let dist = |x: usize| {
        let (a, b) = (x % 6, x / 6);
        a.min(6 - a) + b.min(6 - b)
    };
    for (t, line) in stdout(&out).lines().skip(1).enumerate() {
        let vals: Vec<f64> = line.split(',').skip(2).map(|v| v.parse().unwrap()).collect();
        let total: f64 = vals.iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "step {t}: {total}");
        for (i, v) in vals.iter().enumerate() {
            if dist(i / 2) > 2 * t {
                assert_eq!(*v, 0.0, "step {t} site {}", i / 2);
            }
        }
    }
}

#[test]
fn snapshots_are_written_and_reloaded() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("steps = 10", "steps = 4") + "snapshot_every = 2\n";
    std::fs::write(dir.path().join("a.toml"), &text).unwrap();
    let out = qca(dir.path(), &["run", "a.toml", "-o", "a.csv", "--snapshot-dir", "snaps"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for s in [0, 2, 4] {
        assert!(dir.path().join(format!("snaps/step_{s:06}.txt")).exists(), "{s}");
    }
    let resume = text
        .replace("steps = 4", "steps = 2")
        .replace("[\"vacuum\", \"particle@(0,0);0\"]", "\"file:snaps/step_000002.txt\"")
        .replace("snapshot_every = 2\n", "");
    std::fs::write(dir.path().join("b.toml"), resume).unwrap();
    let out = qca(dir.path(), &["run", "b.toml", "-o", "b.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let tail = |s: &str| s.lines().last().unwrap().split(',').skip(2).map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>();
    for (x, y) in tail(&a).iter().zip(tail(&b)) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn oversized_runs_stop_with_a_diagnostic() {
    let text = "dim = 2\nlattice = [3, 3]\nk = 4\ncoupling_mode = \"free\"\nepsilon = 0.4\nsteps = 3\nmax_configs = 2000\n";
    let (_d, out) = run_config(text);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("max_configs") && err.contains("2000"), "{err}");
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn verify_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = qca(dir.path(), &["verify", "exchange", "-r", "report.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let checks = report.as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert_eq!(c["status"], "pass", "{c}");
        assert!(c["check"].as_str().unwrap().starts_with("exchange/"));
        assert!(c["measured"].is_number());
    }
    assert!(!qca(dir.path(), &["verify", "nonsense"]).status.success());
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = qca(dir.path(), &["convergence", "--k", "0.7,-0.4", "--mass", "0.5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,defect");
    assert_eq!(lines.len(), 6);
    let order: f64 = lines[5].strip_prefix("order,").unwrap().parse().unwrap();
    assert!((1.8..=2.2).contains(&order), "{order}");
    assert!(!qca(dir.path(), &["convergence", "--k", "1"]).status.success());
}
