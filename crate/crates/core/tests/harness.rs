use kicktop::harness::{read_metadata, resume_or_extend, run_experiment, SweepTable, CSV_HEADER};
use kicktop::{critical_probability, ExperimentConfig};

const QUANTUM: &str = r#"
engine = "quantum"
experiment = "sweep"
seed = 5

[grid]
S = [4.0, 8.0]
k = [6.0]
theta = [1.5707963267948966]
p = [0.2, 0.9]

[run]
n_traj = 12
schedule = [0, 4, 8]
observables = ["fidelity", "r2"]
"#;

#[test]
fn toml_run_writes_table_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(QUANTUM).unwrap();
    cfg.output.csv = Some(dir.path().join("q.csv"));
    let rep = run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(cfg.csv_path()).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let table = SweepTable::read(&cfg.csv_path()).unwrap();
    assert_eq!(table, rep.table);
    // 2 spins x 2 rates x 3 times x 2 observables.
    assert_eq!(table.observable("F").count(), 12);
    assert_eq!(table.observable("R2").count(), 12);
    for r in table.observable("F").filter(|r| r.t == Some(0)) {
        assert!(r.mean > 0.0 && r.mean <= 1.0);
        assert_eq!(r.n_samples, 12);
    }
    let meta = read_metadata(&cfg.sidecar_path()).unwrap();
    assert!(!meta.partial);
    assert_eq!(meta.seed, 5);
    assert_eq!(meta.completed.len(), 4);
}

#[test]
fn extending_the_grid_keeps_existing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(QUANTUM).unwrap();
    cfg.output.csv = Some(dir.path().join("q.csv"));
    let first = run_experiment(&cfg).unwrap().table;
    cfg.grid.p.push(0.5);
    let rep = resume_or_extend(&cfg).unwrap();
    assert_eq!(rep.computed, 2);
    assert_eq!(&rep.table.rows[..first.rows.len()], &first.rows[..]);
    assert_eq!(rep.table.rows.len(), first.rows.len() * 3 / 2);
}

#[test]
fn analytics_rows_carry_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(
        "engine = \"analytics\"\nexperiment = \"sweep\"\nseed = 0\n[grid]\nk = [6.0]\na = [0.5]\np = [0.8]\n",
    )
    .unwrap();
    cfg.output.csv = Some(dir.path().join("a.csv"));
    let table = run_experiment(&cfg).unwrap().table;
    let pc = table.observable("p_c").next().unwrap();
    assert_eq!(pc.mean, critical_probability(6.0, 0.5).unwrap());
    assert!(pc.spin.is_none() && pc.t.is_none());
    let mu = table.observable("mu_linear").find(|r| r.p == Some(0.8)).unwrap();
    assert!((mu.mean - (0.8 * 0.5f64.ln() + 0.2 * mu_unstable())).abs() < 1e-12);
}

fn mu_unstable() -> f64 {
    kicktop::find_fixed_point(6.0).unwrap().instability().ln()
}
