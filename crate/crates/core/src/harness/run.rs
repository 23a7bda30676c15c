use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Engine, ExperimentConfig, GridSpec, OutputSpec};
use super::engine::{evaluate_point, grid_points, FrameCache, PointSpec};
use super::table::{append_rows, SweepRow, SweepTable, CSV_HEADER};
use crate::error::{Error, Result};

/// Contents of the JSON file written next to every CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub engine: Engine,
    pub seed: u64,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub completed: Vec<PointSpec>,
    /// Set while a run is in progress or was interrupted.
    pub partial: bool,
    pub wall_time_s: f64,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub table: SweepTable,
    pub metadata: RunMetadata,
    /// Grid points evaluated by this call.
    pub computed: usize,
}

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn write_metadata(path: &Path, meta: &RunMetadata) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(&tmp, text + "\n").map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_metadata(path: &Path) -> Result<RunMetadata> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    let pool = b.build().map_err(|e| Error::Config {
        field: "run.workers".into(),
        reason: e.to_string(),
    })?;
    Ok(pool.install(f))
}

/// Evaluates `points` in order, appending each point's rows to the CSV and
/// recording it in the sidecar before moving on.
fn execute(
    cfg: &ExperimentConfig,
    meta: &mut RunMetadata,
    points: &[PointSpec],
    started: Instant,
) -> Result<Vec<SweepRow>> {
    let csv_path = cfg.csv_path();
    let sidecar = cfg.sidecar_path();
    let workers = cfg.resolved_workers()?;
    with_pool(workers, || {
        let mut cache = FrameCache::default();
        let mut all = Vec::new();
        for pt in points {
            let rows = evaluate_point(cfg, pt, &mut cache)?;
            let file = OpenOptions::new()
                .append(true)
                .open(&csv_path)
                .map_err(|e| Error::io(&csv_path, e))?;
            let mut w = BufWriter::new(file);
            append_rows(&mut w, &rows)?;
            w.flush().map_err(|e| Error::io(&csv_path, e))?;
            meta.completed.push(*pt);
            meta.wall_time_s = started.elapsed().as_secs_f64();
            write_metadata(&sidecar, meta)?;
            all.extend(rows);
        }
        Ok(all)
    })?
}

/// Runs every grid point from scratch, replacing any previous output.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let points = grid_points(cfg)?;
    let csv_path = cfg.csv_path();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    writeln!(f, "{CSV_HEADER}").map_err(|e| Error::io(&csv_path, e))?;
    drop(f);
    let mut meta = RunMetadata {
        engine: cfg.engine,
        seed: cfg.seed,
        code_version: CODE_VERSION.to_string(),
        config: cfg.clone(),
        completed: Vec::new(),
        partial: true,
        wall_time_s: 0.0,
        workers: cfg.resolved_workers()?,
    };
    write_metadata(&cfg.sidecar_path(), &meta)?;
    let rows = execute(cfg, &mut meta, &points, started)?;
    meta.partial = false;
    meta.wall_time_s = started.elapsed().as_secs_f64();
    write_metadata(&cfg.sidecar_path(), &meta)?;
    Ok(RunReport {
        table: SweepTable { rows },
        metadata: meta,
        computed: points.len(),
    })
}

/// The parts of a config that must agree for rows to be mergeable.
fn invariant_part(cfg: &ExperimentConfig) -> serde_json::Value {
    let mut c = cfg.clone();
    c.grid = GridSpec::default();
    c.run.workers = None;
    c.output = OutputSpec::default();
    serde_json::to_value(c).expect("config serializes")
}

fn differing_fields(a: &serde_json::Value, b: &serde_json::Value, prefix: &str, out: &mut Vec<String>) {
    match (a, b) {
        (serde_json::Value::Object(x), serde_json::Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let name = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => differing_fields(u, v, &name, out),
                    _ => out.push(name),
                }
            }
        }
        _ if a != b => out.push(prefix.to_string()),
        _ => {}
    }
}

fn row_point(row: &SweepRow) -> PointSpec {
    PointSpec {
        spin: row.spin,
        k: row.k,
        a: row.a,
        theta: row.theta,
        p: row.p,
    }
}

/// Computes only the grid points missing from a previous run with matching
/// metadata and appends their rows. Refuses if seed, engine or run controls
/// differ.
pub fn resume_or_extend(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let sidecar = cfg.sidecar_path();
    let csv_path = cfg.csv_path();
    let mut meta = read_metadata(&sidecar)?;
    let (old, new) = (invariant_part(&meta.config), invariant_part(cfg));
    if old != new {
        let mut fields = Vec::new();
        differing_fields(&old, &new, "", &mut fields);
        return Err(Error::MetadataMismatch(format!(
            "{} differs from the run recorded in {}",
            fields.join(", "),
            sidecar.display()
        )));
    }
    let prior = SweepTable::read(&csv_path)?;
    let kept: Vec<SweepRow> = prior
        .rows
        .iter()
        .filter(|r| meta.completed.iter().any(|c| c.same_as(&row_point(r))))
        .cloned()
        .collect();
    if kept.len() != prior.rows.len() {
        // Rows of a point that never reached the sidecar are recomputed.
        SweepTable { rows: kept.clone() }.write(&csv_path)?;
    }
    let missing: Vec<PointSpec> = grid_points(cfg)?
        .into_iter()
        .filter(|p| !meta.completed.iter().any(|c| c.same_as(p)))
        .collect();
    if missing.is_empty() && !meta.partial {
        return Ok(RunReport {
            table: SweepTable { rows: kept },
            metadata: meta,
            computed: 0,
        });
    }
    meta.config.grid = merged_grid(&meta.config.grid, &cfg.grid);
    meta.partial = true;
    meta.workers = cfg.resolved_workers()?;
    let mut rows = kept;
    rows.extend(execute(cfg, &mut meta, &missing, started)?);
    meta.partial = false;
    meta.wall_time_s = started.elapsed().as_secs_f64();
    write_metadata(&sidecar, &meta)?;
    Ok(RunReport {
        table: SweepTable { rows },
        metadata: meta,
        computed: missing.len(),
    })
}

fn merge_list(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = a.to_vec();
    for x in b {
        if !out.iter().any(|y| y.to_bits() == x.to_bits()) {
            out.push(*x);
        }
    }
    out
}

fn merged_grid(old: &GridSpec, new: &GridSpec) -> GridSpec {
    let opt = |a: &Option<Vec<f64>>, b: &Option<Vec<f64>>| match (a, b) {
        (Some(a), Some(b)) => Some(merge_list(a, b)),
        (a, b) => b.clone().or_else(|| a.clone()),
    };
    GridSpec {
        spin: merge_list(&old.spin, &new.spin),
        k: merge_list(&old.k, &new.k),
        a: opt(&old.a, &new.a),
        theta: opt(&old.theta, &new.theta),
        p: merge_list(&old.p, &new.p),
    }
}

#[cfg(test)]
mod tests {
    use super::super::config::Experiment;
    use super::*;

    fn small(dir: &Path, seed: u64, ps: &[f64]) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(Engine::Classical, Experiment::Sweep, seed);
        cfg.grid.p = ps.to_vec();
        cfg.run.steps = Some(200);
        cfg.run.n_traj = Some(8);
        cfg.output.csv = Some(dir.join("out.csv"));
        cfg
    }

    #[test]
    fn fresh_run_writes_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path(), 3, &[0.2, 0.9]);
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.table.rows.len(), 4);
        assert_eq!(SweepTable::read(&cfg.csv_path()).unwrap(), rep.table);
        let meta = read_metadata(&cfg.sidecar_path()).unwrap();
        assert!(!meta.partial);
        assert_eq!(meta.completed.len(), 2);
        assert_eq!(meta.code_version, CODE_VERSION);
    }

    #[test]
    fn extension_appends_and_keeps_old_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path(), 3, &[0.2, 0.9]);
        run_experiment(&cfg).unwrap();
        let before = std::fs::read(cfg.csv_path()).unwrap();

        let same = resume_or_extend(&cfg).unwrap();
        assert_eq!(same.computed, 0);
        assert_eq!(std::fs::read(cfg.csv_path()).unwrap(), before);

        let wider = small(dir.path(), 3, &[0.2, 0.9, 0.5, 0.7]);
        let rep = resume_or_extend(&wider).unwrap();
        assert_eq!(rep.computed, 2);
        let after = std::fs::read(cfg.csv_path()).unwrap();
        assert_eq!(&after[..before.len()], &before[..]);
        assert_eq!(SweepTable::read(&cfg.csv_path()).unwrap().rows.len(), 8);

        // The extension equals a direct run of the new points.
        let direct_dir = tempfile::tempdir().unwrap();
        let direct = run_experiment(&small(direct_dir.path(), 3, &[0.5, 0.7])).unwrap();
        assert_eq!(&rep.table.rows[4..], &direct.table.rows[..]);
    }

    #[test]
    fn changed_seed_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&small(dir.path(), 3, &[0.2])).unwrap();
        let err = resume_or_extend(&small(dir.path(), 4, &[0.2])).unwrap_err();
        assert!(
            matches!(&err, Error::MetadataMismatch(m) if m.contains("seed")),
            "{err}"
        );
    }

    #[test]
    fn interrupted_run_is_completed() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path(), 5, &[0.3, 0.6]);
        let full = run_experiment(&cfg).unwrap();
        let full_bytes = std::fs::read(cfg.csv_path()).unwrap();
        // Simulate a crash after the first point's rows were written but
        // before the second point finished.
        let mut meta = read_metadata(&cfg.sidecar_path()).unwrap();
        meta.completed.truncate(1);
        meta.partial = true;
        write_metadata(&cfg.sidecar_path(), &meta).unwrap();
        SweepTable {
            rows: full.table.rows[..3].to_vec(),
        }
        .write(&cfg.csv_path())
        .unwrap();
        let rep = resume_or_extend(&cfg).unwrap();
        assert_eq!(rep.computed, 1);
        assert_eq!(std::fs::read(cfg.csv_path()).unwrap(), full_bytes);
        assert!(!read_metadata(&cfg.sidecar_path()).unwrap().partial);
    }

    #[test]
    fn worker_count_gives_identical_bytes() {
        let mut outs = Vec::new();
        for w in [1, 3] {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = small(dir.path(), 9, &[0.4, 0.8]);
            cfg.run.workers = Some(w);
            run_experiment(&cfg).unwrap();
            outs.push(std::fs::read(cfg.csv_path()).unwrap());
        }
        assert_eq!(outs[0], outs[1]);
    }
}
