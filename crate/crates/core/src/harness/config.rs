use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::{ControlKind, ControlRegion, OutsidePolicy};
use crate::error::{Error, Result};
use crate::observables::{Encoding, InitialQuantumState, ObservableKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Classical,
    Quantum,
    Twa,
    Analytics,
}

impl Engine {
    pub fn tag(&self) -> &'static str {
        match self {
            Engine::Classical => "classical",
            Engine::Quantum => "quantum",
            Engine::Twa => "twa",
            Engine::Analytics => "analytics",
        }
    }
}

/// What is measured at each grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Engine default: `O²` and `μ`, quantum observables, TWA estimators or
    /// closed forms.
    #[default]
    Sweep,
    /// Classical `μ` only.
    Lyapunov,
    /// Classical late-time phase-space histogram.
    Density,
    /// Quantum ancilla purification.
    Ancilla,
}

/// Parameter lists; the grid is their Cartesian product with `p` innermost.
/// Exactly one of `a` and `theta` is given, related by `a = cos(θ/2)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "S", default, skip_serializing_if = "Vec::is_empty")]
    pub spin: Vec<f64>,
    pub k: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub p: Vec<f64>,
}

impl GridSpec {
    /// Control rates as `(a, θ)` pairs.
    pub fn rates(&self) -> Result<Vec<(f64, f64)>> {
        match (&self.a, &self.theta) {
            (Some(a), None) => a
                .iter()
                .map(|&a| {
                    if !(0.0..=1.0).contains(&a) {
                        return Err(config_err("grid.a", format!("{a} outside [0, 1]")));
                    }
                    Ok((a, 2.0 * a.acos()))
                })
                .collect(),
            (None, Some(t)) => t
                .iter()
                .map(|&th| {
                    if !(0.0..=PI).contains(&th) {
                        return Err(config_err("grid.theta", format!("{th} outside [0, π]")));
                    }
                    Ok(((th / 2.0).cos(), th))
                })
                .collect(),
            (Some(_), Some(_)) => Err(config_err("grid", "give either `a` or `theta`, not both")),
            (None, None) => Err(config_err("grid", "one of `a` or `theta` is required")),
        }
    }
}

/// Run controls. Unset entries take engine defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunControls {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    /// Quantum observation times; defaults to `min(S, 256)`, or
    /// `log₂S` and `S` for the ancilla.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<ObservableKind>>,
    /// TWA averaging window at the end of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialQuantumState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<Encoding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<ControlRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outside: Option<OutsidePolicy>,
    /// Histogram bins `[n_theta, n_phi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<[usize; 2]>,
    /// Worker threads. Does not affect results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub engine: Engine,
    #[serde(default)]
    pub experiment: Experiment,
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub run: RunControls,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "KICKTOP_WORKERS";

pub(crate) fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn spread(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl ExperimentConfig {
    /// Defaults that mirror the reference parameter choices of each
    /// experiment.
    pub fn defaults(engine: Engine, experiment: Experiment, seed: u64) -> Self {
        let p_grid = spread(0.0, 1.0, 21);
        let (spin, k, a, theta, p) = match (engine, experiment) {
            (Engine::Classical, _) => (vec![], vec![6.0], Some(vec![0.5]), None, p_grid),
            (Engine::Quantum, Experiment::Ancilla) => (
                vec![8.0, 16.0, 32.0, 64.0],
                vec![8.0],
                None,
                Some(vec![PI / 2.0]),
                p_grid,
            ),
            (Engine::Quantum, _) => (vec![16.0, 32.0, 64.0], vec![6.0], None, Some(vec![PI / 2.0]), p_grid),
            (Engine::Twa, _) => (
                [4, 8, 16, 32, 64].iter().map(|&e| 2f64.powi(e)).collect(),
                vec![6.0],
                None,
                Some(vec![PI / 2.0]),
                p_grid,
            ),
            (Engine::Analytics, _) => (vec![], vec![6.0], Some(vec![(PI / 4.0).cos()]), None, vec![]),
        };
        ExperimentConfig {
            engine,
            experiment,
            seed,
            grid: GridSpec { spin, k, a, theta, p },
            run: RunControls::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "config".to_string());
            config_err(&at, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.k.is_empty() {
            return Err(config_err("grid.k", "must not be empty"));
        }
        if g.k.iter().any(|&k| !(k.is_finite() && k >= 2.0)) {
            return Err(config_err("grid.k", "every k must be at least 2"));
        }
        let rates = g.rates()?;
        if rates.is_empty() {
            return Err(config_err("grid.a", "must not be empty"));
        }
        if g.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(config_err("grid.p", "every p must lie in [0, 1]"));
        }
        if self.engine != Engine::Analytics && g.p.is_empty() {
            return Err(config_err("grid.p", "must not be empty"));
        }
        match self.engine {
            Engine::Quantum => {
                if g.spin.is_empty() {
                    return Err(config_err("grid.S", "must not be empty"));
                }
                for &s in &g.spin {
                    let two_s = 2.0 * s;
                    if !(s > 0.0 && two_s.fract() == 0.0 && two_s <= 1e6) {
                        return Err(config_err("grid.S", format!("{s} is not a positive multiple of 1/2")));
                    }
                }
            }
            Engine::Twa if g.spin.is_empty() || g.spin.iter().any(|s| !(s.is_finite() && *s > 0.0)) => {
                return Err(config_err("grid.S", "must be a nonempty list of positive values"));
            }
            _ => {}
        }
        let allowed = match self.engine {
            Engine::Classical => matches!(
                self.experiment,
                Experiment::Sweep | Experiment::Lyapunov | Experiment::Density
            ),
            Engine::Quantum => matches!(self.experiment, Experiment::Sweep | Experiment::Ancilla),
            Engine::Twa | Engine::Analytics => self.experiment == Experiment::Sweep,
        };
        if !allowed {
            return Err(config_err(
                "experiment",
                format!(
                    "{:?} is not available for the {} engine",
                    self.experiment,
                    self.engine.tag()
                ),
            ));
        }
        let r = &self.run;
        if r.n_traj == Some(0) {
            return Err(config_err("run.n_traj", "must be at least 1"));
        }
        if let (Some(s), Some(b)) = (r.steps, r.burn_in) {
            if b >= s {
                return Err(config_err("run.burn_in", "must be smaller than steps"));
            }
        }
        if let Some(s) = &r.schedule {
            if s.is_empty() || s.windows(2).any(|w| w[0] > w[1]) {
                return Err(config_err("run.schedule", "must be nonempty and sorted"));
            }
        }
        if r.workers == Some(0) {
            return Err(config_err("run.workers", "must be at least 1"));
        }
        Ok(())
    }

    /// CSV path, defaulting to `<engine>.csv`.
    pub fn csv_path(&self) -> PathBuf {
        self.output
            .csv
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.engine.tag())))
    }

    /// JSON sidecar path next to the CSV.
    pub fn sidecar_path(&self) -> PathBuf {
        self.csv_path().with_extension("json")
    }

    /// Worker count from the config, then the environment, else `None`.
    pub fn resolved_workers(&self) -> Result<Option<usize>> {
        if let Some(w) = self.run.workers {
            return Ok(Some(w));
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .map(Some)
                .ok_or_else(|| config_err(WORKERS_ENV, format!("`{v}` is not a positive integer"))),
            Err(_) => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
engine = "quantum"
seed = 7

[grid]
S = [8, 16]
k = [6.0]
theta = [1.5707963267948966]
p = [0.5, 0.9]

[run]
n_traj = 20
observables = ["fidelity", "s_bipartite"]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.engine, Engine::Quantum);
        assert_eq!(cfg.grid.spin, vec![8.0, 16.0]);
        let (a, _) = cfg.grid.rates().unwrap()[0];
        assert!((a - (PI / 4.0).cos()).abs() < 1e-15);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let bad = SAMPLE.replace("n_traj = 20", "n_trajectories = 20");
        let msg = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("line 12") && msg.contains("n_trajectories"), "{msg}");
        let both = SAMPLE.replace("theta = [", "a = [0.5]\ntheta = [");
        let msg = ExperimentConfig::from_toml_str(&both).unwrap_err().to_string();
        assert!(msg.contains("either"), "{msg}");
        let half = SAMPLE.replace("S = [8, 16]", "S = [8.3]");
        assert!(ExperimentConfig::from_toml_str(&half).is_err());
        let wrong = SAMPLE.replace("seed = 7", "seed = 7\nexperiment = \"density\"");
        assert!(ExperimentConfig::from_toml_str(&wrong).is_err());
    }

    #[test]
    fn defaults_validate() {
        for (e, x) in [
            (Engine::Classical, Experiment::Sweep),
            (Engine::Classical, Experiment::Lyapunov),
            (Engine::Classical, Experiment::Density),
            (Engine::Quantum, Experiment::Sweep),
            (Engine::Quantum, Experiment::Ancilla),
            (Engine::Twa, Experiment::Sweep),
            (Engine::Analytics, Experiment::Sweep),
        ] {
            ExperimentConfig::defaults(e, x, 1).validate().unwrap();
        }
    }
}
