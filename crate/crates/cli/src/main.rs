use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kicktop::harness::{
    read_metadata, resume_or_extend, run_experiment, Engine, Experiment, ExperimentConfig, RunReport, WORKERS_ENV,
};
use kicktop::observables::{Encoding, InitialQuantumState, ObservableKind};
use kicktop::OutsidePolicy;

const DEFAULT_SEED: u64 = 2024;

#[derive(Parser)]
#[command(
    name = "kicktop",
    version,
    about = "Stochastic control of the kicked top: classical, quantum and semiclassical sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed forms: fixed point, instability, critical rates, moment
    /// thresholds and full-reset entanglement.
    Analytics(Common),
    /// Classical order parameter O² and Lyapunov exponent over a grid.
    ClassicalSweep(Common),
    /// Classical Lyapunov exponent only.
    ClassicalLyapunov(Common),
    /// Classical late-time phase-space histogram.
    ClassicalDensity(Common),
    /// Quantum trajectories: fidelity, R², s⊥², bipartite entropy.
    QuantumSweep(Common),
    /// Quantum ancilla purification.
    QuantumAncilla(Common),
    /// Truncated-Wigner fidelity and transverse fluctuations.
    TwaSweep(Common),
    /// Complete an interrupted run or extend its grid.
    Resume(Common),
}

/// Comma-separated flag value.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

fn split<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("cannot parse `{x}`")))
        .collect()
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<List<T>, String> {
    split(s).map(List)
}

/// `lo:hi:n` or a comma list.
fn parse_grid(s: &str) -> std::result::Result<List<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].parse().map_err(|_| format!("bad start `{}`", parts[0]))?;
        let hi: f64 = parts[1].parse().map_err(|_| format!("bad end `{}`", parts[1]))?;
        let n: usize = parts[2].parse().map_err(|_| format!("bad count `{}`", parts[2]))?;
        if n < 2 {
            return Ok(List(vec![lo]));
        }
        return Ok(List(
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        ));
    }
    parse_list(s)
}

fn parse_observables(s: &str) -> std::result::Result<List<ObservableKind>, String> {
    s.split(',')
        .map(|x| match x.trim() {
            "F" | "fidelity" => Ok(ObservableKind::Fidelity),
            "R2" | "r2" => Ok(ObservableKind::R2),
            "s_perp2" => Ok(ObservableKind::SPerp2),
            "S_bip" | "s_bipartite" => Ok(ObservableKind::SBipartite),
            other => Err(format!("unknown observable `{other}`")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(List)
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV; the JSON sidecar goes next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default from the environment, else all cores).
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,

    /// Spin values, as a list or `lo:hi:n`.
    #[arg(long = "spin", short = 'S', value_parser = parse_grid)]
    spin: Option<List<f64>>,
    #[arg(long, value_parser = parse_grid)]
    k: Option<List<f64>>,
    /// Contraction factors (exclusive with --theta).
    #[arg(long, value_parser = parse_grid, conflicts_with = "theta")]
    a: Option<List<f64>>,
    /// Control angles, a = cos(θ/2).
    #[arg(long, value_parser = parse_grid)]
    theta: Option<List<f64>>,
    /// Control probabilities.
    #[arg(long, short = 'p', value_parser = parse_grid)]
    p: Option<List<f64>>,

    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Trajectories (samples for the TWA engine).
    #[arg(long)]
    n_traj: Option<usize>,
    /// Observation times for quantum runs.
    #[arg(long, value_parser = parse_list::<usize>)]
    schedule: Option<List<usize>>,
    #[arg(long, value_parser = parse_observables)]
    observables: Option<List<ObservableKind>>,
    /// Averaging window for the TWA engine.
    #[arg(long)]
    window: Option<usize>,
    /// Quantum initial state: random-coherent or target.
    #[arg(long, value_parser = parse_initial)]
    initial: Option<InitialQuantumState>,
    /// Ancilla encoding: haar or top-pair.
    #[arg(long, value_parser = parse_encoding)]
    encoding: Option<Encoding>,
    /// Classical control draws outside the control region: identity or chaotic.
    #[arg(long, value_parser = parse_outside)]
    outside: Option<OutsidePolicy>,
    /// Histogram bins as `n_theta,n_phi`.
    #[arg(long, value_parser = parse_list::<usize>)]
    bins: Option<List<usize>>,
}

fn parse_initial(s: &str) -> std::result::Result<InitialQuantumState, String> {
    match s {
        "random-coherent" => Ok(InitialQuantumState::RandomCoherent),
        "target" => Ok(InitialQuantumState::Target),
        _ => Err(format!("unknown initial state `{s}`")),
    }
}

fn parse_encoding(s: &str) -> std::result::Result<Encoding, String> {
    match s {
        "haar" => Ok(Encoding::Haar),
        "top-pair" => Ok(Encoding::TopPair),
        _ => Err(format!("unknown encoding `{s}`")),
    }
}

fn parse_outside(s: &str) -> std::result::Result<OutsidePolicy, String> {
    match s {
        "identity" => Ok(OutsidePolicy::Identity),
        "chaotic" => Ok(OutsidePolicy::Chaotic),
        _ => Err(format!("unknown policy `{s}`")),
    }
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.csv = Some(o.clone());
        }
        let g = &mut cfg.grid;
        if let Some(List(v)) = &self.spin {
            g.spin = v.clone();
        }
        if let Some(List(v)) = &self.k {
            g.k = v.clone();
        }
        if let Some(List(v)) = &self.a {
            g.a = Some(v.clone());
            g.theta = None;
        }
        if let Some(List(v)) = &self.theta {
            g.theta = Some(v.clone());
            g.a = None;
        }
        if let Some(List(v)) = &self.p {
            g.p = v.clone();
        }
        let r = &mut cfg.run;
        r.steps = self.steps.or(r.steps);
        r.burn_in = self.burn_in.or(r.burn_in);
        r.n_traj = self.n_traj.or(r.n_traj);
        r.window = self.window.or(r.window);
        r.workers = self.workers.or(r.workers);
        r.initial = self.initial.or(r.initial);
        r.encoding = self.encoding.or(r.encoding);
        r.outside = self.outside.or(r.outside);
        if let Some(List(s)) = &self.schedule {
            r.schedule = Some(s.clone());
        }
        if let Some(List(o)) = &self.observables {
            r.observables = Some(o.clone());
        }
        if let Some(List(b)) = &self.bins {
            let [nt, np] = b[..] else {
                bail!("--bins takes two values, n_theta,n_phi")
            };
            r.bins = Some([nt, np]);
        }
        cfg.validate()?;
        Ok(())
    }

    fn build(&self, engine: Engine, experiment: Experiment) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let cfg = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
                if cfg.engine != engine {
                    bail!(
                        "{} describes a {} run; use the matching subcommand",
                        path.display(),
                        cfg.engine.tag()
                    );
                }
                ExperimentConfig { experiment, ..cfg }
            }
            None => ExperimentConfig::defaults(engine, experiment, DEFAULT_SEED),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    fn build_resume(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.out) {
            (Some(path), _) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            (None, Some(out)) => {
                let side = out.with_extension("json");
                read_metadata(&side)
                    .with_context(|| format!("reading {}", side.display()))?
                    .config
            }
            (None, None) => bail!("resume needs --config or --out"),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn report(cfg: &ExperimentConfig, rep: &RunReport) {
    if cfg.engine == Engine::Analytics {
        for r in &rep.table.rows {
            let p = r.p.map(|p| format!(" p={p}")).unwrap_or_default();
            println!("k={} a={}{p}  {} = {}", r.k, r.a, r.observable, r.mean);
        }
    }
    eprintln!(
        "{} rows, {} points computed -> {}",
        rep.table.rows.len(),
        rep.computed,
        cfg.csv_path().display()
    );
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (common, target) = match &cli.command {
        Command::Analytics(c) => (c, Some((Engine::Analytics, Experiment::Sweep))),
        Command::ClassicalSweep(c) => (c, Some((Engine::Classical, Experiment::Sweep))),
        Command::ClassicalLyapunov(c) => (c, Some((Engine::Classical, Experiment::Lyapunov))),
        Command::ClassicalDensity(c) => (c, Some((Engine::Classical, Experiment::Density))),
        Command::QuantumSweep(c) => (c, Some((Engine::Quantum, Experiment::Sweep))),
        Command::QuantumAncilla(c) => (c, Some((Engine::Quantum, Experiment::Ancilla))),
        Command::TwaSweep(c) => (c, Some((Engine::Twa, Experiment::Sweep))),
        Command::Resume(c) => (c, None),
    };
    let (cfg, rep) = match target {
        Some((engine, experiment)) => {
            let cfg = common.build(engine, experiment)?;
            let rep = run_experiment(&cfg)?;
            (cfg, rep)
        }
        None => {
            let cfg = common.build_resume()?;
            let rep = resume_or_extend(&cfg)?;
            (cfg, rep)
        }
    };
    report(&cfg, &rep);
    Ok(())
}
