use serde::{Deserialize, Serialize};

use super::config::{Engine, Experiment, ExperimentConfig};
use super::table::SweepRow;
use crate::classical::{critical_probability, find_fixed_point, lyapunov_linearized, moment_threshold};
use crate::error::Result;
use crate::experiments::{density_dump, sweep_point, GridPoint, LyapunovConfig, StochasticRunConfig};
use crate::observables::{
    ancilla_point, binder_ratio, fullreset_analytics, quantum_point, ObservableKind, QuantumPointConfig,
};
use crate::quantum::{ControlChannel, RotatedFrame};
use crate::stats::Summary;
use crate::twa::{twa_point, TwaConfig};

/// One grid point. `p` is absent for the `p`-independent analytic rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    #[serde(rename = "S")]
    pub spin: Option<f64>,
    pub k: f64,
    pub a: f64,
    pub theta: f64,
    pub p: Option<f64>,
}

impl PointSpec {
    /// Identity used to match points across runs.
    pub fn same_as(&self, o: &PointSpec) -> bool {
        let bits = |x: Option<f64>| x.map(f64::to_bits);
        bits(self.spin) == bits(o.spin)
            && self.k.to_bits() == o.k.to_bits()
            && self.a.to_bits() == o.a.to_bits()
            && bits(self.p) == bits(o.p)
    }
}

/// Expands the grid in output order: `S`, then `k`, then the rate, then `p`.
pub fn grid_points(cfg: &ExperimentConfig) -> Result<Vec<PointSpec>> {
    let rates = cfg.grid.rates()?;
    let spins: Vec<Option<f64>> = match cfg.engine {
        Engine::Quantum | Engine::Twa => cfg.grid.spin.iter().map(|&s| Some(s)).collect(),
        _ => vec![None],
    };
    let mut ps: Vec<Option<f64>> = cfg.grid.p.iter().map(|&p| Some(p)).collect();
    if cfg.engine == Engine::Analytics {
        ps.insert(0, None);
    }
    let mut out = Vec::new();
    for &spin in &spins {
        for &k in &cfg.grid.k {
            for &(a, theta) in &rates {
                for &p in &ps {
                    out.push(PointSpec { spin, k, a, theta, p });
                }
            }
        }
    }
    Ok(out)
}

/// Reuses the rotated-frame propagator across consecutive points.
#[derive(Default)]
pub struct FrameCache {
    frame: Option<RotatedFrame>,
}

impl FrameCache {
    fn get(&mut self, two_s: usize, k: f64) -> Result<&RotatedFrame> {
        let hit = matches!(&self.frame, Some(f) if f.two_s() == two_s && f.k().to_bits() == k.to_bits());
        if !hit {
            self.frame = Some(RotatedFrame::new(two_s, k)?);
        }
        Ok(self.frame.as_ref().unwrap())
    }
}

struct RowBuilder<'a> {
    cfg: &'a ExperimentConfig,
    pt: PointSpec,
}

impl RowBuilder<'_> {
    fn row(&self, t: Option<u64>, observable: &str, mean: f64, variance: f64, n: usize) -> SweepRow {
        SweepRow {
            engine: self.cfg.engine.tag().to_string(),
            spin: self.pt.spin,
            k: self.pt.k,
            theta: self.pt.theta,
            a: self.pt.a,
            p: self.pt.p,
            t,
            observable: observable.to_string(),
            mean,
            variance,
            n_samples: n as u64,
            seed: self.cfg.seed,
        }
    }

    fn summary(&self, t: Option<u64>, observable: &str, s: &Summary) -> SweepRow {
        self.row(t, observable, s.mean, s.variance, s.n)
    }
}

fn classical_run(cfg: &ExperimentConfig, pt: &PointSpec) -> Result<StochasticRunConfig> {
    let r = &cfg.run;
    let steps = r.steps.unwrap_or(10_000);
    let mut run = StochasticRunConfig::new(pt.k, pt.a, pt.p.unwrap_or(0.0), cfg.seed)?
        .with_steps(steps, r.burn_in.unwrap_or(steps / 2))
        .with_trajectories(r.n_traj.unwrap_or(10_000));
    if let Some(region) = r.region {
        run.ctrl.region = region;
        if !region.contains(&run.ctrl.target) {
            return Err(super::config::config_err(
                "run.region",
                "target lies outside the region",
            ));
        }
    }
    if let Some(kind) = r.control {
        run.ctrl.kind = kind;
    }
    if let Some(outside) = r.outside {
        run.ctrl.outside = outside;
    }
    run.validate()?;
    Ok(run)
}

/// Default quantum observation times.
pub fn default_schedule(cfg: &ExperimentConfig, spin: f64) -> Vec<usize> {
    let s = spin.floor().max(1.0) as usize;
    match cfg.experiment {
        Experiment::Ancilla => {
            let l = (spin.log2().round().max(1.0)) as usize;
            if l < s {
                vec![l, s]
            } else {
                vec![s]
            }
        }
        _ => vec![s.min(256)],
    }
}

/// Evaluates one grid point and returns its rows in a fixed order.
pub fn evaluate_point(cfg: &ExperimentConfig, pt: &PointSpec, cache: &mut FrameCache) -> Result<Vec<SweepRow>> {
    let b = RowBuilder { cfg, pt: *pt };
    let r = &cfg.run;
    match cfg.engine {
        Engine::Classical => {
            let run = classical_run(cfg, pt)?;
            let t = Some(run.steps as u64);
            match cfg.experiment {
                Experiment::Density => {
                    let [nt, np] = r.bins.unwrap_or([64, 128]);
                    let h = density_dump(&run, nt, np)?;
                    let mut rows = Vec::with_capacity(nt * np);
                    for i in 0..nt {
                        for j in 0..np {
                            let f = h.fraction(i, j);
                            rows.push(b.row(t, &format!("density_{i}_{j}"), f, f * (1.0 - f), h.total as usize));
                        }
                    }
                    Ok(rows)
                }
                _ => {
                    let tpl = LyapunovConfig::from_run(run);
                    let row = sweep_point(
                        GridPoint {
                            k: pt.k,
                            a: pt.a,
                            p: run.p,
                        },
                        &tpl,
                    )?;
                    let mut rows = Vec::new();
                    if cfg.experiment == Experiment::Sweep {
                        rows.push(b.summary(t, "O2", &row.o2));
                    }
                    rows.push(b.summary(t, "mu", &row.mu));
                    Ok(rows)
                }
            }
        }
        Engine::Quantum => {
            let spin = pt.spin.expect("quantum points carry S");
            let two_s = (2.0 * spin).round() as usize;
            let p = pt.p.unwrap_or(0.0);
            let schedule = r.schedule.clone().unwrap_or_else(|| default_schedule(cfg, spin));
            let n_traj = r.n_traj.unwrap_or(500);
            let channel = ControlChannel::new(two_s, pt.theta)?;
            let frame = cache.get(two_s, pt.k)?;
            if cfg.experiment == Experiment::Ancilla {
                let values = ancilla_point(
                    frame,
                    &channel,
                    p,
                    &schedule,
                    r.encoding.unwrap_or_default(),
                    n_traj,
                    cfg.seed,
                )?;
                return Ok(schedule
                    .iter()
                    .zip(&values)
                    .map(|(&t, v)| b.summary(Some(t as u64), "S_anc", &Summary::of(v)))
                    .collect());
            }
            let observables = r.observables.clone().unwrap_or_else(|| ObservableKind::ALL.to_vec());
            let res = quantum_point(
                frame,
                &channel,
                &QuantumPointConfig {
                    p,
                    n_traj,
                    seed: cfg.seed,
                    schedule: schedule.clone(),
                    observables: observables.clone(),
                    initial: r.initial.unwrap_or_default(),
                },
            )?;
            let mut rows = Vec::new();
            for (s, &t) in schedule.iter().enumerate() {
                for (o, kind) in observables.iter().enumerate() {
                    let v = &res.values[s][o];
                    rows.push(b.summary(Some(t as u64), kind.name(), &Summary::of(v)));
                    if *kind == ObservableKind::SBipartite {
                        let binder = binder_ratio(v).value().unwrap_or(f64::NAN);
                        rows.push(b.row(Some(t as u64), "B_bip", binder, 0.0, v.len()));
                    }
                }
            }
            Ok(rows)
        }
        Engine::Twa => {
            let mut tc = TwaConfig::new(
                pt.spin.expect("twa points carry S"),
                pt.k,
                pt.theta,
                pt.p.unwrap_or(0.0),
                cfg.seed,
            );
            tc.n_samples = r.n_traj.unwrap_or(tc.n_samples);
            tc.steps = r.steps.unwrap_or(tc.steps);
            tc.window = r.window.unwrap_or(tc.window.min(tc.steps));
            let res = twa_point(&tc)?;
            let t = Some(tc.steps as u64);
            let f = Summary::of(&res.fidelity);
            Ok(vec![
                b.row(t, "F", res.fidelity_mean(), f.variance, f.n),
                b.summary(t, "s_perp2", &Summary::of(&res.s_perp2)),
            ])
        }
        Engine::Analytics => {
            let fp = find_fixed_point(pt.k)?;
            match pt.p {
                None => {
                    let mut rows = vec![
                        b.row(None, "x0", fp.x0, 0.0, 0),
                        b.row(None, "lambda_plus", fp.lambda_plus.re, 0.0, 0),
                        b.row(None, "lambda_abs", fp.instability(), 0.0, 0),
                    ];
                    if pt.a > 0.0 && pt.a < 1.0 {
                        rows.push(b.row(None, "p_c", critical_probability(pt.k, pt.a)?, 0.0, 0));
                        for n in [1u32, 2, 4] {
                            let v = moment_threshold(pt.k, pt.a, n as f64)?;
                            rows.push(b.row(None, &format!("p_star_{n}"), v, 0.0, 0));
                        }
                    }
                    Ok(rows)
                }
                Some(p) => {
                    let mut rows = Vec::new();
                    if pt.a > 0.0 {
                        rows.push(b.row(None, "mu_linear", lyapunov_linearized(pt.k, pt.a, p)?, 0.0, 0));
                    }
                    if p > 0.0 {
                        let fr = fullreset_analytics(pt.k, p)?;
                        rows.push(b.row(None, "S_bip_reset_mean", fr.mean, fr.variance(), 0));
                        rows.push(b.row(None, "B_bip_reset", fr.binder, 0.0, 0));
                        rows.push(b.row(None, "S_bip_reset_mean_limit", fr.mean_limit, 0.0, 0));
                        rows.push(b.row(None, "B_bip_reset_limit", fr.binder_limit, 0.0, 0));
                    }
                    Ok(rows)
                }
            }
        }
    }
}
