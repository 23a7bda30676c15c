use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ancilla_evolve_and_entropy, bipartite_entropy, displacement_r2, fidelity, transverse_fluctuations, Encoding,
};
use crate::error::{Error, Result};
use crate::quantum::{evolve_quantum_trajectory, ControlChannel, RotatedFrame, SpinState};
use crate::rng::{point_key, stream, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Fidelity,
    R2,
    SPerp2,
    SBipartite,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 4] = [
        ObservableKind::Fidelity,
        ObservableKind::R2,
        ObservableKind::SPerp2,
        ObservableKind::SBipartite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Fidelity => "F",
            ObservableKind::R2 => "R2",
            ObservableKind::SPerp2 => "s_perp2",
            ObservableKind::SBipartite => "S_bip",
        }
    }

    fn eval(&self, psi: &SpinState) -> Result<f64> {
        Ok(match self {
            ObservableKind::Fidelity => fidelity(psi),
            ObservableKind::R2 => displacement_r2(psi),
            ObservableKind::SPerp2 => transverse_fluctuations(psi),
            ObservableKind::SBipartite => bipartite_entropy(psi)?,
        })
    }
}

/// Starting state of each quantum trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialQuantumState {
    /// Spin-coherent state along a uniformly random direction.
    #[default]
    RandomCoherent,
    Target,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumPointConfig {
    pub p: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Sorted observation times; the last one sets the run length.
    pub schedule: Vec<usize>,
    pub observables: Vec<ObservableKind>,
    pub initial: InitialQuantumState,
}

impl QuantumPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        if self.schedule.is_empty() || self.schedule.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("schedule", "must be nonempty and sorted"));
        }
        if self.observables.is_empty() {
            return Err(Error::invalid("observables", "nothing to measure"));
        }
        Ok(())
    }
}

/// Per-trajectory values: `values[s][o][traj]` for schedule slot `s` and
/// observable slot `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumPointResult {
    pub schedule: Vec<usize>,
    pub observables: Vec<ObservableKind>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl QuantumPointResult {
    pub fn series(&self, t: usize, kind: ObservableKind) -> Option<&[f64]> {
        let s = self.schedule.iter().position(|&x| x == t)?;
        let o = self.observables.iter().position(|&x| x == kind)?;
        Some(&self.values[s][o])
    }
}

fn initial_state(two_s: usize, cfg: &QuantumPointConfig, key: u64, traj: u64) -> Result<SpinState> {
    match cfg.initial {
        InitialQuantumState::Target => SpinState::top(two_s),
        InitialQuantumState::RandomCoherent => {
            let mut rng = stream(cfg.seed, Purpose::Initial, key, traj);
            let [x, y, z]: [f64; 3] = UnitSphere.sample(&mut rng);
            SpinState::coherent(two_s, z.clamp(-1.0, 1.0).acos(), y.atan2(x))
        }
    }
}

/// States `U_rot^n |S⟩` and their observables, filled on first use.
struct ResetLadder<'a> {
    frame: &'a RotatedFrame,
    kinds: &'a [ObservableKind],
    states: Vec<SpinState>,
    values: Vec<OnceLock<std::result::Result<Vec<f64>, String>>>,
}

impl<'a> ResetLadder<'a> {
    fn new(frame: &'a RotatedFrame, kinds: &'a [ObservableKind], n_max: usize) -> Result<Self> {
        let mut states = Vec::with_capacity(n_max + 1);
        let mut psi = SpinState::top(frame.two_s())?;
        for _ in 0..=n_max {
            states.push(psi.clone());
            frame.step(&mut psi);
        }
        Ok(ResetLadder {
            frame,
            kinds,
            states,
            values: (0..=n_max).map(|_| OnceLock::new()).collect(),
        })
    }

    fn get(&self, n: usize) -> Result<Vec<f64>> {
        let _ = self.frame;
        self.values[n]
            .get_or_init(|| {
                self.kinds
                    .iter()
                    .map(|k| k.eval(&self.states[n]))
                    .collect::<Result<Vec<f64>>>()
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(Error::LinAlg)
    }
}

/// Runs `n_traj` trajectories at one parameter point and evaluates the
/// requested observables at every scheduled time.
///
/// With `θ = π` every control step leaves `|S⟩` whatever the outcome, so after
/// the first control the state is `U_rot^n |S⟩`, `n` counting unitary steps
/// since the last control. Those states and their observables are computed
/// once per point. The random stream is consumed exactly as in the general
/// path, so both give identical records.
pub fn quantum_point(
    frame: &RotatedFrame,
    channel: &ControlChannel,
    cfg: &QuantumPointConfig,
) -> Result<QuantumPointResult> {
    cfg.validate()?;
    let two_s = frame.two_s();
    let key = point_key(&[two_s as f64, frame.k(), channel.theta(), cfg.p]);
    let steps = *cfg.schedule.last().unwrap();
    let ladder = if channel.is_full_reset() {
        Some(ResetLadder::new(frame, &cfg.observables, steps)?)
    } else {
        None
    };
    let per_traj: Vec<Result<Vec<Vec<f64>>>> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|traj| {
            let mut psi = initial_state(two_s, cfg, key, traj)?;
            let mut rng = stream(cfg.seed, Purpose::Dynamics, key, traj);
            match &ladder {
                None => {
                    let rec = evolve_quantum_trajectory(
                        frame,
                        channel,
                        &mut psi,
                        cfg.p,
                        steps,
                        &mut rng,
                        &cfg.schedule,
                        |_, s| cfg.observables.iter().map(|k| k.eval(s)).collect::<Result<Vec<f64>>>(),
                    )?;
                    rec.samples.into_iter().map(|(_, v)| v).collect()
                }
                Some(ladder) => {
                    let eval_now =
                        |psi: &SpinState| -> Result<Vec<f64>> { cfg.observables.iter().map(|k| k.eval(psi)).collect() };
                    let mut since_reset: Option<usize> = None;
                    let mut out = Vec::with_capacity(cfg.schedule.len());
                    let mut next = 0;
                    for t in 0..=steps {
                        if t > 0 {
                            let u: f64 = rng.random();
                            if u < cfg.p {
                                // The general path draws one uniform to pick the outcome.
                                let _: f64 = rng.random();
                                since_reset = Some(0);
                            } else if let Some(n) = since_reset.as_mut() {
                                *n += 1;
                            } else {
                                frame.step(&mut psi);
                            }
                        }
                        while next < cfg.schedule.len() && cfg.schedule[next] == t {
                            out.push(match since_reset {
                                Some(n) => ladder.get(n)?,
                                None => eval_now(&psi)?,
                            });
                            next += 1;
                        }
                    }
                    Ok(out)
                }
            }
        })
        .collect();
    let n_sched = cfg.schedule.len();
    let n_obs = cfg.observables.len();
    let mut values = vec![vec![Vec::with_capacity(cfg.n_traj); n_obs]; n_sched];
    for traj in per_traj {
        let traj = traj?;
        for (s, row) in traj.into_iter().enumerate() {
            for (o, v) in row.into_iter().enumerate() {
                values[s][o].push(v);
            }
        }
    }
    Ok(QuantumPointResult {
        schedule: cfg.schedule.clone(),
        observables: cfg.observables.clone(),
        values,
    })
}

/// Ancilla purification over `n_traj` trajectories: `values[s][traj]` is
/// `S_anc` at `schedule[s]`. Each trajectory draws its own encoding pair.
pub fn ancilla_point(
    frame: &RotatedFrame,
    channel: &ControlChannel,
    p: f64,
    schedule: &[usize],
    encoding: Encoding,
    n_traj: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if n_traj == 0 || schedule.is_empty() {
        return Err(Error::invalid("n_traj", "need at least one trajectory and one time"));
    }
    let key = point_key(&[frame.two_s() as f64, frame.k(), channel.theta(), p]);
    let per_traj: Vec<Result<Vec<(usize, f64)>>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|traj| {
            let mut enc_rng = stream(seed, Purpose::Encoding, key, traj);
            let mut rng = stream(seed, Purpose::Dynamics, key, traj);
            ancilla_evolve_and_entropy(frame, channel, p, schedule, encoding, &mut enc_rng, &mut rng)
        })
        .collect();
    let mut values = vec![Vec::with_capacity(n_traj); schedule.len()];
    for traj in per_traj {
        for (s, (_, v)) in traj?.into_iter().enumerate() {
            values[s].push(v);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(p: f64, n_traj: usize, schedule: Vec<usize>) -> QuantumPointConfig {
        QuantumPointConfig {
            p,
            n_traj,
            seed: 77,
            schedule,
            observables: ObservableKind::ALL.to_vec(),
            initial: InitialQuantumState::RandomCoherent,
        }
    }

    #[test]
    fn reset_ladder_matches_general_path() {
        let frame = RotatedFrame::new(12, 6.0).unwrap();
        let ch = ControlChannel::new(12, PI).unwrap();
        let c = cfg(0.6, 30, vec![0, 3, 10, 20]);
        let fast = quantum_point(&frame, &ch, &c).unwrap();
        // Recompute every trajectory with the general evolver.
        let key = point_key(&[12.0, 6.0, PI, 0.6]);
        for traj in 0..30u64 {
            let mut psi = initial_state(12, &c, key, traj).unwrap();
            let mut rng = stream(c.seed, Purpose::Dynamics, key, traj);
            let rec = evolve_quantum_trajectory(&frame, &ch, &mut psi, 0.6, 20, &mut rng, &c.schedule, |_, s| {
                ObservableKind::ALL.map(|k| k.eval(s).unwrap())
            })
            .unwrap();
            for (s, (_, vals)) in rec.samples.iter().enumerate() {
                for (o, v) in vals.iter().enumerate() {
                    let a = fast.values[s][o][traj as usize];
                    assert!((a - v).abs() < 1e-9, "traj {traj} slot {s} obs {o}: {a} vs {v}");
                }
            }
        }
    }

    #[test]
    fn controlled_side_has_high_fidelity() {
        let frame = RotatedFrame::new(32, 6.0).unwrap();
        let ch = ControlChannel::new(32, PI / 2.0).unwrap();
        let r = quantum_point(&frame, &ch, &cfg(0.9, 100, vec![16])).unwrap();
        let f = r.series(16, ObservableKind::Fidelity).unwrap();
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        assert!(mean > 0.5, "{mean}");
    }

    #[test]
    fn thread_count_does_not_matter() {
        let frame = RotatedFrame::new(16, 6.0).unwrap();
        let ch = ControlChannel::new(16, PI / 2.0).unwrap();
        let c = cfg(0.7, 24, vec![8, 16]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| quantum_point(&frame, &ch, &c).unwrap());
        let b = three.install(|| quantum_point(&frame, &ch, &c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn entropy_respects_bound() {
        let frame = RotatedFrame::new(16, 6.0).unwrap();
        let ch = ControlChannel::new(16, PI / 2.0).unwrap();
        let r = quantum_point(&frame, &ch, &cfg(0.3, 40, (0..=16).collect())).unwrap();
        let bound = 9f64.log2();
        for s in 0..r.schedule.len() {
            assert!(r.values[s][3].iter().all(|&x| (0.0..=bound + 1e-12).contains(&x)));
        }
    }

    #[test]
    fn ancilla_unitary_keeps_one_bit() {
        let frame = RotatedFrame::new(16, 8.0).unwrap();
        let ch = ControlChannel::new(16, PI / 2.0).unwrap();
        let v = ancilla_point(&frame, &ch, 0.0, &[0, 50, 100], Encoding::Haar, 8, 3).unwrap();
        assert!(v.iter().flatten().all(|&s| (s - 1.0).abs() < 1e-10));
        let w = ancilla_point(&frame, &ch, 0.5, &[40], Encoding::Haar, 20, 3).unwrap();
        let mean = w[0].iter().sum::<f64>() / 20.0;
        assert!(mean < 0.5, "{mean}");
    }
}
