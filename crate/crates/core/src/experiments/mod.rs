//! Stochastic classical evolution: each step applies the control map with
//! probability `p` and the kicked-top map otherwise.
//!
//! Trajectories are independent and parallelized with rayon. Results are
//! collected in trajectory order and reduced sequentially, so every number is
//! independent of the worker count.

mod density;
mod lyapunov;
mod sweep;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{
    find_fixed_point, kicked_top_step, ControlParams, ControlRegion, KickParams, OutsidePolicy, PhasePoint,
};
use crate::error::{Error, Result};
use crate::rng::{point_key, stream, Purpose, StreamRng};
use crate::stats::Summary;

pub use density::{density_dump, DensityHistogram};
pub use lyapunov::{lyapunov_benettin, measure_trajectory, LyapunovConfig, TrajectoryMeasures};
pub(crate) use sweep::sweep_point;
pub use sweep::{extract_boundaries, phase_diagram_sweep, Boundary, GridPoint, PhaseRow};

/// Where trajectories start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Uniform on the sphere, one independent draw per trajectory.
    #[default]
    Uniform,
    Fixed(PhasePoint),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticRunConfig {
    pub p: f64,
    pub steps: usize,
    pub burn_in: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub kick: KickParams,
    pub ctrl: ControlParams,
    pub initial: InitialCondition,
}

impl StochasticRunConfig {
    /// Defaults: 10⁴ steps, half of them burn-in, 10⁴ trajectories, control
    /// toward the nontrivial fixed point on the `x > 0` hemisphere.
    pub fn new(k: f64, a: f64, p: f64, seed: u64) -> Result<Self> {
        let kick = KickParams::new(k)?;
        let r0 = find_fixed_point(k)?.r0;
        let ctrl = ControlParams::new(a, r0, ControlRegion::PositiveX)?;
        let cfg = StochasticRunConfig {
            p,
            steps: 10_000,
            burn_in: 5_000,
            n_traj: 10_000,
            seed,
            kick,
            ctrl,
            initial: InitialCondition::Uniform,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_steps(mut self, steps: usize, burn_in: usize) -> Self {
        self.steps = steps;
        self.burn_in = burn_in;
        self
    }

    pub fn with_trajectories(mut self, n_traj: usize) -> Self {
        self.n_traj = n_traj;
        self
    }

    pub fn with_outside(mut self, outside: OutsidePolicy) -> Self {
        self.ctrl.outside = outside;
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        if self.burn_in >= self.steps {
            return Err(Error::invalid("burn_in", "must be smaller than steps"));
        }
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        Ok(())
    }

    /// Key of this parameter point in the RNG stream space.
    pub fn point_key(&self) -> u64 {
        point_key(&[self.kick.k, self.ctrl.a, self.p])
    }

    pub(crate) fn initial_point(&self, traj: u64) -> PhasePoint {
        match self.initial {
            InitialCondition::Fixed(p) => p,
            InitialCondition::Uniform => {
                let mut rng = stream(self.seed, Purpose::Initial, self.point_key(), traj);
                let [x, y, z] = UnitSphere.sample(&mut rng);
                PhasePoint::new(x, y, z).normalized()
            }
        }
    }

    pub(crate) fn dynamics_rng(&self, traj: u64) -> StreamRng {
        stream(self.seed, Purpose::Dynamics, self.point_key(), traj)
    }
}

/// Applies one stochastic step given the uniform draw `u` for this step.
#[inline]
pub fn stochastic_step(r: PhasePoint, u: f64, p: f64, kick: KickParams, ctrl: &ControlParams) -> PhasePoint {
    if u < p {
        if ctrl.region.contains(&r) {
            ctrl.contract(r)
        } else {
            match ctrl.outside {
                OutsidePolicy::Identity => r,
                OutsidePolicy::Chaotic => kicked_top_step(r, kick),
            }
        }
    } else {
        kicked_top_step(r, kick)
    }
}

/// Full trajectory `r(0), …, r(steps)` for one realization.
pub fn run_controlled_trajectory(cfg: &StochasticRunConfig, traj_id: u64) -> Vec<PhasePoint> {
    let mut rng = cfg.dynamics_rng(traj_id);
    let mut r = cfg.initial_point(traj_id);
    let mut out = Vec::with_capacity(cfg.steps + 1);
    out.push(r);
    for _ in 0..cfg.steps {
        let u: f64 = rng.random();
        r = stochastic_step(r, u, cfg.p, cfg.kick, &cfg.ctrl);
        out.push(r);
    }
    out
}

/// Post-burn-in time average of `|r(t) - r0|²` for one trajectory.
pub fn trajectory_o2(cfg: &StochasticRunConfig, traj_id: u64) -> f64 {
    let mut rng = cfg.dynamics_rng(traj_id);
    let mut r = cfg.initial_point(traj_id);
    let target = cfg.ctrl.target;
    let mut acc = 0.0;
    for t in 1..=cfg.steps {
        let u: f64 = rng.random();
        r = stochastic_step(r, u, cfg.p, cfg.kick, &cfg.ctrl);
        if t > cfg.burn_in {
            acc += (r - target).norm_sqr();
        }
    }
    acc / (cfg.steps - cfg.burn_in) as f64
}

/// Order parameter `O²`: mean over trajectories of the late-time average of
/// `|r - r0|²`. The spread is across trajectories.
pub fn order_parameter_o2(cfg: &StochasticRunConfig) -> Result<Summary> {
    cfg.validate()?;
    let per_traj: Vec<f64> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|i| trajectory_o2(cfg, i))
        .collect();
    Ok(Summary::of(&per_traj))
}

/// Threshold below which `O²` is read as controlled.
pub const O2_CONTROLLED: f64 = 0.01;
