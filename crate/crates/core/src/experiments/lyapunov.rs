use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stochastic_step, StochasticRunConfig};
use crate::classical::{tangent_basis, PhasePoint};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose, StreamRng};
use crate::stats::Summary;

/// Benettin estimate on top of a stochastic run. After `run.burn_in` steps
/// a companion is placed at distance `d0` and the pair is evolved for
/// `n_resets` segments of `tau` steps, with the same control draws for both.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub run: StochasticRunConfig,
    pub d0: f64,
    pub tau: usize,
    pub n_resets: usize,
}

impl LyapunovConfig {
    /// `d0 = 1e-8`, `τ = 10`, and as many segments as fit after burn-in.
    pub fn from_run(run: StochasticRunConfig) -> Self {
        let tau = 10;
        LyapunovConfig {
            run,
            d0: 1e-8,
            tau,
            n_resets: ((run.steps - run.burn_in) / tau).max(1),
        }
    }

    pub fn with_resets(mut self, n_resets: usize) -> Self {
        self.n_resets = n_resets;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        if !(self.d0 > 0.0 && self.d0 < 1e-2) {
            return Err(Error::invalid("d0", format!("must lie in (0, 1e-2), got {}", self.d0)));
        }
        if self.tau == 0 || self.n_resets == 0 {
            return Err(Error::invalid("tau", "tau and n_resets must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryMeasures {
    /// Time average of `|r - r0|²` over the measured segments.
    pub o2: f64,
    /// Benettin exponent of this realization.
    pub mu: f64,
    /// Segments that ended with the pair collapsed onto one point.
    pub reseeds: usize,
}

fn random_tangent(r: &PhasePoint, rng: &mut StreamRng) -> PhasePoint {
    let (e1, e2) = tangent_basis(r);
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    e1 * phi.cos() + e2 * phi.sin()
}

/// Places a point at chord distance `d0` from `x`, on the great circle
/// through `x` and `toward` when that circle is defined.
fn reset_companion(x: &PhasePoint, toward: &PhasePoint, d0: f64, rng: &mut StreamRng) -> (PhasePoint, bool) {
    let w = *toward - *x * x.dot(toward);
    let (dir, degenerate) = match w.try_normalized() {
        Ok(u) if w.norm() > 1e-14 => (u, false),
        _ => (random_tangent(x, rng), true),
    };
    let alpha = 2.0 * (0.5 * d0).asin();
    ((*x * alpha.cos() + dir * alpha.sin()).normalized(), degenerate)
}

/// Runs one realization and returns its `O²` average and Benettin exponent.
pub fn measure_trajectory(cfg: &LyapunovConfig, traj_id: u64) -> TrajectoryMeasures {
    let run = &cfg.run;
    let mut coins = run.dynamics_rng(traj_id);
    let mut reseed = stream(run.seed, Purpose::Reseed, run.point_key(), traj_id);
    let mut x = run.initial_point(traj_id);
    let target = run.ctrl.target;
    for _ in 0..run.burn_in {
        let u: f64 = coins.random();
        x = stochastic_step(x, u, run.p, run.kick, &run.ctrl);
    }
    let first = random_tangent(&x, &mut reseed);
    let (mut y, _) = reset_companion(&x, &(x + first), cfg.d0, &mut reseed);
    let mut log_sum = 0.0;
    let mut o2 = 0.0;
    let mut reseeds = 0;
    for _ in 0..cfg.n_resets {
        for _ in 0..cfg.tau {
            let u: f64 = coins.random();
            x = stochastic_step(x, u, run.p, run.kick, &run.ctrl);
            y = stochastic_step(y, u, run.p, run.kick, &run.ctrl);
            o2 += (x - target).norm_sqr();
        }
        let d = x.distance(&y);
        // A full reset merges the pair; floor the log so the segment still counts.
        log_sum += (d.max(f64::MIN_POSITIVE) / cfg.d0).ln();
        let (ny, degenerate) = reset_companion(&x, &y, cfg.d0, &mut reseed);
        reseeds += degenerate as usize;
        y = ny;
    }
    let n_steps = (cfg.n_resets * cfg.tau) as f64;
    TrajectoryMeasures {
        o2: o2 / n_steps,
        mu: log_sum / n_steps,
        reseeds,
    }
}

/// Benettin exponent averaged over `run.n_traj` realizations.
pub fn lyapunov_benettin(cfg: &LyapunovConfig) -> Result<Summary> {
    cfg.validate()?;
    let mus: Vec<f64> = (0..cfg.run.n_traj as u64)
        .into_par_iter()
        .map(|i| measure_trajectory(cfg, i).mu)
        .collect();
    Ok(Summary::of(&mus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{lyapunov_linearized, OutsidePolicy};

    fn run(k: f64, a: f64, p: f64) -> StochasticRunConfig {
        StochasticRunConfig::new(k, a, p, 11).unwrap()
    }

    #[test]
    fn reset_lands_at_chord_distance() {
        let mut rng = stream(0, Purpose::Reseed, 0, 0);
        let x = PhasePoint::from_angles(1.0, 0.4);
        let far = PhasePoint::from_angles(2.0, -1.0);
        let (y, deg) = reset_companion(&x, &far, 1e-6, &mut rng);
        assert!(!deg);
        assert!((x.distance(&y) - 1e-6).abs() < 1e-15);
        // On the great circle through x and far.
        let normal = x.cross(&far).normalized();
        assert!(y.dot(&normal).abs() < 1e-15);
        let (z, deg) = reset_companion(&x, &x, 1e-6, &mut rng);
        assert!(deg);
        assert!((x.distance(&z) - 1e-6).abs() < 1e-15);
    }

    #[test]
    fn full_control_gives_log_a() {
        let cfg = LyapunovConfig::from_run(
            run(6.0, 0.5, 1.0)
                .with_steps(1100, 100)
                .with_trajectories(50)
                .with_outside(OutsidePolicy::Chaotic),
        );
        let mu = lyapunov_benettin(&cfg).unwrap();
        assert!((mu.mean - 0.5f64.ln()).abs() < 0.01, "{mu:?}");
    }

    #[test]
    fn chaotic_without_control() {
        let cfg = LyapunovConfig::from_run(run(6.0, 0.5, 0.0).with_steps(2000, 100).with_trajectories(50));
        let mu = lyapunov_benettin(&cfg).unwrap();
        assert!(mu.mean > 0.3, "{mu:?}");
    }

    #[test]
    fn stable_kick_controls_at_small_rate() {
        let cfg = LyapunovConfig::from_run(run(4.0, 0.5, 0.05).with_steps(3000, 1000).with_trajectories(100));
        let mu = lyapunov_benettin(&cfg).unwrap();
        assert!(mu.mean < 0.0, "{mu:?}");
    }

    #[test]
    fn deep_controlled_matches_linearization() {
        let p = 0.9;
        let cfg = LyapunovConfig::from_run(run(6.0, 0.5, p).with_steps(3000, 1000).with_trajectories(100));
        let mu = lyapunov_benettin(&cfg).unwrap();
        let lin = lyapunov_linearized(6.0, 0.5, p).unwrap();
        assert!(((mu.mean - lin) / lin).abs() < 0.05, "{} vs {lin}", mu.mean);
    }

    #[test]
    fn segments_are_additive_in_time() {
        let base = run(6.0, 0.5, 0.9).with_steps(1000, 500).with_trajectories(40);
        let short = LyapunovConfig::from_run(base).with_resets(50);
        let long = LyapunovConfig::from_run(base).with_resets(100);
        let a = lyapunov_benettin(&short).unwrap();
        let b = lyapunov_benettin(&long).unwrap();
        let sigma = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < 3.0 * sigma + 1e-3, "{a:?} {b:?}");
    }
}
