use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{stochastic_step, StochasticRunConfig};
use crate::classical::PhasePoint;
use crate::error::{Error, Result};

/// Occupation counts on a regular `(θ, φ)` grid, `θ ∈ [0, π]`, `φ ∈ (-π, π]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Row-major in `θ`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl DensityHistogram {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        DensityHistogram {
            n_theta,
            n_phi,
            counts: vec![0; n_theta * n_phi],
            total: 0,
        }
    }

    pub fn bin_of(&self, p: &PhasePoint) -> (usize, usize) {
        let (theta, phi) = p.angles();
        let i = ((theta / PI) * self.n_theta as f64) as usize;
        let j = (((phi + PI) / (2.0 * PI)) * self.n_phi as f64) as usize;
        (i.min(self.n_theta - 1), j.min(self.n_phi - 1))
    }

    pub fn record(&mut self, p: &PhasePoint) {
        let (i, j) = self.bin_of(p);
        self.counts[i * self.n_phi + j] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &DensityHistogram) {
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n_phi + j]
    }

    /// Fraction of samples in bin `(i, j)`.
    pub fn fraction(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.total as f64
    }

    /// Fraction of samples in the bin containing `p`.
    pub fn mass_at(&self, p: &PhasePoint) -> f64 {
        let (i, j) = self.bin_of(p);
        self.fraction(i, j)
    }

    /// Fraction of bins with at least one sample.
    pub fn occupied_fraction(&self) -> f64 {
        self.counts.iter().filter(|&&c| c > 0).count() as f64 / self.counts.len() as f64
    }

    /// Normalized densities, summing to one.
    pub fn normalized(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    pub fn bin_centers(&self, i: usize, j: usize) -> (f64, f64) {
        let theta = (i as f64 + 0.5) * PI / self.n_theta as f64;
        let phi = -PI + (j as f64 + 0.5) * 2.0 * PI / self.n_phi as f64;
        (theta, phi)
    }
}

/// Histogram of post-burn-in positions over all trajectories.
pub fn density_dump(cfg: &StochasticRunConfig, n_theta: usize, n_phi: usize) -> Result<DensityHistogram> {
    cfg.validate()?;
    if n_theta == 0 || n_phi == 0 {
        return Err(Error::invalid("bins", "histogram needs at least one bin per axis"));
    }
    let parts: Vec<DensityHistogram> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|traj| {
            let mut h = DensityHistogram::new(n_theta, n_phi);
            let mut rng = cfg.dynamics_rng(traj);
            let mut r = cfg.initial_point(traj);
            for t in 1..=cfg.steps {
                let u: f64 = rng.random();
                r = stochastic_step(r, u, cfg.p, cfg.kick, &cfg.ctrl);
                if t > cfg.burn_in {
                    h.record(&r);
                }
            }
            h
        })
        .collect();
    let mut out = DensityHistogram::new(n_theta, n_phi);
    for h in &parts {
        out.merge(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::OutsidePolicy;

    fn cfg(p: f64) -> StochasticRunConfig {
        StochasticRunConfig::new(6.0, 0.5, p, 5)
            .unwrap()
            .with_steps(2000, 1000)
            .with_trajectories(40)
    }

    #[test]
    fn full_control_concentrates_on_target_bin() {
        let c = cfg(1.0).with_outside(OutsidePolicy::Chaotic);
        let h = density_dump(&c, 50, 100).unwrap();
        assert_eq!(h.mass_at(&c.ctrl.target), 1.0);
    }

    #[test]
    fn chaos_spreads_over_the_sphere() {
        let h = density_dump(&cfg(0.0), 20, 40).unwrap();
        assert!(h.occupied_fraction() > 0.5, "{}", h.occupied_fraction());
        assert!((h.normalized().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_control_clusters_with_halo() {
        let c = cfg(0.3);
        let h = density_dump(&c, 20, 40).unwrap();
        let peak = h.mass_at(&c.ctrl.target);
        let uniform = 1.0 / (20.0 * 40.0);
        assert!(peak > 10.0 * uniform, "{peak}");
        assert!(peak < 1.0);
        assert!(h.occupied_fraction() > 0.1);
    }

    #[test]
    fn bins_cover_edges() {
        let h = DensityHistogram::new(4, 8);
        assert_eq!(h.bin_of(&PhasePoint::NORTH), (0, 4));
        assert_eq!(h.bin_of(&PhasePoint::new(0.0, 0.0, -1.0)).0, 3);
        assert_eq!(h.bin_of(&PhasePoint::new(-1.0, 0.0, 0.0)).1, 7);
    }
}
