//! Truncated Wigner semiclassics for the controlled top.
//!
//! An ensemble of unit vectors samples the Wigner function. Chaotic steps use
//! the classical map unchanged. Control steps pull each point toward the
//! target, `C(r) ∝ a r + (1-a) r0`, then add a Gaussian kick in the tangent
//! plane at `r0` with per-component variance `(1-a²)/(2S)` and renormalize.
//!
//! The spin `S` enters only through that variance and the estimators, so it
//! is an `f64` and runs to `S = 2⁶⁴`. Transverse displacements are read as
//! dot products with a fixed tangent basis at `r0`, never as `1 - r·r0`,
//! which keeps about six significant digits at `|r⊥| ~ 1e-10`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{find_fixed_point, kicked_top_step, tangent_basis, KickParams, PhasePoint};
use crate::error::{Error, Result};
use crate::rng::{point_key, stream, Purpose};
use crate::stats::Summary;

/// Tangent-plane coordinates about a fixed target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub r0: PhasePoint,
    pub e1: PhasePoint,
    pub e2: PhasePoint,
}

impl TangentFrame {
    pub fn new(r0: PhasePoint) -> Result<Self> {
        let r0 = r0.try_normalized()?;
        let (e1, e2) = tangent_basis(&r0);
        Ok(TangentFrame { r0, e1, e2 })
    }

    pub fn components(&self, r: &PhasePoint) -> [f64; 2] {
        [r.dot(&self.e1), r.dot(&self.e2)]
    }

    /// `r0 + u1 e1 + u2 e2`, unnormalized.
    pub fn displaced(&self, u: [f64; 2]) -> PhasePoint {
        self.r0 + self.e1 * u[0] + self.e2 * u[1]
    }

    /// Squared transverse component `|r - (r·r0) r0|²`.
    pub fn r_perp2(&self, r: &PhasePoint) -> f64 {
        let [u1, u2] = self.components(r);
        u1 * u1 + u2 * u2
    }

    /// Squared distance entering the overlap with `|r0⟩`: the transverse part
    /// on the near hemisphere, the chord `|r - r0|²` on the far one, so that
    /// points near `-r0` do not count as overlapping.
    pub fn overlap_distance2(&self, r: &PhasePoint) -> f64 {
        let par = r.dot(&self.r0);
        if par >= 0.0 {
            self.r_perp2(r)
        } else {
            2.0 * (1.0 - par)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwaEnsemble {
    pub points: Vec<PhasePoint>,
    pub spin: f64,
    pub frame: TangentFrame,
}

fn check_spin(spin: f64) -> Result<()> {
    if !(spin.is_finite() && spin > 0.0) {
        return Err(Error::invalid("S", format!("must be positive and finite, got {spin}")));
    }
    Ok(())
}

fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> [f64; 2] {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    [sigma * g1, sigma * g2]
}

/// One point of the coherent-state Wigner function `(S/π) e^{-S r⊥²}`.
pub fn sample_wigner_point<R: Rng + ?Sized>(frame: &TangentFrame, spin: f64, rng: &mut R) -> PhasePoint {
    let u = gaussian_pair(rng, (0.5 / spin).sqrt());
    frame.displaced(u).normalized()
}

pub fn sample_initial_wigner<R: Rng + ?Sized>(spin: f64, r0: PhasePoint, n: usize, rng: &mut R) -> Result<TwaEnsemble> {
    check_spin(spin)?;
    if n == 0 {
        return Err(Error::invalid("N", "ensemble needs at least one point"));
    }
    let frame = TangentFrame::new(r0)?;
    let points = (0..n).map(|_| sample_wigner_point(&frame, spin, rng)).collect();
    Ok(TwaEnsemble { points, spin, frame })
}

/// Noisy control step for a fixed rate `a = cos(θ/2)` and spin `S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwaControl {
    pub a: f64,
    pub sigma: f64,
    pub frame: TangentFrame,
}

impl TwaControl {
    pub fn new(theta: f64, spin: f64, frame: TangentFrame) -> Result<Self> {
        check_spin(spin)?;
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::invalid("theta", format!("must lie in [0, π], got {theta}")));
        }
        let a = (theta / 2.0).cos().max(0.0);
        let sigma = ((1.0 - a * a) / (2.0 * spin)).sqrt();
        Ok(TwaControl { a, sigma, frame })
    }
}

pub fn twa_control_step<R: Rng + ?Sized>(point: PhasePoint, ctrl: &TwaControl, rng: &mut R) -> PhasePoint {
    if ctrl.a == 1.0 {
        return point;
    }
    let pulled = (point * ctrl.a + ctrl.frame.r0 * (1.0 - ctrl.a))
        .try_normalized()
        .unwrap_or(point);
    let y = gaussian_pair(rng, ctrl.sigma);
    let kicked = pulled + ctrl.frame.e1 * y[0] + ctrl.frame.e2 * y[1];
    kicked.try_normalized().unwrap_or(pulled)
}

#[inline]
fn twa_step<R: Rng + ?Sized>(r: PhasePoint, p: f64, kick: KickParams, ctrl: &TwaControl, rng: &mut R) -> PhasePoint {
    let u: f64 = rng.random();
    if u < p {
        twa_control_step(r, ctrl, rng)
    } else {
        kicked_top_step(r, kick)
    }
}

/// Advances every point `steps` times with independent control coins.
pub fn twa_evolve<R: Rng + ?Sized>(
    ensemble: &mut TwaEnsemble,
    p: f64,
    k: f64,
    theta: f64,
    steps: usize,
    rng: &mut R,
) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    let kick = KickParams::new(k)?;
    let ctrl = TwaControl::new(theta, ensemble.spin, ensemble.frame)?;
    for r in ensemble.points.iter_mut() {
        for _ in 0..steps {
            *r = twa_step(*r, p, kick, &ctrl, rng);
        }
    }
    Ok(())
}

/// Overlap estimator `2 e^{-S r⊥²}` for one point.
pub fn fidelity_weight(frame: &TangentFrame, spin: f64, r: &PhasePoint) -> f64 {
    2.0 * (-spin * frame.overlap_distance2(r)).exp()
}

/// Mean of `2 e^{-S r⊥²}`, clipped to `[0, 1 + standard error]`.
pub fn twa_fidelity(ensemble: &TwaEnsemble) -> f64 {
    let w: Vec<f64> = ensemble
        .points
        .iter()
        .map(|r| fidelity_weight(&ensemble.frame, ensemble.spin, r))
        .collect();
    let s = Summary::of(&w);
    let err = if w.len() > 1 { s.stderr() } else { 0.0 };
    s.mean.min(1.0 + err)
}

pub fn twa_s_perp2(ensemble: &TwaEnsemble) -> f64 {
    let n = ensemble.points.len() as f64;
    ensemble.points.iter().map(|r| ensemble.frame.r_perp2(r)).sum::<f64>() / n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwaConfig {
    pub spin: f64,
    pub k: f64,
    pub theta: f64,
    pub p: f64,
    pub n_samples: usize,
    pub steps: usize,
    /// Estimators are averaged over the last `window` steps.
    pub window: usize,
    pub seed: u64,
}

impl TwaConfig {
    pub fn new(spin: f64, k: f64, theta: f64, p: f64, seed: u64) -> Self {
        TwaConfig {
            spin,
            k,
            theta,
            p,
            n_samples: 100,
            steps: 20_000,
            window: 10_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_spin(self.spin)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be at least 1"));
        }
        if self.window == 0 || self.window > self.steps {
            return Err(Error::invalid("window", "must lie in 1..=steps"));
        }
        Ok(())
    }

    pub fn point_key(&self) -> u64 {
        point_key(&[self.spin, self.k, self.theta, self.p])
    }
}

/// Per-sample time averages over the final window.
#[derive(Clone, Debug, PartialEq)]
pub struct TwaPointResult {
    pub fidelity: Vec<f64>,
    pub s_perp2: Vec<f64>,
}

impl TwaPointResult {
    /// Ensemble fidelity with the same clipping as [`twa_fidelity`].
    pub fn fidelity_mean(&self) -> f64 {
        let s = Summary::of(&self.fidelity);
        let err = if self.fidelity.len() > 1 { s.stderr() } else { 0.0 };
        s.mean.min(1.0 + err)
    }

    pub fn s_perp2_mean(&self) -> f64 {
        Summary::of(&self.s_perp2).mean
    }
}

/// Runs the ensemble at one parameter point, one stream pair per sample.
pub fn twa_point(cfg: &TwaConfig) -> Result<TwaPointResult> {
    cfg.validate()?;
    let fp = find_fixed_point(cfg.k)?;
    let frame = TangentFrame::new(fp.r0)?;
    let kick = KickParams::new(cfg.k)?;
    let ctrl = TwaControl::new(cfg.theta, cfg.spin, frame)?;
    let key = cfg.point_key();
    let first = cfg.steps - cfg.window + 1;
    let per: Vec<(f64, f64)> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut init = stream(cfg.seed, Purpose::Initial, key, i);
            let mut rng = stream(cfg.seed, Purpose::Dynamics, key, i);
            let mut r = sample_wigner_point(&frame, cfg.spin, &mut init);
            let (mut f, mut s2) = (0.0, 0.0);
            for t in 1..=cfg.steps {
                r = twa_step(r, cfg.p, kick, &ctrl, &mut rng);
                if t >= first {
                    f += fidelity_weight(&frame, cfg.spin, &r);
                    s2 += frame.r_perp2(&r);
                }
            }
            let w = cfg.window as f64;
            (f / w, s2 / w)
        })
        .collect();
    Ok(TwaPointResult {
        fidelity: per.iter().map(|x| x.0).collect(),
        s_perp2: per.iter().map(|x| x.1).collect(),
    })
}
