use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{measure_trajectory, LyapunovConfig, StochasticRunConfig, O2_CONTROLLED};
use crate::error::{Error, Result};
use crate::stats::{first_crossing_below, first_sign_change, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub k: f64,
    pub a: f64,
    pub p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub point: GridPoint,
    pub o2: Summary,
    pub mu: Summary,
}

/// Controlled-phase boundary of one `(k, a)` column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Boundary {
    pub k: f64,
    pub a: f64,
    /// First `p` at which `O²` falls below the controlled threshold.
    pub pc_o2: Option<f64>,
    /// First sign change of `μ` from positive to negative.
    pub pc_mu: Option<f64>,
}

/// Measures `O²` and `μ` from the same realizations at every grid point.
/// `template` supplies everything except `(k, a, p)`.
pub fn phase_diagram_sweep(grid: &[GridPoint], template: &LyapunovConfig) -> Result<Vec<PhaseRow>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must contain at least one point"));
    }
    grid.iter().map(|&pt| sweep_point(pt, template)).collect()
}

pub(crate) fn sweep_point(pt: GridPoint, template: &LyapunovConfig) -> Result<PhaseRow> {
    let mut run = StochasticRunConfig::new(pt.k, pt.a, pt.p, template.run.seed)?;
    run.steps = template.run.steps;
    run.burn_in = template.run.burn_in;
    run.n_traj = template.run.n_traj;
    run.initial = template.run.initial;
    run.ctrl.kind = template.run.ctrl.kind;
    run.ctrl.outside = template.run.ctrl.outside;
    run.ctrl.region = template.run.ctrl.region;
    let cfg = LyapunovConfig { run, ..*template };
    cfg.validate()?;
    let measures: Vec<_> = (0..run.n_traj as u64)
        .into_par_iter()
        .map(|i| measure_trajectory(&cfg, i))
        .collect();
    let o2: Vec<f64> = measures.iter().map(|m| m.o2).collect();
    let mu: Vec<f64> = measures.iter().map(|m| m.mu).collect();
    Ok(PhaseRow {
        point: pt,
        o2: Summary::of(&o2),
        mu: Summary::of(&mu),
    })
}

/// Groups rows by `(k, a)` in first-seen order and locates both boundaries
/// along increasing `p`.
pub fn extract_boundaries(rows: &[PhaseRow]) -> Vec<Boundary> {
    let mut columns: Vec<((f64, f64), Vec<&PhaseRow>)> = Vec::new();
    for row in rows {
        let key = (row.point.k, row.point.a);
        match columns.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(row),
            None => columns.push((key, vec![row])),
        }
    }
    columns
        .into_iter()
        .map(|((k, a), mut col)| {
            col.sort_by(|x, y| x.point.p.total_cmp(&y.point.p));
            let ps: Vec<f64> = col.iter().map(|r| r.point.p).collect();
            let o2: Vec<f64> = col.iter().map(|r| r.o2.mean).collect();
            let mu: Vec<f64> = col.iter().map(|r| r.mu.mean).collect();
            Boundary {
                k,
                a,
                pc_o2: first_crossing_below(&ps, &o2, O2_CONTROLLED),
                pc_mu: first_sign_change(&ps, &mu),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(steps: usize, n_traj: usize) -> LyapunovConfig {
        let run = StochasticRunConfig::new(6.0, 0.5, 0.5, 21)
            .unwrap()
            .with_steps(steps, steps / 2)
            .with_trajectories(n_traj);
        LyapunovConfig::from_run(run)
    }

    #[test]
    fn stable_kick_is_controlled_at_smallest_rate() {
        let grid: Vec<GridPoint> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&p| GridPoint { k: 4.0, a: 0.5, p })
            .collect();
        let rows = phase_diagram_sweep(&grid, &template(6000, 40)).unwrap();
        let b = extract_boundaries(&rows);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].pc_mu, Some(0.05));
    }

    #[test]
    fn near_unit_contraction_stays_chaotic() {
        let grid: Vec<GridPoint> = [0.3, 0.6, 0.9]
            .iter()
            .map(|&p| GridPoint { k: 6.0, a: 0.99, p })
            .collect();
        let rows = phase_diagram_sweep(&grid, &template(1000, 20)).unwrap();
        let b = extract_boundaries(&rows)[0];
        assert_eq!(b.pc_o2, None);
        assert_eq!(b.pc_mu, None);
    }

    #[test]
    fn columns_are_grouped() {
        let grid = vec![
            GridPoint { k: 6.0, a: 0.5, p: 0.9 },
            GridPoint { k: 6.0, a: 0.3, p: 0.9 },
            GridPoint { k: 6.0, a: 0.5, p: 0.2 },
        ];
        let rows = phase_diagram_sweep(&grid, &template(400, 8)).unwrap();
        let b = extract_boundaries(&rows);
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].k, b[0].a), (6.0, 0.5));
        assert!(phase_diagram_sweep(&[], &template(400, 8)).is_err());
    }
}
