use rand::Rng;

use super::channel::{ControlChannel, KrausOutcome};
use super::frame::RotatedFrame;
use super::spin::SpinState;
use crate::error::{Error, Result};

/// What happened at one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantumStep {
    Unitary,
    Control(KrausOutcome),
}

/// Measurement record of one realization plus the observables taken at the
/// scheduled times.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub steps: Vec<QuantumStep>,
    /// `(t, value)` in schedule order; `t = 0` is the initial state.
    pub samples: Vec<(usize, T)>,
}

/// Evolves `psi` for `steps` periods. Each period draws one uniform number:
/// below `p` the control channel is applied (with its Born draws from the
/// same stream), otherwise one unitary period in the rotated frame.
///
/// `schedule` lists the times at which `observe` is called; it must be
/// sorted and not exceed `steps`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_quantum_trajectory<T, R: Rng + ?Sized>(
    frame: &RotatedFrame,
    channel: &ControlChannel,
    psi: &mut SpinState,
    p: f64,
    steps: usize,
    rng: &mut R,
    schedule: &[usize],
    mut observe: impl FnMut(usize, &SpinState) -> T,
) -> Result<TrajectoryRecord<T>> {
    if frame.two_s() != psi.two_s() || channel.two_s() != psi.two_s() {
        return Err(Error::invalid("S", "frame, channel and state disagree on the spin"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if schedule.windows(2).any(|w| w[0] > w[1]) || schedule.last().is_some_and(|&t| t > steps) {
        return Err(Error::invalid("schedule", "must be sorted and within the run"));
    }
    let mut record = TrajectoryRecord {
        steps: Vec::with_capacity(steps),
        samples: Vec::with_capacity(schedule.len()),
    };
    let mut next = 0;
    let mut take = |t: usize, psi: &SpinState, rec: &mut TrajectoryRecord<T>| {
        while next < schedule.len() && schedule[next] == t {
            rec.samples.push((t, observe(t, psi)));
            next += 1;
        }
    };
    take(0, psi, &mut record);
    for t in 1..=steps {
        let u: f64 = rng.random();
        let step = if u < p {
            QuantumStep::Control(channel.sample_and_update(psi, rng)?)
        } else {
            frame.step(psi);
            QuantumStep::Unitary
        };
        record.steps.push(step);
        take(t, psi, &mut record);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use std::f64::consts::PI;

    #[test]
    fn unitary_only_conserves_norm_and_casimir() {
        let frame = RotatedFrame::new(40, 6.0).unwrap();
        let ch = ControlChannel::new(40, PI / 2.0).unwrap();
        let mut psi = SpinState::coherent(40, 0.3, 0.2).unwrap();
        let mut rng = stream(0, Purpose::Dynamics, 0, 0);
        let sched: Vec<usize> = (0..=100).step_by(10).collect();
        let rec = evolve_quantum_trajectory(&frame, &ch, &mut psi, 0.0, 100, &mut rng, &sched, |_, s| {
            (s.norm_sqr(), s.expect_j_squared())
        })
        .unwrap();
        assert!(rec.steps.iter().all(|s| *s == QuantumStep::Unitary));
        for (_, (n, j2)) in rec.samples {
            assert!((n - 1.0).abs() < 1e-10);
            assert!((j2 - 20.0 * 21.0).abs() < 1e-8);
        }
    }

    #[test]
    fn full_reset_every_step_pins_target() {
        let frame = RotatedFrame::new(16, 6.0).unwrap();
        let ch = ControlChannel::new(16, PI).unwrap();
        let mut psi = SpinState::coherent(16, 2.0, 1.0).unwrap();
        let mut rng = stream(0, Purpose::Dynamics, 0, 0);
        let sched: Vec<usize> = (1..=20).collect();
        let rec = evolve_quantum_trajectory(&frame, &ch, &mut psi, 1.0, 20, &mut rng, &sched, |_, s| {
            s.amplitudes()[16].norm_sqr()
        })
        .unwrap();
        assert!(rec.samples.iter().all(|(_, f)| (*f - 1.0).abs() < 1e-14));
    }

    #[test]
    fn same_stream_same_record() {
        let frame = RotatedFrame::new(12, 6.0).unwrap();
        let ch = ControlChannel::new(12, PI / 2.0).unwrap();
        let run = |traj| {
            let mut psi = SpinState::top(12).unwrap();
            let mut rng = stream(5, Purpose::Dynamics, 1, traj);
            evolve_quantum_trajectory(&frame, &ch, &mut psi, 0.5, 50, &mut rng, &[50], |_, s| s.clone()).unwrap()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3).steps, run(4).steps);
    }

    #[test]
    fn bad_schedule_rejected() {
        let frame = RotatedFrame::new(4, 6.0).unwrap();
        let ch = ControlChannel::new(4, 1.0).unwrap();
        let mut psi = SpinState::top(4).unwrap();
        let mut rng = stream(0, Purpose::Dynamics, 0, 0);
        assert!(evolve_quantum_trajectory(&frame, &ch, &mut psi, 0.5, 5, &mut rng, &[6], |_, _| ()).is_err());
        assert!(evolve_quantum_trajectory(&frame, &ch, &mut psi, 0.5, 5, &mut rng, &[3, 2], |_, _| ()).is_err());
    }
}
