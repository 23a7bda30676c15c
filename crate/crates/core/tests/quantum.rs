//! Quantum operators against direct matrix constructions.

use kicktop::quantum::kicked_top_unitary;
use kicktop::{find_fixed_point, kicked_top_step, KickParams, PhasePoint, RotatedFrame, SpinState};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

type M = Vec<Vec<f64>>;

fn matmul(a: &M, b: &M) -> M {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

/// `exp(-iβJy)` is real; sum its Taylor series after scaling by 2⁻¹⁰ and
/// square back.
fn rotation_y(two_s: usize, beta: f64) -> M {
    let n = two_s + 1;
    let s = two_s as f64 / 2.0;
    // -iJy = (J- - J+)/2 with J+|m⟩ = √(s(s+1) - m(m+1)) |m+1⟩, index i = s + m.
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        let m = i as f64 - s;
        let up = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
        g[i + 1][i] = -0.5 * up * beta / 1024.0;
        g[i][i + 1] = 0.5 * up * beta / 1024.0;
    }
    let mut out: M = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let mut term = out.clone();
    for order in 1..30 {
        term = matmul(&term, &g);
        for (o, t) in out.iter_mut().zip(&term) {
            for (x, y) in o.iter_mut().zip(t) {
                *x += y / (1..=order).map(|v| v as f64).product::<f64>();
            }
        }
    }
    for _ in 0..10 {
        out = matmul(&out, &out);
    }
    out
}

#[test]
fn floquet_matches_series_exponential() {
    for (two_s, k) in [(1usize, 3.0), (6, 6.0), (13, 4.5), (20, 8.0)] {
        let u = kicked_top_unitary(two_s, k).unwrap();
        let d = rotation_y(two_s, FRAC_PI_2);
        let s = two_s as f64 / 2.0;
        let mut worst = 0.0f64;
        for (i, row) in d.iter().enumerate() {
            let m = i as f64 - s;
            let phase = Complex64::from_polar(1.0, -k * m * m / two_s as f64);
            for (j, x) in row.iter().enumerate() {
                worst = worst.max((u.get(i, j) - phase * x).norm());
            }
        }
        assert!(worst < 1e-11, "2S = {two_s}: {worst}");
    }
}

fn unit_spin(psi: &SpinState) -> PhasePoint {
    let [x, y, z] = psi.expect_j();
    PhasePoint::new(x, y, z) * (1.0 / psi.spin())
}

#[test]
fn coherent_states_follow_the_classical_map() {
    let two_s = 600;
    let kp = KickParams::new(6.0).unwrap();
    let u = kicked_top_unitary(two_s, 6.0).unwrap();
    for (theta, phi) in [(0.4, 0.3), (1.2, -2.0), (2.5, 1.0)] {
        let mut psi = SpinState::coherent(two_s, theta, phi).unwrap();
        u.apply(&mut psi);
        let quantum = unit_spin(&psi);
        let classical = kicked_top_step(PhasePoint::from_angles(theta, phi), kp);
        assert!(
            quantum.distance(&classical) < 0.05,
            "({theta}, {phi}): {quantum:?} vs {classical:?}"
        );
    }
}

#[test]
fn rotated_frame_keeps_the_target_on_the_pole() {
    let two_s = 600;
    let frame = RotatedFrame::new(two_s, 6.0).unwrap();
    let mut psi = SpinState::top(two_s).unwrap();
    frame.step(&mut psi);
    let r = unit_spin(&psi);
    assert!(r.distance(&PhasePoint::NORTH) < 0.02, "{r:?}");
    // The frame rotation carries |S⟩ to the coherent state at the fixed point.
    let rot = frame.rotation().unwrap();
    let mut top = SpinState::top(two_s).unwrap();
    rot.apply(&mut top);
    let r0 = find_fixed_point(6.0).unwrap().r0;
    assert!(unit_spin(&top).distance(&r0) < 1e-10);
}
