//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use fbgvib::vib_model::TwoDofParams;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Direct `O(N^2)` transform.
pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| {
                    // reduce the phase index first to keep the angle small
                    let idx = ((k * i) % n) as f64;
                    v * Complex64::from_polar(1.0, -2.0 * PI * idx / n as f64)
                })
                .sum()
        })
        .collect()
}

/// `||a - b|| / ||b||`, or `||a - b||` when `b` is zero.
pub fn rel_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum();
    let den: f64 = b.iter().map(|q| q.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

type State = [f64; 4];

fn derivative(p: &TwoDofParams, w: f64, t: f64, y: &State) -> State {
    let [x1, x2, v1, v2] = *y;
    let force = p.unbalance_me * w * w * (w * t).sin();
    let a1 = (force - p.c1 * v1 - (p.k1 + p.k2) * x1 + p.k2 * x2) / p.m1;
    let a2 = (-p.c2 * v2 - p.k2 * (x2 - x1)) / p.m2;
    [v1, v2, a1, a2]
}

fn rk4_step(p: &TwoDofParams, w: f64, t: f64, h: f64, y: &State) -> State {
    let add = |a: &State, b: &State, s: f64| -> State {
        [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]]
    };
    let k1 = derivative(p, w, t, y);
    let k2 = derivative(p, w, t + h / 2.0, &add(y, &k1, h / 2.0));
    let k3 = derivative(p, w, t + h / 2.0, &add(y, &k2, h / 2.0));
    let k4 = derivative(p, w, t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Steady-state `(|x1|, |x2|)` from RK4 time stepping of the two-mass
/// equations of motion: half peak-to-peak over four periods after 150 s of
/// settling, which outlasts the slowest mode's decay many times over.
pub fn time_stepped_amplitudes(p: &TwoDofParams, forcing_hz: f64) -> (f64, f64) {
    let w = 2.0 * PI * forcing_hz;
    let period = 1.0 / forcing_hz;
    // well below both the drive period and the stiff mode period
    let h = (period / 400.0).min(1.0 / 16.0 / 400.0);
    let n_settle = (150.0 / h).ceil() as usize;
    let n_measure = (4.0 * period / h).ceil() as usize;

    let mut y = [0.0; 4];
    let mut t = 0.0;
    for _ in 0..n_settle {
        y = rk4_step(p, w, t, h, &y);
        t += h;
    }
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for _ in 0..n_measure {
        y = rk4_step(p, w, t, h, &y);
        t += h;
        lo1 = lo1.min(y[0]);
        hi1 = hi1.max(y[0]);
        lo2 = lo2.min(y[1]);
        hi2 = hi2.max(y[1]);
    }
    (0.5 * (hi1 - lo1), 0.5 * (hi2 - lo2))
}

pub const LENGTH_MM: f64 = 35.0;
/// Segment boundaries for areas at 8.75, 17.5 and 26.25 mm.
pub const BOUNDS_MM: [f64; 4] = [0.0, 13.125, 21.875, 35.0];

/// RK4 on `theta' = kappa(s)`, `x' = sin theta`, `z' = cos theta` from the
/// base to arc length `s_end`, with steps that land on segment boundaries.
pub fn frenet_point(curv_per_m: &[f64; 3], s_end: f64, steps_per_segment: usize) -> (f64, f64) {
    let (mut x, mut z, mut th) = (0.0f64, 0.0f64, 0.0f64);
    for seg in 0..3 {
        let k = curv_per_m[seg] * 1e-3;
        let len = (BOUNDS_MM[seg + 1].min(s_end) - BOUNDS_MM[seg]).max(0.0);
        let h = len / steps_per_segment as f64;
        for _ in 0..steps_per_segment {
            // theta is linear within a segment, so only x and z need stages
            let t2 = th + 0.5 * h * k;
            let t4 = th + h * k;
            x += h / 6.0 * (th.sin() + 4.0 * t2.sin() + t4.sin());
            z += h / 6.0 * (th.cos() + 4.0 * t2.cos() + t4.cos());
            th = t4;
        }
    }
    (x, z)
}
