//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

pub type State = [f64; 4];

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h0: 0.05,
            h_min: 1e-12,
            h_max: 0.5,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 5] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0];
const A: [[f64; 5]; 5] = [
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy(y: &State, h: f64, coeffs: &[f64], ks: &[State]) -> State {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks) {
        if *c != 0.0 {
            for i in 0..4 {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end` (either direction).
/// `observe` runs after every accepted step and may stop the integration.
/// Returns the final time and state.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<(f64, State)>
where
    F: FnMut(f64, &State) -> State,
    O: FnMut(f64, &State) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    if t == t_end {
        return Ok((t, y));
    }
    let mut h = opts.h0.min((t_end - t0).abs());
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    while (t_end - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::IntegrationFailure(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        let mut ks: [State; 7] = [k1, [0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]];
        for s in 0..5 {
            let ys = axpy(&y, hs, &A[s][..=s], &ks[..=s]);
            ks[s + 1] = f(t + C[s] * hs, &ys);
        }
        let y_new = axpy(&y, hs, &B, &ks[..6]);
        ks[6] = f(t + hs, &y_new);
        let err_vec = axpy(&[0.0; 4], hs, &E, &ks);
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (err_vec[i] / sc).powi(2);
        }
        let err = (err / 4.0).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            if h < opts.h_min {
                return Err(Error::IntegrationFailure(format!("non-finite state at t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + hs };
            y = y_new;
            k1 = ks[6];
            if observe(t, &y) == Control::Stop {
                return Ok((t, y));
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        let fac = if err > 1.0 { fac.min(1.0) } else { fac };
        h = (h * fac).min(opts.h_max);
        let remaining = (t_end - t) * dir;
        if remaining > 0.0 && h < opts.h_min && h < remaining {
            return Err(Error::IntegrationFailure(format!("step size underflow at t = {t}")));
        }
    }
    Ok((t, y))
}
