//! Adaptive Dormand–Prince 5(4) integrator for fixed-size state vectors.

use core::ops::ControlFlow;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights equal row 7; these are b5 - b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side of y' = f(t, y).
pub trait System<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// Upper bound on the next step, for clamping near stiff events.
    fn max_step(&self, _t: f64, _y: &[f64; N]) -> f64 {
        f64::INFINITY
    }
}

impl<const N: usize, F> System<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; 0 lets the integrator pick one.
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 0.0,
            h_min: 0.0,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub rejected: usize,
    /// True if the observer stopped the run before `t_end`.
    pub stopped: bool,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates from `t0` to `t_end` (either direction). After each accepted
/// step `observe(t, y)` runs and may stop the integration.
pub fn integrate<const N: usize, S, O>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    mut observe: O,
) -> Result<Outcome<N>>
where
    S: System<N>,
    O: FnMut(f64, &[f64; N]) -> ControlFlow<()>,
{
    require(opts.rtol > 0.0, "rtol", "must be positive")?;
    require(opts.atol >= 0.0, "atol", "must be non-negative")?;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    let mut h = if opts.h_init > 0.0 {
        opts.h_init
    } else {
        initial_step(sys, t, &y, &k1, dir, opts)
    };
    h = h.min(opts.h_max).min(span.max(f64::MIN_POSITIVE));
    let mut steps = 0;
    let mut rejected = 0;
    if span == 0.0 {
        return Ok(Outcome {
            t,
            y,
            steps,
            rejected,
            stopped: false,
        });
    }
    loop {
        if steps + rejected >= opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        let remaining = (t_end - t) * dir;
        let mut hs = h.min(remaining).min(sys.max_step(t, &y)).min(opts.h_max);
        let last = hs >= remaining;
        if last {
            hs = remaining;
        }
        let hd = hs * dir;
        let k2 = sys.rhs(t + C2 * hd, &axpy(&y, hd, &[(A21, &k1)]));
        let k3 = sys.rhs(t + C3 * hd, &axpy(&y, hd, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(
            t + C4 * hd,
            &axpy(&y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = sys.rhs(
            t + C5 * hd,
            &axpy(&y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.rhs(
            t + hd,
            &axpy(
                &y,
                hd,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            hd,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let t_new = if last { t_end } else { t + hd };
        let k7 = sys.rhs(t_new, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = hd
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            err += r * r;
        }
        let err = (err / N as f64).sqrt();
        let err = if err.is_finite() { err } else { f64::INFINITY };

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            steps += 1;
            if observe(t, &y).is_break() {
                return Ok(Outcome {
                    t,
                    y,
                    steps,
                    rejected,
                    stopped: true,
                });
            }
            if last {
                return Ok(Outcome {
                    t,
                    y,
                    steps,
                    rejected,
                    stopped: false,
                });
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = hs * fac;
        } else {
            rejected += 1;
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h <= opts.h_min || h < 1e-14 * t.abs().max(span) {
            return Err(Error::StepUnderflow { t });
        }
    }
}

fn initial_step<const N: usize, S: System<N>>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    opts: &Options,
) -> f64 {
    // Hairer–Wanner starting-step heuristic
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let d0 = (d0 / N as f64).sqrt();
    let d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y, h0 * dir, &[(1.0, f0)]);
    let f1 = sys.rhs(t + h0 * dir, &y1);
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d2 += ((f1[i] - f0[i]) / sc).powi(2);
    }
    let d2 = (d2 / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
