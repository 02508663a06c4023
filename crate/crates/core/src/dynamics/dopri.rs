//! Dormand–Prince 5(4) with FSAL, a PI step controller and steps clamped to
//! the requested output times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::C64;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const BETA: f64 = 0.04;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Absolute and relative tolerance.
    pub tol: f64,
    pub max_steps: usize,
    /// Disables error control and takes steps of at most this size.
    pub fixed_step: Option<f64>,
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorOptions { tol, ..Default::default() }
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { tol: 1e-9, max_steps: 5_000_000, fixed_step: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub tol: f64,
}

impl IntegratorStats {
    pub fn merge(&mut self, other: &IntegratorStats) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
        self.tol = self.tol.max(other.tol);
    }
}

fn err_norm(y: &[C64], y_new: &[C64], err: &[C64], tol: f64) -> f64 {
    let mut m = 0.0f64;
    for ((a, b), e) in y.iter().zip(y_new).zip(err) {
        let sc = tol + tol * a.norm().max(b.norm());
        m = m.max(e.norm() / sc);
    }
    m
}

/// Integrates `y' = f(t, y)` through the ascending `times`, calling
/// `observe(k, t_k, y)` at each one (including the start).
pub(crate) fn integrate<F, O>(
    mut f: F,
    y0: Vec<C64>,
    times: &[f64],
    opts: &IntegratorOptions,
    mut observe: O,
) -> Result<(Vec<C64>, IntegratorStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let mut stats = IntegratorStats { tol: opts.tol, ..Default::default() };
    let Some(&t0) = times.first() else {
        return Ok((y0, stats));
    };
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::param("times", "output times must be ascending"));
    }
    let n = y0.len();
    let tol = opts.tol;
    let mut y = y0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::default(); n]; 7];
    let mut tmp = vec![C64::default(); n];
    let mut y_new = vec![C64::default(); n];
    let mut err = vec![C64::default(); n];

    observe(0, t0, &y)?;
    let t_end = *times.last().unwrap();
    if t_end == t0 {
        for (i, &t) in times.iter().enumerate().skip(1) {
            observe(i, t, &y)?;
        }
        return Ok((y, stats));
    }

    f(t0, &y, &mut k[0]);
    stats.rhs_evals += 1;

    let mut h = match opts.fixed_step {
        Some(h) => h,
        None => initial_step(&mut f, t0, &y, &k[0], tol, &mut stats),
    };
    let mut err_old = 1e-4f64;
    let mut t = t0;
    let mut next = 1;
    while next < times.len() && times[next] <= t {
        observe(next, times[next], &y)?;
        next += 1;
    }

    while next < times.len() {
        let target = times[next];
        let mut h_step = h;
        let clamped = t + h_step >= target - 1e-14 * target.abs().max(1.0);
        if clamped {
            h_step = target - t;
        }
        if h_step <= 1e-15 * t.abs().max(1.0) && !clamped {
            return Err(Error::StepUnderflow { t, h: h_step });
        }
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps { t, max_steps: opts.max_steps });
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = C64::default();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * a;
                    }
                }
                tmp[i] = y[i] + acc * h_step;
            }
            if s == 6 {
                y_new.copy_from_slice(&tmp);
            }
            f(t + C[s] * h_step, &tmp, &mut k[s]);
            stats.rhs_evals += 1;
        }

        if opts.fixed_step.is_some() {
            accept(&mut k, &mut y, &y_new, &mut t, h_step, clamped, target, &mut stats)?;
        } else {
            for i in 0..n {
                let mut acc = C64::default();
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        acc += kj[i] * E[j];
                    }
                }
                err[i] = acc * h_step;
            }
            let e = err_norm(&y, &y_new, &err, tol);
            if !e.is_finite() {
                stats.rejected += 1;
                h = h_step * FAC_MIN;
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::Diverged { t });
                }
                continue;
            }
            let expo = 0.2 - 0.75 * BETA;
            if e <= 1.0 {
                let fac = SAFETY * e.max(1e-10).powf(-expo) * err_old.powf(BETA);
                let fac = fac.clamp(FAC_MIN, FAC_MAX);
                err_old = e.max(1e-4);
                accept(&mut k, &mut y, &y_new, &mut t, h_step, clamped, target, &mut stats)?;
                // a clamped step does not shrink the natural step size
                h = if clamped { h.max(h_step * fac) } else { h_step * fac };
            } else {
                stats.rejected += 1;
                let fac = (SAFETY * e.powf(-expo)).clamp(FAC_MIN, 1.0);
                h = h_step * fac;
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, h });
                }
            }
        }

        while next < times.len() && times[next] <= t {
            observe(next, times[next], &y)?;
            next += 1;
        }
    }
    Ok((y, stats))
}

#[allow(clippy::too_many_arguments)]
fn accept(
    k: &mut [Vec<C64>],
    y: &mut Vec<C64>,
    y_new: &[C64],
    t: &mut f64,
    h: f64,
    clamped: bool,
    target: f64,
    stats: &mut IntegratorStats,
) -> Result<()> {
    if y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Diverged { t: *t });
    }
    y.copy_from_slice(y_new);
    *t = if clamped { target } else { *t + h };
    // FSAL: the last stage is f(t + h, y_new)
    k.swap(0, 6);
    stats.steps += 1;
    Ok(())
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[C64], f0: &[C64], tol: f64, stats: &mut IntegratorStats) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let scale = |v: &[C64], y: &[C64]| {
        v.iter().zip(y).map(|(a, b)| a.norm() / (tol + tol * b.norm())).fold(0.0, f64::max)
    };
    let d0 = scale(y0, y0);
    let d1 = scale(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, d)| y + d * h0).collect();
    let mut f1 = vec![C64::default(); y0.len()];
    f(t0 + h0, &y1, &mut f1);
    stats.rhs_evals += 1;
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scale(&diff, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}
