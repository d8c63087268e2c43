//! Dormand–Prince 5(4) integrator with dense output and event location.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size, in the time unit of the system.
    pub max_step: f64,
    /// Events are localised until the event function is within this of zero.
    pub event_tolerance: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            event_tolerance: 1e-10,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// A scalar crossing function `g(t, y)`; the solver stops at its first zero
/// when `terminal` is set.
pub struct Event<'a, const N: usize> {
    pub function: Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn terminal(f: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Self {
            function: Box::new(f),
            terminal: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub t: f64,
    pub y: [f64; N],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    /// `(t, y)` at every accepted step, including the initial and final
    /// (or event) state.
    pub samples: Vec<(f64, [f64; N])>,
    pub event: Option<EventHit<N>>,
    pub stats: OdeStats,
}

impl<const N: usize> OdeSolution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        *self.samples.last().expect("solution holds the initial state")
    }
}

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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dense-output polynomial for one accepted step.
struct Dense<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.r[0][i]
                + th * (self.r[1][i]
                    + th1 * (self.r[2][i] + th * (self.r[3][i] + th1 * self.r[4][i])));
        }
        y
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrate `y' = rhs(t, y)` from `t_span.0` to `t_span.1`.
///
/// A failing right-hand side (for instance a trial stage that lands inside a
/// wall) rejects the step and shrinks it; the error surfaces only if the step
/// size underflows.
pub fn solve_ode<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t_span: (f64, f64),
    events: &[Event<'_, N>],
    cfg: &OdeConfig,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let (t0, t_end) = t_span;
    let span = t_end - t0;
    if !(span > 0.0) {
        return Err(Error::Domain(format!("empty time span [{t0}, {t_end}]")));
    }
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    stats.evaluations += 1;
    let mut samples = vec![(t, y)];
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.function)(t, &y)).collect();

    let mut h = match cfg.initial_step {
        Some(h) => h,
        None => initial_step(&y, &k1, cfg, span),
    }
    .min(cfg.max_step)
    .min(span);
    let h_min = 1e-14 * span.abs().max(t0.abs());
    let mut last_error: Option<Error> = None;

    while t < t_end {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::TooManySteps(cfg.max_steps));
        }
        if h < h_min {
            return Err(last_error.unwrap_or(Error::StepSizeUnderflow {
                t,
                state: y.to_vec(),
            }));
        }
        let last_step = t + h >= t_end;
        let h_try = if last_step { t_end - t } else { h };
        let attempt = step(&mut rhs, t, &y, &k1, h_try);
        stats.evaluations += 6;
        let (y_new, k7, err_vec, k) = match attempt {
            Ok(v) => v,
            Err(e) => {
                last_error = Some(e);
                stats.rejected += 1;
                h = 0.25 * h_try;
                continue;
            }
        };
        let mut err = 0.0;
        for i in 0..N {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (err_vec[i] / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() || err > 1.0 {
            stats.rejected += 1;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h = h_try * fac;
            continue;
        }
        last_error = None;
        stats.accepted += 1;
        let t_new = if last_step { t_end } else { t + h_try };

        if !events.is_empty() {
            let dense = Dense {
                t0: t,
                h: h_try,
                r: dense_coeffs(&y, &y_new, &k1, &k7, &k, h_try),
            };
            let mut first: Option<EventHit<N>> = None;
            for (i, ev) in events.iter().enumerate() {
                let g_new = (ev.function)(t_new, &y_new);
                if crossed(g_prev[i], g_new) {
                    let hit = locate(ev, &dense, t, t_new, g_prev[i], cfg.event_tolerance, i);
                    if ev.terminal && first.is_none_or(|f| hit.t < f.t) {
                        first = Some(hit);
                    }
                }
                g_prev[i] = g_new;
            }
            if let Some(hit) = first {
                samples.push((hit.t, hit.y));
                return Ok(OdeSolution {
                    samples,
                    event: Some(hit),
                    stats,
                });
            }
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        samples.push((t, y));
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h_try * fac).min(cfg.max_step);
    }
    Ok(OdeSolution {
        samples,
        event: None,
        stats,
    })
}

fn crossed(a: f64, b: f64) -> bool {
    (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)
}

type StepOutput<const N: usize> = ([f64; N], [f64; N], [f64; N], [[f64; N]; 7]);

fn step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<StepOutput<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = rhs(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y_new, k7, err, [*k1, k2, k3, k4, k5, k6, k7]))
}

fn dense_coeffs<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    k1: &[f64; N],
    k7: &[f64; N],
    k: &[[f64; N]; 7],
    h: f64,
) -> [[f64; N]; 5] {
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y1[i] - y0[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y0[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h
            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                + D7 * k[6][i]);
    }
    r
}

fn locate<const N: usize>(
    ev: &Event<'_, N>,
    dense: &Dense<N>,
    mut lo: f64,
    mut hi: f64,
    g_lo: f64,
    tol: f64,
    index: usize,
) -> EventHit<N> {
    // Bisection on the dense output; g keeps its sign at `lo`.
    let sign_lo = g_lo > 0.0;
    let mut y_hi = dense.eval(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = dense.eval(mid);
        let g = (ev.function)(mid, &y_mid);
        if (g > 0.0) == sign_lo && g != 0.0 {
            lo = mid;
        } else {
            hi = mid;
            y_hi = y_mid;
            if g.abs() <= tol {
                break;
            }
        }
    }
    EventHit {
        index,
        t: hi,
        y: y_hi,
    }
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], cfg: &OdeConfig, span: f64) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h.min(span)
}
