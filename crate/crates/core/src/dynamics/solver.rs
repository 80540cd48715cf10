//! Classical RK4 and Dormand–Prince 4(5) with PI step control.

use super::{IntegratorConfig, Method, Sampling};
use crate::{Error, Result};

/// Raw output of an ODE integration.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Right-hand side at each sample.
    pub derivatives: Vec<Vec<f64>>,
    pub stats: StepStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(f64, &[f64]) -> Result<Vec<f64>>> Counted<F> {
    fn call(&mut self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        self.evaluations += 1;
        let d = (self.f)(t, y)?;
        if d.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                got: d.len(),
            });
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        Ok(d)
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for &(c, k) in terms {
        if c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k) {
                *o += h * c * ki;
            }
        }
    }
    out
}

/// Output times strictly inside `(t0, t1]` and whether to record every step.
struct Recorder {
    targets: Vec<f64>,
    next: usize,
    stride: Option<usize>,
    steps: usize,
}

impl Recorder {
    fn new(config: &IntegratorConfig) -> Self {
        let (t0, t1) = config.t_span;
        let (targets, stride) = match &config.sampling {
            Sampling::Stride(k) => (vec![t1], Some(*k)),
            Sampling::Interval(dt) => {
                let count = ((t1 - t0) / dt * (1.0 + 1e-12)).floor() as usize;
                let mut ts: Vec<f64> = (1..=count).map(|i| t0 + i as f64 * dt).collect();
                if ts.last().is_none_or(|&t| (t1 - t).abs() > 1e-9 * dt) {
                    ts.push(t1);
                } else if let Some(last) = ts.last_mut() {
                    *last = t1;
                }
                (ts, None)
            }
            Sampling::At(times) => {
                let mut ts: Vec<f64> = times.iter().copied().filter(|&t| t > t0).collect();
                if ts.last() != Some(&t1) {
                    ts.push(t1);
                }
                (ts, None)
            }
        };
        Recorder {
            targets,
            next: 0,
            stride,
            steps: 0,
        }
    }

    fn next_target(&self) -> f64 {
        self.targets[self.next]
    }

    /// Called after each accepted step ending at `t`; returns whether to
    /// record the state.
    fn after_step(&mut self, t: f64) -> bool {
        self.steps += 1;
        let hit = t == self.targets[self.next];
        if hit {
            self.next += 1;
        }
        match self.stride {
            Some(k) => hit || self.steps.is_multiple_of(k),
            None => hit,
        }
    }

    fn done(&self) -> bool {
        self.next >= self.targets.len()
    }
}

pub fn integrate_ode<F>(f: F, initial: &[f64], config: &IntegratorConfig) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    config.validate()?;
    if let Some(t) = initial.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinitePoint { index: t });
    }
    let mut f = Counted { f, evaluations: 0 };
    match config.method {
        Method::Rk4 { step } => rk4(&mut f, initial, config, step),
        Method::Rk45 {
            abs_tol,
            rel_tol,
            min_step,
            max_step,
        } => dopri5(&mut f, initial, config, abs_tol, rel_tol, min_step, max_step),
    }
}

/// Shortens `h` so the step lands exactly on `target` when it would
/// overshoot or leave a sliver.
fn clamp_to(t: f64, h: f64, target: f64) -> (f64, bool) {
    let remaining = target - t;
    if h >= remaining * (1.0 - 1e-12) {
        (remaining, true)
    } else {
        (h, false)
    }
}

fn finish(f: &Counted<impl FnMut(f64, &[f64]) -> Result<Vec<f64>>>, mut sol: OdeSolution) -> OdeSolution {
    sol.stats.evaluations = f.evaluations;
    sol
}

fn rk4<F>(f: &mut Counted<F>, y0: &[f64], config: &IntegratorConfig, step: f64) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let (t0, _) = config.t_span;
    let mut rec = Recorder::new(config);
    let mut t = t0;
    let mut y = y0.to_vec();
    let d0 = f.call(t, &y)?;
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y.clone()],
        derivatives: vec![d0.clone()],
        stats: StepStats::default(),
    };
    let mut k1 = d0;
    while !rec.done() {
        let target = rec.next_target();
        let (h, lands) = clamp_to(t, step, target);
        let k2 = f.call(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]))?;
        let k3 = f.call(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]))?;
        let k4 = f.call(t + h, &axpy(&y, h, &[(1.0, &k3)]))?;
        y = axpy(
            &y,
            h,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        );
        t = if lands { target } else { t + h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        sol.stats.accepted += 1;
        if sol.stats.accepted > config.max_steps {
            return Err(Error::StepLimit {
                t,
                steps: config.max_steps,
            });
        }
        k1 = f.call(t, &y)?;
        if rec.after_step(t) {
            sol.times.push(t);
            sol.states.push(y.clone());
            sol.derivatives.push(k1.clone());
        }
    }
    Ok(finish(f, sol))
}

// Dormand–Prince 5(4) tableau.
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
// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], atol: f64, rtol: f64) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / err.len().max(1) as f64).sqrt()
}

/// Starting step from the local scale of the solution and its derivative.
fn initial_step<F>(f: &mut Counted<F>, t: f64, y: &[f64], d: &[f64], atol: f64, rtol: f64, max_step: f64) -> Result<f64>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let scale: Vec<f64> = y.iter().map(|v| atol + rtol * v.abs()).collect();
    let rms =
        |v: &[f64]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt();
    let (d0, d1) = (rms(y), rms(d));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(max_step);
    let y1 = axpy(y, h0, &[(1.0, d)]);
    let d_1 = f.call(t + h0, &y1)?;
    let diff: Vec<f64> = d_1.iter().zip(d).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(max_step))
}

#[allow(clippy::too_many_arguments)]
fn dopri5<F>(
    f: &mut Counted<F>,
    y0: &[f64],
    config: &IntegratorConfig,
    atol: f64,
    rtol: f64,
    min_step: f64,
    max_step: f64,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let (t0, t1) = config.t_span;
    let max_step = if max_step > 0.0 { max_step } else { t1 - t0 };
    let mut rec = Recorder::new(config);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f.call(t, &y)?;
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y.clone()],
        derivatives: vec![k1.clone()],
        stats: StepStats::default(),
    };
    let mut h = initial_step(f, t, &y, &k1, atol, rtol, max_step)?;
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;

    while !rec.done() {
        if sol.stats.accepted + sol.stats.rejected > config.max_steps {
            return Err(Error::StepLimit {
                t,
                steps: config.max_steps,
            });
        }
        let target = rec.next_target();
        let (step, lands) = clamp_to(t, h.min(max_step), target);
        if step < min_step && !lands {
            return Err(Error::StepSizeUnderflow { t, step });
        }
        let k2 = f.call(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]))?;
        let k3 = f.call(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f.call(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f.call(
            t + C5 * step,
            &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f.call(
            t + step,
            &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(&y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if lands { target } else { t + step };
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t_new });
        }
        let k7 = f.call(t_new, &y_new)?;
        let err: Vec<f64> = (0..y.len())
            .map(|i| step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
            .collect();
        let en = error_norm(&err, &y, &y_new, atol, rtol);

        if en <= 1.0 {
            let en = en.max(1e-10);
            let mut fac = SAFETY * en.powf(-ALPHA) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_old = en;
            rejected_last = false;
            sol.stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            // a step shortened to hit an output time says nothing about the
            // next admissible step
            h = if lands { h.max(step * fac) } else { step * fac };
            if rec.after_step(t) {
                sol.times.push(t);
                sol.states.push(y.clone());
                sol.derivatives.push(k1.clone());
            }
        } else {
            let fac = (SAFETY * en.powf(-ALPHA)).max(FAC_MIN);
            h = step * fac;
            rejected_last = true;
            sol.stats.rejected += 1;
            if !h.is_finite() {
                return Err(Error::NonFiniteState { t });
            }
        }
    }
    Ok(finish(f, sol))
}
