//! Integration of flows on the extended phase space, trajectory records,
//! and the forward–backward Pontryagin co-integration.

mod metrics;
mod pontryagin;
mod samples;
mod solver;

use std::fmt::Write as _;

use serde::Serialize;

pub use metrics::{decay_metrics, herglotz_along, DecayMetrics, HerglotzSeries};
pub use pontryagin::{
    integrate_adjoints, integrate_pontryagin, verify_stationarity, PontryaginRun, StationarityReport,
    EXTREMAL_TOLERANCE,
};
pub use samples::{derivative_weights, hermite, sample_derivative};
pub use solver::{integrate_ode, OdeSolution, StepStats};

use crate::geometry::VectorField;
use crate::point::{Dims, ExtendedPoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { step: f64 },
    /// Dormand–Prince 4(5). `max_step <= 0` means the whole span.
    Rk45 {
        abs_tol: f64,
        rel_tol: f64,
        min_step: f64,
        max_step: f64,
    },
}

impl Method {
    pub fn rk45(abs_tol: f64, rel_tol: f64) -> Self {
        Method::Rk45 {
            abs_tol,
            rel_tol,
            min_step: 1e-14,
            max_step: 0.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Rk4 { step } => format!("rk4-fixed(h={step})"),
            Method::Rk45 { abs_tol, rel_tol, .. } => {
                format!("rk45-adaptive(atol={abs_tol},rtol={rel_tol})")
            }
        }
    }
}

/// Which states end up in the trajectory. The initial and final states are
/// always recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Every `k`-th accepted step.
    Stride(usize),
    /// Uniform grid `t0 + i dt`; steps are shortened to land on it.
    Interval(f64),
    /// Explicit increasing output times.
    At(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_span: (f64, f64),
    pub sampling: Sampling,
    pub max_steps: usize,
}

/// Default adaptive tolerances.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-9;

impl IntegratorConfig {
    pub fn new(method: Method, t0: f64, t1: f64) -> Self {
        IntegratorConfig {
            method,
            t_span: (t0, t1),
            sampling: Sampling::Stride(1),
            max_steps: 10_000_000,
        }
    }

    pub fn rk4(t0: f64, t1: f64, step: f64) -> Self {
        Self::new(Method::Rk4 { step }, t0, t1)
    }

    pub fn rk45(t0: f64, t1: f64, abs_tol: f64, rel_tol: f64) -> Self {
        Self::new(Method::rk45(abs_tol, rel_tol), t0, t1)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let (t0, t1) = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return bad(format!("need finite t1 > t0, got [{t0}, {t1}]"));
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0 && step.is_finite()) => {
                return bad(format!("rk4 step must be positive, got {step}"));
            }
            Method::Rk45 {
                abs_tol,
                rel_tol,
                min_step,
                max_step,
            } => {
                if !(abs_tol > 0.0 && rel_tol > 0.0) {
                    return bad(format!("tolerances must be positive, got {abs_tol}, {rel_tol}"));
                }
                if !(min_step >= 0.0) || max_step.is_nan() {
                    return bad("step bounds must be non-negative".into());
                }
                if max_step > 0.0 && max_step < min_step {
                    return bad("max_step is below min_step".into());
                }
            }
            _ => {}
        }
        match &self.sampling {
            Sampling::Stride(0) => return bad("sample stride must be at least 1".into()),
            Sampling::Interval(dt) if !(*dt > 0.0) => {
                return bad(format!("sample interval must be positive, got {dt}"));
            }
            Sampling::At(times) => {
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("output times must be strictly increasing".into());
                }
                if times.iter().any(|&t| !(t >= t0 && t <= t1)) {
                    return bad("output times must lie in the time span".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub model: String,
    pub method: String,
    pub stats: StepStats,
}

/// Time-sampled states of a flow on the extended phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dims: Dims,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Field values at the samples, when the integrator recorded them.
    pub derivatives: Option<Vec<Vec<f64>>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(
        dims: Dims,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        derivatives: Option<Vec<Vec<f64>>>,
        meta: TrajectoryMeta,
    ) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::Model(format!(
                "trajectory needs matching non-empty times and states ({} vs {})",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Model("trajectory times must be strictly increasing".into()));
        }
        for s in &states {
            dims.check_len(s.len())?;
        }
        if let Some(d) = &derivatives {
            if d.len() != states.len() {
                return Err(Error::Model("derivative count differs from state count".into()));
            }
        }
        Ok(Trajectory {
            dims,
            times,
            states,
            derivatives,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is non-empty")
    }

    pub fn point(&self, i: usize) -> Result<ExtendedPoint> {
        ExtendedPoint::new(self.dims, self.states[i].clone())
    }

    /// The time series of one coordinate slot.
    pub fn component(&self, slot: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[slot]).collect()
    }

    /// Time derivatives at the samples: recorded field values when present,
    /// otherwise five-point differences of the samples.
    pub fn state_derivatives(&self) -> Result<Vec<Vec<f64>>> {
        if let Some(d) = &self.derivatives {
            return Ok(d.clone());
        }
        let dim = self.dims.dim();
        let mut out = vec![vec![0.0; dim]; self.len()];
        for slot in 0..dim {
            let d = sample_derivative(&self.times, &self.component(slot))?;
            for (row, v) in out.iter_mut().zip(d) {
                row[slot] = v;
            }
        }
        Ok(out)
    }

    /// Cubic Hermite interpolation of the state at `t`.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        let derivs = self.state_derivatives()?;
        self.interpolate_with(t, &derivs)
    }

    pub(crate) fn interpolate_with(&self, t: f64, derivs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let (first, last) = (self.times[0], *self.times.last().unwrap());
        let span = (last - first).abs().max(1.0);
        if !(t >= first - 1e-12 * span && t <= last + 1e-12 * span) {
            return Err(Error::Model(format!(
                "time {t} outside the trajectory [{first}, {last}]"
            )));
        }
        if self.len() == 1 {
            return Ok(self.states[0].clone());
        }
        let k = match self.times.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => return Ok(self.states[i].clone()),
            Err(i) => i.clamp(1, self.len() - 1) - 1,
        };
        Ok(hermite(
            t,
            self.times[k],
            &self.states[k],
            &derivs[k],
            self.times[k + 1],
            &self.states[k + 1],
            &derivs[k + 1],
        ))
    }

    /// CSV with header `t,q1..,v1..,z1..[,E_L]`.
    pub fn to_csv(&self, energy: Option<&[f64]>) -> String {
        let mut header = vec!["t".to_string()];
        header.extend(self.dims.coordinate_names());
        if energy.is_some() {
            header.push("E_L".into());
        }
        let mut out = header.join(",");
        out.push('\n');
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = vec![*t];
            row.extend_from_slice(s);
            if let Some(e) = energy {
                row.push(e[i]);
            }
            write_row(&mut out, &row);
        }
        out
    }
}

/// Writes one CSV row in round-trip scientific notation.
pub(crate) fn write_row(out: &mut String, values: &[f64]) {
    for (j, v) in values.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

/// Integrates an autonomous vector field from `initial`.
pub fn integrate(field: &dyn VectorField, initial: &ExtendedPoint, config: &IntegratorConfig) -> Result<Trajectory> {
    let dims = initial.dims();
    if field.dim() != dims.dim() {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            got: field.dim(),
        });
    }
    let sol = integrate_ode(|_, y| field.eval(y), initial.coords(), config)?;
    Trajectory::new(
        dims,
        sol.times,
        sol.states,
        Some(sol.derivatives),
        TrajectoryMeta {
            model: String::new(),
            method: config.method.label(),
            stats: sol.stats,
        },
    )
}
