//! Explicit method-of-lines time stepping and CFL bookkeeping.
//!
//! CFL numbers are `nu = (c/eps) dt / min(dx, dy)`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{AcousticParams, FieldSet, GridSpec};
use crate::schemes::SchemeSpec;

/// Stability horizon used by [`cfl_sweep`] callers by default.
pub const SWEEP_HORIZON: usize = 500;
/// `||q||_inf` growth factor above which a sweep point counts as unstable.
pub const SWEEP_GROWTH: f64 = 2.0;
/// Default `||q||_inf` growth factor at which [`run`] reports blow-up.
pub const RUN_GROWTH_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// Probes are evaluated every `probe_every` steps (and at the end).
    pub probe_every: usize,
    /// [`run`] fails with `Unstable` once `||q||_inf` exceeds this multiple
    /// of its initial value.
    pub growth_limit: f64,
}

impl StepControl {
    pub fn new(cfl: f64, t_end: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl.is_finite()) {
            return Err(Error::InvalidParams(String::from("cfl must be positive")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParams(String::from("t_end must be non-negative")));
        }
        Ok(Self { cfl, t_end, max_steps: 1_000_000, probe_every: 1, growth_limit: RUN_GROWTH_LIMIT })
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_probe_every(mut self, n: usize) -> Self {
        self.probe_every = n.max(1);
        self
    }

    pub fn with_growth_limit(mut self, g: f64) -> Self {
        self.growth_limit = g;
        self
    }
}

/// `dt = cfl * min(dx, dy) * eps / c`.
pub fn cfl_dt(params: &AcousticParams, grid: &GridSpec, cfl: f64) -> f64 {
    cfl * grid.dx.min(grid.dy) / params.speed()
}

/// CFL number of a given step.
pub fn cfl_number(params: &AcousticParams, grid: &GridSpec, dt: f64) -> f64 {
    dt * params.speed() / grid.dx.min(grid.dy)
}

/// `q + dt * rhs(q)`; `step` only labels the instability error.
pub fn forward_euler_step(spec: &SchemeSpec, state: &FieldSet, dt: f64, step: usize, time: f64) -> Result<FieldSet> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParams(String::from("dt must be positive")));
    }
    let mut next = state.clone();
    next.axpy(dt, &spec.rhs(state)?);
    next.check_finite().map_err(|_| Error::Unstable { step, time: time + dt })?;
    Ok(next)
}

/// Two-stage Heun step; not used by the acceptance runs.
pub fn rk2_step(spec: &SchemeSpec, state: &FieldSet, dt: f64, step: usize, time: f64) -> Result<FieldSet> {
    let k1 = spec.rhs(state)?;
    let mut mid = state.clone();
    mid.axpy(dt, &k1);
    let k2 = spec.rhs(&mid)?;
    let mut next = state.clone();
    next.axpy(0.5 * dt, &k1);
    next.axpy(0.5 * dt, &k2);
    next.check_finite().map_err(|_| Error::Unstable { step, time: time + dt })?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub name: String,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), t: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.t.push(t);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// A named scalar measurement of the state.
pub struct Probe<'a> {
    pub name: String,
    pub eval: Box<dyn Fn(&FieldSet) -> f64 + 'a>,
}

impl<'a> Probe<'a> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&FieldSet) -> f64 + 'a) -> Self {
        Self { name: name.into(), eval: Box::new(eval) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub series: Vec<TimeSeries>,
    pub final_state: FieldSet,
    pub steps: usize,
    pub dt: f64,
}

/// Uniform step count and step size reaching `t_end` without exceeding
/// the requested CFL number.
pub fn step_plan(params: &AcousticParams, grid: &GridSpec, control: &StepControl) -> Result<(usize, f64)> {
    if control.t_end == 0.0 {
        return Ok((0, 0.0));
    }
    let dt_max = cfl_dt(params, grid, control.cfl);
    let ratio = control.t_end / dt_max;
    let mut n = ratio.ceil() as usize;
    if n > 1 && (ratio - (n - 1) as f64) < 1e-9 {
        n -= 1;
    }
    let n = n.max(1);
    if n > control.max_steps {
        return Err(Error::StepLimit { needed: n, limit: control.max_steps });
    }
    Ok((n, control.t_end / n as f64))
}

/// Forward Euler to `t_end`, evaluating the probes on the configured cadence.
pub fn run(spec: &SchemeSpec, state: &FieldSet, control: &StepControl, probes: &[Probe<'_>]) -> Result<Trajectory> {
    let grid = state.grid;
    let (n, dt) = step_plan(&spec.params, &grid, control)?;
    let mut series: Vec<TimeSeries> = probes.iter().map(|p| TimeSeries::new(p.name.clone())).collect();
    let record = |series: &mut Vec<TimeSeries>, t: f64, q: &FieldSet| {
        for (s, p) in series.iter_mut().zip(probes) {
            s.push(t, (p.eval)(q));
        }
    };
    let mut q = state.clone();
    record(&mut series, 0.0, &q);
    let bound = control.growth_limit * state.max_abs();
    for step in 1..=n {
        let t_prev = (step - 1) as f64 * dt;
        q = forward_euler_step(spec, &q, dt, step, t_prev)?;
        if bound > 0.0 && q.max_abs() > bound {
            return Err(Error::Unstable { step, time: step as f64 * dt });
        }
        if step % control.probe_every == 0 || step == n {
            record(&mut series, step as f64 * dt, &q);
        }
    }
    Ok(Trajectory { series, final_state: q, steps: n, dt })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub cfl: f64,
    /// `||q_final||_inf / ||q_0||_inf` (infinite on blow-up).
    pub growth: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CflSweep {
    pub points: Vec<SweepPoint>,
    pub max_stable: Option<f64>,
}

/// Runs `horizon` forward-Euler steps at every CFL number of the grid; a
/// run is stable if `||q||_inf` at most doubles.
pub fn cfl_sweep(spec: &SchemeSpec, state: &FieldSet, cfl_grid: &[f64], horizon: usize) -> Result<CflSweep> {
    if cfl_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(String::from("cfl grid must be strictly ascending")));
    }
    let q0 = state.max_abs();
    let mut points = Vec::with_capacity(cfl_grid.len());
    for &cfl in cfl_grid {
        let dt = cfl_dt(&spec.params, &state.grid, cfl);
        let mut q = state.clone();
        let mut growth = 0.0;
        for step in 1..=horizon {
            match forward_euler_step(spec, &q, dt, step, 0.0) {
                Ok(next) => q = next,
                Err(Error::Unstable { .. }) => {
                    growth = f64::INFINITY;
                    break;
                }
                Err(e) => return Err(e),
            }
            if q.max_abs() > 1e3 * SWEEP_GROWTH * q0.max(f64::MIN_POSITIVE) {
                growth = f64::INFINITY;
                break;
            }
        }
        if growth == 0.0 {
            growth = if q0 > 0.0 { q.max_abs() / q0 } else { 1.0 };
        }
        points.push(SweepPoint { cfl, growth, stable: growth <= SWEEP_GROWTH });
    }
    let max_stable = points.iter().filter(|p| p.stable).map(|p| p.cfl).fold(None, |a: Option<f64>, c| {
        Some(a.map_or(c, |a| a.max(c)))
    });
    Ok(CflSweep { points, max_stable })
}

/// `n` evenly spaced CFL numbers `step, 2 step, ..., n step`.
pub fn cfl_grid(step: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_field;
    use crate::schemes::{multid_scheme, roe_scheme};

    fn params() -> AcousticParams {
        AcousticParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn dt_formula() {
        let g = GridSpec::new(10, 10, 0.02, 0.02).unwrap();
        assert!((cfl_dt(&params(), &g, 0.5) - 0.01).abs() < 1e-16);
        let half = AcousticParams::new(1.0, 0.5).unwrap();
        assert_eq!(cfl_dt(&half, &g, 0.5), 0.005);
        let aniso = GridSpec::new(10, 10, 0.02, 0.01).unwrap();
        assert_eq!(cfl_dt(&params(), &aniso, 1.0), 0.01);
        assert!((cfl_number(&params(), &aniso, 0.01) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_state_unchanged() {
        let g = GridSpec::unit_square(8, 8).unwrap();
        let q = make_field(g, |_, _| (0.5, 0.25, 1.0)).unwrap();
        let s = roe_scheme(params(), g.dx, g.dy);
        let next = forward_euler_step(&s, &q, 0.01, 1, 0.0).unwrap();
        assert_eq!(next, q);
    }

    #[test]
    fn richardson_half_steps() {
        let g = GridSpec::unit_square(16, 16).unwrap();
        let q = make_field(g, |x, y| {
            let s = (2.0 * core::f64::consts::PI * x).sin() * (2.0 * core::f64::consts::PI * y).cos();
            (s, 0.5 * s, 1.0 + 0.1 * s)
        })
        .unwrap();
        let s = roe_scheme(params(), g.dx, g.dy);
        let diff = |dt: f64| {
            let full = forward_euler_step(&s, &q, dt, 1, 0.0).unwrap();
            let h1 = forward_euler_step(&s, &q, dt / 2.0, 1, 0.0).unwrap();
            let h2 = forward_euler_step(&s, &h1, dt / 2.0, 2, 0.0).unwrap();
            full.max_abs_diff(&h2)
        };
        let ratio = diff(1e-3) / diff(5e-4);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn zero_data_and_zero_horizon() {
        let g = GridSpec::unit_square(6, 6).unwrap();
        let q = FieldSet::zeros(g);
        let s = multid_scheme(params(), g.dx, g.dy);
        let probes = [Probe::new("max", |q: &FieldSet| q.max_abs())];
        let tr = run(&s, &q, &StepControl::new(0.5, 0.5).unwrap(), &probes).unwrap();
        assert!(tr.series[0].values.iter().all(|&v| v == 0.0));
        let tr0 = run(&s, &q, &StepControl::new(0.5, 0.0).unwrap(), &probes).unwrap();
        assert_eq!(tr0.series[0].len(), 1);
        assert_eq!(tr0.steps, 0);
    }

    #[test]
    fn step_plan_respects_cfl_and_limit() {
        let g = GridSpec::unit_square(10, 10).unwrap();
        let c = StepControl::new(0.4, 1.0).unwrap();
        let (n, dt) = step_plan(&params(), &g, &c).unwrap();
        assert_eq!(n, 25);
        assert!(cfl_number(&params(), &g, dt) <= 0.4 + 1e-15);
        assert!(matches!(step_plan(&params(), &g, &c.with_max_steps(3)), Err(Error::StepLimit { needed: 25, limit: 3 })));
    }

    #[test]
    fn blow_up_is_detected() {
        let g = GridSpec::unit_square(12, 12).unwrap();
        let q = make_field(g, |x, y| ((7.0 * x).sin() * (3.0 * y).cos(), (5.0 * y).sin(), 1.0)).unwrap();
        let s = roe_scheme(params(), g.dx, g.dy);
        let sweep = cfl_sweep(&s, &q, &[0.01, 0.2, 3.0], 200).unwrap();
        assert!(sweep.points[0].stable);
        assert!(!sweep.points[2].stable);
        assert_eq!(sweep.max_stable, Some(0.2));
        assert!(cfl_sweep(&s, &q, &[0.2, 0.1], 1).is_err());
    }

    #[test]
    fn run_reports_growth() {
        let g = GridSpec::unit_square(12, 12).unwrap();
        let q = make_field(g, |x, y| ((7.0 * x).sin() * (3.0 * y).cos(), (5.0 * y).sin(), 1.0)).unwrap();
        let s = roe_scheme(params(), g.dx, g.dy);
        let c = StepControl::new(3.0, 2.0).unwrap().with_growth_limit(10.0);
        assert!(matches!(run(&s, &q, &c, &[]), Err(Error::Unstable { .. })));
        assert!(run(&s, &q, &StepControl::new(0.4, 0.5).unwrap(), &[]).is_ok());
    }

    #[test]
    fn unstable_error_names_step() {
        let g = GridSpec::unit_square(6, 6).unwrap();
        let mut q = FieldSet::zeros(g);
        q.u[0] = f64::MAX;
        let s = roe_scheme(params(), g.dx, g.dy);
        let e = forward_euler_step(&s, &q, 10.0, 7, 1.0).unwrap_err();
        assert!(matches!(e, Error::Unstable { step: 7, .. }));
    }
}
