//! Coupled `(x_n, theta_n)` dynamics after measurement onset.
//!
//! Once the branch signs are frozen the weights no longer read the phases:
//! `dx_n/dt = rate_n x_n (1 - x_n^2) / (2 tau_r)`, which is exactly the
//! derivative of [`closed_form_x`](crate::model::closed_form_x). The phases
//! rotate freely at `-omega_n` plus an optional chaotic diagonal term.

use std::f64::consts::TAU;

use crate::chaos::LogisticGenerator;
use crate::error::{Error, Result};
use crate::model::{closed_form_x, coupling, BranchSigns, TwoStateConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub x: [f64; 2],
    /// Phases reduced to `[0, 2 pi)`.
    pub theta: [f64; 2],
    pub alpha: Option<BranchSigns>,
}

impl SystemState {
    pub fn new(t: f64, x: [f64; 2], theta: [f64; 2]) -> Self {
        SystemState {
            t,
            x,
            theta: [reduce_phase(theta[0]), reduce_phase(theta[1])],
            alpha: None,
        }
    }

    pub fn q(&self) -> f64 {
        self.x[0] - self.x[1]
    }
}

pub fn reduce_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Chaos {
    #[default]
    None,
    /// One generator shared by both components.
    CommonLogistic {
        seed: f64,
        amplitude: f64,
        step_period: f64,
    },
    IndependentLogistic {
        seeds: [f64; 2],
        amplitude: f64,
        step_period: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseModel {
    /// Free angular frequencies in rad/s.
    pub omega: [f64; 2],
    pub chaos: Chaos,
}

impl PhaseModel {
    pub fn free(omega: [f64; 2]) -> Self {
        PhaseModel { omega, chaos: Chaos::None }
    }

    pub fn with_chaos(mut self, chaos: Chaos) -> Self {
        self.chaos = chaos;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.iter().all(|w| w.is_finite()) {
            return Err(Error::Precondition("omega must be finite".into()));
        }
        match self.chaos {
            Chaos::None => Ok(()),
            Chaos::CommonLogistic { amplitude, step_period, .. }
            | Chaos::IndependentLogistic { amplitude, step_period, .. } => {
                if !(amplitude >= 0.0) {
                    return Err(Error::Precondition(format!("chaos amplitude {amplitude} < 0")));
                }
                if !(step_period > 0.0) {
                    return Err(Error::Precondition(format!(
                        "chaos step period {step_period} must be > 0"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Fresh per-trajectory phase source.
    pub fn drive(&self) -> Result<PhaseDrive> {
        self.validate()?;
        let (gens, period) = match self.chaos {
            Chaos::None => (Generators::None, f64::INFINITY),
            Chaos::CommonLogistic { seed, amplitude, step_period } => (
                Generators::Common(LogisticGenerator::new(seed, amplitude)?),
                step_period,
            ),
            Chaos::IndependentLogistic { seeds, amplitude, step_period } => (
                Generators::Independent([
                    LogisticGenerator::new(seeds[0], amplitude)?,
                    LogisticGenerator::new(seeds[1], amplitude)?,
                ]),
                step_period,
            ),
        };
        Ok(PhaseDrive {
            omega: self.omega,
            gens,
            period,
            window: None,
            current: [0.0; 2],
        })
    }
}

#[derive(Debug, Clone)]
enum Generators {
    None,
    Common(LogisticGenerator),
    Independent([LogisticGenerator; 2]),
}

/// Instantaneous phase rates: free rotation plus the chaotic diagonal term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseRates {
    pub omega: [f64; 2],
    /// Chaotic contribution in rad/s, piecewise constant over a window.
    pub chaotic: [f64; 2],
}

/// Owned phase source for one trajectory. The chaotic phase emitted for a
/// window is spread uniformly over that window.
#[derive(Debug, Clone)]
pub struct PhaseDrive {
    omega: [f64; 2],
    gens: Generators,
    period: f64,
    window: Option<u64>,
    current: [f64; 2],
}

impl PhaseDrive {
    pub fn rates_at(&mut self, t: f64) -> PhaseRates {
        if let Generators::None = self.gens {
            return PhaseRates { omega: self.omega, chaotic: [0.0; 2] };
        }
        let target = (t / self.period).floor().max(0.0) as u64;
        while self.window.is_none_or(|w| w < target) {
            self.current = match &mut self.gens {
                Generators::None => [0.0; 2],
                Generators::Common(g) => {
                    let p = g.next().unwrap_or_default();
                    [p, p]
                }
                Generators::Independent(gs) => [
                    gs[0].next().unwrap_or_default(),
                    gs[1].next().unwrap_or_default(),
                ],
            };
            self.window = Some(self.window.map_or(0, |w| w + 1));
        }
        PhaseRates {
            omega: self.omega,
            chaotic: [self.current[0] / self.period, self.current[1] / self.period],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub step: f64,
    pub t_end: f64,
    pub clamp: bool,
}

impl IntegratorSettings {
    pub fn new(step: f64, t_end: f64) -> Result<Self> {
        let s = IntegratorSettings { step, t_end, clamp: true };
        s.validate()?;
        Ok(s)
    }

    /// Step and horizon given in units of `tau_r`.
    pub fn in_tau_units(tau_r: f64, step_over_tau: f64, t_end_over_tau: f64) -> Result<Self> {
        Self::new(step_over_tau * tau_r, t_end_over_tau * tau_r)
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Precondition(format!("step {} must be > 0", self.step)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Precondition(format!("t_end {} must be >= 0", self.t_end)));
        }
        if self.t_end > 0.0 && self.step > self.t_end {
            return Err(Error::Precondition(format!(
                "step {} exceeds t_end {}",
                self.step, self.t_end
            )));
        }
        Ok(())
    }

    /// Sample times `0, h, 2h, ..., t_end`; the last interval may be short.
    pub fn time_grid(&self) -> Vec<f64> {
        (0..self.grid_len()).map(|i| self.grid_time(i)).collect()
    }

    /// Number of full steps and whether a short final step follows them.
    fn step_count(&self) -> (usize, bool) {
        if self.t_end == 0.0 {
            return (0, false);
        }
        let ratio = self.t_end / self.step;
        let full = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.floor() as usize
        };
        let remainder = self.t_end - full as f64 * self.step;
        (full, remainder > 1e-9 * self.step)
    }

    pub fn grid_len(&self) -> usize {
        let (full, tail) = self.step_count();
        full + 1 + usize::from(tail)
    }

    /// Time of grid point `i`; the last point is exactly `t_end`.
    pub fn grid_time(&self, i: usize) -> f64 {
        if i + 1 >= self.grid_len() {
            self.t_end
        } else {
            i as f64 * self.step
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<SystemState>,
    /// `q_series[i] = x_1 - x_2` of `samples[i]`.
    pub q_series: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Trajectory { samples: Vec::with_capacity(n), q_series: Vec::with_capacity(n) }
    }

    fn push(&mut self, s: SystemState) {
        self.q_series.push(s.q());
        self.samples.push(s);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&SystemState> {
        self.samples.last()
    }
}

/// Right-hand side `(dx/dt, dtheta/dt)`.
pub fn rhs(
    state: &SystemState,
    signs: BranchSigns,
    rates: &PhaseRates,
    tau_r: f64,
) -> ([f64; 2], [f64; 2]) {
    let rate = coupling(signs).rate;
    let x_dot = [
        weight_rate(state.x[0], rate[0], tau_r),
        weight_rate(state.x[1], rate[1], tau_r),
    ];
    let theta_dot = [
        -rates.omega[0] - rates.chaotic[0],
        -rates.omega[1] - rates.chaotic[1],
    ];
    (x_dot, theta_dot)
}

#[inline]
fn weight_rate(x: f64, rate: i32, tau_r: f64) -> f64 {
    rate as f64 * x * (1.0 - x * x) / (2.0 * tau_r)
}

/// One classical RK4 step of size `h` with the phase rates held fixed.
pub fn step_rk4(
    state: &SystemState,
    signs: BranchSigns,
    rates: &PhaseRates,
    tau_r: f64,
    h: f64,
    clamp: bool,
) -> Result<SystemState> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Precondition(format!("step h = {h} must be > 0")));
    }
    let shifted = |s: &SystemState, k: &([f64; 2], [f64; 2]), c: f64| SystemState {
        t: s.t + c * h,
        x: [s.x[0] + c * h * k.0[0], s.x[1] + c * h * k.0[1]],
        theta: [s.theta[0] + c * h * k.1[0], s.theta[1] + c * h * k.1[1]],
        alpha: s.alpha,
    };
    let k1 = rhs(state, signs, rates, tau_r);
    let k2 = rhs(&shifted(state, &k1, 0.5), signs, rates, tau_r);
    let k3 = rhs(&shifted(state, &k2, 0.5), signs, rates, tau_r);
    let k4 = rhs(&shifted(state, &k3, 1.0), signs, rates, tau_r);

    let mut next = SystemState { t: state.t + h, alpha: Some(signs), ..*state };
    for n in 0..2 {
        let dx = (k1.0[n] + 2.0 * k2.0[n] + 2.0 * k3.0[n] + k4.0[n]) / 6.0;
        let dth = (k1.1[n] + 2.0 * k2.1[n] + 2.0 * k3.1[n] + k4.1[n]) / 6.0;
        next.x[n] = state.x[n] + h * dx;
        if clamp {
            next.x[n] = next.x[n].clamp(0.0, 1.0);
        }
        next.theta[n] = reduce_phase(state.theta[n] + h * dth);
    }
    if !(next.x.iter().chain(next.theta.iter()).all(|v| v.is_finite()) && next.t.is_finite()) {
        return Err(Error::NonFiniteState { t: next.t });
    }
    Ok(next)
}

/// Integrates from onset with zero initial phases.
pub fn integrate(
    config: &TwoStateConfig,
    signs: BranchSigns,
    phase_model: &PhaseModel,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    config.validate()?;
    let start = SystemState::new(0.0, config.dynamical_x0(), [0.0; 2]);
    integrate_from(start, signs, phase_model, config.tau_r, settings)
}

pub fn integrate_from(
    start: SystemState,
    signs: BranchSigns,
    phase_model: &PhaseModel,
    tau_r: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    if !(tau_r > 0.0) {
        return Err(Error::Precondition(format!("tau_r = {tau_r} must be > 0")));
    }
    let mut drive = phase_model.drive()?;
    let grid = settings.time_grid();
    let mut traj = Trajectory::with_capacity(grid.len());
    let mut state = SystemState { t: grid[0] + start.t, alpha: Some(signs), ..start };
    traj.push(state);
    for w in grid.windows(2) {
        let rates = drive.rates_at(state.t);
        let mut next = step_rk4(&state, signs, &rates, tau_r, w[1] - w[0], settings.clamp)?;
        // keep timestamps on the grid instead of accumulating h
        next.t = start.t + w[1];
        traj.push(next);
        state = next;
    }
    Ok(traj)
}

/// Closed-form weights sampled on the integrator's time grid; phases stay at zero.
pub fn closed_form_trajectory(
    config: &TwoStateConfig,
    signs: BranchSigns,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    let rate = coupling(signs).rate;
    let x0 = config.dynamical_x0();
    let grid = settings.time_grid();
    let mut traj = Trajectory::with_capacity(grid.len());
    for t in grid {
        let x = [
            closed_form_x(x0[0], rate[0], t, config.tau_r)?,
            closed_form_x(x0[1], rate[1], t, config.tau_r)?,
        ];
        traj.push(SystemState { t, x, theta: [0.0; 2], alpha: Some(signs) });
    }
    Ok(traj)
}

/// Off-diagonal interaction element `H_nm` implied by the coupling choice,
///
/// `f_n alpha_n x_n (1 - x_n^2) / (sqrt(x_n x_m) sin(theta_n - theta_m)) / tau_r`.
///
/// Diagnostic only: feeding it back through the generic `dx_n/dt` sum gives
/// `-2 f_n alpha_n x_n (1 - x_n^2)`, which does not match the evolution used
/// by [`rhs`].
pub fn offdiag_element(
    state: &SystemState,
    signs: BranchSigns,
    n: usize,
    m: usize,
    tau_r: f64,
) -> Result<f64> {
    if n == m || n > 1 || m > 1 {
        return Err(Error::Precondition(format!("need distinct indices in {{0, 1}}, got ({n}, {m})")));
    }
    let s = (state.theta[n] - state.theta[m]).sin();
    if s.abs() < 1e-12 {
        return Err(Error::SingularDenominator("sin(theta_n - theta_m) vanishes"));
    }
    let root = (state.x[n] * state.x[m]).sqrt();
    if !(root > 0.0) {
        return Err(Error::SingularDenominator("sqrt(x_n x_m) vanishes"));
    }
    let c = coupling(signs);
    let fa = (c.f[n] * signs.0[n].as_i32()) as f64;
    let xn = state.x[n];
    Ok(fa * xn * (1.0 - xn * xn) / (root * s) / tau_r)
}
