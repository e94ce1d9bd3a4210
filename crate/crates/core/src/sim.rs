//! Pseudo-spectral integration of the full and perturbation systems.
//!
//! The damping terms are integrated exactly with the integrating factor
//! `e^{−Λτ}` (`Λ = ν` on the velocity, `λ` on the scalar) and the remaining
//! terms with the classical RK4 tableau in Lawson form. Products are formed
//! pointwise and dealiased; the velocity is re-projected after every step.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{transport, Norm, PhysicalField, SpectralField};
use crate::grid::Grid;
use crate::linear::{ForcingPieces, LinearFlow, PhysicalFlow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Unknowns `(u, θ)`.
    Full,
    /// Unknowns `(v, ϑ) = (u − U, θ − Θ)` around a linear flow.
    Perturbation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nu: f64,
    pub lambda: f64,
    pub cfl: f64,
    /// Largest step; the actual step divides `t_end` evenly.
    pub dt_max: f64,
    pub t_end: f64,
    /// Observers are called every `stride` steps (and at the end).
    pub stride: usize,
    pub mode: Mode,
    /// Abort when `‖state‖_{H³}` exceeds this multiple of the reference norm.
    pub guard: f64,
    /// Drop the quadratic terms (linear reproduction runs).
    pub nonlinear: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            nu: 1.0,
            lambda: 1.0,
            cfl: 0.4,
            dt_max: 0.05,
            t_end: 1.0,
            stride: 1,
            mode: Mode::Full,
            guard: 1e6,
            nonlinear: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.nu >= 0.0 && self.lambda >= 0.0 && self.nu.is_finite() && self.lambda.is_finite()) {
            return bad(format!("ν = {}, λ = {} must be non-negative", self.nu, self.lambda));
        }
        if self.mode == Mode::Perturbation && !(self.nu > 0.0 && self.lambda > 0.0) {
            return bad("perturbation mode needs ν, λ > 0".into());
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl = {} not in (0, 1)", self.cfl));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dt_max = {} must be positive", self.dt_max));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !(self.guard > 1.0) {
            return bad(format!("guard = {} must exceed 1", self.guard));
        }
        Ok(())
    }

    /// Uniform step `t_end / ⌈t_end / dt_max⌉` and the step count.
    pub fn steps(&self) -> (f64, usize) {
        let n = (self.t_end / self.dt_max - 1e-9).ceil().max(1.0) as usize;
        (self.t_end / n as f64, n)
    }
}

/// `(u, θ)` in full mode, `(v, ϑ)` in perturbation mode.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub u: SpectralField,
    pub theta: SpectralField,
}

impl SimState {
    pub fn new(u: SpectralField, theta: SpectralField) -> Result<Self> {
        if u.components() != u.dim() {
            return Err(Error::Components { expected: u.dim(), got: u.components() });
        }
        if theta.components() != 1 {
            return Err(Error::Components { expected: 1, got: theta.components() });
        }
        if u.grid().spec() != theta.grid().spec() {
            return Err(Error::GridMismatch);
        }
        Ok(SimState { t: 0.0, u, theta })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SimState {
            t: 0.0,
            u: SpectralField::zeros(grid, grid.dim()),
            theta: SpectralField::zeros(grid, 1),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn u_h3(&self) -> f64 {
        self.u.norm(Norm::Hm(3))
    }

    pub fn theta_h3(&self) -> f64 {
        self.theta.norm(Norm::Hm(3))
    }

    fn axpy(&self, a: f64, k: &Tendency) -> SimState {
        let mut s = self.clone();
        s.u.add_scaled(a, &k.u).expect("same grid");
        s.theta.add_scaled(a, &k.theta).expect("same grid");
        s
    }

    fn is_finite(&self) -> bool {
        [&self.u, &self.theta]
            .iter()
            .all(|f| (0..f.components()).all(|c| f.component(c).iter().all(|z| z.re.is_finite() && z.im.is_finite())))
    }
}

/// Time derivative of a state.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub u: SpectralField,
    pub theta: SpectralField,
}

impl Tendency {
    fn damped(&self, nu_factor: f64, lambda_factor: f64) -> Tendency {
        Tendency { u: self.u.scaled(nu_factor), theta: self.theta.scaled(lambda_factor) }
    }

    fn add(&self, a: f64, other: &Tendency) -> Tendency {
        let mut t = self.clone();
        t.u.add_scaled(a, &other.u).expect("same grid");
        t.theta.add_scaled(a, &other.theta).expect("same grid");
        t
    }
}

fn buoyancy(theta: &SpectralField) -> SpectralField {
    let grid = theta.grid();
    let d = grid.dim();
    let zero = SpectralField::zeros(grid, 1);
    let mut parts = vec![&zero; d];
    parts[d - 1] = theta;
    SpectralField::stack(&parts).expect("scalar components")
}

fn spectral(p: PhysicalField) -> SpectralField {
    p.to_spectral().dealiased()
}

/// Everything except the damping.
struct Problem<'a> {
    cfg: &'a SimConfig,
    linear: Option<(&'a LinearFlow, PhysicalFlow, ForcingPieces)>,
}

impl<'a> Problem<'a> {
    fn new(cfg: &'a SimConfig, flow: Option<&'a LinearFlow>) -> Result<Self> {
        let linear = match (cfg.mode, flow) {
            (Mode::Full, _) => None,
            (Mode::Perturbation, None) => {
                return Err(Error::InvalidParameter("perturbation mode needs a linear flow".into()))
            }
            (Mode::Perturbation, Some(f)) => {
                if (f.nu() - cfg.nu).abs() > 0.0 || (f.lambda() - cfg.lambda).abs() > 0.0 {
                    return Err(Error::InvalidParameter(
                        "linear flow damping rates differ from the configuration".into(),
                    ));
                }
                Some((f, PhysicalFlow::new(f), f.pieces()?))
            }
        };
        Ok(Problem { cfg, linear })
    }

    /// Advecting velocity in physical space: `u`, or `U + v`.
    fn carrier(&self, s: &SimState) -> PhysicalField {
        let up = s.u.to_physical();
        match &self.linear {
            None => up,
            Some((_, phys, _)) => up.combine(1.0, &phys.velocity(s.t), 1.0),
        }
    }

    fn nonlinear(&self, s: &SimState) -> Result<Tendency> {
        let mut du = buoyancy(&s.theta);
        let mut dth = SpectralField::zeros(s.grid(), 1);
        match &self.linear {
            None => {
                if self.cfg.nonlinear {
                    let up = s.u.to_physical();
                    du.add_scaled(-1.0, &spectral(transport(&up, &s.u.gradient_physical())))?;
                    dth.add_scaled(-1.0, &spectral(transport(&up, &s.theta.gradient_physical())))?;
                }
            }
            Some((flow, phys, pieces)) => {
                let forcing = flow.forcing_from_pieces(pieces, s.t)?;
                du.add_scaled(1.0, &forcing.f)?;
                dth.add_scaled(1.0, &forcing.g)?;
                if self.cfg.nonlinear {
                    let vp = s.u.to_physical();
                    let w = vp.combine(1.0, &phys.velocity(s.t), 1.0);
                    let gv = s.u.gradient_physical();
                    let adv_v = transport(&w, &gv).combine(1.0, &transport(&vp, &phys.velocity_gradient(s.t)), 1.0);
                    let gth = s.theta.gradient_physical();
                    let adv_th = transport(&w, &gth).combine(1.0, &transport(&vp, &phys.theta_gradient(s.t)), 1.0);
                    du.add_scaled(-1.0, &spectral(adv_v))?;
                    dth.add_scaled(-1.0, &spectral(adv_th))?;
                }
            }
        }
        Ok(Tendency { u: du.leray_project()?, theta: dth })
    }

    fn apply_factor(&self, s: &SimState, tau: f64) -> SimState {
        SimState {
            t: s.t,
            u: s.u.scaled((-self.cfg.nu * tau).exp()),
            theta: s.theta.scaled((-self.cfg.lambda * tau).exp()),
        }
    }

    fn factor(&self, k: &Tendency, tau: f64) -> Tendency {
        k.damped((-self.cfg.nu * tau).exp(), (-self.cfg.lambda * tau).exp())
    }

    fn max_dt(&self, s: &SimState) -> f64 {
        let vmax = self.carrier(s).magnitude().into_iter().fold(0.0, f64::max);
        let spec = s.grid().spec();
        let dx = (0..spec.dim).map(|a| spec.spacing(a)).fold(f64::INFINITY, f64::min);
        if vmax == 0.0 {
            f64::INFINITY
        } else {
            self.cfg.cfl * dx / vmax
        }
    }

    fn step(&self, s: &SimState, h: f64) -> Result<SimState> {
        let limit = self.max_dt(s);
        if h > limit {
            return Err(Error::Cfl { dt: h, suggested: limit });
        }
        let half = 0.5 * h;
        let at = |st: SimState, t: f64| SimState { t, ..st };
        let k1 = self.nonlinear(s)?;
        let ua = at(self.apply_factor(&s.axpy(half, &k1), half), s.t + half);
        let k2 = self.nonlinear(&ua)?;
        let ub = at(self.apply_factor(s, half).axpy(half, &k2), s.t + half);
        let k3 = self.nonlinear(&ub)?;
        let uc = at(self.apply_factor(s, h).axpy(h, &self.factor(&k3, half)), s.t + h);
        let k4 = self.nonlinear(&uc)?;
        let comb = self
            .factor(&k1, h)
            .add(2.0, &self.factor(&k2.add(1.0, &k3), half))
            .add(1.0, &k4);
        let mut next = at(self.apply_factor(s, h).axpy(h / 6.0, &comb), s.t + h);
        next.u = next.u.leray_project()?.dealiased();
        next.theta.dealias();
        Ok(next)
    }
}

/// `du/dt = P(−u·∇u + θe_d) − νu`, `dθ/dt = −u·∇θ − λθ`.
pub fn rhs_full(state: &SimState, cfg: &SimConfig) -> Result<Tendency> {
    let cfg = SimConfig { mode: Mode::Full, ..cfg.clone() };
    let p = Problem::new(&cfg, None)?;
    let n = p.nonlinear(state)?;
    Ok(Tendency {
        u: n.u.sub(&state.u.scaled(cfg.nu))?,
        theta: n.theta.sub(&state.theta.scaled(cfg.lambda))?,
    })
}

/// Tendency of the perturbation system at time `state.t`.
pub fn rhs_perturbation(state: &SimState, cfg: &SimConfig, flow: &LinearFlow) -> Result<Tendency> {
    let cfg = SimConfig { mode: Mode::Perturbation, nu: flow.nu(), lambda: flow.lambda(), ..cfg.clone() };
    let p = Problem::new(&cfg, Some(flow))?;
    let n = p.nonlinear(state)?;
    Ok(Tendency {
        u: n.u.sub(&state.u.scaled(cfg.nu))?,
        theta: n.theta.sub(&state.theta.scaled(cfg.lambda))?,
    })
}

/// Reusable stepper for one configuration.
pub struct Stepper<'a> {
    problem: Problem<'a>,
}

impl<'a> Stepper<'a> {
    pub fn new(cfg: &'a SimConfig, flow: Option<&'a LinearFlow>) -> Result<Self> {
        cfg.validate()?;
        Ok(Stepper { problem: Problem::new(cfg, flow)? })
    }

    /// One Lawson–RK4 step; rejects steps above the CFL limit.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        self.problem.step(state, dt)
    }

    /// Largest admissible step for `state`.
    pub fn cfl_limit(&self, state: &SimState) -> f64 {
        self.problem.max_dt(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Called with the state every output stride.
pub trait Observer {
    fn observe(&mut self, state: &SimState) -> Control;
}

impl<F: FnMut(&SimState) -> Control> Observer for F {
    fn observe(&mut self, state: &SimState) -> Control {
        self(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub u_h3: f64,
    pub theta_h3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    Stopped { t: f64 },
    GuardTriggered { t: f64, norm: f64 },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub samples: Vec<Sample>,
    pub status: RunStatus,
    pub steps: usize,
    pub dt: f64,
    pub final_state: SimState,
}

/// Advance `initial` to `t_end` with a uniform step, calling `observers`
/// every `stride` steps.
pub fn run(
    cfg: &SimConfig,
    initial: SimState,
    flow: Option<&LinearFlow>,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome> {
    let stepper = Stepper::new(cfg, flow)?;
    let (dt, n) = cfg.steps();
    let reference = {
        let mut r = initial.u_h3() + initial.theta_h3();
        if let Some(f) = flow {
            r = r.max(f.u0().norm(Norm::Hm(3)) + f.theta0().norm(Norm::Hm(3)));
        }
        if r > 0.0 {
            r
        } else {
            1.0
        }
    };
    let mut state = initial;
    let mut samples = Vec::with_capacity(n / cfg.stride + 2);
    let mut status = RunStatus::Completed;
    let mut record = |state: &SimState, observers: &mut [&mut dyn Observer]| -> Result<Option<RunStatus>> {
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        let s = Sample { t: state.t, u_h3: state.u_h3(), theta_h3: state.theta_h3() };
        samples.push(s);
        let norm = s.u_h3 + s.theta_h3;
        if norm > cfg.guard * reference {
            return Ok(Some(RunStatus::GuardTriggered { t: state.t, norm }));
        }
        let mut stop = false;
        for o in observers.iter_mut() {
            stop |= o.observe(state) == Control::Stop;
        }
        Ok(stop.then_some(RunStatus::Stopped { t: state.t }))
    };
    let mut steps = 0;
    if let Some(s) = record(&state, observers)? {
        status = s;
    } else {
        for i in 1..=n {
            state = stepper.step(&state, dt)?;
            if i == n {
                state.t = cfg.t_end;
            }
            steps = i;
            if i % cfg.stride == 0 || i == n {
                if let Some(s) = record(&state, observers)? {
                    status = s;
                    break;
                }
            }
        }
    }
    Ok(RunOutcome { samples, status, steps, dt, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::random;

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec::new(2, 1.0, 16).unwrap()).unwrap()
    }

    #[test]
    fn zero_state_has_zero_tendency_and_stays_zero() {
        let g = grid();
        let s = SimState::zeros(&g);
        let cfg = SimConfig::default();
        let k = rhs_full(&s, &cfg).unwrap();
        assert!(k.u.is_zero() && k.theta.is_zero());
        let out = run(&SimConfig { t_end: 0.5, dt_max: 0.1, ..cfg }, s, None, &mut []).unwrap();
        assert!(out.final_state.u.is_zero() && out.final_state.theta.is_zero());
        assert_eq!(out.steps, 5);
    }

    #[test]
    fn buoyancy_only_tendency() {
        let g = grid();
        let theta = random::band_limited(&g, 1, 3.0, 5);
        let s = SimState::new(SpectralField::zeros(&g, 2), theta.clone()).unwrap();
        let cfg = SimConfig { lambda: 2.0, ..Default::default() };
        let k = rhs_full(&s, &cfg).unwrap();
        let expect = buoyancy(&theta).leray_project().unwrap();
        assert!(k.u.sub(&expect).unwrap().max_abs_coefficient() < 1e-14 * expect.max_abs_coefficient());
        let th = k.theta.add(&theta.scaled(2.0)).unwrap();
        assert!(th.max_abs_coefficient() < 1e-14 * theta.max_abs_coefficient());
    }

    #[test]
    fn pure_damping_is_exact() {
        let g = grid();
        let theta = random::band_limited(&g, 1, 3.0, 9);
        let s = SimState::new(SpectralField::zeros(&g, 2), theta.clone()).unwrap();
        let cfg = SimConfig { lambda: 1.7, nonlinear: false, ..Default::default() };
        let st = Stepper::new(&cfg, None).unwrap();
        let next = st.step(&s, 0.3).unwrap();
        let expect = theta.scaled((-1.7f64 * 0.3).exp());
        assert!(next.theta.sub(&expect).unwrap().max_abs_coefficient() < 1e-15 * theta.max_abs_coefficient());
    }

    #[test]
    fn cfl_violation_suggests_step() {
        let g = grid();
        let u = random::solenoidal(&g, 3.0, 2).unwrap().scaled(100.0);
        let s = SimState::new(u, SpectralField::zeros(&g, 1)).unwrap();
        let cfg = SimConfig::default();
        let st = Stepper::new(&cfg, None).unwrap();
        match st.step(&s, 1.0) {
            Err(Error::Cfl { suggested, .. }) => assert!(st.step(&s, suggested).is_ok()),
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn guard_stops_growth() {
        let g = grid();
        let theta = random::band_limited(&g, 1, 3.0, 1);
        let s = SimState::new(SpectralField::zeros(&g, 2), theta).unwrap();
        // undamped buoyancy grows u linearly from zero; a tight guard trips
        let cfg = SimConfig { nu: 0.0, lambda: 0.0, guard: 1.01, t_end: 5.0, dt_max: 0.05, nonlinear: false, ..Default::default() };
        let out = run(&cfg, s, None, &mut []).unwrap();
        assert!(matches!(out.status, RunStatus::GuardTriggered { .. }));
    }

    #[test]
    fn observer_can_stop() {
        let g = grid();
        let s = SimState::zeros(&g);
        let mut calls = 0;
        let mut obs = |st: &SimState| {
            calls += 1;
            if st.t >= 0.2 - 1e-12 {
                Control::Stop
            } else {
                Control::Continue
            }
        };
        let cfg = SimConfig { t_end: 1.0, dt_max: 0.1, ..Default::default() };
        let out = run(&cfg, s, None, &mut [&mut obs]).unwrap();
        assert!(matches!(out.status, RunStatus::Stopped { .. }));
        assert_eq!(calls, 3);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { cfl: 1.0, ..Default::default() }.validate().is_err());
        assert!(SimConfig { t_end: 0.0, ..Default::default() }.validate().is_err());
        assert!(SimConfig { mode: Mode::Perturbation, nu: 0.0, ..Default::default() }.validate().is_err());
        assert_eq!(SimConfig { t_end: 1.0, dt_max: 0.3, ..Default::default() }.steps().1, 4);
    }
}
