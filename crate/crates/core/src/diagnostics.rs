//! Energy functionals, the smallness condition, the bootstrap monitor and
//! numerical checks of the identities and estimates behind the global bound.

use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{advect, multi_indices, transport, Norm, SpectralField};
use crate::linear::LinearFlow;
use crate::sim::{Sample, SimState};

/// Constant in `σ(ϑ, v_d)_{H³} ≤ C(σ^{3/2}‖v‖² + σ^{1/2}‖ϑ‖²)` from Young's inequality.
pub const YOUNG_CONSTANT: f64 = 0.5;

/// Largest `σ = 2^{−k}`, `k ≥ 0`, with `C·σ^{1/2} ≤ ν/2` and `C·σ^{1/2} ≤ λ/2`.
pub fn choose_sigma(nu: f64, lambda: f64, c_abs: f64) -> Result<f64> {
    if !(nu > 0.0 && lambda > 0.0 && c_abs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "choose_sigma needs positive inputs (ν = {nu}, λ = {lambda}, C = {c_abs})"
        )));
    }
    let ok = |s: f64| c_abs * s.powf(1.5) <= 0.5 * s * nu && c_abs * s.sqrt() <= 0.5 * lambda;
    let mut sigma = 1.0;
    while !ok(sigma) {
        sigma *= 0.5;
    }
    Ok(sigma)
}

/// `(ϑ, v_d)_{H³}`.
pub fn coupling(v: &SpectralField, theta: &SpectralField) -> Result<f64> {
    theta.inner_h(&v.component_field(v.dim() - 1), 3)
}

/// `A = σ‖v‖²_{H³} + ‖ϑ‖²_{H³}`, `B = σν‖v‖²_{H³} + λ‖ϑ‖²_{H³}`.
pub fn energy_functionals(v: &SpectralField, theta: &SpectralField, sigma: f64, nu: f64, lambda: f64) -> (f64, f64) {
    functionals_from_norms(v.norm(Norm::Hm(3)), theta.norm(Norm::Hm(3)), sigma, nu, lambda)
}

pub fn functionals_from_norms(v_h3: f64, theta_h3: f64, sigma: f64, nu: f64, lambda: f64) -> (f64, f64) {
    let (v2, t2) = (v_h3 * v_h3, theta_h3 * theta_h3);
    (sigma * v2 + t2, sigma * nu * v2 + lambda * t2)
}

/// `σν‖v‖² + λ‖ϑ‖² − σ(ϑ, v_d)_{H³}` and `B`.
pub fn absorption(v: &SpectralField, theta: &SpectralField, sigma: f64, nu: f64, lambda: f64) -> Result<(f64, f64)> {
    let (_, b) = energy_functionals(v, theta, sigma, nu, lambda);
    Ok((b - sigma * coupling(v, theta)?, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionParams {
    pub c: f64,
    pub delta: f64,
}

impl Default for ConditionParams {
    fn default() -> Self {
        ConditionParams { c: 1.0, delta: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub lhs: f64,
    pub holds: bool,
}

/// `(‖v₀‖²_{H³} + ‖ϑ₀‖²_{H³} + E₀)·exp(C·F₀ + C·E₀)`.
pub fn condition_lhs_value(v0_h3: f64, theta0_h3: f64, e0: f64, f0: f64, c: f64) -> f64 {
    (v0_h3 * v0_h3 + theta0_h3 * theta0_h3 + e0) * (c * f0 + c * e0).exp()
}

pub fn condition_lhs(v0_h3: f64, theta0_h3: f64, e0: f64, f0: f64, params: &ConditionParams) -> Condition {
    let lhs = condition_lhs_value(v0_h3, theta0_h3, e0, f0, params.c);
    Condition { lhs, holds: lhs <= params.delta }
}

/// The left side as a function of the constant, for sensitivity tables.
pub fn condition_curve(v0_h3: f64, theta0_h3: f64, e0: f64, f0: f64) -> impl Fn(f64) -> f64 {
    move |c| condition_lhs_value(v0_h3, theta0_h3, e0, f0, c)
}

pub const C_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    NeverExited,
    Exited { t: f64, index: usize },
}

/// First sample with `A > η`.
pub fn bootstrap_monitor(series: &[(f64, f64)], eta: f64) -> Verdict {
    match series.iter().position(|&(_, a)| a > eta) {
        Some(index) => Verdict::Exited { t: series[index].0, index },
        None => Verdict::NeverExited,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit `ln y ≈ c − rate·t` over samples with `t` in `window`.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs two samples in [{}, {}]",
            window.0, window.1
        )));
    }
    if let Some(&(t, y)) = pts.iter().find(|&&(_, y)| !(y > 0.0 && y.is_finite())) {
        return Err(Error::InvalidParameter(format!("non-positive value {y} at t = {t}")));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("decay fit window has a single time".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let residual = (pts.iter().map(|p| (p.1.ln() - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit { rate: -slope, intercept, residual, points: pts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    pub v_h3: f64,
    pub theta_h3: f64,
    pub a: f64,
    pub b: f64,
}

/// Time series of the energy functionals and the verdicts drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub sigma: f64,
    pub eta: f64,
    pub condition_lhs: f64,
    pub verdict: Verdict,
    pub decay: Option<DecayFit>,
}

impl EnergyReport {
    /// `η = 2·lhs`; the decay rate is fitted over the second half of the run.
    pub fn build(samples: &[Sample], sigma: f64, nu: f64, lambda: f64, condition_lhs: f64) -> Self {
        let rows: Vec<EnergyRow> = samples
            .iter()
            .map(|s| {
                let (a, b) = functionals_from_norms(s.u_h3, s.theta_h3, sigma, nu, lambda);
                EnergyRow { t: s.t, v_h3: s.u_h3, theta_h3: s.theta_h3, a, b }
            })
            .collect();
        let eta = 2.0 * condition_lhs;
        let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.a)).collect();
        let verdict = bootstrap_monitor(&series, eta);
        let decay = rows.last().and_then(|last| decay_fit(&series, (0.5 * last.t, last.t)).ok());
        EnergyReport { rows, sigma, eta, condition_lhs, verdict, decay }
    }

    pub fn series_a(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, r.a)).collect()
    }

    /// Largest `‖v‖²_{H³} + ‖ϑ‖²_{H³}` and the time it is attained.
    pub fn peak_energy(&self) -> (f64, f64) {
        self.rows
            .iter()
            .map(|r| (r.t, r.v_h3 * r.v_h3 + r.theta_h3 * r.theta_h3))
            .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,v_h3,theta_h3,A,B")?;
        for r in &self.rows {
            writeln!(out, "{},{:e},{:e},{:e},{:e}", r.t, r.v_h3, r.theta_h3, r.a, r.b)?;
        }
        Ok(())
    }
}

/// Both sides of the `H³` energy identity for the perturbation system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub t: f64,
    pub dt: f64,
    pub lhs: f64,
    pub terms: [f64; 4],
    pub residual: f64,
    /// `A + B` at the middle snapshot.
    pub scale: f64,
}

impl IdentityCheck {
    pub fn rhs(&self) -> f64 {
        self.terms.iter().sum()
    }
}

fn l2(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.inner_h(b, 0)
}

/// `Σ_{0<|β|≤3} ([D^β, w·]∇f, D^β f)` for a carrier `w` and field `f`.
fn commutator_sum(w: &SpectralField, f: &SpectralField) -> Result<f64> {
    let wp = w.to_physical();
    let product = advect(w, f)?;
    let mut total = 0.0;
    for beta in multi_indices(f.dim(), 1, 3) {
        let df = f.derivative(beta);
        let inner = transport(&wp, &df.gradient_physical()).to_spectral().dealiased();
        let comm = product.derivative(beta).sub(&inner)?;
        total += l2(&comm, &df)?;
    }
    Ok(total)
}

/// Energy identity at the middle of three equally spaced perturbation-mode
/// snapshots: the time derivative by centred difference, the four transfer
/// terms by spectral differentiation (commutator forms for the transport
/// terms, product forms for the rest).
pub fn energy_identity_check(
    snaps: [&SimState; 3],
    flow: &LinearFlow,
    sigma: f64,
) -> Result<IdentityCheck> {
    let [prev, mid, next] = snaps;
    let dt = 0.5 * (next.t - prev.t);
    if !(dt > 0.0) || ((mid.t - prev.t) - dt).abs() > 1e-9 * dt {
        return Err(Error::InvalidParameter("snapshots must be equally spaced in time".into()));
    }
    let (nu, lambda) = (flow.nu(), flow.lambda());
    let energy = |s: &SimState| 0.5 * energy_functionals(&s.u, &s.theta, sigma, nu, lambda).0;
    let ddt = (energy(next) - energy(prev)) / (2.0 * dt);
    let (v, th) = (&mid.u, &mid.theta);
    let (a, b) = energy_functionals(v, th, sigma, nu, lambda);
    let lhs = ddt + b - sigma * coupling(v, th)?;

    let t = mid.t;
    let u = flow.velocity_at(t);
    let big_theta = flow.theta_at(t);
    let forcing = flow.forcing_at(t)?;

    let i1 = -sigma * commutator_sum(v, v)? - commutator_sum(v, th)?;
    let i2 = -sigma * commutator_sum(&u, v)? - commutator_sum(&u, th)?;
    let i3 = -sigma * advect(v, &u)?.inner_h(v, 3)? - advect(v, &big_theta)?.inner_h(th, 3)?;
    let i4 = sigma * forcing.f.inner_h(v, 3)? + forcing.g.inner_h(th, 3)?;
    let terms = [i1, i2, i3, i4];
    let rhs: f64 = terms.iter().sum();
    Ok(IdentityCheck { t, dt, lhs, terms, residual: (lhs - rhs).abs(), scale: a + b })
}

/// `Σ_{|α|≤m}‖[D^α, g]f‖_{L²} / (‖f‖_{H^{m−1}}‖∇g‖_{L^∞} + ‖f‖_{L^∞}‖g‖_{H^m})`
/// for scalar `g`, expanding every commutator directly.
pub fn commutator_check(g: &SpectralField, f: &SpectralField, m: u32) -> Result<f64> {
    if g.components() != 1 {
        return Err(Error::Components { expected: 1, got: g.components() });
    }
    let gp = g.to_physical();
    let mul = |h: &SpectralField| -> Result<SpectralField> {
        let hp = h.to_physical();
        let comps: Vec<Vec<f64>> = (0..hp.components())
            .map(|c| hp.component(c).iter().zip(gp.component(0)).map(|(x, y)| x * y).collect())
            .collect();
        Ok(crate::field::PhysicalField::from_components(g.grid(), comps)?.to_spectral().dealiased())
    };
    let gf = mul(f)?;
    let mut lhs = 0.0;
    for alpha in multi_indices(g.dim(), 0, m) {
        let comm = gf.derivative(alpha).sub(&mul(&f.derivative(alpha))?)?;
        lhs += comm.norm(Norm::Hm(0));
    }
    let grad_g = g.gradient_physical().max_magnitude();
    let rhs = f.norm(Norm::Hm(m.saturating_sub(1))) * grad_g + f.to_physical().norm(Norm::Linf) * g.norm(Norm::Hm(m));
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// `‖fg‖_{H^m} / (‖f‖_{L^∞}‖g‖_{H^m} + ‖f‖_{H^m}‖g‖_{L^∞})` for scalars.
pub fn product_check(f: &SpectralField, g: &SpectralField, m: u32) -> Result<f64> {
    let fp = f.to_physical();
    let gp = g.to_physical();
    let prod: Vec<f64> = fp.component(0).iter().zip(gp.component(0)).map(|(x, y)| x * y).collect();
    let fg = crate::field::PhysicalField::from_components(f.grid(), vec![prod])?.to_spectral().dealiased();
    let rhs = fp.norm(Norm::Linf) * g.norm(Norm::Hm(m)) + f.norm(Norm::Hm(m)) * gp.norm(Norm::Linf);
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(fg.norm(Norm::Hm(m)) / rhs)
}
