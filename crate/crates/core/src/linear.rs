//! Closed-form evolution of the linearised damped system
//!
//! ```text
//! ∂ₜU + νU + ∇p = Θ e_d,   ∂ₜΘ + λΘ = 0,   div U = 0
//! ```
//!
//! whose solution is `Θ(t) = e^{−λt}Θ₀` and `U(t) = α(t)U₀ + β(t)V₀` with
//! `V₀ = P(Θ₀e_d)`, `α = e^{−νt}` and `β = (e^{−λt} − e^{−νt})/(ν − λ)`.
//! The forcing `f = −U·∇U`, `g = −U·∇Θ` splits into fixed spatial pieces with
//! scalar time coefficients, which makes the time integrals `E₀`, `F₀` cheap.

use std::sync::Arc;

use crate::data::LinearData;
use crate::error::{Error, Result};
use crate::field::{transport, Norm, PhysicalField, PhysicalGradient, SpectralField};
use crate::grid::Grid;
use crate::quadrature;

/// Relative gap below which `β` uses the confluent form `t·e^{−mt}`,
/// `m = (ν + λ)/2`.
pub const CONFLUENT_GAP: f64 = 1e-8;

pub fn alpha(nu: f64, t: f64) -> f64 {
    (-nu * t).exp()
}

pub fn beta(nu: f64, lambda: f64, t: f64) -> f64 {
    if (nu - lambda).abs() < CONFLUENT_GAP * nu.max(lambda) {
        let m = 0.5 * (nu + lambda);
        t * (-m * t).exp()
    } else {
        ((-lambda * t).exp() - (-nu * t).exp()) / (nu - lambda)
    }
}

/// `∫₀^∞` of the coefficient functions; all finite and valid for `ν = λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientIntegrals {
    pub alpha: f64,
    pub beta: f64,
    pub decay: f64,
    pub alpha2: f64,
    pub alpha_beta: f64,
    pub beta2: f64,
    pub alpha_decay: f64,
    pub beta_decay: f64,
}

pub fn coefficient_integrals(nu: f64, lambda: f64) -> CoefficientIntegrals {
    let s = nu + lambda;
    CoefficientIntegrals {
        alpha: 1.0 / nu,
        beta: 1.0 / (nu * lambda),
        decay: 1.0 / lambda,
        alpha2: 1.0 / (2.0 * nu),
        alpha_beta: 1.0 / (2.0 * nu * s),
        beta2: 1.0 / (2.0 * nu * lambda * s),
        alpha_decay: 1.0 / s,
        beta_decay: 1.0 / (2.0 * lambda * s),
    }
}

#[derive(Debug, Clone)]
pub struct Forcing {
    pub f: SpectralField,
    pub g: SpectralField,
}

/// Fixed spatial pieces of the forcing:
/// `U·∇U = α²P₁ + αβP₂ + β²P₃`, `U·∇Θ = e^{−λt}(αG₁ + βG₂)`.
#[derive(Debug, Clone)]
pub struct ForcingPieces {
    pub p: [SpectralField; 3],
    pub g: [SpectralField; 2],
}

/// `H³` Gram matrices of `(P₁, P₂, P₃)` and `(G₁, G₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingGram {
    pub gram: [[f64; 3]; 3],
    pub g_gram: [[f64; 2]; 2],
}

impl ForcingGram {
    fn coeffs(nu: f64, lambda: f64, t: f64) -> [f64; 3] {
        let a = alpha(nu, t);
        let b = beta(nu, lambda, t);
        [a * a, a * b, b * b]
    }

    pub fn f_norm(&self, nu: f64, lambda: f64, t: f64) -> f64 {
        let c = Self::coeffs(nu, lambda, t);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += c[i] * c[j] * self.gram[i][j];
            }
        }
        s.max(0.0).sqrt()
    }

    pub fn g_norm_at(&self, nu: f64, lambda: f64, t: f64) -> f64 {
        let c = [alpha(nu, t), beta(nu, lambda, t)];
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += c[i] * c[j] * self.g_gram[i][j];
            }
        }
        (-lambda * t).exp() * s.max(0.0).sqrt()
    }

    pub fn piece_norms(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.gram[i][i].max(0.0).sqrt())
    }

    pub fn g_piece_norms(&self) -> [f64; 2] {
        [0, 1].map(|i| self.g_gram[i][i].max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMode {
    /// Adaptive integration of the instantaneous norms plus an analytic tail bound.
    Adaptive,
    /// Triangle-inequality bound with exact coefficient integrals.
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub mode: QuadratureMode,
    pub tol: f64,
    /// Truncation time; `40/min(ν, λ)` when absent.
    pub t_max: Option<f64>,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { mode: QuadratureMode::Adaptive, tol: 1e-8, t_max: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Quadrature error plus truncated tail; zero for closed forms.
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearIntegrals {
    pub mode: QuadratureMode,
    pub e0: Estimate,
    pub f0: Estimate,
}

/// Immutable linear flow.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    nu: f64,
    lambda: f64,
    u0: SpectralField,
    v0: SpectralField,
    theta0: SpectralField,
}

/// `(−Δ)^{-1}∇^⊥∂₁Θ` in 2D, `(−Δ)^{-1}(∂₁∂₃Θ, ∂₂∂₃Θ, −(∂₁² + ∂₂²)Θ)` in 3D.
pub fn response_velocity(theta: &SpectralField) -> Result<SpectralField> {
    if theta.components() != 1 {
        return Err(Error::Components { expected: 1, got: theta.components() });
    }
    let raw = if theta.dim() == 2 {
        theta.partial(0).perp_gradient()?
    } else {
        let d = |b: [u32; 3]| theta.derivative(b);
        let v3 = d([2, 0, 0]).add(&d([0, 2, 0]))?.scaled(-1.0);
        SpectralField::stack(&[&d([1, 0, 1]), &d([0, 1, 1]), &v3])?
    };
    Ok(raw.inverse_laplacian_drop_mean())
}

/// Vorticity driver: `∂₁Θ` in 2D, `(∂₂Θ, −∂₁Θ, 0)` in 3D.
pub fn vorticity_driver(theta: &SpectralField) -> Result<SpectralField> {
    if theta.dim() == 2 {
        Ok(theta.partial(0))
    } else {
        theta.perp_gradient()
    }
}

fn check_rates(nu: f64, lambda: f64) -> Result<()> {
    if !(nu.is_finite() && nu > 0.0 && lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "damping rates must be positive (ν = {nu}, λ = {lambda})"
        )));
    }
    Ok(())
}

impl LinearFlow {
    pub fn new(u0: SpectralField, theta0: SpectralField, nu: f64, lambda: f64) -> Result<Self> {
        check_rates(nu, lambda)?;
        if !Arc::ptr_eq(u0.grid(), theta0.grid()) && u0.grid().spec() != theta0.grid().spec() {
            return Err(Error::GridMismatch);
        }
        if u0.components() != u0.dim() {
            return Err(Error::Components { expected: u0.dim(), got: u0.components() });
        }
        let div = u0.divergence()?.norm(Norm::Hm(0));
        let size = u0.norm(Norm::Hm(1));
        if div > 1e-10 * size {
            return Err(Error::InvalidParameter(format!(
                "U₀ is not divergence free (‖div U₀‖ / ‖U₀‖_H¹ = {:.2e})",
                div / size
            )));
        }
        let v0 = response_velocity(&theta0)?;
        Ok(LinearFlow { nu, lambda, u0, v0, theta0 })
    }

    pub fn from_data(data: &LinearData, nu: f64, lambda: f64) -> Result<Self> {
        Self::new(data.u0.clone(), data.theta0.clone(), nu, lambda)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u0.grid()
    }

    pub fn u0(&self) -> &SpectralField {
        &self.u0
    }

    pub fn v0(&self) -> &SpectralField {
        &self.v0
    }

    pub fn theta0(&self) -> &SpectralField {
        &self.theta0
    }

    pub fn w0(&self) -> Result<SpectralField> {
        self.u0.curl()
    }

    pub fn alpha(&self, t: f64) -> f64 {
        alpha(self.nu, t)
    }

    pub fn beta(&self, t: f64) -> f64 {
        beta(self.nu, self.lambda, t)
    }

    pub fn decay_rate(&self) -> f64 {
        self.nu.min(self.lambda)
    }

    pub fn theta_at(&self, t: f64) -> SpectralField {
        self.theta0.scaled((-self.lambda * t).exp())
    }

    pub fn velocity_at(&self, t: f64) -> SpectralField {
        SpectralField::combination(&[(self.alpha(t), &self.u0), (self.beta(t), &self.v0)])
            .expect("U₀ and V₀ share a grid")
    }

    pub fn vorticity_at(&self, t: f64) -> Result<SpectralField> {
        let w0 = self.u0.curl()?;
        let drive = vorticity_driver(&self.theta0)?;
        SpectralField::combination(&[(self.alpha(t), &w0), (self.beta(t), &drive)])
    }

    /// `f = −U·∇U`, `g = −U·∇Θ`, evaluated directly from `U(t)` and `Θ(t)`.
    pub fn forcing_at(&self, t: f64) -> Result<Forcing> {
        let u = self.velocity_at(t);
        let f = crate::field::advect(&u, &u)?.scaled(-1.0);
        let g = crate::field::advect(&u, &self.theta_at(t))?.scaled(-1.0);
        Ok(Forcing { f, g })
    }

    pub fn pieces(&self) -> Result<ForcingPieces> {
        let up = self.u0.to_physical();
        let vp = self.v0.to_physical();
        let gu = self.u0.gradient_physical();
        let gv = self.v0.gradient_physical();
        let spectral = |p: PhysicalField| p.to_spectral().dealiased();
        let p1 = spectral(transport(&up, &gu));
        let p2 = spectral(transport(&up, &gv).combine(1.0, &transport(&vp, &gu), 1.0));
        let p3 = spectral(transport(&vp, &gv));
        let gt = self.theta0.gradient_physical();
        let g = [spectral(transport(&up, &gt)), spectral(transport(&vp, &gt))];
        Ok(ForcingPieces { p: [p1, p2, p3], g })
    }

    /// Forcing assembled from precomputed pieces.
    pub fn forcing_from_pieces(&self, pieces: &ForcingPieces, t: f64) -> Result<Forcing> {
        let a = self.alpha(t);
        let b = self.beta(t);
        let f = SpectralField::combination(&[
            (-a * a, &pieces.p[0]),
            (-a * b, &pieces.p[1]),
            (-b * b, &pieces.p[2]),
        ])?;
        let s = (-self.lambda * t).exp();
        let g = SpectralField::combination(&[(-a * s, &pieces.g[0]), (-b * s, &pieces.g[1])])?;
        Ok(Forcing { f, g })
    }

    /// Gram data of the forcing pieces, one velocity component at a time so
    /// that only one set of pieces is held in memory.
    pub fn forcing_gram(&self) -> Result<ForcingGram> {
        let up = self.u0.to_physical();
        let vp = self.v0.to_physical();
        self.gram_from_physical(&up, &vp)
    }

    fn gram_from_physical(&self, up: &PhysicalField, vp: &PhysicalField) -> Result<ForcingGram> {
        let mut gram = [[0.0; 3]; 3];
        for c in 0..self.u0.dim() {
            let gu = self.u0.component_field(c).gradient_physical();
            let gv = self.v0.component_field(c).gradient_physical();
            let p1 = transport(up, &gu).to_spectral().dealiased();
            let p2 = transport(up, &gv)
                .combine(1.0, &transport(vp, &gu), 1.0)
                .to_spectral()
                .dealiased();
            drop(gu);
            let p3 = transport(vp, &gv).to_spectral().dealiased();
            let p = [p1, p2, p3];
            for i in 0..3 {
                for j in i..3 {
                    let v = p[i].inner_h(&p[j], 3)?;
                    gram[i][j] += v;
                    if i != j {
                        gram[j][i] += v;
                    }
                }
            }
        }
        let gt = self.theta0.gradient_physical();
        let g = [transport(up, &gt).to_spectral().dealiased(), transport(vp, &gt).to_spectral().dealiased()];
        let mut g_gram = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g_gram[i][j] = g[i].inner_h(&g[j], 3)?;
            }
        }
        Ok(ForcingGram { gram, g_gram })
    }

    /// Whether every quadratic product of the data is represented exactly:
    /// along each axis twice the spectral reach fits inside the kept modes.
    pub fn products_alias_free(&self) -> bool {
        let spec = *self.grid().spec();
        let mut reach = [0i64; 3];
        let grid = self.grid().clone();
        for f in [&self.u0, &self.theta0] {
            for c in 0..f.components() {
                for (idx, z) in f.component(c).iter().enumerate() {
                    if z.norm() > 0.0 {
                        let pos = grid.unravel(idx);
                        for a in 0..spec.dim {
                            let k = crate::grid::lattice_index(pos[a], spec.points[a]).abs();
                            reach[a] = reach[a].max(k);
                        }
                    }
                }
            }
        }
        (0..spec.dim).all(|a| {
            let kept = (spec.dealias_fraction * spec.points[a] as f64 / 2.0).floor() as i64;
            2 * reach[a] <= kept && 2 * reach[a] < spec.points[a] as i64 / 2
        })
    }

    /// `E₀ = ∫₀^∞ ‖U·∇U‖_{H³} + ‖U·∇Θ‖_{H³} dt` and `F₀ = ∫₀^∞ ‖U‖_{L^∞} + ‖Θ‖_{L^∞} dt`.
    pub fn compute_e0_f0(&self, opts: &QuadratureOptions) -> Result<LinearIntegrals> {
        let up = self.u0.to_physical();
        let vp = self.v0.to_physical();
        let theta_inf = self.theta0.to_physical().norm(Norm::Linf);
        let gram = self.gram_from_physical(&up, &vp)?;
        let u_inf = up.norm(Norm::Linf);
        let v_inf = vp.norm(Norm::Linf);
        let (nu, la) = (self.nu, self.lambda);
        let ci = coefficient_integrals(nu, la);
        let pn = gram.piece_norms();
        let gn = gram.g_piece_norms();
        let e0_bound = pn[0] * ci.alpha2
            + pn[1] * ci.alpha_beta
            + pn[2] * ci.beta2
            + gn[0] * ci.alpha_decay
            + gn[1] * ci.beta_decay;
        let f0_bound = u_inf * ci.alpha + v_inf * ci.beta + theta_inf * ci.decay;
        if opts.mode == QuadratureMode::UpperBound {
            return Ok(LinearIntegrals {
                mode: opts.mode,
                e0: Estimate { value: e0_bound, error: 0.0 },
                f0: Estimate { value: f0_bound, error: 0.0 },
            });
        }
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("quadrature tol {} must be positive", opts.tol)));
        }
        let mu = self.decay_rate();
        let t_max = opts.t_max.unwrap_or(40.0 / mu);
        if !(t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max {t_max} must be positive")));
        }
        let panels = 4000;

        let e_integrand = |t: f64| gram.f_norm(nu, la, t) + gram.g_norm_at(nu, la, t);
        let e = quadrature::integrate(e_integrand, 0.0, t_max, opts.tol * e0_bound, opts.tol, panels)?;
        let k = (pn[0] + gn[0]).max(pn[2]).max(0.5 * (pn[1] + gn[0] + gn[1]));
        let a = 2.0 * mu;
        let tt = 1.0 + t_max;
        let e_tail = k * (-a * t_max).exp() * (tt * tt / a + 2.0 * tt / (a * a) + 2.0 / a.powi(3));

        let n = self.grid().len();
        let d = self.u0.dim();
        let f_integrand = |t: f64| {
            let (al, be) = (self.alpha(t), self.beta(t));
            let mut worst = 0.0f64;
            for i in 0..n {
                let mut s = 0.0;
                for c in 0..d {
                    let x = al * up.component(c)[i] + be * vp.component(c)[i];
                    s += x * x;
                }
                worst = worst.max(s);
            }
            worst.sqrt() + (-la * t).exp() * theta_inf
        };
        let f = quadrature::integrate(f_integrand, 0.0, t_max, opts.tol * f0_bound, opts.tol, panels)?;
        let k1 = u_inf + theta_inf;
        let f_tail = (-mu * t_max).exp() * ((k1 + v_inf * t_max) / mu + v_inf / (mu * mu));

        Ok(LinearIntegrals {
            mode: opts.mode,
            e0: Estimate { value: e.value, error: e.error + e_tail },
            f0: Estimate { value: f.value, error: f.error + f_tail },
        })
    }
}

/// Physical samples of the linear flow and its gradients, for pointwise
/// evaluation of `U(t)`, `∇U(t)` and `∇Θ(t)` without transforms.
#[derive(Clone)]
pub struct PhysicalFlow {
    nu: f64,
    lambda: f64,
    pub u0: PhysicalField,
    pub v0: PhysicalField,
    pub grad_u0: PhysicalGradient,
    pub grad_v0: PhysicalGradient,
    pub grad_theta0: PhysicalGradient,
}

impl PhysicalFlow {
    pub fn new(flow: &LinearFlow) -> Self {
        PhysicalFlow {
            nu: flow.nu,
            lambda: flow.lambda,
            u0: flow.u0.to_physical(),
            v0: flow.v0.to_physical(),
            grad_u0: flow.u0.gradient_physical(),
            grad_v0: flow.v0.gradient_physical(),
            grad_theta0: flow.theta0.gradient_physical(),
        }
    }

    pub fn velocity(&self, t: f64) -> PhysicalField {
        self.u0.combine(alpha(self.nu, t), &self.v0, beta(self.nu, self.lambda, t))
    }

    pub fn velocity_gradient(&self, t: f64) -> PhysicalGradient {
        self.grad_u0.combine(alpha(self.nu, t), &self.grad_v0, beta(self.nu, self.lambda, t))
    }

    pub fn theta_gradient(&self, t: f64) -> PhysicalGradient {
        let s = (-self.lambda * t).exp();
        self.grad_theta0.combine(s, &self.grad_theta0, 0.0)
    }
}
