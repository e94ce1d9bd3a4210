//! Large initial data with prescribed Fourier support.
//!
//! In 2D the profile `â₀` lives on the wedge-annulus
//! `{|ξ₁−ξ₂| ≤ ε, 4/3 ≤ |ξ| ≤ 3/2}` and equals its amplitude on the flat set
//! `{|ξ₁−ξ₂| ≤ ε/2, 25/18 ≤ |ξ| ≤ 13/9}`. In 3D it is the product of a
//! horizontal wedge-annulus (radii `41/30 .. 22/15`) and a vertical band
//! `ε ≤ |ξ₃| ≤ 2ε` with flat part `5ε/4 ≤ |ξ₃| ≤ 7ε/4`. Both profiles are real
//! and even, so `a₀` is real and even.
//!
//! The linear data are `U₀ = ∇^⊥a₀`, `Θ₀ = a₀`, for which `div U₀ = 0` and
//! `U₀·∇Θ₀ = 0` hold identically.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Norm, SpectralField};
use crate::grid::{Grid, GridSpec};
use crate::lp::{plateau, smoothstep, DyadicCutoff};
use crate::random;

pub const ANNULUS_INNER: f64 = 4.0 / 3.0;
pub const ANNULUS_OUTER: f64 = 3.0 / 2.0;
pub const FLAT_INNER: f64 = 25.0 / 18.0;
pub const FLAT_OUTER: f64 = 13.0 / 9.0;
pub const HORIZONTAL_INNER: f64 = 41.0 / 30.0;
pub const HORIZONTAL_OUTER: f64 = 22.0 / 15.0;
/// Largest `ε` for which the 3D support stays inside the annulus.
pub const MAX_EPSILON_3D: f64 = 0.15;

/// `log log (1/ε)`.
pub fn log_log(epsilon: f64) -> f64 {
    (1.0 / epsilon).ln().ln()
}

/// How the peak spectral value of `â₀` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// `ε^{-1}(log log 1/ε)^{1/2}` in 2D, `ε^{-2(p-1)/p}(log log 1/ε)^{1/2}` in 3D.
    /// Requires `log log 1/ε > 0`, i.e. `ε < 1/e`.
    Law,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataParams2D {
    pub epsilon: f64,
    pub amplitude: Amplitude,
    pub transition_order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataParams3D {
    pub epsilon: f64,
    /// Lebesgue exponent in the amplitude law, `1 < p < ∞`.
    pub p: f64,
    pub amplitude: Amplitude,
    pub transition_order: u32,
}

fn law_factor(epsilon: f64) -> Result<f64> {
    let ll = log_log(epsilon);
    if !(ll > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude law needs log log(1/ε) > 0, i.e. ε < 1/e (got ε = {epsilon})"
        )));
    }
    Ok(ll.sqrt())
}

fn check_fixed(a: Amplitude) -> Result<()> {
    match a {
        Amplitude::Fixed(v) if !(v.is_finite() && v > 0.0) => {
            Err(Error::InvalidParameter(format!("fixed amplitude {v} must be positive")))
        }
        _ => Ok(()),
    }
}

impl DataParams2D {
    pub fn new(epsilon: f64) -> Result<Self> {
        let p = DataParams2D { epsilon, amplitude: Amplitude::Law, transition_order: 1 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_amplitude(mut self, amplitude: Amplitude) -> Result<Self> {
        self.amplitude = amplitude;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::InvalidParameter(format!("ε = {} not in (0, 1/2]", self.epsilon)));
        }
        if self.transition_order == 0 {
            return Err(Error::InvalidParameter("transition order must be at least 1".into()));
        }
        check_fixed(self.amplitude)?;
        self.peak().map(|_| ())
    }

    /// Peak spectral value `A`.
    pub fn peak(&self) -> Result<f64> {
        match self.amplitude {
            Amplitude::Law => Ok(law_factor(self.epsilon)? / self.epsilon),
            Amplitude::Fixed(a) => Ok(a),
        }
    }

    /// Profile `χ̂(ξ) ∈ [0, 1]`.
    pub fn profile(&self, xi: [f64; 3]) -> f64 {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let radial = plateau(
            r,
            ANNULUS_INNER,
            FLAT_INNER,
            FLAT_OUTER,
            ANNULUS_OUTER,
            self.transition_order,
        );
        if radial == 0.0 {
            return 0.0;
        }
        radial * wedge(xi[0] - xi[1], self.epsilon, self.transition_order)
    }

    /// Whether `ξ` lies in the flat set `C̃₁`.
    pub fn in_flat_set(&self, xi: [f64; 3]) -> bool {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        (xi[0] - xi[1]).abs() <= 0.5 * self.epsilon && (FLAT_INNER..=FLAT_OUTER).contains(&r)
    }

    /// Whether `ξ` lies in the support set `C̃`.
    pub fn in_support_set(&self, xi: [f64; 3]) -> bool {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        (xi[0] - xi[1]).abs() <= self.epsilon && (ANNULUS_INNER..=ANNULUS_OUTER).contains(&r)
    }
}

impl DataParams3D {
    pub fn new(epsilon: f64, p: f64) -> Result<Self> {
        let d = DataParams3D { epsilon, p, amplitude: Amplitude::Law, transition_order: 1 };
        d.validate()?;
        Ok(d)
    }

    pub fn with_amplitude(mut self, amplitude: Amplitude) -> Result<Self> {
        self.amplitude = amplitude;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON_3D) {
            return Err(Error::InvalidParameter(format!(
                "ε = {} not in (0, {MAX_EPSILON_3D}]",
                self.epsilon
            )));
        }
        let outer = (HORIZONTAL_OUTER.powi(2) + 4.0 * self.epsilon.powi(2)).sqrt();
        if outer > ANNULUS_OUTER {
            return Err(Error::InvalidParameter(format!(
                "support radius {outer:.4} leaves the annulus"
            )));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {} not in (1, ∞)", self.p)));
        }
        if self.transition_order == 0 {
            return Err(Error::InvalidParameter("transition order must be at least 1".into()));
        }
        check_fixed(self.amplitude)?;
        self.peak().map(|_| ())
    }

    pub fn peak(&self) -> Result<f64> {
        match self.amplitude {
            Amplitude::Law => {
                let e = 2.0 * (self.p - 1.0) / self.p;
                Ok(law_factor(self.epsilon)? * self.epsilon.powf(-e))
            }
            Amplitude::Fixed(a) => Ok(a),
        }
    }

    pub fn profile(&self, xi: [f64; 3]) -> f64 {
        let rh = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let o = self.transition_order;
        let horizontal = plateau(rh, HORIZONTAL_INNER, FLAT_INNER, FLAT_OUTER, HORIZONTAL_OUTER, o);
        if horizontal == 0.0 {
            return 0.0;
        }
        let e = self.epsilon;
        let vertical = plateau(xi[2].abs(), e, 1.25 * e, 1.75 * e, 2.0 * e, o);
        horizontal * vertical * wedge(xi[0] - xi[1], e, o)
    }

    pub fn in_support_set(&self, xi: [f64; 3]) -> bool {
        let rh = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let z = xi[2].abs();
        (xi[0] - xi[1]).abs() <= self.epsilon
            && (HORIZONTAL_INNER..=HORIZONTAL_OUTER).contains(&rh)
            && (self.epsilon..=2.0 * self.epsilon).contains(&z)
    }
}

/// 1 for `|δ| ≤ ε/2`, 0 for `|δ| ≥ ε`.
fn wedge(delta: f64, epsilon: f64, order: u32) -> f64 {
    let t = (delta.abs() - 0.5 * epsilon) / (0.5 * epsilon);
    1.0 - smoothstep(t, order)
}

fn check_resolution(grid: &Grid, epsilon: f64) -> Result<()> {
    let spacing = 1.0 / grid.spec().scale;
    if spacing > 0.25 * epsilon * (1.0 + 1e-12) {
        return Err(Error::Unresolved { spacing, limit: 0.25 * epsilon });
    }
    Ok(())
}

fn build(grid: &Arc<Grid>, peak: f64, profile: impl Fn([f64; 3]) -> f64, reach: [f64; 3]) -> Result<SpectralField> {
    let spec = grid.spec();
    for a in 0..spec.dim {
        let edge = (spec.points[a] / 2 - 1) as f64 / spec.scale;
        if reach[a] > edge {
            return Err(Error::InvalidGrid(format!(
                "axis {a} reaches |ξ| = {edge:.3}, data needs {:.3}",
                reach[a]
            )));
        }
    }
    let a0 = SpectralField::from_real_symbol(grid, |xi| peak * profile(xi));
    if a0.is_zero() {
        return Err(Error::InvalidParameter("no lattice point falls inside the support".into()));
    }
    Ok(a0)
}

/// `â₀ = A·χ̂` on the 2D wedge-annulus.
pub fn build_a0_2d(params: &DataParams2D, grid: &Arc<Grid>) -> Result<SpectralField> {
    params.validate()?;
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("2D data needs a 2D grid".into()));
    }
    check_resolution(grid, params.epsilon)?;
    build(grid, params.peak()?, |xi| params.profile(xi), [ANNULUS_OUTER; 3])
}

/// `â₀ = A·χ̂(ξ_h)φ̂(|ξ₃|)` on the 3D support set.
pub fn build_a0_3d(params: &DataParams3D, grid: &Arc<Grid>) -> Result<SpectralField> {
    params.validate()?;
    if grid.dim() != 3 {
        return Err(Error::InvalidGrid("3D data needs a 3D grid".into()));
    }
    check_resolution(grid, params.epsilon)?;
    let reach = [HORIZONTAL_OUTER, HORIZONTAL_OUTER, 2.0 * params.epsilon];
    build(grid, params.peak()?, |xi| params.profile(xi), reach)
}

/// Linear-flow data `(U₀, Θ₀)` generated by `a₀`.
#[derive(Debug, Clone)]
pub struct LinearData {
    pub u0: SpectralField,
    pub theta0: SpectralField,
}

pub fn make_linear_data(a0: &SpectralField) -> Result<LinearData> {
    Ok(LinearData { u0: a0.perp_gradient()?, theta0: a0.clone() })
}

/// Random divergence-free `v₀` and scalar `ϑ₀` on `|ξ| ≤ radius`, each with
/// `H³` norm `h3_norm`.
pub fn perturbation(
    grid: &Arc<Grid>,
    h3_norm: f64,
    radius: f64,
    seed: u64,
) -> Result<(SpectralField, SpectralField)> {
    if h3_norm == 0.0 {
        return Ok((SpectralField::zeros(grid, grid.dim()), SpectralField::zeros(grid, 1)));
    }
    let v0 = random::solenoidal(grid, radius, seed)?;
    let t0 = random::band_limited(grid, 1, radius, seed.wrapping_add(1));
    Ok((
        random::with_norm(&v0, Norm::Hm(3), h3_norm),
        random::with_norm(&t0, Norm::Hm(3), h3_norm),
    ))
}

fn friendly_even(min: usize) -> usize {
    let mut n = min.max(8);
    loop {
        if n % 2 == 0 {
            let mut m = n;
            for f in [2, 3, 5] {
                while m % f == 0 {
                    m /= f;
                }
            }
            if m == 1 {
                return n;
            }
        }
        n += 1;
    }
}

/// Grid that resolves the 2D wedge (`1/L ≤ ε/(4·refine)`) with `N/(2L) ≥ 4`.
pub fn suggested_grid_2d(epsilon: f64, refine: usize) -> Result<GridSpec> {
    let l = (4.0 / epsilon).ceil() * refine.max(1) as f64;
    GridSpec::new(2, l, friendly_even((8.0 * l).ceil() as usize))
}

/// Anisotropic 3D grid: horizontal axes as in 2D, vertical axis just wide
/// enough that quadratic products of the data are alias-free.
pub fn suggested_grid_3d(epsilon: f64) -> Result<GridSpec> {
    let l = (4.0 / epsilon).ceil();
    let n = friendly_even((8.0 * l).ceil() as usize);
    let k3 = (2.0 * epsilon * l).floor() as usize;
    let n3 = friendly_even(4 * k3 + 2);
    GridSpec::with_points(3, l, &[n, n, n3])
}

/// Norms demonstrating the data is not small.
#[derive(Debug, Clone, Default)]
pub struct LargenessReport {
    pub rows: Vec<(String, f64)>,
}

impl LargenessReport {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.rows.iter().find(|(k, _)| k == key).map(|r| r.1)
    }
}

/// Tabulate `L^∞`, `L^p`, `H³`, `‖·̂‖_{L¹}` and Besov norms of `u₀` and `θ₀`.
pub fn largeness_report(
    u0: &SpectralField,
    theta0: &SpectralField,
    lp_exponents: &[f64],
    besov: &[(f64, f64, f64)],
    cutoff: &DyadicCutoff,
) -> Result<LargenessReport> {
    let mut rows = Vec::new();
    for (name, f) in [("u0", u0), ("theta0", theta0)] {
        let phys = f.to_physical();
        rows.push((format!("{name}_linf"), phys.norm(Norm::Linf)));
        for &p in lp_exponents {
            rows.push((format!("{name}_l{p}"), phys.norm(Norm::Lp(p))));
        }
        rows.push((format!("{name}_h3"), f.norm(Norm::Hm(3))));
        rows.push((format!("{name}_fourier_l1"), f.norm(Norm::FourierL1)));
        for &(s, p, r) in besov {
            let b = cutoff.besov_norm(f, s, p, r, false)?;
            rows.push((format!("{name}_besov_s{s}_p{p}_r{r}"), b.value));
        }
    }
    Ok(LargenessReport { rows })
}
