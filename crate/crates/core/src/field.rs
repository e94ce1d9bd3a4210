//! Real fields stored as lattice Fourier coefficients, with exact spectral
//! calculus and norm evaluation.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// `L^p` by physical-space quadrature, `1 ≤ p < ∞`.
    Lp(f64),
    /// Grid maximum of the pointwise Euclidean magnitude.
    Linf,
    /// `H^m` with the multi-index convention `Σ_{|β|≤m} ‖D^β f‖²_{L²}`.
    Hm(u32),
    /// `∫|f̂| dξ` as a lattice Riemann sum.
    FourierL1,
}

/// Real scalar (one component) or vector field in spectral form.
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    comps: Vec<Vec<Complex64>>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", self.grid.spec())
            .field("components", &self.comps.len())
            .finish()
    }
}

/// Real samples of a field on the grid.
#[derive(Clone)]
pub struct PhysicalField {
    grid: Arc<Grid>,
    comps: Vec<Vec<f64>>,
}

/// Physical samples of all first derivatives of a field:
/// entry `c * d + j` holds `∂_j w_c`.
#[derive(Clone)]
pub struct PhysicalGradient {
    grid: Arc<Grid>,
    components: usize,
    data: Vec<Vec<f64>>,
}

/// `Σ_{|β|≤m} Π_i x_i^{β_i}` for `x_i = ξ_i²`, i.e. the `H^m` symbol weight.
pub fn sobolev_weight(xi: [f64; 3], dim: usize, m: u32) -> f64 {
    let m = m as usize;
    // complete homogeneous symmetric polynomials h_0..h_m, built one variable at a time
    let mut h = [0.0f64; 8];
    h[0] = 1.0;
    for &x in &xi[..dim] {
        let x2 = x * x;
        for j in 1..=m {
            h[j] += x2 * h[j - 1];
        }
    }
    h[..=m].iter().sum()
}

/// All multi-indices `β ∈ ℕ^d` with `lo ≤ |β| ≤ hi`, graded order.
pub fn multi_indices(dim: usize, lo: u32, hi: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in lo..=hi {
        for b0 in (0..=total).rev() {
            if dim == 2 {
                out.push([b0, total - b0, 0]);
            } else {
                for b1 in (0..=total - b0).rev() {
                    out.push([b0, b1, total - b0 - b1]);
                }
            }
        }
    }
    out
}

fn check_same(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.spec() == b.spec() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, components: usize) -> Self {
        SpectralField {
            grid: grid.clone(),
            comps: vec![vec![ZERO; grid.len()]; components],
        }
    }

    pub fn from_components(grid: &Arc<Grid>, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::Components { expected: 1, got: 0 });
        }
        if let Some(bad) = comps.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter(format!(
                "component has {} coefficients, grid has {}",
                bad.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid: grid.clone(), comps })
    }

    /// Scalar field with real spectrum `symbol(ξ)`; `symbol` must be even for
    /// the field to be real.
    pub fn from_real_symbol(grid: &Arc<Grid>, mut symbol: impl FnMut([f64; 3]) -> f64) -> Self {
        let mut c = vec![ZERO; grid.len()];
        grid.for_each_mode(|idx, xi| c[idx] = Complex64::new(symbol(xi), 0.0));
        SpectralField { grid: grid.clone(), comps: vec![c] }
    }

    /// Stack scalar fields into a vector field.
    pub fn stack(parts: &[&SpectralField]) -> Result<Self> {
        let grid = parts
            .first()
            .ok_or(Error::Components { expected: 1, got: 0 })?
            .grid
            .clone();
        let mut comps = Vec::new();
        for p in parts {
            check_same(&grid, &p.grid)?;
            comps.extend(p.comps.iter().cloned());
        }
        Ok(SpectralField { grid, comps })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn component_field(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            comps: vec![self.comps[c].clone()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().flatten().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn expect_components(&self, n: usize) -> Result<()> {
        if self.comps.len() == n {
            Ok(())
        } else {
            Err(Error::Components { expected: n, got: self.comps.len() })
        }
    }

    fn map_modes(&self, mut f: impl FnMut(usize, usize, [f64; 3], Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (c, comp) in out.comps.iter_mut().enumerate() {
            self.grid.for_each_deriv_mode(|idx, xi| comp[idx] = f(c, idx, xi, comp[idx]));
        }
        out
    }

    /// Copy the lattice coefficients onto another grid with the same box.
    /// Fails if a non-zero mode has no counterpart on `target`.
    pub fn transfer(&self, target: &Arc<Grid>) -> Result<Self> {
        let (s, t) = (self.grid.spec(), target.spec());
        if s.dim != t.dim || s.scale != t.scale {
            return Err(Error::GridMismatch);
        }
        let mut out = SpectralField::zeros(target, self.comps.len());
        for (c, comp) in self.comps.iter().enumerate() {
            for (idx, z) in comp.iter().enumerate() {
                if z.norm() == 0.0 {
                    continue;
                }
                let pos = self.grid.unravel(idx);
                let k: Vec<i64> = (0..s.dim).map(|a| crate::grid::lattice_index(pos[a], s.points[a])).collect();
                match target.position_of(&k) {
                    Some(j) => out.comps[c][j] = *z,
                    None => {
                        return Err(Error::InvalidGrid(format!("mode {k:?} does not fit the target grid")))
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.comps.iter_mut().flatten().for_each(|z| *z *= a);
        out
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        other.expect_components(self.comps.len())?;
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (p, q) in x.iter_mut().zip(y) {
                *p += q * a;
            }
        }
        Ok(())
    }

    /// `Σ a_i f_i` over fields with matching shape.
    pub fn combination(terms: &[(f64, &SpectralField)]) -> Result<Self> {
        let (a0, f0) = terms.first().ok_or(Error::Components { expected: 1, got: 0 })?;
        let mut out = f0.scaled(*a0);
        for (a, f) in &terms[1..] {
            out.add_scaled(*a, f)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(-1.0, other)?;
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(1.0, other)?;
        Ok(out)
    }

    /// `D^β` applied to every component.
    pub fn derivative(&self, beta: [u32; 3]) -> Self {
        if beta == [0, 0, 0] {
            return self.clone();
        }
        let d = self.dim();
        self.map_modes(|_, _, xi, z| {
            let mut s = Complex64::new(1.0, 0.0);
            for a in 0..d {
                for _ in 0..beta[a] {
                    s *= I * xi[a];
                }
            }
            z * s
        })
    }

    pub fn partial(&self, axis: usize) -> Self {
        let mut beta = [0u32; 3];
        beta[axis] = 1;
        self.derivative(beta)
    }

    /// Scalar gradient as a `d`-component field.
    pub fn gradient(&self) -> Result<Self> {
        self.expect_components(1)?;
        let parts: Vec<SpectralField> = (0..self.dim()).map(|a| self.partial(a)).collect();
        SpectralField::stack(&parts.iter().collect::<Vec<_>>())
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|_, _, xi, z| -z * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]))
    }

    /// `(−Δ)^{-1}`, zero mode set to zero without checking.
    pub fn inverse_laplacian_drop_mean(&self) -> Self {
        self.map_modes(|_, _, xi, z| {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            if r2 == 0.0 {
                ZERO
            } else {
                z / r2
            }
        })
    }

    /// `(−Δ)^{-1}`; fails when the dropped zero mode is not negligible
    /// (more than `1e-10` of the field's `L²` norm).
    pub fn inverse_laplacian(&self) -> Result<Self> {
        let mean: f64 = self
            .comps
            .iter()
            .map(|c| c[0].norm_sqr())
            .sum::<f64>()
            .sqrt()
            / self.grid.spec().box_volume().sqrt();
        let total = self.norm(Norm::Hm(0));
        if total > 0.0 && mean > 1e-10 * total {
            return Err(Error::ZeroMode { ratio: mean / total });
        }
        Ok(self.inverse_laplacian_drop_mean())
    }

    /// Leray projection `û ↦ û − ξ(ξ·û)/|ξ|²`, zero mode unchanged.
    pub fn leray_project(&self) -> Result<Self> {
        let d = self.dim();
        self.expect_components(d)?;
        let mut out = self.clone();
        let n = self.grid.len();
        let mut xis = vec![[0.0; 3]; n];
        self.grid.for_each_mode(|idx, xi| xis[idx] = xi);
        for (idx, xi) in xis.iter().enumerate() {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            if r2 == 0.0 {
                continue;
            }
            let mut dot = ZERO;
            for a in 0..d {
                dot += self.comps[a][idx] * xi[a];
            }
            for (a, comp) in out.comps.iter_mut().enumerate().take(d) {
                comp[idx] -= dot * (xi[a] / r2);
            }
        }
        Ok(out)
    }

    pub fn divergence(&self) -> Result<Self> {
        let d = self.dim();
        self.expect_components(d)?;
        let mut out = self.component_field(0).partial(0);
        for a in 1..d {
            out.add_scaled(1.0, &self.component_field(a).partial(a))?;
        }
        Ok(out)
    }

    /// Vorticity: `∂₁u₂ − ∂₂u₁` in 2D, `∇×u` in 3D.
    pub fn curl(&self) -> Result<Self> {
        let d = self.dim();
        self.expect_components(d)?;
        let c = |i: usize| self.component_field(i);
        if d == 2 {
            c(1).partial(0).sub(&c(0).partial(1))
        } else {
            let w1 = c(2).partial(1).sub(&c(1).partial(2))?;
            let w2 = c(0).partial(2).sub(&c(2).partial(0))?;
            let w3 = c(1).partial(0).sub(&c(0).partial(1))?;
            SpectralField::stack(&[&w1, &w2, &w3])
        }
    }

    /// `∇^⊥a = (∂₂a, −∂₁a)` in 2D and `(∂₂a, −∂₁a, 0)` in 3D.
    pub fn perp_gradient(&self) -> Result<Self> {
        self.expect_components(1)?;
        let u1 = self.partial(1);
        let u2 = self.partial(0).scaled(-1.0);
        if self.dim() == 2 {
            SpectralField::stack(&[&u1, &u2])
        } else {
            let zero = SpectralField::zeros(&self.grid, 1);
            SpectralField::stack(&[&u1, &u2, &zero])
        }
    }

    /// Zero every mode outside the dealias region.
    pub fn dealias(&mut self) {
        let grid = self.grid.clone();
        let mask = grid.keep_mask();
        for comp in &mut self.comps {
            for (z, &k) in comp.iter_mut().zip(mask) {
                if !k {
                    *z = ZERO;
                }
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    /// Largest coefficient magnitude outside the dealias region.
    pub fn max_outside_dealias(&self) -> f64 {
        let mask = self.grid.keep_mask();
        self.comps
            .iter()
            .flat_map(|c| c.iter().zip(mask).filter(|(_, &k)| !k).map(|(z, _)| z.norm()))
            .fold(0.0, f64::max)
    }

    /// `max |c(k) − conj c(−k)|` over all modes and components.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for comp in &self.comps {
            for idx in 0..comp.len() {
                let m = self.grid.mirror(idx);
                worst = worst.max((comp[idx] - comp[m].conj()).norm());
            }
        }
        worst
    }

    /// Replace every coefficient by the Hermitian average `(c(k) + conj c(−k))/2`.
    pub fn symmetrize(&mut self) {
        for comp in &mut self.comps {
            let old = comp.clone();
            for (idx, z) in comp.iter_mut().enumerate() {
                let m = self.grid.mirror(idx);
                *z = (old[idx] + old[m].conj()) * 0.5;
            }
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.comps.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_physical(&self) -> PhysicalField {
        let refs: Vec<&[Complex64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        PhysicalField {
            grid: self.grid.clone(),
            comps: self.grid.inverse_real(&refs),
        }
    }

    /// Physical samples of `∂_j w_c` for every component `c` and axis `j`.
    pub fn gradient_physical(&self) -> PhysicalGradient {
        let d = self.dim();
        let mut spectra = Vec::with_capacity(self.comps.len() * d);
        for c in 0..self.comps.len() {
            let f = self.component_field(c);
            for a in 0..d {
                spectra.push(f.partial(a).comps.pop().unwrap());
            }
        }
        let refs: Vec<&[Complex64]> = spectra.iter().map(|c| c.as_slice()).collect();
        PhysicalGradient {
            grid: self.grid.clone(),
            components: self.comps.len(),
            data: self.grid.inverse_real(&refs),
        }
    }

    /// Weighted spectral inner product `Σ_{|β|≤m} (D^β f, D^β g)_{L²}`, summed over components.
    pub fn inner_h(&self, other: &SpectralField, m: u32) -> Result<f64> {
        check_same(&self.grid, &other.grid)?;
        other.expect_components(self.comps.len())?;
        let d = self.dim();
        let mut total = 0.0;
        self.grid.for_each_mode(|idx, xi| {
            let w = sobolev_weight(xi, d, m);
            for (x, y) in self.comps.iter().zip(&other.comps) {
                total += w * (x[idx] * y[idx].conj()).re;
            }
        });
        Ok(total / self.grid.spec().box_volume())
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        match kind {
            Norm::Hm(m) => self.inner_h(self, m).unwrap_or(0.0).max(0.0).sqrt(),
            Norm::FourierL1 => {
                let n = self.grid.len();
                let mut sum = 0.0;
                for idx in 0..n {
                    let mag2: f64 = self.comps.iter().map(|c| c[idx].norm_sqr()).sum();
                    sum += mag2.sqrt();
                }
                sum * self.grid.spec().frequency_cell()
            }
            Norm::Lp(_) | Norm::Linf => self.to_physical().norm(kind),
        }
    }
}

impl PhysicalField {
    pub fn from_components(grid: &Arc<Grid>, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.is_empty() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter("physical component length mismatch".into()));
        }
        Ok(PhysicalField { grid: grid.clone(), comps })
    }

    /// Samples of `f(x)` at every grid point.
    pub fn from_fn(grid: &Arc<Grid>, components: usize, f: impl Fn([f64; 3], usize) -> f64) -> Self {
        let comps = (0..components)
            .map(|c| (0..grid.len()).map(|idx| f(grid.point(idx), c)).collect())
            .collect();
        PhysicalField { grid: grid.clone(), comps }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn to_spectral(&self) -> SpectralField {
        let refs: Vec<&[f64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        SpectralField {
            grid: self.grid.clone(),
            comps: self.grid.forward_real(&refs),
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        match kind {
            Norm::Linf => self.magnitude().into_iter().fold(0.0, f64::max),
            Norm::Lp(p) => {
                let w = self.grid.spec().cell_volume();
                let s: f64 = self.magnitude().into_iter().map(|m| m.powf(p)).sum();
                (s * w).powf(1.0 / p)
            }
            Norm::Hm(_) | Norm::FourierL1 => self.to_spectral().norm(kind),
        }
    }

    /// `Σ_x f(x)·g(x)·ΔV` summed over components.
    pub fn inner(&self, other: &PhysicalField) -> f64 {
        let w = self.grid.spec().cell_volume();
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum::<f64>()
            * w
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &PhysicalField, b: f64) -> PhysicalField {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        PhysicalField { grid: self.grid.clone(), comps }
    }
}

impl PhysicalGradient {
    pub fn components(&self) -> usize {
        self.components
    }

    /// Samples of `∂_axis w_c`.
    pub fn get(&self, c: usize, axis: usize) -> &[f64] {
        &self.data[c * self.grid.dim() + axis]
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &PhysicalGradient, b: f64) -> PhysicalGradient {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        PhysicalGradient {
            grid: self.grid.clone(),
            components: self.components,
            data,
        }
    }

    /// Pointwise maximum of the Frobenius norm of the gradient.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.data.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Pointwise transport term `(u·∇)w` from physical samples, without dealiasing.
pub fn transport(u: &PhysicalField, grad: &PhysicalGradient) -> PhysicalField {
    let d = u.grid.dim();
    let n = u.grid.len();
    let comps = (0..grad.components)
        .map(|c| {
            let mut out = vec![0.0; n];
            for j in 0..d {
                let uj = &u.comps[j];
                let g = grad.get(c, j);
                for ((o, &a), &b) in out.iter_mut().zip(uj).zip(g) {
                    *o += a * b;
                }
            }
            out
        })
        .collect();
    PhysicalField { grid: u.grid.clone(), comps }
}

/// Dealiased spectral representation of `u·∇w` (componentwise for vector `w`).
pub fn advect(u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    check_same(&u.grid, &w.grid)?;
    u.expect_components(u.dim())?;
    let up = u.to_physical();
    let grad = w.gradient_physical();
    Ok(transport(&up, &grad).to_spectral().dealiased())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn grid2(l: f64, n: usize) -> Arc<Grid> {
        Grid::new(GridSpec::new(2, l, n).unwrap()).unwrap()
    }

    /// Scalar field with the given (lattice index, amplitude) cosine modes.
    fn cosines(grid: &Arc<Grid>, modes: &[([i64; 2], f64)]) -> SpectralField {
        let l = grid.spec().scale;
        PhysicalField::from_fn(grid, 1, |x, _| {
            modes
                .iter()
                .map(|(k, a)| a * ((k[0] as f64 * x[0] + k[1] as f64 * x[1]) / l).cos())
                .sum()
        })
        .to_spectral()
    }

    #[test]
    fn constant_field_is_a_single_zero_mode() {
        let grid = grid2(1.0, 16);
        let f = PhysicalField::from_fn(&grid, 1, |_, _| 1.0).to_spectral();
        let vol = grid.spec().box_volume();
        assert!((f.component(0)[0].re - vol).abs() < 1e-10 * vol);
        let others = f.component(0)[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(others < 1e-12 * vol);
        let back = f.to_physical();
        assert!(back.component(0).iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn cosine_has_two_conjugate_coefficients() {
        let grid = grid2(2.0, 32);
        let f = cosines(&grid, &[([1, 0], 1.0)]);
        let plus = grid.position_of(&[1, 0]).unwrap();
        let minus = grid.position_of(&[-1, 0]).unwrap();
        let vol = grid.spec().box_volume();
        let c = f.component(0);
        assert!((c[plus] - Complex64::new(vol / 2.0, 0.0)).norm() < 1e-10);
        assert!((c[minus] - c[plus].conj()).norm() < 1e-10);
        let rest: f64 = c
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != plus && *i != minus)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-10);
    }

    #[test]
    fn derivative_of_sine() {
        let grid = grid2(2.0, 32);
        let l = grid.spec().scale;
        let s = PhysicalField::from_fn(&grid, 1, |x, _| (x[0] / l).sin()).to_spectral();
        let ds = s.partial(0).to_physical();
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            assert!((ds.component(0)[idx] - (x[0] / l).cos() / l).abs() < 1e-13);
        }
        assert_eq!(s.derivative([0, 0, 0]).component(0), s.component(0));
    }

    #[test]
    fn mixed_partials_commute() {
        let grid = grid2(1.0, 16);
        let f = cosines(&grid, &[([1, 2], 0.7), ([3, -1], 0.2)]);
        let a = f.partial(0).partial(1);
        let b = f.partial(1).partial(0);
        assert!(a.sub(&b).unwrap().max_abs_coefficient() <= 1e-13 * a.max_abs_coefficient());
    }

    #[test]
    fn inverse_laplacian_symbol() {
        // |ξ| = 3/2 with L = 2: k = (3, 0)
        let grid = grid2(2.0, 32);
        let f = cosines(&grid, &[([3, 0], 1.0)]);
        let g = f.inverse_laplacian().unwrap();
        let idx = grid.position_of(&[3, 0]).unwrap();
        assert!((g.component(0)[idx] - f.component(0)[idx] * (4.0 / 9.0)).norm() < 1e-12);
        let back = g.laplacian().scaled(-1.0);
        assert!(back.sub(&f).unwrap().max_abs_coefficient() < 1e-10);
    }

    #[test]
    fn inverse_laplacian_flags_mean() {
        let grid = grid2(1.0, 16);
        let f = PhysicalField::from_fn(&grid, 1, |x, _| 1.0 + x[0].cos()).to_spectral();
        assert!(matches!(f.inverse_laplacian(), Err(Error::ZeroMode { .. })));
        let g = f.inverse_laplacian_drop_mean();
        assert_eq!(g.component(0)[0], ZERO);
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal() {
        let grid = grid2(1.0, 16);
        let phi = cosines(&grid, &[([1, 2], 1.0), ([2, -3], 0.5)]);
        let grad = phi.gradient().unwrap();
        let p = grad.leray_project().unwrap();
        assert!(p.max_abs_coefficient() < 1e-12 * grad.max_abs_coefficient());
        let sol = phi.perp_gradient().unwrap();
        let q = sol.leray_project().unwrap();
        assert!(q.sub(&sol).unwrap().max_abs_coefficient() < 1e-12 * sol.max_abs_coefficient());
    }

    #[test]
    fn h1_ratio_for_single_mode() {
        let grid = grid2(2.0, 32);
        let f = cosines(&grid, &[([3, 0], 2.5)]);
        let r = f.norm(Norm::Hm(1)).powi(2) / f.norm(Norm::Hm(0)).powi(2);
        assert!((r - (1.0 + 9.0 / 4.0)).abs() < 1e-12);
        // L² of A cos over the box is A² |box| / 2
        let l2 = f.norm(Norm::Lp(2.0));
        let exact = (2.5f64.powi(2) * grid.spec().box_volume() / 2.0).sqrt();
        assert!((l2 - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn zero_field_norms_vanish() {
        let grid = grid2(1.0, 16);
        let z = SpectralField::zeros(&grid, 2);
        for kind in [Norm::Lp(2.0), Norm::Lp(3.0), Norm::Linf, Norm::Hm(3), Norm::FourierL1] {
            assert_eq!(z.norm(kind), 0.0);
        }
    }

    #[test]
    fn sobolev_weight_matches_enumeration() {
        let xi = [0.3f64, -1.2, 0.7];
        for d in [2, 3] {
            for m in 0..=4 {
                let direct: f64 = multi_indices(d, 0, m)
                    .iter()
                    .map(|b| (0..d).map(|a| xi[a].powi(2 * b[a] as i32)).product::<f64>())
                    .sum();
                assert!((sobolev_weight(xi, d, m) - direct).abs() < 1e-12);
            }
        }
        assert_eq!(multi_indices(2, 0, 3).len(), 10);
        assert_eq!(multi_indices(3, 1, 3).len(), 19);
    }

    #[test]
    fn curl_of_perp_gradient_is_minus_laplacian() {
        let grid = grid2(1.0, 16);
        let a = cosines(&grid, &[([1, 1], 1.0), ([2, 1], 0.3)]);
        let w = a.perp_gradient().unwrap().curl().unwrap();
        let lap = a.laplacian().scaled(-1.0);
        assert!(w.sub(&lap).unwrap().max_abs_coefficient() < 1e-12 * lap.max_abs_coefficient());
        let div = a.perp_gradient().unwrap().divergence().unwrap();
        assert!(div.max_abs_coefficient() <= 1e-13 * a.max_abs_coefficient());
    }

    #[test]
    fn fourier_l1_of_cosine() {
        let grid = grid2(2.0, 32);
        let f = cosines(&grid, &[([1, 0], 1.0)]);
        // two coefficients of size |box|/2, lattice cell (1/L)²
        let expect = grid.spec().box_volume() / 4.0;
        assert!((f.norm(Norm::FourierL1) - expect).abs() < 1e-10 * expect);
        let _ = PI;
    }
}
