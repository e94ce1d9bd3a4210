//! Periodic box discretisation of the whole space.
//!
//! A box of side `2πL` per axis is sampled at `N_i` points on axis `i`. The
//! associated frequency lattice is `{k/L : k ∈ ℤ^d, |k_i| ≤ N_i/2}`, so the
//! lattice spacing is `1/L`. Spectral coefficients approximate the whole-space
//! Fourier transform `f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx`; the forward transform
//! therefore carries the cell volume as quadrature weight and the inverse
//! carries `1/(2πL)^d`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Dealiasing fraction of the classical two-thirds rule.
pub const TWO_THIRDS: f64 = 2.0 / 3.0;

/// Shape and scale of a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    /// Box scale `L`: side `2πL`, lattice spacing `1/L`.
    pub scale: f64,
    /// Points per axis; unused axes hold 1.
    pub points: [usize; 3],
    pub dealias_fraction: f64,
}

impl GridSpec {
    /// Isotropic grid with `n` points on every axis and the two-thirds rule.
    pub fn new(dim: usize, scale: f64, n: usize) -> Result<Self> {
        Self::with_points(dim, scale, &vec![n; dim])
    }

    /// Grid with per-axis point counts. In 3D the vertical axis may be coarser
    /// than the horizontal ones (the data of interest is thin in `ξ₃`); the
    /// horizontal axes must still resolve `|ξ| ≤ 4`.
    pub fn with_points(dim: usize, scale: f64, points: &[usize]) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if points.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} point counts given for a {dim}-dimensional grid",
                points.len()
            )));
        }
        let mut pts = [1usize; 3];
        pts[..dim].copy_from_slice(points);
        let spec = GridSpec {
            dim,
            scale,
            points: pts,
            dealias_fraction: TWO_THIRDS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_dealias(mut self, fraction: f64) -> Result<Self> {
        self.dealias_fraction = fraction;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidGrid(format!("scale L = {} must be positive", self.scale)));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {} not in (0, 1]",
                self.dealias_fraction
            )));
        }
        for (axis, &n) in self.points[..self.dim].iter().enumerate() {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: N = {n} must be even and at least 8"
                )));
            }
            let horizontal = axis < 2;
            if horizontal && (n as f64) / (2.0 * self.scale) < 4.0 - 1e-12 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: max frequency N/(2L) = {:.3} < 4",
                    n as f64 / (2.0 * self.scale)
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn box_side(&self) -> f64 {
        2.0 * PI * self.scale
    }

    pub fn box_volume(&self) -> f64 {
        self.box_side().powi(self.dim as i32)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.box_side() / self.points[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Frequency-lattice cell volume `(1/L)^d`.
    pub fn frequency_cell(&self) -> f64 {
        self.scale.powi(-(self.dim as i32))
    }

    /// Largest frequency representable on every axis.
    pub fn max_frequency(&self) -> f64 {
        self.shape()
            .iter()
            .map(|&n| n as f64 / (2.0 * self.scale))
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.shape().iter().map(|n| n.to_string()).collect();
        write!(
            f,
            "d={} L={} N={} dealias={:.4}",
            self.dim,
            self.scale,
            pts.join("x"),
            self.dealias_fraction
        )
    }
}

/// Integer lattice index of array position `j` on an axis with `n` points.
/// The Nyquist position `n/2` maps to `-n/2`.
pub fn lattice_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Grid plus precomputed wavenumbers, dealias masks and FFT plans. Shared by
/// every field living on it.
pub struct Grid {
    spec: GridSpec,
    /// `ξ = k/L` per axis, Nyquist as `-N/(2L)`.
    freqs: Vec<Vec<f64>>,
    /// Wavenumbers used for differentiation: Nyquist set to zero.
    deriv_freqs: Vec<Vec<f64>>,
    keep: Vec<Vec<bool>>,
    mask: Vec<bool>,
    strides: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

const GATHER_COLUMNS: usize = 32;

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let shape = spec.shape().to_vec();
        let mut planner = FftPlanner::<f64>::new();
        let mut freqs = Vec::with_capacity(spec.dim);
        let mut deriv_freqs = Vec::with_capacity(spec.dim);
        let mut keep = Vec::with_capacity(spec.dim);
        let mut forward = Vec::with_capacity(spec.dim);
        let mut inverse = Vec::with_capacity(spec.dim);
        for &n in &shape {
            let f: Vec<f64> = (0..n).map(|j| lattice_index(j, n) as f64 / spec.scale).collect();
            let mut df = f.clone();
            df[n / 2] = 0.0;
            let kmax = (spec.dealias_fraction * n as f64 / 2.0 + 1e-9).floor() as i64;
            let kmax = kmax.min(n as i64 / 2 - 1);
            let k: Vec<bool> = (0..n).map(|j| lattice_index(j, n).abs() <= kmax).collect();
            freqs.push(f);
            deriv_freqs.push(df);
            keep.push(k);
            forward.push(planner.plan_fft_forward(n));
            inverse.push(planner.plan_fft_inverse(n));
        }
        let mut strides = vec![1usize; spec.dim];
        for a in (0..spec.dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let mut grid = Grid {
            spec,
            freqs,
            deriv_freqs,
            keep,
            mask: Vec::new(),
            strides,
            forward,
            inverse,
        };
        grid.mask = grid.build_mask();
        Ok(Arc::new(grid))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    pub fn freqs(&self, axis: usize) -> &[f64] {
        &self.freqs[axis]
    }

    pub fn deriv_freqs(&self, axis: usize) -> &[f64] {
        &self.deriv_freqs[axis]
    }

    /// Multi-index of flat position `idx`.
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in 0..self.spec.dim {
            out[a] = (idx / self.strides[a]) % self.spec.points[a];
        }
        out
    }

    pub fn ravel(&self, pos: [usize; 3]) -> usize {
        (0..self.spec.dim).map(|a| pos[a] * self.strides[a]).sum()
    }

    /// Flat position of the mode `-k` for the mode stored at `idx`.
    pub fn mirror(&self, idx: usize) -> usize {
        let pos = self.unravel(idx);
        let mut m = [0usize; 3];
        for a in 0..self.spec.dim {
            let n = self.spec.points[a];
            m[a] = (n - pos[a]) % n;
        }
        self.ravel(m)
    }

    /// Flat position of lattice index `k` (each `|k_i| < N_i/2`), if representable.
    pub fn position_of(&self, k: &[i64]) -> Option<usize> {
        let mut pos = [0usize; 3];
        for a in 0..self.spec.dim {
            let n = self.spec.points[a] as i64;
            if k[a].abs() >= n / 2 {
                return None;
            }
            pos[a] = k[a].rem_euclid(n) as usize;
        }
        Some(self.ravel(pos))
    }

    /// Calls `f(idx, ξ)` for every lattice mode, `ξ` padded with zeros to 3 entries.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [f64; 3])) {
        let d = self.spec.dim;
        let [n0, n1, n2] = self.spec.points;
        let mut idx = 0;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                if d == 2 {
                    f(idx, [self.freqs[0][i0], self.freqs[1][i1], 0.0]);
                    idx += 1;
                } else {
                    for i2 in 0..n2 {
                        f(idx, [self.freqs[0][i0], self.freqs[1][i1], self.freqs[2][i2]]);
                        idx += 1;
                    }
                }
            }
        }
    }

    /// Same as [`Grid::for_each_mode`] with the differentiation wavenumbers.
    pub fn for_each_deriv_mode(&self, mut f: impl FnMut(usize, [f64; 3])) {
        let d = self.spec.dim;
        let [n0, n1, n2] = self.spec.points;
        let fr = &self.deriv_freqs;
        let mut idx = 0;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                if d == 2 {
                    f(idx, [fr[0][i0], fr[1][i1], 0.0]);
                    idx += 1;
                } else {
                    for i2 in 0..n2 {
                        f(idx, [fr[0][i0], fr[1][i1], fr[2][i2]]);
                        idx += 1;
                    }
                }
            }
        }
    }

    /// Physical coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let pos = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.spec.dim {
            x[a] = pos[a] as f64 * self.spec.spacing(a);
        }
        x
    }

    /// Whether the mode at `idx` survives dealiasing.
    pub fn keeps(&self, idx: usize) -> bool {
        let pos = self.unravel(idx);
        (0..self.spec.dim).all(|a| self.keep[a][pos[a]])
    }

    /// Dealias mask over all modes.
    pub fn keep_mask(&self) -> &[bool] {
        &self.mask
    }

    fn build_mask(&self) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.len());
        let [n0, n1, n2] = self.spec.points;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let mut k = self.keep[0][i0] && self.keep[1][i1];
                    if self.spec.dim == 3 {
                        k = k && self.keep[2][i2];
                    }
                    mask.push(k);
                }
            }
        }
        mask
    }

    pub(crate) fn fft(&self, data: &mut [Complex64], inverse: bool) {
        let plans = if inverse { &self.inverse } else { &self.forward };
        let shape = self.spec.shape();
        let mut scratch = Vec::new();
        let mut buf = Vec::new();
        for axis in 0..self.spec.dim {
            let n = shape[axis];
            let plan = &plans[axis];
            let stride = self.strides[axis];
            let need = plan.get_inplace_scratch_len();
            if scratch.len() < need {
                scratch.resize(need, Complex64::new(0.0, 0.0));
            }
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            buf.resize(n * GATHER_COLUMNS.min(stride), Complex64::new(0.0, 0.0));
            for chunk in data.chunks_exact_mut(block) {
                let mut c0 = 0;
                while c0 < stride {
                    let w = GATHER_COLUMNS.min(stride - c0);
                    for j in 0..w {
                        let line = &mut buf[j * n..(j + 1) * n];
                        for (i, v) in line.iter_mut().enumerate() {
                            *v = chunk[i * stride + c0 + j];
                        }
                    }
                    plan.process_with_scratch(&mut buf[..w * n], &mut scratch);
                    for j in 0..w {
                        let line = &buf[j * n..(j + 1) * n];
                        for (i, v) in line.iter().enumerate() {
                            chunk[i * stride + c0 + j] = *v;
                        }
                    }
                    c0 += w;
                }
            }
        }
    }

    /// Inverse transforms of Hermitian spectra to real samples, two at a time.
    pub fn inverse_real(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let norm = 1.0 / self.spec.box_volume();
        let mut out = Vec::with_capacity(spectra.len());
        let mut work = vec![Complex64::new(0.0, 0.0); self.len()];
        for pair in spectra.chunks(2) {
            let i = Complex64::new(0.0, 1.0);
            match pair {
                [a, b] => {
                    for ((w, &x), &y) in work.iter_mut().zip(a.iter()).zip(b.iter()) {
                        *w = x + i * y;
                    }
                }
                [a] => work.copy_from_slice(a),
                _ => unreachable!(),
            }
            self.fft(&mut work, true);
            out.push(work.iter().map(|z| z.re * norm).collect());
            if pair.len() == 2 {
                out.push(work.iter().map(|z| z.im * norm).collect());
            }
        }
        out
    }

    /// Forward transforms of real samples, two at a time.
    pub fn forward_real(&self, samples: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let weight = self.spec.cell_volume();
        let mut out = Vec::with_capacity(samples.len());
        let mut work = vec![Complex64::new(0.0, 0.0); self.len()];
        for pair in samples.chunks(2) {
            match pair {
                [a, b] => {
                    for ((w, &x), &y) in work.iter_mut().zip(a.iter()).zip(b.iter()) {
                        *w = Complex64::new(x, y);
                    }
                }
                [a] => {
                    for (w, &x) in work.iter_mut().zip(a.iter()) {
                        *w = Complex64::new(x, 0.0);
                    }
                }
                _ => unreachable!(),
            }
            self.fft(&mut work, false);
            if pair.len() == 1 {
                out.push(work.iter().map(|z| z * weight).collect());
                continue;
            }
            let n = self.len();
            let mut first = vec![Complex64::new(0.0, 0.0); n];
            let mut second = vec![Complex64::new(0.0, 0.0); n];
            let half = 0.5 * weight;
            self.for_each_mirror_pair(|idx, m| {
                let z = work[idx];
                let zm = work[m].conj();
                first[idx] = (z + zm) * half;
                // (z - zm) / (2i)
                let diff = z - zm;
                second[idx] = Complex64::new(diff.im, -diff.re) * half;
            });
            out.push(first);
            out.push(second);
        }
        out
    }

    fn for_each_mirror_pair(&self, mut f: impl FnMut(usize, usize)) {
        let [n0, n1, n2] = self.spec.points;
        let d = self.spec.dim;
        let mut idx = 0;
        for i0 in 0..n0 {
            let m0 = (n0 - i0) % n0;
            for i1 in 0..n1 {
                let m1 = (n1 - i1) % n1;
                if d == 2 {
                    f(idx, m0 * n1 + m1);
                    idx += 1;
                } else {
                    for i2 in 0..n2 {
                        let m2 = (n2 - i2) % n2;
                        f(idx, (m0 * n1 + m1) * n2 + m2);
                        idx += 1;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(4, 1.0, 16).is_err());
        assert!(GridSpec::new(2, 1.0, 7).is_err());
        assert!(GridSpec::new(2, 1.0, 6).is_err());
        assert!(GridSpec::new(2, -1.0, 16).is_err());
        // N/(2L) = 2 < 4
        assert!(GridSpec::new(2, 4.0, 16).is_err());
        assert!(GridSpec::new(2, 2.0, 16).is_ok());
        assert!(GridSpec::new(2, 1.0, 16).unwrap().with_dealias(0.0).is_err());
        assert!(GridSpec::with_points(3, 2.0, &[16, 16, 8]).is_ok());
        assert!(GridSpec::with_points(3, 2.0, &[16, 8, 8]).is_err());
    }

    #[test]
    fn lattice_indices_wrap() {
        assert_eq!(lattice_index(0, 8), 0);
        assert_eq!(lattice_index(3, 8), 3);
        assert_eq!(lattice_index(4, 8), -4);
        assert_eq!(lattice_index(7, 8), -1);
    }

    #[test]
    fn mirror_and_position_agree() {
        let grid = Grid::new(GridSpec::with_points(3, 1.0, &[8, 10, 8]).unwrap()).unwrap();
        let idx = grid.position_of(&[2, -3, 1]).unwrap();
        assert_eq!(grid.mirror(idx), grid.position_of(&[-2, 3, -1]).unwrap());
        assert!(grid.position_of(&[4, 0, 0]).is_none());
    }

    #[test]
    fn dealias_mask_follows_two_thirds() {
        let grid = Grid::new(GridSpec::new(2, 1.0, 12).unwrap()).unwrap();
        // floor(2/3 * 6) = 4
        assert!(grid.keeps(grid.position_of(&[4, -4]).unwrap()));
        assert!(!grid.keeps(grid.position_of(&[5, 0]).unwrap()));
        let full = Grid::new(GridSpec::new(2, 1.0, 12).unwrap().with_dealias(1.0).unwrap()).unwrap();
        assert!(full.keeps(full.position_of(&[5, -5]).unwrap()));
        assert_eq!(grid.keep_mask().iter().filter(|&&k| k).count(), 81);
    }
}
