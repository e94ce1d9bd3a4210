//! Seeded random band-limited fields for perturbations and property checks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::{Norm, SpectralField};
use crate::grid::Grid;

/// Real field whose spectrum is random on `0 < |ξ| ≤ radius` and zero
/// elsewhere, normalised to unit root-mean-square value per component.
pub fn band_limited(grid: &Arc<Grid>, components: usize, radius: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let mut comps = Vec::with_capacity(components);
    for _ in 0..components {
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        grid.for_each_mode(|idx, xi| {
            let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            if r > 0.0 && r <= radius && grid.keeps(idx) {
                c[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        });
        comps.push(c);
    }
    let mut f = SpectralField::from_components(grid, comps).expect("lengths match grid");
    f.symmetrize();
    let rms = f.norm(Norm::Hm(0)) / (grid.spec().box_volume() * components as f64).sqrt();
    if rms > 0.0 {
        f = f.scaled(1.0 / rms);
    }
    f
}

/// Divergence-free random vector field on `|ξ| ≤ radius`.
pub fn solenoidal(grid: &Arc<Grid>, radius: f64, seed: u64) -> Result<SpectralField> {
    band_limited(grid, grid.dim(), radius, seed).leray_project()
}

/// Rescale a non-zero field so that `‖f‖ = target` in the given norm.
pub fn with_norm(field: &SpectralField, kind: Norm, target: f64) -> SpectralField {
    let n = field.norm(kind);
    if n == 0.0 {
        field.clone()
    } else {
        field.scaled(target / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn deterministic_real_and_band_limited() {
        let grid = Grid::new(GridSpec::new(2, 1.0, 16).unwrap()).unwrap();
        let a = band_limited(&grid, 1, 3.0, 7);
        let b = band_limited(&grid, 1, 3.0, 7);
        assert_eq!(a.component(0), b.component(0));
        assert!(a.hermitian_defect() < 1e-14 * a.max_abs_coefficient());
        grid.for_each_mode(|idx, xi| {
            if (xi[0] * xi[0] + xi[1] * xi[1]).sqrt() > 3.0 {
                assert_eq!(a.component(0)[idx].norm(), 0.0);
            }
        });
        let s = solenoidal(&grid, 3.0, 1).unwrap();
        let div = s.divergence().unwrap();
        assert!(div.max_abs_coefficient() < 1e-13 * s.max_abs_coefficient());
    }
}
