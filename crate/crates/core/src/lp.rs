//! Littlewood–Paley decomposition and Besov norms.
//!
//! The low-pass profile `χ` equals 1 on `|ξ| ≤ 3/4`, vanishes for
//! `|ξ| ≥ 4/3` and decreases monotonically in between through an
//! exponential smoothstep. The annular profile is `φ(ξ) = χ(ξ/2) − χ(ξ)`, so
//! `χ + Σ_{q≥0} φ(2^{-q}·)` telescopes to 1.

use std::io::Write;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Norm, SpectralField};

pub const CHI_FLAT: f64 = 3.0 / 4.0;
pub const CHI_SUPPORT: f64 = 4.0 / 3.0;

/// `B(t) = exp(−t^{−order})` for `t > 0`, zero otherwise.
fn bump_edge(t: f64, order: u32) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-t.powi(-(order as i32))).exp()
    }
}

/// Smooth monotone step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between.
pub fn smoothstep(t: f64, order: u32) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_edge(t, order);
    let b = bump_edge(1.0 - t, order);
    a / (a + b)
}

/// Plateau profile: 1 on `[flat_lo, flat_hi]`, 0 outside `(lo, hi)`,
/// smoothstep transitions across each gap.
pub fn plateau(x: f64, lo: f64, flat_lo: f64, flat_hi: f64, hi: f64, order: u32) -> f64 {
    if x <= lo || x >= hi {
        0.0
    } else if x < flat_lo {
        smoothstep((x - lo) / (flat_lo - lo), order)
    } else if x <= flat_hi {
        1.0
    } else {
        1.0 - smoothstep((x - flat_hi) / (hi - flat_hi), order)
    }
}

/// Which Littlewood–Paley operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Inhomogeneous `Δ_q`: `Δ̇_q` for `q ≥ 0`, `χ` for `q = −1`, zero below.
    Inhomogeneous,
    /// Homogeneous `Δ̇_q`: multiplier `φ(2^{−q}ξ)`.
    Homogeneous,
    /// Low-frequency cut-off `S_q`: multiplier `χ(2^{−q}ξ)`.
    LowPass,
}

/// Radial cutoff pair `(χ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicCutoff {
    transition_order: u32,
}

/// Besov norm together with the per-block contributions.
#[derive(Debug, Clone)]
pub struct BesovNorm {
    pub value: f64,
    /// `(q, 2^{qs}‖Δ_q u‖_{L^p})` for every non-empty block.
    pub blocks: Vec<(i32, f64)>,
    /// Blocks whose annulus reaches past the grid's largest frequency while
    /// carrying more than `1e-10` of the norm.
    pub truncated_shells: Vec<i32>,
}

impl BesovNorm {
    pub fn is_truncated(&self) -> bool {
        !self.truncated_shells.is_empty()
    }
}

impl Default for DyadicCutoff {
    fn default() -> Self {
        DyadicCutoff { transition_order: 1 }
    }
}

impl DyadicCutoff {
    pub fn build(transition_order: u32) -> Result<Self> {
        if transition_order == 0 {
            return Err(Error::InvalidParameter("transition order must be at least 1".into()));
        }
        Ok(DyadicCutoff { transition_order })
    }

    pub fn transition_order(&self) -> u32 {
        self.transition_order
    }

    /// `χ(r)` for radius `r = |ξ|`.
    pub fn chi(&self, r: f64) -> f64 {
        1.0 - smoothstep((r - CHI_FLAT) / (CHI_SUPPORT - CHI_FLAT), self.transition_order)
    }

    /// `φ(r) = χ(r/2) − χ(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }

    /// Multiplier of the requested block at radius `r`.
    pub fn multiplier(&self, r: f64, q: i32, kind: BlockKind) -> f64 {
        let scale = (2.0f64).powi(-q);
        match kind {
            BlockKind::Homogeneous => self.phi(scale * r),
            BlockKind::LowPass => self.chi(scale * r),
            BlockKind::Inhomogeneous => match q {
                q if q >= 0 => self.phi(scale * r),
                -1 => self.chi(r),
                _ => 0.0,
            },
        }
    }

    /// Sampled profile `(r, χ(r), φ(r))` on `[0, r_max]`.
    pub fn table(&self, r_max: f64, samples: usize) -> Vec<[f64; 3]> {
        let n = samples.max(2);
        (0..n)
            .map(|i| {
                let r = r_max * i as f64 / (n - 1) as f64;
                [r, self.chi(r), self.phi(r)]
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W, r_max: f64, samples: usize) -> Result<()> {
        writeln!(out, "xi,chi,phi")?;
        for [r, c, p] in self.table(r_max, samples) {
            writeln!(out, "{r:.12e},{c:.17e},{p:.17e}")?;
        }
        Ok(())
    }

    /// Apply `Δ_q`, `Δ̇_q` or `S_q` coefficientwise.
    pub fn block(&self, field: &SpectralField, q: i32, kind: BlockKind) -> SpectralField {
        let radii = radii(field);
        let mut out = field.clone();
        for c in 0..out.components() {
            for (z, &r) in out.component_mut(c).iter_mut().zip(&radii) {
                let m = self.multiplier(r, q, kind);
                *z = if m == 0.0 { Complex64::new(0.0, 0.0) } else { *z * m };
            }
        }
        out
    }

    /// Blocks that can be non-zero for `field`, in increasing `q`.
    pub fn active_blocks(&self, field: &SpectralField, homogeneous: bool) -> Vec<i32> {
        let radii = radii(field);
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
        let mut has_zero_mode = false;
        for (idx, &r) in radii.iter().enumerate() {
            let nonzero = (0..field.components()).any(|c| field.component(c)[idx].norm() > 0.0);
            if !nonzero {
                continue;
            }
            if r == 0.0 {
                has_zero_mode = true;
            } else {
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
        }
        if rmax == 0.0 {
            return if has_zero_mode && !homogeneous { vec![-1] } else { Vec::new() };
        }
        let q_hi = (rmax / CHI_FLAT).log2().ceil() as i32;
        let q_lo = if homogeneous {
            (rmin / (2.0 * CHI_SUPPORT)).log2().floor() as i32
        } else {
            -1
        };
        (q_lo..=q_hi).collect()
    }

    /// `‖(2^{qs}‖Δ_q u‖_{L^p})_q‖_{ℓ^r}`; `p` or `r` may be `f64::INFINITY`.
    pub fn besov_norm(
        &self,
        field: &SpectralField,
        s: f64,
        p: f64,
        r: f64,
        homogeneous: bool,
    ) -> Result<BesovNorm> {
        if !(p >= 1.0) || !(r >= 1.0) {
            return Err(Error::InvalidParameter(format!("need p, r >= 1 (got p = {p}, r = {r})")));
        }
        let kind = if homogeneous { BlockKind::Homogeneous } else { BlockKind::Inhomogeneous };
        let lp = if p.is_infinite() { Norm::Linf } else { Norm::Lp(p) };
        let mut blocks = Vec::new();
        for q in self.active_blocks(field, homogeneous) {
            let b = self.block(field, q, kind);
            if b.is_zero() {
                continue;
            }
            let w = (2.0f64).powf(q as f64 * s) * b.norm(lp);
            blocks.push((q, w));
        }
        let value = if r.is_infinite() {
            blocks.iter().map(|b| b.1).fold(0.0, f64::max)
        } else {
            blocks.iter().map(|b| b.1.powf(r)).sum::<f64>().powf(1.0 / r)
        };
        let edge = field.grid().spec().max_frequency();
        let truncated_shells = blocks
            .iter()
            .filter(|(q, w)| {
                let outer = if *q < 0 && !homogeneous {
                    CHI_SUPPORT
                } else {
                    2.0 * CHI_SUPPORT * (2.0f64).powi(*q)
                };
                outer > edge && *w > 1e-10 * value
            })
            .map(|b| b.0)
            .collect();
        Ok(BesovNorm { value, blocks, truncated_shells })
    }
}

fn radii(field: &SpectralField) -> Vec<f64> {
    let mut out = vec![0.0; field.grid().len()];
    field
        .grid()
        .for_each_mode(|idx, xi| out[idx] = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt());
    out
}
