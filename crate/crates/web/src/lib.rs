//! Browser bindings for the demo page in `www/`.

use std::sync::Arc;

use boussinesq_core::data::{build_a0_2d, make_linear_data, suggested_grid_2d, Amplitude, DataParams2D};
use boussinesq_core::grid::lattice_index;
use boussinesq_core::linear::LinearFlow;
use boussinesq_core::lp::DyadicCutoff;
use boussinesq_core::{Grid, Norm, Result, SpectralField};
use wasm_bindgen::prelude::*;

const MIN_EPSILON: f64 = 0.08;

fn js(e: boussinesq_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn amplitude(epsilon: f64) -> Amplitude {
    if DataParams2D::new(epsilon).is_ok() {
        Amplitude::Law
    } else {
        Amplitude::Fixed(1.0 / epsilon)
    }
}

fn build(epsilon: f64) -> Result<SpectralField> {
    if !(MIN_EPSILON..=0.5).contains(&epsilon) {
        return Err(boussinesq_core::Error::InvalidParameter(format!(
            "epsilon {epsilon} outside [{MIN_EPSILON}, 0.5]"
        )));
    }
    let grid = Grid::new(suggested_grid_2d(epsilon, 1)?.with_dealias(1.0)?)?;
    let p = DataParams2D { epsilon, amplitude: amplitude(epsilon), transition_order: 1 };
    build_a0_2d(&p, &grid)
}

/// Rows `(r, χ(r), φ(r), χ(r) + Σ_q φ(2^{−q}r))`, flattened.
pub fn cutoff_rows(order: u32, r_max: f64, samples: usize) -> Result<Vec<f64>> {
    let cut = DyadicCutoff::build(order)?;
    let top = (r_max.max(1.0)).log2().ceil() as i32 + 2;
    Ok(cut
        .table(r_max, samples.max(2))
        .into_iter()
        .flat_map(|[r, chi, phi]| {
            let sum = chi + (0..=top).map(|q| cut.phi(r / 2f64.powi(q))).sum::<f64>();
            [r, chi, phi, sum]
        })
        .collect())
}

#[wasm_bindgen]
pub fn cutoff_profile(order: u32, r_max: f64, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    cutoff_rows(order, r_max, samples).map_err(js)
}

#[wasm_bindgen]
pub struct InitialData {
    side: usize,
    physical: Vec<f64>,
    spectrum_side: usize,
    spectrum: Vec<f64>,
    theta_linf: f64,
    fourier_l1: f64,
    theta_h3: f64,
    u_linf: f64,
}

impl InitialData {
    pub fn from_field(a0: &SpectralField) -> Result<Self> {
        let grid: &Arc<Grid> = a0.grid();
        let spec = grid.spec();
        let n = spec.points[0];
        let phys = a0.to_physical();
        let values = phys.component(0);
        // centre the origin
        let mut physical = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                physical[i * n + j] = values[((i + n / 2) % n) * n + (j + n / 2) % n];
            }
        }
        let reach = (2.0 * spec.scale).ceil() as i64;
        let side = (2 * reach + 1) as usize;
        let mut spectrum = vec![0.0; side * side];
        let coeffs = a0.component(0);
        for (idx, z) in coeffs.iter().enumerate() {
            let pos = grid.unravel(idx);
            let (k0, k1) = (lattice_index(pos[0], n), lattice_index(pos[1], n));
            if k0.abs() <= reach && k1.abs() <= reach {
                spectrum[(k0 + reach) as usize * side + (k1 + reach) as usize] = z.norm();
            }
        }
        let u0 = make_linear_data(a0)?.u0;
        Ok(InitialData {
            side: n,
            physical,
            spectrum_side: side,
            spectrum,
            theta_linf: phys.norm(Norm::Linf),
            fourier_l1: a0.norm(Norm::FourierL1),
            theta_h3: a0.norm(Norm::Hm(3)),
            u_linf: u0.to_physical().magnitude().into_iter().fold(0.0, f64::max),
        })
    }
}

fn diverging(x: f64) -> [u8; 4] {
    let t = x.clamp(-1.0, 1.0);
    let fade = |c: f64| (255.0 * (1.0 - t.abs()) + c * t.abs()).round() as u8;
    if t >= 0.0 {
        [fade(178.0), fade(24.0), fade(43.0), 255]
    } else {
        [fade(33.0), fade(102.0), fade(172.0), 255]
    }
}

fn rgba(values: &[f64], signed: bool) -> Vec<u8> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    values
        .iter()
        .flat_map(|v| {
            if signed {
                diverging(v / scale)
            } else {
                let g = (255.0 * (1.0 - v / scale)).round() as u8;
                [g, g, g, 255]
            }
        })
        .collect()
}

#[wasm_bindgen]
impl InitialData {
    pub fn side(&self) -> usize {
        self.side
    }

    /// RGBA pixels of `θ₀` on the whole box, origin centred.
    pub fn physical_pixels(&self) -> Vec<u8> {
        rgba(&self.physical, true)
    }

    pub fn spectrum_side(&self) -> usize {
        self.spectrum_side
    }

    /// RGBA pixels of `|θ̂₀|` on `|ξ_i| ≤ 2`.
    pub fn spectrum_pixels(&self) -> Vec<u8> {
        rgba(&self.spectrum, false)
    }

    pub fn theta_linf(&self) -> f64 {
        self.theta_linf
    }

    pub fn fourier_l1(&self) -> f64 {
        self.fourier_l1
    }

    pub fn theta_h3(&self) -> f64 {
        self.theta_h3
    }

    pub fn u_linf(&self) -> f64 {
        self.u_linf
    }
}

#[wasm_bindgen]
pub fn initial_data(epsilon: f64) -> std::result::Result<InitialData, JsError> {
    build(epsilon).and_then(|a0| InitialData::from_field(&a0)).map_err(js)
}

/// Rows `(t, ‖U‖_{H³}, ‖Θ‖_{H³}, ‖f‖_{H³}, ‖g‖_{H³})`, flattened.
pub fn decay_rows(epsilon: f64, nu: f64, lambda: f64, t_end: f64, samples: usize) -> Result<Vec<f64>> {
    let a0 = build(epsilon)?;
    let flow = LinearFlow::from_data(&make_linear_data(&a0)?, nu, lambda)?;
    let gram = flow.forcing_gram()?;
    let u0 = flow.u0().norm(Norm::Hm(3));
    let v0 = flow.v0().norm(Norm::Hm(3));
    let cross = flow.u0().inner_h(flow.v0(), 3)?;
    let th0 = flow.theta0().norm(Norm::Hm(3));
    let n = samples.max(2);
    let mut rows = Vec::with_capacity(5 * n);
    for i in 0..n {
        let t = t_end * i as f64 / (n - 1) as f64;
        let (a, b) = (flow.alpha(t), flow.beta(t));
        let u = (a * a * u0 * u0 + 2.0 * a * b * cross + b * b * v0 * v0).max(0.0).sqrt();
        rows.extend([t, u, (-lambda * t).exp() * th0, gram.f_norm(nu, lambda, t), gram.g_norm_at(nu, lambda, t)]);
    }
    Ok(rows)
}

#[wasm_bindgen]
pub fn linear_decay(
    epsilon: f64,
    nu: f64,
    lambda: f64,
    t_end: f64,
    samples: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    decay_rows(epsilon, nu, lambda, t_end, samples).map_err(js)
}
