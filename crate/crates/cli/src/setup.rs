use std::sync::Arc;

use anyhow::Result;
use boussinesq_core::data::{
    build_a0_2d, build_a0_3d, make_linear_data, perturbation, suggested_grid_3d, DataParams2D, DataParams3D,
};
use boussinesq_core::diagnostics::{choose_sigma, condition_lhs, Condition, ConditionParams};
use boussinesq_core::linear::{LinearFlow, LinearIntegrals, QuadratureMode, QuadratureOptions};
use boussinesq_core::{Grid, GridSpec, Norm, SpectralField};

use crate::config::Config;

pub fn grid_spec(cfg: &Config) -> Result<GridSpec> {
    let eps = cfg.epsilon;
    let mut spec = if cfg.dimension == 2 {
        let l = cfg.grid.l.unwrap_or((4.0 / eps).ceil());
        let n = cfg.grid.n.unwrap_or((16.0 * l).round() as usize);
        GridSpec::new(2, l, n)?
    } else {
        let base = suggested_grid_3d(eps)?;
        let l = cfg.grid.l.unwrap_or(base.scale);
        let n = cfg.grid.n.unwrap_or(base.points[0]);
        let n3 = cfg.grid.n3.unwrap_or(base.points[2]);
        let s = GridSpec::with_points(3, l, &[n, n, n3])?;
        if cfg.grid.dealias.is_none() {
            s.with_dealias(1.0)?
        } else {
            s
        }
    };
    if let Some(f) = cfg.grid.dealias {
        spec = spec.with_dealias(f)?;
    }
    Ok(spec)
}

/// Everything derived from a configuration before time stepping.
pub struct Experiment {
    pub a0: SpectralField,
    pub flow: LinearFlow,
    pub v0: SpectralField,
    pub theta_pert0: SpectralField,
}

impl Experiment {
    pub fn build(cfg: &Config) -> Result<Self> {
        let grid = Grid::new(grid_spec(cfg)?)?;
        let a0 = build_a0(cfg, &grid)?;
        let flow = LinearFlow::from_data(&make_linear_data(&a0)?, cfg.nu, cfg.lambda)?;
        let (v0, theta_pert0) = perturbation(&grid, cfg.perturbation.h3_norm, cfg.perturbation.radius, cfg.seed)?;
        Ok(Experiment { a0, flow, v0, theta_pert0 })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.flow.grid()
    }

    pub fn integrals(&self, cfg: &Config, mode: QuadratureMode) -> Result<LinearIntegrals> {
        let opts = QuadratureOptions { mode, tol: cfg.linear.tol, t_max: cfg.linear.t_max };
        Ok(self.flow.compute_e0_f0(&opts)?)
    }

    pub fn condition(&self, cfg: &Config, e0: f64, f0: f64) -> Condition {
        let params = ConditionParams { c: cfg.condition.c, delta: cfg.condition.delta };
        condition_lhs(self.v0.norm(Norm::Hm(3)), self.theta_pert0.norm(Norm::Hm(3)), e0, f0, &params)
    }

    pub fn sigma(&self, cfg: &Config) -> Result<f64> {
        Ok(choose_sigma(cfg.nu, cfg.lambda, cfg.condition.young_constant)?)
    }
}

fn build_a0(cfg: &Config, grid: &Arc<Grid>) -> Result<SpectralField> {
    let a0 = if cfg.dimension == 2 {
        let p = DataParams2D { epsilon: cfg.epsilon, amplitude: cfg.amplitude(), transition_order: 1 };
        build_a0_2d(&p, grid)?
    } else {
        let p = DataParams3D::new(cfg.epsilon, cfg.p_exponent)?.with_amplitude(cfg.amplitude())?;
        build_a0_3d(&p, grid)?
    };
    Ok(a0)
}
