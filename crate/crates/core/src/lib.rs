//! Pseudo-spectral laboratory for the damped Boussinesq equations
//!
//! ```text
//! ∂ₜu + u·∇u + νu + ∇p = θ e_d,   ∂ₜθ + u·∇θ + λθ = 0,   div u = 0
//! ```
//!
//! on a large periodic box standing in for ℝ^d (d = 2, 3). The crate builds
//! band-limited large initial data, evolves the linearised damped flow in
//! closed form, integrates the full and perturbation systems, and evaluates
//! the energy functionals and inequalities of the global-existence argument.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod linear;
pub mod lp;
pub mod quadrature;
pub mod random;
pub mod sim;
pub mod snapshot;

pub use error::{Error, Result};
pub use field::{advect, Norm, PhysicalField, SpectralField};
pub use grid::{Grid, GridSpec};
