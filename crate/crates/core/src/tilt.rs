//! The model under the exponential change of measure `dP̃/dP = e^{-Φ(q)Y_t - qt}`.
//!
//! Under `P̃` the premium rate becomes `c̃ = c + σ²Φ(q)` and the Lévy measure
//! `ν̃(dy) = e^{-Φ(q)y} ν(dy)`; the process still drifts to `-∞`.

use serde::Serialize;

use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::model::LevyModel;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltedModel {
    #[serde(skip)]
    base: LevyModel,
    pub q: f64,
    pub phi: f64,
    pub c_tilde: f64,
    /// `∫ y ν̃(dy)`.
    pub tilted_mean: f64,
    pub rho_tilde: f64,
}

pub fn tilt_model(model: &LevyModel, q: f64) -> Result<TiltedModel> {
    let phi = model.phi_inverse(q)?;
    let c_tilde = model.c() + model.sigma().powi(2) * phi;
    let tilted_mean = model.measure().tilted_mean(phi);
    Ok(TiltedModel { base: model.clone(), q, phi, c_tilde, tilted_mean, rho_tilde: tilted_mean / c_tilde })
}

impl TiltedModel {
    pub fn base(&self) -> &LevyModel {
        &self.base
    }

    pub fn sigma(&self) -> f64 {
        self.base.sigma()
    }

    /// `ν̃(u, ∞)`.
    pub fn tilted_tail(&self, u: f64) -> f64 {
        self.base.measure().tilted_tail(u, self.phi)
    }

    /// Rate `2c̃/σ²` of the descending ladder law `G̃`; infinite when `σ = 0`.
    pub fn g_rate(&self) -> f64 {
        let s2 = self.sigma().powi(2);
        if s2 == 0.0 {
            f64::INFINITY
        } else {
            2.0 * self.c_tilde / s2
        }
    }
}

/// `G̃`, the exponential law of rate `2c̃/σ²`; a unit atom at zero when `σ = 0`.
pub fn g_density(tilted: &TiltedModel, grid: Grid) -> GridFunction {
    let rate = tilted.g_rate();
    if rate.is_infinite() {
        GridFunction::dirac(grid)
    } else {
        GridFunction::exponential(grid, rate)
    }
}

/// `H̃(du) = ν̃(u, ∞)/c̃ du`, of mass `ρ̃`.
pub fn h_density(tilted: &TiltedModel, grid: Grid) -> GridFunction {
    GridFunction::from_density(grid, 0.0, |u| tilted.tilted_tail(u) / tilted.c_tilde)
}

/// `H̃ ∗ G̃`, of mass `ρ̃`.
pub fn overshoot_law_at_tau(tilted: &TiltedModel, grid: Grid) -> Result<GridFunction> {
    h_density(tilted, grid).convolve(&g_density(tilted, grid))
}
