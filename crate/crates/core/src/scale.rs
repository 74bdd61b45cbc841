//! Pollaczek–Khinchine survival probability and scale functions.
//!
//! Everything here derives from one renewal measure of the tilted model,
//!
//! ```text
//! S = Σ_{n>=0} ρ̃ⁿ (L ∗ G̃)^{∗n} ∗ G̃,     L(dy) = ν̃(y, ∞) dy / ∫ y ν̃(dy),
//! ```
//!
//! with `1 - θ̃(x) = (1 - ρ̃) S[0, x]`, `W_Φ(dx) = S(dx)/c̃` and
//! `W^{(q)}(x) = e^{Φx} W_Φ(x)`.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::{geometric_convolution_series, Grid, GridCurve, GridFunction};
use crate::model::LevyModel;
use crate::quad::simpson;
use crate::tilt::{g_density, tilt_model, TiltedModel};

/// Relative gap between `W_Φ(x_max)` and its limit above which a truncation
/// warning is attached.
pub const LIMIT_TOLERANCE: f64 = 1e-3;

/// Grid extent for a query at surplus `x`: four times the surplus or forty
/// mean claim sizes, whichever is larger.
pub fn default_x_max(model: &LevyModel, x: f64) -> f64 {
    (4.0 * x).max(40.0 * model.measure().mean_jump())
}

/// Default grid for a query at surplus `x`.
pub fn default_grid(model: &LevyModel, x: f64) -> Result<Grid> {
    Grid::covering(default_x_max(model, x))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleFunctions {
    tilted: TiltedModel,
    grid: Grid,
    renewal: GridFunction,
    /// Number of series terms kept.
    pub terms: usize,
    /// Bound on the mass of the dropped series terms.
    pub tail_bound: f64,
    /// Set when the grid is too short for `W_Φ` to reach its limit.
    pub warning: Option<String>,
}

impl ScaleFunctions {
    pub fn new(model: &LevyModel, q: f64, grid: Grid) -> Result<Self> {
        Self::from_tilted(tilt_model(model, q)?, grid)
    }

    pub fn from_tilted(tilted: TiltedModel, grid: Grid) -> Result<Self> {
        let g = g_density(&tilted, grid);
        let scale = tilted.tilted_mean;
        let ladder = GridFunction::from_density(grid, 0.0, |y| tilted.tilted_tail(y) / scale);
        let base = if tilted.sigma() == 0.0 { ladder } else { ladder.convolve(&g)? };
        let series = geometric_convolution_series(&base, tilted.rho_tilde, &g)?;
        let mut out = Self {
            tilted,
            grid,
            renewal: series.sum,
            terms: series.terms,
            tail_bound: series.tail_bound,
            warning: None,
        };
        let limit = out.w_phi_limit();
        let gap = (out.scale_function_tilted().last() - limit).abs() / limit;
        if gap >= LIMIT_TOLERANCE {
            out.warning = Some(format!(
                "grid extent {} too short: W_Phi(x_max) is {gap:.2e} (relative) below its limit",
                grid.x_max()
            ));
        }
        Ok(out)
    }

    pub fn tilted(&self) -> &TiltedModel {
        &self.tilted
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn phi(&self) -> f64 {
        self.tilted.phi
    }

    /// `1 - θ̃(x)` at the nodes.
    pub fn pk_survival(&self) -> GridCurve {
        let k = 1.0 - self.tilted.rho_tilde;
        self.renewal.cumulative().map(|_, v| (k * v).min(1.0))
    }

    /// The measure `W_Φ(dx)`; it carries an atom `1/c̃` at zero when `σ = 0`.
    pub fn w_phi_measure(&self) -> GridFunction {
        self.renewal.scale(1.0 / self.tilted.c_tilde)
    }

    /// `x ↦ W_Φ(x)` at the nodes.
    pub fn scale_function_tilted(&self) -> GridCurve {
        self.w_phi_measure().cumulative()
    }

    /// `W_Φ(∞) = 1/(c̃(1 - ρ̃))`.
    pub fn w_phi_limit(&self) -> f64 {
        1.0 / (self.tilted.c_tilde * (1.0 - self.tilted.rho_tilde))
    }

    /// `x ↦ W^{(q)}(x) = e^{Φx} W_Φ(x)` at the nodes.
    pub fn scale_function(&self) -> GridCurve {
        let phi = self.tilted.phi;
        self.scale_function_tilted().map(|x, w| (phi * x).exp() * w)
    }

    /// `f₁(dx) = e^{Φx} W_Φ(dx)`, i.e. `W^{(q)'} - Φ W^{(q)}` plus the atom
    /// `1/c` at zero when `σ = 0`.
    pub fn f1(&self) -> GridFunction {
        self.w_phi_measure().exp_weight(self.tilted.phi)
    }

    /// `∫_0^∞ e^{-λy} W^{(q)}(y) dy` by quadrature on the grid, with the part
    /// beyond `x_max` closed using `W_Φ(x_max)`.
    pub fn laplace_transform(&self, lambda: f64) -> Result<f64> {
        let r = lambda - self.tilted.phi;
        if !(r > 0.0) {
            return Err(domain("laplace_transform", format!("need lambda > Phi(q) = {}", self.tilted.phi)));
        }
        let w = self.scale_function_tilted();
        let samples: Vec<f64> = w.values().iter().enumerate().map(|(i, v)| (-r * self.grid.node(i)).exp() * v).collect();
        let x_max = self.grid.x_max();
        Ok(simpson(&samples, self.grid.step()) + w.last() * (-r * x_max).exp() / r)
    }
}
