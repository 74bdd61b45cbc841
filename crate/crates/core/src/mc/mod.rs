//! Monte Carlo oracle: path simulation of `Y_t = -ct + S_t - σB_t` with ruin,
//! creeping and post-ruin record detection, and sample-mean estimators for
//! every analytic quantity of the crate.

mod estimate;
mod path;

pub use estimate::{estimate, estimate_many, Estimate, Target};
pub use path::{simulate_first_record, simulate_path, FirstRecord, RecordEvent, RuinPathRecord};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::LevyMeasure;
use crate::model::LevyModel;

/// Discount level at which a discount-driven horizon stops a path.
pub const DISCOUNT_EPSILON: f64 = 1e-6;

/// Time step of the sub-stepping fallback.
pub const SUBSTEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Horizon {
    /// Stop every path at this time.
    Fixed(f64),
    /// Stop once `e^{-qt} < DISCOUNT_EPSILON`; needs `q > 0`.
    Discount,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub model: LevyModel,
    pub x: f64,
    pub q: f64,
    pub horizon: Horizon,
    pub paths: u64,
    pub seed: u64,
    /// Exact bridge sampling between claims; off means sub-stepping at [`SUBSTEP`].
    pub bridge_correction: bool,
}

impl SimConfig {
    /// Discount-driven horizon with bridge sampling; `q = 0` needs
    /// [`SimConfig::with_horizon`].
    pub fn new(model: LevyModel, x: f64, q: f64, paths: u64, seed: u64) -> Self {
        Self { model, x, q, horizon: Horizon::Discount, paths, seed, bridge_correction: true }
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.model.measure(), LevyMeasure::Tabulated { .. }) {
            return Err(Error::Unsupported(
                "simulation needs a compound Poisson claim law (exponential, gamma or uniform)".into(),
            ));
        }
        if !(self.x >= 0.0) || !self.x.is_finite() {
            return Err(invalid("x", format!("must be finite and >= 0, got {}", self.x)));
        }
        if !(self.q >= 0.0) || !self.q.is_finite() {
            return Err(invalid("q", format!("must be finite and >= 0, got {}", self.q)));
        }
        if self.paths == 0 {
            return Err(invalid("paths", "need at least one path"));
        }
        match self.horizon {
            Horizon::Fixed(t) if !(t > 0.0) || !t.is_finite() => {
                Err(invalid("horizon", format!("T_max must be finite and > 0, got {t}")))
            }
            Horizon::Discount if self.q == 0.0 => {
                Err(invalid("horizon", "q = 0 needs a fixed T_max; a discount-driven horizon never ends"))
            }
            _ => Ok(()),
        }
    }

    pub fn horizon_time(&self) -> f64 {
        match self.horizon {
            Horizon::Fixed(t) => t,
            Horizon::Discount => -DISCOUNT_EPSILON.ln() / self.q,
        }
    }
}
