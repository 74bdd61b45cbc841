//! Expected discounted value of capital injections.
//!
//! Every time the surplus goes below zero by a claim, capital is injected to
//! bring it back to zero; at ruin the injection is the deficit, afterwards it
//! is the increment of each new record of `Y`. The value is
//! `V = φ + δ/(1 - ξ) · κ`.

use serde::Serialize;

use crate::edpf::Analysis;
use crate::error::{domain, Error, Result};
use crate::grid::{geometric_convolution_series, Grid, GridFunction};
use crate::model::LevyModel;
use crate::scale::default_grid;

/// Smallest discount rate accepted by [`edvci_value`].
pub const Q_MIN: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct EdvciReport {
    pub q: f64,
    pub x: f64,
    pub varphi: f64,
    pub kappa: f64,
    pub xi: f64,
    pub delta: f64,
    pub V: f64,
    /// The same value from the compound-Poisson formulas, when `σ = 0`.
    pub classical_V: Option<f64>,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(domain("q", format!("the discount rate must be finite and > 0, got {q}")));
    }
    Ok(())
}

/// `ξ(q, σ) = E[e^{-qτ}; τ < ∞]` for the first record by a claim from level 0.
pub fn xi(model: &LevyModel, q: f64) -> Result<f64> {
    check_q(q)?;
    let phi = model.phi_inverse(q)?;
    Ok(xi_with_phi(model, q, phi))
}

fn xi_with_phi(model: &LevyModel, q: f64, phi: f64) -> f64 {
    1.0 - q / (phi * (model.c() + 0.5 * model.sigma().powi(2) * phi))
}

/// `δ(q, σ) = E[e^{-qτ} Y_τ; τ < ∞]` for the first record by a claim from level 0.
pub fn delta(model: &LevyModel, q: f64) -> Result<f64> {
    check_q(q)?;
    let phi = model.phi_inverse(q)?;
    Ok(delta_with_phi(model, q, phi))
}

fn delta_with_phi(model: &LevyModel, q: f64, phi: f64) -> f64 {
    let d = phi * (2.0 * model.c() + phi * model.sigma().powi(2));
    2.0 * model.c() / d * (2.0 * q / d + model.rho() - 1.0)
}

/// `lim_{q→0} ξ = ρ`.
pub fn xi_at_zero(model: &LevyModel) -> f64 {
    model.rho()
}

/// `lim_{q→0} δ = (∫ y² ν(dy)/2 + ρσ²/2) / c`.
pub fn delta_at_zero(model: &LevyModel) -> f64 {
    (model.measure().half_second_moment() + 0.5 * model.rho() * model.sigma().powi(2)) / model.c()
}

impl Analysis {
    /// `κ(q, x) = E[e^{-qτ_x}; τ_x < ∞]`: ruin by a claim, `(f₁ ∗ t)(x)`,
    /// plus ruin by creeping, `σ²/2 · f₁(x)`.
    pub fn kappa(&self, x: f64) -> Result<f64> {
        let i = self.node_of(x)?;
        let s2 = self.model().sigma().powi(2);
        if i == 0 && s2 > 0.0 {
            // the diffusion crosses zero immediately
            return Ok(1.0);
        }
        let by_claim = self.f1().apply_at(self.t_curve().values(), i);
        Ok((by_claim + 0.5 * s2 * self.f1_density(i)).min(1.0))
    }

    /// `φ(q, x) = E[e^{-qτ_x} (Y_{τ_x} - x); τ_x < ∞] = (f₁ ∗ h)(x)`.
    pub fn varphi(&self, x: f64) -> Result<f64> {
        let i = self.node_of(x)?;
        Ok(self.f1().apply_at(self.h_curve().values(), i))
    }

    pub fn edvci(&self, x: f64) -> Result<EdvciReport> {
        let q = self.q();
        if !(q >= Q_MIN) {
            return Err(domain("edvci", format!("q must be >= {Q_MIN}, got {q}")));
        }
        let model = self.model();
        let xi = xi_with_phi(model, q, self.phi());
        let delta = delta_with_phi(model, q, self.phi());
        if !(xi < 1.0) {
            return Err(Error::Divergent(xi));
        }
        let kappa = self.kappa(x)?;
        let varphi = self.varphi(x)?;
        let v = varphi + delta / (1.0 - xi) * kappa;
        let classical = if model.sigma() == 0.0 { Some(classical_edvci(model, q, x, self.grid())?) } else { None };
        Ok(EdvciReport { q, x, varphi, kappa, xi, delta, V: v, classical_V: classical })
    }
}

/// Full report on the default grid.
pub fn edvci_value(model: &LevyModel, q: f64, x: f64) -> Result<EdvciReport> {
    if !(q >= Q_MIN) {
        return Err(domain("edvci", format!("q must be >= {Q_MIN}, got {q}")));
    }
    Analysis::for_surplus(model, q, x)?.edvci(x)
}

/// `V(q, x)` for `σ = 0` from the compound-Poisson formulas: the scale
/// function as the series `(1/c) Σ ηⁿ` with `η(dy) = ν̃(y, ∞) dy / c`,
/// `ξ = 1 - q/(Φc)` and `δ = (q - (c - E[S_1])Φ)/(cΦ²)`.
pub fn classical_edvci(model: &LevyModel, q: f64, x: f64, grid: Grid) -> Result<f64> {
    if model.sigma() != 0.0 {
        return Err(Error::Unsupported("the classical reduction needs sigma = 0".into()));
    }
    if !(q >= Q_MIN) {
        return Err(domain("edvci", format!("q must be >= {Q_MIN}, got {q}")));
    }
    let c = model.c();
    let m = model.measure();
    let phi = model.phi_inverse(q)?;
    let i = grid
        .index_of(x)
        .ok_or_else(|| domain("surplus", format!("x = {x} is not a node of the grid")))?;
    let eta = GridFunction::from_density(grid, 0.0, |y| m.tilted_tail(y, phi) / c);
    let renewal = geometric_convolution_series(&eta, 1.0, &GridFunction::dirac(grid))?.sum;
    let f1 = renewal.scale(1.0 / c).exp_weight(phi);
    let t: Vec<f64> = grid.nodes().map(|v| m.discounted_tail_integral(v, phi)).collect();
    let h: Vec<f64> = grid.nodes().map(|v| m.discounted_integrated_tail(v, phi)).collect();
    let kappa = f1.apply_at(&t, i);
    let varphi = f1.apply_at(&h, i);
    let xi = 1.0 - q / (phi * c);
    let delta = (q - (c - m.mean()) * phi) / (c * phi * phi);
    Ok(varphi + delta / (1.0 - xi) * kappa)
}

/// Default grid helper used by callers that sweep several surpluses.
pub fn grid_for(model: &LevyModel, xs: &[f64]) -> Result<Grid> {
    let x = xs.iter().copied().fold(0.0, f64::max);
    default_grid(model, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edpf::{deficit, increment, PenaltySpec};
    use crate::measure::LevyMeasure;

    fn model(sigma: f64) -> LevyModel {
        LevyModel::new(1.5, sigma, LevyMeasure::exponential(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn m1_at_zero_surplus() {
        let r = edvci_value(&model(0.0), 1.0, 0.0).unwrap();
        assert!((r.xi - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.delta - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.kappa - 1.0 / 3.0).abs() < 1e-8);
        assert!((r.varphi - 1.0 / 3.0).abs() < 1e-8);
        assert!((r.V - 0.5).abs() < 1e-8);
        assert!((r.classical_V.unwrap() - r.V).abs() < 1e-10);
    }

    #[test]
    fn t_and_h_closed_forms() {
        let a = Analysis::for_surplus(&model(0.0), 1.0, 1.0).unwrap();
        assert!((a.t_curve().at(0.0) - 0.5).abs() < 1e-14);
        assert!((a.h_curve().at(0.0) - 0.5).abs() < 1e-14);
        for x in [0.5, 2.0] {
            assert!((a.h_curve().at(x) - (-x).exp() / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kappa_at_q0_is_ruin_probability() {
        let a = Analysis::for_surplus(&model(0.0), 0.0, 1.0).unwrap();
        let exact = 2.0 / 3.0 * (-1.0 / 3.0f64).exp();
        assert!((a.kappa(1.0).unwrap() - exact).abs() < 1e-4);
        let a = Analysis::for_surplus(&model(1.0), 0.0, 1.0).unwrap();
        let ruin = 1.0 - a.scale().pk_survival().at(1.0);
        assert!((a.kappa(1.0).unwrap() - ruin).abs() < 1e-3);
    }

    #[test]
    fn xi_is_mass_and_delta_is_mean_of_increment_law() {
        for sigma in [0.0, 0.5, 1.0] {
            for q in [0.3, 1.0, 2.0] {
                let a = Analysis::for_surplus(&model(sigma), q, 1.0).unwrap();
                let j = a.increment_law().unwrap();
                let mean: f64 = {
                    let g = a.grid();
                    let v: Vec<f64> = j.values().iter().enumerate().map(|(i, d)| d * g.node(i)).collect();
                    crate::quad::trapezoid(&v, g.step())
                };
                let m = model(sigma);
                assert!((j.mass() - xi(&m, q).unwrap()).abs() < 1e-4, "ξ σ={sigma} q={q}");
                assert!((mean - delta(&m, q).unwrap()).abs() < 1e-4, "δ σ={sigma} q={q}");
            }
        }
    }

    #[test]
    fn extended_edpf_with_increments_is_edvci() {
        for sigma in [0.0, 1.0] {
            let a = Analysis::for_surplus(&model(sigma), 1.0, 1.0).unwrap();
            let e = a.extended_edpf(1.0, &PenaltySpec::stationary(deficit(), increment())).unwrap();
            let v = a.edvci(1.0).unwrap().V;
            assert!((e.value - v).abs() < 1e-4 * v, "σ={sigma}: {} vs {v}", e.value);
        }
    }

    #[test]
    fn small_sigma_is_close_to_classical() {
        let grid = default_grid(&model(0.0), 2.0).unwrap();
        for q in [0.5, 1.0] {
            for x in [0.5, 1.0, 2.0] {
                let a = Analysis::new(&model(1e-3), q, grid).unwrap();
                let v = a.edvci(x).unwrap().V;
                let c = classical_edvci(&model(0.0), q, x, grid).unwrap();
                assert!((v - c).abs() < 0.01 * c, "q={q} x={x}: {v} vs {c}");
            }
        }
    }

    #[test]
    fn limits_and_guards() {
        let m = model(1.0);
        assert!(xi(&m, 0.0).is_err());
        assert!(delta(&m, -1.0).is_err());
        assert!(edvci_value(&m, 1e-5, 1.0).is_err());
        assert!((xi(&m, 1e-7).unwrap() - xi_at_zero(&m)).abs() < 1e-5);
        assert!((delta(&m, 1e-7).unwrap() - delta_at_zero(&m)).abs() < 1e-4);
        let m1 = model(0.0);
        assert!((delta(&m1, 1e-7).unwrap() - delta_at_zero(&m1)).abs() < 1e-4);
    }
}
