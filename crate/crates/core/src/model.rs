use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::measure::LevyMeasure;

/// `Y_t = -c t + S_t - σ B_t`; ruin of the surplus `x - Y` happens when `Y`
/// first exceeds `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct LevyModel {
    c: f64,
    sigma: f64,
    measure: LevyMeasure,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    c: f64,
    sigma: f64,
    claims: LevyMeasure,
}

impl TryFrom<RawModel> for LevyModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        LevyModel::new(raw.c, raw.sigma, raw.claims)
    }
}

impl From<LevyModel> for RawModel {
    fn from(m: LevyModel) -> Self {
        RawModel { c: m.c, sigma: m.sigma, claims: m.measure }
    }
}

impl LevyModel {
    pub fn new(c: f64, sigma: f64, measure: LevyMeasure) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(invalid("c", format!("premium rate must be finite and > 0, got {c}")));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(invalid("sigma", format!("volatility must be finite and >= 0, got {sigma}")));
        }
        measure.validate()?;
        let mean = measure.mean();
        if !(mean < c) {
            return Err(Error::NetProfit { mean, premium: c });
        }
        Ok(Self { c, sigma, measure })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }

    /// `ψ_S(α)` for `α <= 0`.
    pub fn psi_subordinator(&self, alpha: f64) -> Result<f64> {
        self.measure.psi_subordinator(alpha)
    }

    /// Laplace exponent `ψ(β) = cβ + ψ_S(-β) + σ²β²/2` of `-Y`, `β >= 0`.
    pub fn psi(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(domain("psi", format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(self.c * beta + self.measure.psi_subordinator(-beta)? + 0.5 * self.sigma * self.sigma * beta * beta)
    }

    /// `ψ'(β) = c + σ²β - ∫ y e^{-βy} ν(dy)`.
    pub fn psi_prime(&self, beta: f64) -> f64 {
        self.c + self.sigma * self.sigma * beta - self.measure.tilted_mean(beta)
    }

    /// Right inverse `Φ(q)`: the largest root of `ψ(β) = q`.
    pub fn phi_inverse(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(domain("phi_inverse", format!("q must be finite and >= 0, got {q}")));
        }
        if q == 0.0 {
            // ψ'(0+) = c - E[S_1] > 0, so 0 is the only root
            return Ok(0.0);
        }
        let f = |b: f64| self.psi(b).map(|v| v - q);
        let mut lo = 0.0;
        let mut hi = q.max(1.0) / self.c;
        while f(hi)? <= 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        // ψ is convex and increasing past 0, so Newton from the right end
        // decreases monotonically onto the root; bisection guards round-off.
        // Iterating to a relative step of a few ulps keeps Φ accurate for
        // small q, where a residual test alone would stop early.
        let mut b = hi;
        for _ in 0..200 {
            let v = f(b)?;
            if v == 0.0 {
                return Ok(b);
            }
            if v > 0.0 {
                hi = b;
            } else {
                lo = b;
            }
            let d = self.psi_prime(b);
            let mut next = b - v / d;
            if !(next > lo && next < hi) || d <= 0.0 {
                next = 0.5 * (lo + hi);
            }
            if (next - b).abs() <= 4.0 * f64::EPSILON * b {
                b = next;
                break;
            }
            b = next;
        }
        Ok(b)
    }

    /// `ρ = E[S_1] / c`.
    pub fn rho(&self) -> f64 {
        self.measure.mean() / self.c
    }
}
