//! Lévy measures of the claim subordinator and the tail-type primitives the
//! analytic formulas consume.
//!
//! Parametric kinds are compound Poisson: `ν(dy) = λ K(dy)` with `K` an
//! exponential, gamma or uniform claim law. The tabulated kind supplies the
//! tail `N(y) = ν(y, ∞)` on a uniform grid (linear interpolation, zero past
//! the last sample); every other primitive is derived from it by
//! differentiation or quadrature.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur as statrs_gamma_ur, ln_gamma};

use crate::error::{domain, invalid, Result};
use crate::quad::{gauss_legendre, integrate_decaying};

/// Regularized upper incomplete gamma `Q(a, x)`, with `Q(a, 0) = 1`.
fn gamma_ur(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        statrs_gamma_ur(a, x)
    }
}

/// Below this value of `θ · E[claim]` the closed forms that divide by `θ`
/// lose too many digits and the primitives fall back to quadrature.
const SMALL_TILT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyMeasure {
    /// Poisson rate `lambda`, claims `Exp(mu)`.
    Exponential { lambda: f64, mu: f64 },
    /// Poisson rate `lambda`, claims `Gamma(shape, rate)`; `shape >= 1`.
    Gamma { lambda: f64, shape: f64, rate: f64 },
    /// Poisson rate `lambda`, claims uniform on `[lower, upper]`.
    Uniform { lambda: f64, lower: f64, upper: f64 },
    /// Tail samples `N(k * step)`, `k = 0..tail.len()`.
    Tabulated { step: f64, tail: Vec<f64> },
}

fn finite_positive(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(invalid(name, format!("must be finite and > 0, got {v}")));
    }
    Ok(())
}

impl LevyMeasure {
    pub fn exponential(lambda: f64, mu: f64) -> Result<Self> {
        let m = Self::Exponential { lambda, mu };
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(lambda: f64, shape: f64, rate: f64) -> Result<Self> {
        let m = Self::Gamma { lambda, shape, rate };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(lambda: f64, lower: f64, upper: f64) -> Result<Self> {
        let m = Self::Uniform { lambda, lower, upper };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(step: f64, tail: Vec<f64>) -> Result<Self> {
        let m = Self::Tabulated { step, tail };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { lambda, mu } => {
                finite_positive("lambda", lambda)?;
                finite_positive("mu", mu)
            }
            Self::Gamma { lambda, shape, rate } => {
                finite_positive("lambda", lambda)?;
                finite_positive("rate", rate)?;
                finite_positive("shape", shape)?;
                if shape < 1.0 {
                    return Err(invalid("shape", "gamma claims need shape >= 1 (finite density at 0)"));
                }
                Ok(())
            }
            Self::Uniform { lambda, lower, upper } => {
                finite_positive("lambda", lambda)?;
                if !lower.is_finite() || lower < 0.0 {
                    return Err(invalid("lower", format!("must be finite and >= 0, got {lower}")));
                }
                finite_positive("upper", upper)?;
                if upper <= lower {
                    return Err(invalid("upper", "must exceed `lower`"));
                }
                Ok(())
            }
            Self::Tabulated { step, ref tail } => {
                finite_positive("step", step)?;
                if tail.len() < 2 {
                    return Err(invalid("tail", "need at least two samples"));
                }
                if tail.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(invalid("tail", "samples must be finite and >= 0"));
                }
                if tail.windows(2).any(|w| w[1] > w[0]) {
                    return Err(invalid("tail", "samples must be nonincreasing"));
                }
                if tail[0] <= 0.0 {
                    return Err(invalid("tail", "first sample must be > 0"));
                }
                Ok(())
            }
        }
    }

    /// Total jump intensity `ν(0, ∞)`.
    pub fn jump_rate(&self) -> f64 {
        match *self {
            Self::Exponential { lambda, .. } | Self::Gamma { lambda, .. } | Self::Uniform { lambda, .. } => lambda,
            Self::Tabulated { ref tail, .. } => tail[0],
        }
    }

    /// `E[S_1] = ∫ y ν(dy)`.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { lambda, mu } => lambda / mu,
            Self::Gamma { lambda, shape, rate } => lambda * shape / rate,
            Self::Uniform { lambda, lower, upper } => lambda * 0.5 * (lower + upper),
            Self::Tabulated { .. } => self.tab_integral_from(0.0, |_, n| n),
        }
    }

    /// Mean size of a single jump, `E[S_1] / ν(0, ∞)`; the natural length scale.
    pub fn mean_jump(&self) -> f64 {
        self.mean() / self.jump_rate()
    }

    /// `∫_0^∞ I(y) dy = ½ ∫ y² ν(dy)`.
    pub fn half_second_moment(&self) -> f64 {
        match *self {
            Self::Exponential { lambda, mu } => lambda / (mu * mu),
            Self::Gamma { lambda, shape, rate } => lambda * shape * (shape + 1.0) / (2.0 * rate * rate),
            Self::Uniform { lambda, lower: a, upper: b } => lambda * (a * a + a * b + b * b) / 6.0,
            Self::Tabulated { .. } => self.tab_integral_from(0.0, |s, n| s * n),
        }
    }

    /// Density of `ν` with respect to Lebesgue measure.
    pub fn density(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { lambda, mu } => lambda * mu * (-mu * y).exp(),
            Self::Gamma { lambda, shape, rate } => {
                if y == 0.0 {
                    return if shape == 1.0 { lambda * rate } else { 0.0 };
                }
                let ln = shape * rate.ln() + (shape - 1.0) * y.ln() - rate * y - ln_gamma(shape);
                lambda * ln.exp()
            }
            Self::Uniform { lambda, lower, upper } => {
                if (lower..=upper).contains(&y) {
                    lambda / (upper - lower)
                } else {
                    0.0
                }
            }
            Self::Tabulated { step, ref tail } => {
                let last = tail.len() - 1;
                let pos = y / step;
                if pos >= last as f64 {
                    return 0.0;
                }
                let k = pos.floor() as usize;
                let slope = |j: usize| (tail[j] - tail[j + 1]) / step;
                if pos == k as f64 && k > 0 {
                    0.5 * (slope(k - 1) + slope(k))
                } else {
                    slope(k)
                }
            }
        }
    }

    /// Tail `N(y) = ν(y, ∞)`.
    pub fn tail(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        match *self {
            Self::Exponential { lambda, mu } => lambda * (-mu * y).exp(),
            Self::Gamma { lambda, shape, rate } => lambda * gamma_ur(shape, rate * y),
            Self::Uniform { lambda, lower, upper } => {
                if y < lower {
                    lambda
                } else if y < upper {
                    lambda * (upper - y) / (upper - lower)
                } else {
                    0.0
                }
            }
            Self::Tabulated { step, ref tail } => {
                let last = tail.len() - 1;
                let pos = y / step;
                if pos >= last as f64 {
                    return if pos == last as f64 { tail[last] } else { 0.0 };
                }
                let k = pos.floor() as usize;
                let frac = pos - k as f64;
                tail[k] + frac * (tail[k + 1] - tail[k])
            }
        }
    }

    /// Integrated tail `I(y) = ∫_y^∞ N(s) ds = ∫_(y,∞) (s - y) ν(ds)`.
    pub fn integrated_tail(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        match *self {
            Self::Exponential { lambda, mu } => lambda / mu * (-mu * y).exp(),
            Self::Gamma { lambda, shape, rate } => {
                let v = shape / rate * gamma_ur(shape + 1.0, rate * y) - y * gamma_ur(shape, rate * y);
                lambda * v.max(0.0)
            }
            Self::Uniform { lambda, lower, upper } => {
                if y <= lower {
                    lambda * (0.5 * (lower + upper) - y)
                } else if y < upper {
                    lambda * (upper - y).powi(2) / (2.0 * (upper - lower))
                } else {
                    0.0
                }
            }
            Self::Tabulated { step, ref tail } => {
                // exact for the piecewise-linear interpolant
                let last = tail.len() - 1;
                let end = last as f64 * step;
                if y >= end {
                    return 0.0;
                }
                let k = (y / step).floor() as usize;
                let right = (k + 1) as f64 * step;
                let mut acc = 0.5 * (self.tail(y) + tail[k + 1]) * (right - y);
                for j in k + 1..last {
                    acc += 0.5 * (tail[j] + tail[j + 1]) * step;
                }
                acc
            }
        }
    }

    /// Exponentially tilted tail `N_θ(y) = ∫_(y,∞) e^{-θs} ν(ds)`.
    pub fn tilted_tail(&self, y: f64, theta: f64) -> f64 {
        let y = y.max(0.0);
        match *self {
            Self::Exponential { lambda, mu } => lambda * mu / (mu + theta) * (-(mu + theta) * y).exp(),
            Self::Gamma { lambda, shape, rate } => {
                let r = rate + theta;
                lambda * (shape * (rate / r).ln()).exp() * gamma_ur(shape, r * y)
            }
            _ => (-theta * y).exp() * self.discounted_tail(y, theta),
        }
    }

    /// `k_θ(y) = ∫_(y,∞) e^{-θ(s-y)} ν(ds) = e^{θy} N_θ(y)`, computed without
    /// forming `e^{θy}`.
    pub fn discounted_tail(&self, y: f64, theta: f64) -> f64 {
        let y = y.max(0.0);
        match *self {
            Self::Exponential { lambda, mu } => lambda * mu / (mu + theta) * (-mu * y).exp(),
            Self::Gamma { lambda, shape, rate } => {
                let r = rate + theta;
                let q = gamma_ur(shape, r * y);
                if q <= 0.0 {
                    return 0.0;
                }
                lambda * (theta * y + shape * (rate / r).ln() + q.ln()).exp()
            }
            Self::Uniform { lambda, lower, upper } => {
                if y >= upper {
                    return 0.0;
                }
                let lo = y.max(lower);
                let len = upper - lo;
                let width = if theta == 0.0 {
                    len
                } else {
                    (-theta * (lo - y)).exp() * -(-theta * len).exp_m1() / theta
                };
                lambda / (upper - lower) * width
            }
            Self::Tabulated { .. } => {
                if theta == 0.0 {
                    return self.tail(y);
                }
                self.tail(y) - theta * self.tab_integral_from(y, |s, n| (-theta * (s - y)).exp() * n)
            }
        }
    }

    /// `∫ y e^{-θy} ν(dy)`; at `θ = 0` this is the mean.
    pub fn tilted_mean(&self, theta: f64) -> f64 {
        match *self {
            Self::Exponential { lambda, mu } => lambda * mu / (mu + theta).powi(2),
            Self::Gamma { lambda, shape, rate } => {
                let r = rate + theta;
                lambda * shape / r * (shape * (rate / r).ln()).exp()
            }
            Self::Uniform { lambda, lower, upper } => {
                lambda / (upper - lower) * gauss_legendre(|s| s * (-theta * s).exp(), lower, upper, 8)
            }
            Self::Tabulated { .. } => self.tab_integral_from(0.0, |s, n| n * (1.0 - theta * s) * (-theta * s).exp()),
        }
    }

    /// Laplace exponent `ψ_S(α) = ∫ (e^{αy} - 1) ν(dy)` for `α <= 0`.
    pub fn psi_subordinator(&self, alpha: f64) -> Result<f64> {
        if !(alpha <= 0.0) {
            return Err(domain("psi_subordinator", format!("alpha must be <= 0, got {alpha}")));
        }
        if alpha == 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            Self::Exponential { lambda, mu } => lambda * alpha / (mu - alpha),
            Self::Gamma { lambda, shape, rate } => lambda * (shape * (rate / (rate - alpha)).ln()).exp_m1(),
            Self::Uniform { lambda, lower, upper } => {
                lambda / (upper - lower) * gauss_legendre(|s| (alpha * s).exp_m1(), lower, upper, 8)
            }
            Self::Tabulated { .. } => alpha * self.tab_integral_from(0.0, |s, n| (alpha * s).exp() * n),
        })
    }

    /// `∫_0^∞ e^{-θs} N(x+s) ds`, i.e. `e^{θx} ∫_x^∞ e^{-θv} N(v) dv`.
    pub fn discounted_tail_integral(&self, x: f64, theta: f64) -> f64 {
        let x = x.max(0.0);
        if theta == 0.0 {
            return self.integrated_tail(x);
        }
        match *self {
            Self::Exponential { lambda, mu } => lambda * (-mu * x).exp() / (mu + theta),
            Self::Gamma { .. } | Self::Uniform { .. } if theta * self.mean_jump() > SMALL_TILT => {
                ((self.tail(x) - self.discounted_tail(x, theta)) / theta).max(0.0)
            }
            _ => self.shifted_integral(x, |s| (-theta * s).exp() * self.tail(x + s)),
        }
    }

    /// `∫_0^∞ e^{-θs} I(x+s) ds`, i.e. `e^{θx} ∫_x^∞ e^{-θv} I(v) dv`.
    pub fn discounted_integrated_tail(&self, x: f64, theta: f64) -> f64 {
        let x = x.max(0.0);
        match *self {
            Self::Exponential { lambda, mu } => lambda / mu * (-mu * x).exp() / (mu + theta),
            Self::Gamma { .. } | Self::Uniform { .. } if theta * self.mean_jump() > SMALL_TILT => {
                ((self.integrated_tail(x) - self.discounted_tail_integral(x, theta)) / theta).max(0.0)
            }
            _ => self.shifted_integral(x, |s| (-theta * s).exp() * self.integrated_tail(x + s)),
        }
    }

    /// Points where the tail is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::Uniform { lower, upper, .. } => vec![lower, upper],
            Self::Tabulated { step, ref tail } => (0..tail.len()).map(|k| k as f64 * step).collect(),
            _ => Vec::new(),
        }
    }

    /// Support end of the tail, if bounded.
    fn support_end(&self) -> Option<f64> {
        match *self {
            Self::Uniform { upper, .. } => Some(upper),
            Self::Tabulated { step, ref tail } => Some((tail.len() - 1) as f64 * step),
            _ => None,
        }
    }

    /// `∫_0^∞ f(s) ds` for an integrand built from tail values at `x + s`.
    fn shifted_integral<F: Fn(f64) -> f64>(&self, x: f64, f: F) -> f64 {
        match self.support_end() {
            None => integrate_decaying(f, 0.0, self.mean_jump()),
            Some(end) => {
                if x >= end {
                    return 0.0;
                }
                let mut cuts: Vec<f64> = self
                    .breakpoints()
                    .into_iter()
                    .map(|b| b - x)
                    .filter(|&b| b > 0.0 && b < end - x)
                    .collect();
                cuts.insert(0, 0.0);
                cuts.push(end - x);
                cuts.windows(2).map(|w| gauss_legendre(&f, w[0], w[1], 1)).sum()
            }
        }
    }

    /// `∫_y^end g(s, N(s)) ds` over the tabulated segments.
    fn tab_integral_from<G: Fn(f64, f64) -> f64>(&self, y: f64, g: G) -> f64 {
        let Self::Tabulated { step, ref tail } = *self else {
            unreachable!("tabulated helper on a parametric measure")
        };
        let last = tail.len() - 1;
        let end = last as f64 * step;
        if y >= end {
            return 0.0;
        }
        let first = (y / step).floor() as usize;
        let mut acc = 0.0;
        for k in first..last {
            let a = (k as f64 * step).max(y);
            let b = (k + 1) as f64 * step;
            let (na, nb) = (tail[k], tail[k + 1]);
            let seg = |s: f64| {
                let n = na + (nb - na) * (s - k as f64 * step) / step;
                g(s, n)
            };
            acc += gauss_legendre(seg, a, b, 1);
        }
        acc
    }
}
