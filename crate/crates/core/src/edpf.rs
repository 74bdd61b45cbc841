//! Gerber–Shiu functions: the classical expected discounted penalty at ruin
//! and its extension to every later record of `Y` reached by a claim.
//!
//! Penalties use the surplus convention: `w(surplus_prior, deficit)` where
//! `surplus_prior = x - Y_{τ-}` and `deficit = Y_τ - x`. Subsequent penalties
//! take levels of `Y`, `F(level_before, level_after)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, invalid, Result};
use crate::grid::{geometric_convolution_series, Grid, GridCurve, GridFunction};
use crate::model::LevyModel;
use crate::quad::{simpson, trapezoid};
use crate::scale::{default_grid, ScaleFunctions};
use crate::tilt::TiltedModel;

/// A penalty of two arguments.
pub type Penalty = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Omitted mass allowed in the record series of [`Analysis::extended_edpf`].
pub const EXTENDED_TOLERANCE: f64 = 1e-10;

/// What happens after the listed subsequent penalties run out.
#[derive(Clone)]
pub enum TailRule {
    Zero,
    Repeat(Penalty),
}

/// Penalties `F_2, F_3, …` applied at the records after ruin.
#[derive(Clone)]
pub enum Subsequent {
    None,
    /// The same function for every `n >= 2`.
    Stationary(Penalty),
    /// `F_2, …, F_{k+1}` followed by the tail rule.
    List(Vec<Penalty>, TailRule),
}

#[derive(Clone)]
pub struct PenaltySpec {
    pub first: Penalty,
    pub subsequent: Subsequent,
}

impl fmt::Debug for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = match &self.subsequent {
            Subsequent::None => "none".to_string(),
            Subsequent::Stationary(_) => "stationary".to_string(),
            Subsequent::List(v, TailRule::Zero) => format!("{} listed, then zero", v.len()),
            Subsequent::List(v, TailRule::Repeat(_)) => format!("{} listed, then repeated", v.len()),
        };
        f.debug_struct("PenaltySpec").field("subsequent", &sub).finish_non_exhaustive()
    }
}

/// `w(u, v) = v`.
pub fn deficit() -> Penalty {
    Arc::new(|_, d| d)
}

/// `w(u, v) = 1{v > 0}`.
pub fn indicator() -> Penalty {
    Arc::new(|_, d| if d > 0.0 { 1.0 } else { 0.0 })
}

/// `w(u, v) = min(v, cap)`.
pub fn capped_deficit(cap: f64) -> Penalty {
    Arc::new(move |_, d| d.min(cap))
}

/// `F(v, u) = u - v`.
pub fn increment() -> Penalty {
    Arc::new(|before, after| after - before)
}

/// `F(v, u) = min(u - v, cap)`.
pub fn capped_increment(cap: f64) -> Penalty {
    Arc::new(move |before, after| (after - before).min(cap))
}

impl PenaltySpec {
    /// Penalty at ruin only.
    pub fn classical(first: Penalty) -> Self {
        Self { first, subsequent: Subsequent::None }
    }

    pub fn stationary(first: Penalty, rest: Penalty) -> Self {
        Self { first, subsequent: Subsequent::Stationary(rest) }
    }

    /// Checks `w(·, 0) = 0` and nonnegativity on a sample of `[0, extent]²`.
    pub fn validate(&self, extent: f64) -> Result<()> {
        let pts: Vec<f64> = (0..=32).map(|k| extent * k as f64 / 32.0).collect();
        for &u in &pts {
            let v = (self.first)(u, 0.0);
            if v != 0.0 {
                return Err(invalid("penalty.first", format!("must vanish at zero deficit; w({u}, 0) = {v}")));
            }
        }
        let check = |name: &'static str, f: &Penalty, shift: bool| -> Result<()> {
            for &a in &pts {
                for &b in &pts {
                    let (p, r) = if shift { (a, a + b) } else { (a, b) };
                    let v = f(p, r);
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(invalid(name, format!("must be finite and >= 0; got {v} at ({p}, {r})")));
                    }
                }
            }
            Ok(())
        };
        check("penalty.first", &self.first, false)?;
        match &self.subsequent {
            Subsequent::None => Ok(()),
            Subsequent::Stationary(f) => check("penalty.subsequent", f, true),
            Subsequent::List(fs, tail) => {
                for f in fs {
                    check("penalty.subsequent", f, true)?;
                }
                match tail {
                    TailRule::Zero => Ok(()),
                    TailRule::Repeat(f) => check("penalty.subsequent", f, true),
                }
            }
        }
    }
}

/// Law of the deficit at ruin, in the deficit coordinate `d = Y_τ - x`.
///
/// `tilted` is the defective law under the tilted measure (mass equal to the
/// tilted ruin probability); `discounted` is `E[e^{-qτ}; Y_τ - x ∈ dd]`.
/// Both carry the creeping contribution as an atom at `d = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct OvershootLaw {
    pub tilted: GridFunction,
    pub discounted: GridFunction,
}

/// Outcome of [`Analysis::extended_edpf`].
#[derive(Clone, Debug, Serialize)]
pub struct ExtendedEdpf {
    pub value: f64,
    /// The ruin term `φ(w)` alone.
    pub classic: f64,
    /// Record terms summed before the stationary tail.
    pub explicit_terms: usize,
    /// Upper bound on the omitted part of the series.
    pub tail_bound: f64,
}

/// Scale functions of one `(model, q)` pair on one grid, plus the
/// discounted tail curves every functional is built from.
#[derive(Clone, Debug)]
pub struct Analysis {
    model: LevyModel,
    q: f64,
    scale: ScaleFunctions,
    f1: GridFunction,
    /// `k(s) = ∫_(s,∞) e^{-Φ(y-s)} ν(dy)` on nodes `0..=2N`.
    k: Vec<f64>,
    t: GridCurve,
    h: GridCurve,
}

impl Analysis {
    pub fn new(model: &LevyModel, q: f64, grid: Grid) -> Result<Self> {
        let scale = ScaleFunctions::new(model, q, grid)?;
        let phi = scale.phi();
        let m = model.measure();
        let f1 = scale.f1();
        let k = (0..=2 * grid.intervals()).map(|i| m.discounted_tail(grid.node(i), phi)).collect();
        let t = GridCurve::from_fn(grid, |x| m.discounted_tail_integral(x, phi));
        let h = GridCurve::from_fn(grid, |x| m.discounted_integrated_tail(x, phi));
        Ok(Self { model: model.clone(), q, scale, f1, k, t, h })
    }

    /// Analysis on the default grid for surplus `x`.
    pub fn for_surplus(model: &LevyModel, q: f64, x: f64) -> Result<Self> {
        Self::new(model, q, default_grid(model, x)?)
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn phi(&self) -> f64 {
        self.scale.phi()
    }

    pub fn grid(&self) -> Grid {
        self.scale.grid()
    }

    pub fn tilted(&self) -> &TiltedModel {
        self.scale.tilted()
    }

    pub fn scale(&self) -> &ScaleFunctions {
        &self.scale
    }

    /// `f₁(dx) = e^{Φx} W_Φ(dx)`.
    pub fn f1(&self) -> &GridFunction {
        &self.f1
    }

    /// `t(x) = ∫_0^∞ e^{-Φs} N(x+s) ds`.
    pub fn t_curve(&self) -> &GridCurve {
        &self.t
    }

    /// `h(x) = ∫_0^∞ e^{-Φs} I(x+s) ds`.
    pub fn h_curve(&self) -> &GridCurve {
        &self.h
    }

    /// `f₁(x)` as a point value: the density of `f₁` for `x > 0`, and
    /// `W'(0+) = 2/σ²` at the origin.
    pub(crate) fn f1_density(&self, i: usize) -> f64 {
        let s2 = self.model.sigma().powi(2);
        if i == 0 && s2 > 0.0 {
            2.0 / s2
        } else {
            self.f1.values()[i]
        }
    }

    /// `f₁` at a grid node `x`, with the exact value `2/σ²` at the origin.
    pub fn f1_at(&self, x: f64) -> Result<f64> {
        Ok(self.f1_density(self.node_of(x)?))
    }

    /// Node index of the surplus `x`.
    pub(crate) fn node_of(&self, x: f64) -> Result<usize> {
        let grid = self.grid();
        if !(x >= 0.0) {
            return Err(domain("surplus", format!("x must be >= 0, got {x}")));
        }
        grid.index_of(x).ok_or_else(|| {
            domain(
                "surplus",
                format!("x = {x} is not a node of the grid (step {}, x_max {})", grid.step(), grid.x_max()),
            )
        })
    }

    /// Deficit law at ruin from surplus `x > 0`.
    pub fn overshoot_dist_tx(&self, x: f64) -> Result<OvershootLaw> {
        if !(x > 0.0) {
            return Err(domain("overshoot_dist_tx", format!("x must be > 0, got {x}")));
        }
        let ix = self.node_of(x)?;
        let grid = self.grid();
        let n = grid.intervals();
        let h = grid.step();
        let phi = self.phi();
        let f1 = self.f1.values();
        // trapezoid weights for ∫_{[0,x]} f₁(dy) k(x - y + d)
        let mut wts: Vec<f64> = (0..=ix).map(|j| h * f1[j]).collect();
        wts[0] *= 0.5;
        wts[ix] *= 0.5;
        let mut values = Vec::with_capacity(n + 1);
        for d in 0..=n {
            // y = j Δ contributes k((ix - j + d) Δ)
            let mut acc = self.f1.atom() * self.k[ix + d];
            for (j, w) in wts.iter().enumerate() {
                acc += w * self.k[ix - j + d];
            }
            values.push(acc);
        }
        let creep = 0.5 * self.model.sigma().powi(2) * self.f1_density(ix);
        let discounted = GridFunction::new(grid, creep, values)?;
        let tilted = discounted.exp_weight(-phi).scale((-phi * x).exp());
        Ok(OvershootLaw { tilted, discounted })
    }

    /// `g(v) = ∫_0^∞ w(v, d) ν(v + d) dd` on nodes `0..=last`.
    fn ruin_intensity(&self, w: &Penalty, last: usize) -> Vec<f64> {
        let grid = self.grid();
        let n = grid.intervals();
        let m = self.model.measure();
        let density: Vec<f64> = (0..=last + n).map(|i| m.density(grid.node(i))).collect();
        let mut row = vec![0.0; n + 1];
        (0..=last)
            .map(|i| {
                let v = grid.node(i);
                for (j, r) in row.iter_mut().enumerate().skip(1) {
                    *r = w(v, grid.node(j)) * density[i + j];
                }
                // w(v, 0) = 0 by convention; the integrand needs the limit d → 0+
                let w0 = 3.0 * w(v, grid.node(1)) - 3.0 * w(v, grid.node(2)) + w(v, grid.node(3));
                row[0] = w0 * density[i];
                simpson(&row, grid.step())
            })
            .collect()
    }

    /// `f₂(x) = ∫_0^∞ e^{-Φs} g(x + s) ds` on nodes `0..=last`.
    fn f2_upto(&self, w: &Penalty, last: usize) -> Vec<f64> {
        let grid = self.grid();
        let n = grid.intervals();
        let g = self.ruin_intensity(w, last + n);
        let phi = self.phi();
        let h = grid.step();
        let discount: Vec<f64> = (0..=n).map(|j| (-phi * grid.node(j)).exp()).collect();
        let mut row = vec![0.0; n + 1];
        (0..=last)
            .map(|i| {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = discount[j] * g[i + j];
                }
                simpson(&row, h)
            })
            .collect()
    }

    /// `f₂` for the penalty `w` on the whole grid.
    pub fn f2(&self, w: &Penalty) -> GridCurve {
        let grid = self.grid();
        GridCurve::from_values(grid, self.f2_upto(w, grid.intervals())).expect("one value per node")
    }

    /// `φ(w, q, x) = (f₁ ∗ f₂)(x)`.
    pub fn classic_edpf(&self, x: f64, w: &Penalty) -> Result<f64> {
        let ix = self.node_of(x)?;
        let f2 = self.f2_upto(w, ix);
        Ok(self.f1.apply_at(&f2, ix))
    }

    /// `φ(w, q, x)` from the scale-function form
    /// `∫_0^∞ g(v) [e^{-Φv} W^{(q)}(x) - W^{(q)}(x - v)] dv`.
    pub fn edpf_scale_form(&self, x: f64, w: &Penalty) -> Result<f64> {
        let ix = self.node_of(x)?;
        let grid = self.grid();
        let n = grid.intervals();
        let step = grid.step();
        let phi = self.phi();
        let wphi = self.scale.scale_function_tilted();
        let wv = wphi.values();
        let g = self.ruin_intensity(w, ix + n);
        let near: Vec<f64> = (0..=ix)
            .map(|i| (phi * grid.node(ix - i)).exp() * (wv[ix] - wv[ix - i]) * g[i])
            .collect();
        // beyond v = x the second scale function vanishes
        let far: Vec<f64> = (ix..=ix + n)
            .map(|i| (phi * (x - grid.node(i))).exp() * wv[ix] * g[i])
            .collect();
        Ok(simpson(&near, step) + simpson(&far, step))
    }

    /// `P̃(N = n, τ_x < ∞)` where `N` counts the records after ruin.
    pub fn n_distribution(&self, x: f64, n: u32) -> Result<f64> {
        let ix = self.node_of(x)?;
        let ruin = 1.0 - self.scale.pk_survival().values()[ix];
        Ok(self.n_distribution_given_ruin(n) * ruin)
    }

    /// `P̃(N = n | τ_x < ∞) = (1 - ρ̃) ρ̃ⁿ`.
    pub fn n_distribution_given_ruin(&self, n: u32) -> f64 {
        let r = self.tilted().rho_tilde;
        (1.0 - r) * r.powi(n as i32)
    }

    /// `E[e^{-qτ}; Y_τ ∈ du]` for the first record by a claim from a fresh
    /// supremum at level 0. Its mass is `ξ` and its first moment `δ`.
    pub fn increment_law(&self) -> Result<GridFunction> {
        let grid = self.grid();
        let tilted = self.tilted();
        let ladder = GridFunction::new(
            grid,
            0.0,
            self.k[..=grid.intervals()].iter().map(|k| k / tilted.c_tilde).collect(),
        )?;
        if tilted.sigma() == 0.0 {
            return Ok(ladder);
        }
        // e^{Φu} G̃(du) = r/(r - Φ) · Exp(r - Φ)
        let r = tilted.g_rate();
        let spread = GridFunction::exponential(grid, r - self.phi()).scale(r / (r - self.phi()));
        ladder.convolve(&spread)
    }

    /// `E[Σ_{n=1}^N e^{-qτ⁽ⁿ⁾} F_n(Y_{τ⁽ⁿ⁻¹⁾}, Y_{τ⁽ⁿ⁾}); τ_x < ∞]`.
    pub fn extended_edpf(&self, x: f64, penalty: &PenaltySpec) -> Result<ExtendedEdpf> {
        penalty.validate(self.grid().x_max())?;
        let classic = self.classic_edpf(x, &penalty.first)?;
        let (listed, tail): (&[Penalty], Option<&Penalty>) = match &penalty.subsequent {
            Subsequent::None => (&[], None),
            Subsequent::Stationary(f) => (&[], Some(f)),
            Subsequent::List(fs, TailRule::Zero) => (fs.as_slice(), None),
            Subsequent::List(fs, TailRule::Repeat(f)) => (fs.as_slice(), Some(f)),
        };
        if listed.is_empty() && tail.is_none() {
            return Ok(ExtendedEdpf { value: classic, classic, explicit_terms: 0, tail_bound: 0.0 });
        }
        let jump = self.increment_law()?;
        let xi = jump.mass();
        let mut deficit = self.overshoot_dist_tx(x)?.discounted;
        let mut value = classic;
        let mut sup: f64 = 0.0;
        for f in listed {
            let (term, s) = self.record_term(x, f, &jump, &deficit);
            value += term;
            sup = sup.max(s);
            deficit = deficit.convolve(&jump)?;
        }
        let mut tail_bound = 0.0;
        if let Some(f) = tail {
            let series = geometric_convolution_series(&jump.scale(1.0 / xi), xi, &deficit)?;
            let (term, s) = self.record_term(x, f, &jump, &series.sum);
            value += term;
            // each omitted term is at most sup F times its mass
            tail_bound = s.max(sup) * xi * series.tail_bound;
        }
        if tail_bound >= EXTENDED_TOLERANCE {
            return Err(domain("extended_edpf", format!("series tail bound {tail_bound:e} above tolerance")));
        }
        Ok(ExtendedEdpf { value, classic, explicit_terms: listed.len(), tail_bound })
    }

    /// `∬ F(x + d, x + d + u) J(du) M(dd)` and the largest `F` sample used.
    fn record_term(&self, x: f64, f: &Penalty, jump: &GridFunction, deficit: &GridFunction) -> (f64, f64) {
        let grid = self.grid();
        let step = grid.step();
        let n = grid.intervals();
        let jv = jump.values();
        let mut sup: f64 = 0.0;
        let mut row = vec![0.0; n + 1];
        let inner: Vec<f64> = (0..=n)
            .map(|di| {
                let level = x + grid.node(di);
                if deficit.values()[di] == 0.0 && (di > 0 || deficit.atom() == 0.0) {
                    return 0.0;
                }
                for (ui, r) in row.iter_mut().enumerate() {
                    let v = f(level, level + grid.node(ui));
                    sup = sup.max(v);
                    *r = v * jv[ui];
                }
                jump.atom() * f(level, level) + trapezoid(&row, step)
            })
            .collect();
        let dv = deficit.values();
        let weighted: Vec<f64> = inner.iter().zip(dv).map(|(a, b)| a * b).collect();
        (deficit.atom() * inner[0] + trapezoid(&weighted, step), sup)
    }
}

/// `φ(w, q, x)` on the default grid.
pub fn classic_edpf(model: &LevyModel, q: f64, x: f64, w: &Penalty) -> Result<f64> {
    Analysis::for_surplus(model, q, x)?.classic_edpf(x, w)
}

/// Extended penalty function on the default grid.
pub fn extended_edpf(model: &LevyModel, q: f64, x: f64, penalty: &PenaltySpec) -> Result<ExtendedEdpf> {
    Analysis::for_surplus(model, q, x)?.extended_edpf(x, penalty)
}
