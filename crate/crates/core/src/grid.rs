//! Measures and curves on a uniform grid `{0, Δ, …, NΔ}`.
//!
//! A [`GridFunction`] is a nonnegative measure: an atom at zero plus density
//! samples integrated with trapezoid weights. A [`GridCurve`] is a plain
//! function sampled at the nodes and linearly interpolated between them.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quad::{dot, trapezoid};

/// Nodes per grid before rounding; the step is the largest power of two not
/// exceeding `x_max / TARGET_INTERVALS`.
pub const TARGET_INTERVALS: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    step: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(step: f64, intervals: usize) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(invalid("grid.step", format!("must be finite and > 0, got {step}")));
        }
        if intervals < 2 {
            return Err(invalid("grid.intervals", "need at least two intervals"));
        }
        Ok(Self { step, intervals })
    }

    /// Grid covering `[0, x_max]` with a dyadic step, so that dyadic query
    /// points fall on nodes exactly; the interval count is even.
    pub fn covering(x_max: f64) -> Result<Self> {
        Self::covering_with(x_max, TARGET_INTERVALS)
    }

    pub fn covering_with(x_max: f64, target: usize) -> Result<Self> {
        if !x_max.is_finite() || x_max <= 0.0 {
            return Err(invalid("grid.x_max", format!("must be finite and > 0, got {x_max}")));
        }
        let raw = x_max / target.max(2) as f64;
        let step = 2f64.powi(raw.log2().floor() as i32);
        let mut intervals = (x_max / step).ceil() as usize;
        intervals += intervals % 2;
        Self::new(step, intervals)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_max(&self) -> f64 {
        self.step * self.intervals as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Index of `x` when it is a node (up to rounding).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = x / self.step;
        let i = pos.round();
        if i >= 0.0 && i <= self.intervals as f64 && (pos - i).abs() < 1e-9 {
            Some(i as usize)
        } else {
            None
        }
    }

    fn check(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(*self, *other));
        }
        Ok(())
    }
}

/// Linear interpolation of node samples; zero left of 0, clamped right of the grid.
fn interpolate(grid: &Grid, values: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { values[0] } else { 0.0 };
    }
    let pos = x / grid.step;
    if pos >= grid.intervals as f64 {
        return values[grid.intervals];
    }
    let k = pos.floor() as usize;
    let frac = pos - k as f64;
    values[k] + frac * (values[k + 1] - values[k])
}

/// Pointwise samples of a function on the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCurve {
    grid: Grid,
    values: Vec<f64>,
}

impl GridCurve {
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self { values: grid.nodes().map(f).collect(), grid }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("values", format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.values, x)
    }

    pub fn last(&self) -> f64 {
        self.values[self.grid.intervals]
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.node(i), v)).collect();
        Self { grid: self.grid, values }
    }
}

/// Nonnegative measure on `[0, x_max]`: an atom at zero plus a density.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Grid,
    atom: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, atom: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("values", format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        if !(atom >= 0.0) || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || !atom.is_finite() {
            return Err(invalid("values", "a grid measure must be finite and nonnegative"));
        }
        Ok(Self { grid, atom, values })
    }

    /// Density `f` sampled at the nodes, plus `atom` at zero. Negative
    /// round-off in `f` is clipped.
    pub fn from_density(grid: Grid, atom: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(|x| f(x).max(0.0)).collect();
        Self { grid, atom: atom.max(0.0), values }
    }

    pub fn zero(grid: Grid) -> Self {
        Self { grid, atom: 0.0, values: vec![0.0; grid.len()] }
    }

    /// Unit point mass at zero, the identity of convolution.
    pub fn dirac(grid: Grid) -> Self {
        Self { grid, atom: 1.0, values: vec![0.0; grid.len()] }
    }

    /// `Exp(rate)` law projected onto the grid's hat functions, so the total
    /// mass is one up to truncation at `x_max`.
    ///
    /// When `rate · Δ > 1` the law is narrower than a cell; the mass of the
    /// first hat then goes to the atom instead of an unresolvable density
    /// spike, which keeps near-degenerate laws close to the Dirac limit.
    pub fn exponential(grid: Grid, rate: f64) -> Self {
        let h = grid.step;
        let a = rate * h;
        let first = -(-a).exp_m1() / a;
        let m0 = 1.0 - first;
        // m_k = (e^{-(k-1)a} - 2e^{-ka} + e^{-(k+1)a}) / a = e^{-(k-1)a}(1 - e^{-a})² / a
        let shape = (-a).exp_m1().powi(2) / a;
        let mass_k = |k: usize| ((1 - k as i64) as f64 * a).exp() * shape;
        let mut values = vec![0.0; grid.len()];
        let mut atom = 0.0;
        if a <= 1.0 {
            values[0] = 2.0 * m0 / h;
        } else {
            atom = m0;
        }
        for (k, v) in values.iter_mut().enumerate().skip(1) {
            *v = mass_k(k) / h;
        }
        Self { grid, atom, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn atom(&self) -> f64 {
        self.atom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Density at `x` (linear interpolation; the atom is not included).
    pub fn density_at(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.values, x)
    }

    pub fn mass(&self) -> f64 {
        self.atom + trapezoid(&self.values, self.grid.step)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { grid: self.grid, atom: self.atom * k, values: self.values.iter().map(|v| v * k).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, atom: self.atom + other.atom, values })
    }

    /// Multiplies the measure by `e^{θy}`; the atom is unchanged.
    pub fn exp_weight(&self, theta: f64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, v)| v * (theta * self.grid.node(i)).exp()).collect();
        Self { grid: self.grid, atom: self.atom, values }
    }

    /// Distribution function `y ↦ μ([0, y])` at the nodes.
    pub fn cumulative(&self) -> GridCurve {
        let h = self.grid.step;
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = self.atom;
        out.push(acc);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        GridCurve { grid: self.grid, values: out }
    }

    /// Convolution of two grid measures; mass beyond `x_max` is dropped.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.grid.check(&other.grid)?;
        let reversed: Vec<f64> = other.values.iter().rev().copied().collect();
        let values = (0..self.grid.len())
            .map(|i| self.conv_node(&other.values, other.atom, &reversed, i))
            .collect();
        Ok(Self { grid: self.grid, atom: self.atom * other.atom, values })
    }

    /// `∫_{[0,x_i]} μ(dy) g(x_i - y)` for node samples `g` (at least `i + 1`
    /// of them), at node `i` only.
    pub fn apply_at(&self, g: &[f64], i: usize) -> f64 {
        assert!(g.len() > i && i <= self.grid.intervals, "node {i} outside the samples");
        let reversed_tail: Vec<f64> = g[..=i].iter().rev().copied().collect();
        let h = self.grid.step;
        let inner = dot(&self.values[..=i], &reversed_tail);
        self.atom * g[i] + h * (inner - 0.5 * (self.values[0] * g[i] + self.values[i] * g[0]))
    }

    /// `∫ μ(dy) g(x - y)` with `g` a curve on the same grid and `x` a node.
    pub fn apply_curve_at(&self, g: &GridCurve, x: f64) -> Result<f64> {
        self.grid.check(&g.grid)?;
        let i = self
            .grid
            .index_of(x)
            .ok_or_else(|| invalid("x", format!("{x} is not a node of the grid (step {})", self.grid.step)))?;
        Ok(self.apply_at(&g.values, i))
    }

    fn conv_node(&self, g: &[f64], g_atom: f64, g_reversed: &[f64], i: usize) -> f64 {
        let n = self.grid.intervals;
        let h = self.grid.step;
        let f = &self.values;
        let inner = dot(&f[..=i], &g_reversed[n - i..]);
        let trap = inner - 0.5 * (f[0] * g[i] + f[i] * g[0]);
        (self.atom * g[i] + g_atom * f[i] + h * trap).max(0.0)
    }
}

/// Result of [`geometric_convolution_series`].
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSum {
    pub sum: GridFunction,
    /// Number of terms `n = 0..terms` included.
    pub terms: usize,
    /// Upper bound on the mass of the omitted terms.
    pub tail_bound: f64,
}

/// Tolerance on the omitted mass of a geometric convolution series.
pub const SERIES_TOLERANCE: f64 = 1e-12;

/// `Σ_{n>=0} rⁿ · lead ∗ base^{∗n}`, stopped once the mass of all omitted
/// terms is provably below [`SERIES_TOLERANCE`].
///
/// The partial sums are built by doubling, `S_{2m} = S_m + (r base)^{∗m} ∗ S_m`,
/// so the term count is a power of two and only `2 log₂(terms)` convolutions
/// are needed.
pub fn geometric_convolution_series(base: &GridFunction, weight: f64, lead: &GridFunction) -> Result<SeriesSum> {
    base.grid.check(&lead.grid)?;
    if !(weight >= 0.0) {
        return Err(invalid("weight", format!("must be >= 0, got {weight}")));
    }
    let ratio = weight * base.mass();
    if ratio >= 1.0 {
        return Err(Error::Divergent(ratio));
    }
    let lead_mass = lead.mass();
    let bound = |terms: usize| lead_mass * ratio.powi(terms as i32) / (1.0 - ratio);
    let mut sum = lead.clone();
    let mut terms = 1;
    if bound(terms) < SERIES_TOLERANCE {
        return Ok(SeriesSum { sum, terms, tail_bound: bound(terms) });
    }
    let mut power = base.scale(weight);
    loop {
        sum = sum.add(&power.convolve(&sum)?)?;
        terms *= 2;
        if bound(terms) < SERIES_TOLERANCE {
            return Ok(SeriesSum { sum, terms, tail_bound: bound(terms) });
        }
        power = power.convolve(&power)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn covering_grid_is_dyadic() {
        let g = Grid::covering(40.0).unwrap();
        assert_eq!(g.step(), 1.0 / 256.0);
        assert_eq!(g.intervals(), 10240);
        assert_eq!(g.index_of(0.5), Some(128));
        let g = Grid::covering(13.0).unwrap();
        assert!(g.x_max() >= 13.0 && g.intervals().is_multiple_of(2));
        assert!(g.step() <= 13.0 / 8192.0 && g.step() > 13.0 / 16384.0);
    }

    #[test]
    fn dirac_is_convolution_identity() {
        let g = Grid::new(0.01, 500).unwrap();
        let f = GridFunction::from_density(g, 0.3, |y| (-y).exp() * (1.0 + y.sin()));
        let out = f.convolve(&GridFunction::dirac(g)).unwrap();
        assert_eq!(out.atom(), f.atom());
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_convolution_is_gamma() {
        let g = Grid::new(1e-3, 20_000).unwrap();
        let e = GridFunction::from_density(g, 0.0, |y| (-y).exp());
        let out = e.convolve(&e).unwrap();
        let err = g.nodes().zip(out.values()).map(|(y, v)| (v - y * (-y).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err}");
    }

    #[test]
    fn hat_projected_exponential_has_unit_mass() {
        for &(rate, step) in &[(3.0, 1e-3), (0.5, 0.01), (4.5, 1.0 / 128.0), (3e6, 1.0 / 128.0)] {
            let g = Grid::new(step, (60.0 / rate / step).ceil().max(16.0) as usize).unwrap();
            let e = GridFunction::exponential(g, rate);
            assert!((e.mass() - 1.0).abs() < 1e-12, "rate {rate}: {}", e.mass());
        }
        let g = Grid::new(1.0 / 128.0, 64).unwrap();
        let spike = GridFunction::exponential(g, 3e6);
        assert!(spike.atom() > 0.999);
    }

    #[test]
    fn geometric_series_of_diracs() {
        let g = Grid::new(0.1, 10).unwrap();
        let d = GridFunction::dirac(g);
        let s = geometric_convolution_series(&d, 0.6, &d).unwrap();
        assert!((s.sum.mass() - 2.5).abs() < 1e-11);
        assert!(s.tail_bound < SERIES_TOLERANCE);
        assert!(s.terms.is_power_of_two());
        let s = geometric_convolution_series(&d, 0.0, &d).unwrap();
        assert_eq!(s.terms, 1);
        assert_eq!(s.sum, d);
        assert!(matches!(geometric_convolution_series(&d, 1.0, &d), Err(Error::Divergent(_))));
        // a defective base converges with unit weight
        let half = d.scale(0.5);
        let s = geometric_convolution_series(&half, 1.0, &d).unwrap();
        assert!((s.sum.mass() - 2.0).abs() < 1e-11);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridFunction::dirac(Grid::new(0.1, 10).unwrap());
        let b = GridFunction::dirac(Grid::new(0.1, 12).unwrap());
        assert!(matches!(a.convolve(&b), Err(Error::GridMismatch(..))));
    }

    #[test]
    fn apply_at_matches_full_convolution() {
        let g = Grid::new(0.01, 400).unwrap();
        let f = GridFunction::from_density(g, 0.2, |y| (-2.0 * y).exp());
        let k = GridFunction::from_density(g, 0.0, |y| 1.0 / (1.0 + y));
        let full = f.convolve(&k).unwrap();
        for i in [0, 1, 17, 400] {
            assert!((f.apply_at(k.values(), i) - full.values()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn trapezoid_mass_defect_is_quarter_step_squared() {
        // discrete identity: mass(f∗g) = mass(f)·mass(g) - Δ²f(0)g(0)/4 before truncation
        let g = Grid::new(0.01, 4000).unwrap();
        let f = GridFunction::from_density(g, 0.1, |y| 2.0 * (-3.0 * y).exp());
        let k = GridFunction::from_density(g, 0.0, |y| (-y).exp() * (2.0 + y.cos()));
        let out = f.convolve(&k).unwrap();
        let defect = 0.25 * 0.01f64.powi(2) * f.values()[0] * k.values()[0];
        assert!((out.mass() - (f.mass() * k.mass() - defect)).abs() < 1e-12);
    }

    fn smooth_measure(grid: Grid) -> impl Strategy<Value = GridFunction> {
        (0.0f64..1.0, 0.8f64..1.5, 0.0f64..1.0, 0.0f64..3.0).prop_map(move |(atom, rate, amp, freq)| {
            GridFunction::from_density(grid, atom, |y| amp * (-rate * y).exp() * (1.0 + 0.5 * (freq * y).sin()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn convolution_multiplies_mass(
            f in smooth_measure(Grid::new(5e-4, 50_000).unwrap()),
            g in smooth_measure(Grid::new(5e-4, 50_000).unwrap()),
        ) {
            let out = f.convolve(&g).unwrap();
            let expected = f.mass() * g.mass();
            prop_assert!(out.mass() <= expected);
            prop_assert!((out.mass() - expected).abs() <= 1e-6 * expected);
        }
    }
}
