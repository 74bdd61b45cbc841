//! Analytic-versus-simulation validation suite behind `ruinkit validate`.
//!
//! Each criterion produces a list of checks with a value, a reference and a
//! tolerance. The rendered report contains no timings, so equal settings give
//! byte-identical reports.

use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::edpf::{capped_deficit, capped_increment, deficit, Analysis, PenaltySpec};
use crate::edvci::{self, classical_edvci};
use crate::error::Result;
use crate::mc::{estimate, estimate_many, Estimate, Horizon, SimConfig, Target};
use crate::measure::LevyMeasure;
use crate::model::LevyModel;
use crate::scale::{default_grid, ScaleFunctions};

/// Standard errors allowed between an analytic value and its simulation.
pub const SE_MULTIPLIER: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationSettings {
    pub seed: u64,
    pub paths: u64,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self { seed: 20_240_601, paths: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn abs(label: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        let passed = (value - reference).abs() <= tolerance;
        Self { label: label.into(), value, reference, tolerance, passed }
    }

    fn rel(label: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self::abs(label, value, reference, tolerance * reference.abs())
    }

    fn mc(label: impl Into<String>, e: &Estimate, reference: f64) -> Self {
        Self::abs(label, e.value, reference, SE_MULTIPLIER * e.std_error + e.truncation_bound)
    }

    /// At least `floor` wide, otherwise three standard errors.
    fn mc_or(label: impl Into<String>, e: &Estimate, reference: f64, floor: f64) -> Self {
        let tol = (SE_MULTIPLIER * e.std_error + e.truncation_bound).max(floor);
        Self::abs(label, e.value, reference, tol)
    }

    /// Lower-bound check: passes when `value > reference`.
    fn above(label: impl Into<String>, value: f64, reference: f64) -> Self {
        Self { label: label.into(), value, reference, tolerance: 0.0, passed: value > reference }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub settings: ValidationSettings,
    pub criteria: Vec<Criterion>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(Criterion::passed)
    }

    /// One `PASS`/`FAIL` line per criterion followed by its checks.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ruinkit validation (seed {}, {} paths)", self.settings.seed, self.settings.paths);
        for c in &self.criteria {
            let _ = writeln!(s, "{} {:>2} {}", if c.passed() { "PASS" } else { "FAIL" }, c.id, c.name);
            for k in &c.checks {
                let _ = writeln!(
                    s,
                    "       {:<4} {:<44} value {:>20.12e}  ref {:>20.12e}  tol {:.3e}",
                    if k.passed { "ok" } else { "bad" },
                    k.label,
                    k.value,
                    k.reference,
                    k.tolerance
                );
            }
        }
        let failed = self.criteria.iter().filter(|c| !c.passed()).count();
        let _ = writeln!(s, "{} of {} criteria passed", self.criteria.len() - failed, self.criteria.len());
        s
    }
}

/// `c = 1.5`, `σ = 0`, claims at rate 1 with `Exp(1)` sizes.
pub fn model_m1() -> LevyModel {
    LevyModel::new(1.5, 0.0, LevyMeasure::exponential(1.0, 1.0).expect("valid")).expect("valid")
}

/// [`model_m1`] with `σ = 1`.
pub fn model_m2() -> LevyModel {
    LevyModel::new(1.5, 1.0, LevyMeasure::exponential(1.0, 1.0).expect("valid")).expect("valid")
}

fn models() -> [(&'static str, LevyModel); 2] {
    [("M1", model_m1()), ("M2", model_m2())]
}

fn sim(settings: &ValidationSettings, run: u64, model: &LevyModel, x: f64, q: f64) -> SimConfig {
    SimConfig::new(model.clone(), x, q, settings.paths, settings.seed.wrapping_add(run))
}

pub fn root_correctness() -> Result<Criterion> {
    let phi1 = model_m1().phi_inverse(1.0)?;
    let m2 = model_m2();
    let psi = m2.psi(m2.phi_inverse(1.0)?)?;
    Ok(Criterion {
        id: 1,
        name: "root correctness".into(),
        checks: vec![Check::abs("M1 Phi(1)", phi1, 1.0, 1e-10), Check::abs("M2 psi(Phi(1))", psi, 1.0, 1e-10)],
    })
}

pub fn laplace_identity() -> Result<Criterion> {
    let mut checks = Vec::new();
    for (name, m) in models() {
        let grid = default_grid(&m, 1.0)?;
        for q in [0.0, 0.5, 1.0] {
            let s = ScaleFunctions::new(&m, q, grid)?;
            for extra in [0.5, 1.0, 2.0] {
                let lam = s.phi() + extra;
                let exact = 1.0 / (m.psi(lam)? - q);
                let label = format!("{name} q={q} lambda=Phi+{extra}");
                checks.push(Check::rel(label, s.laplace_transform(lam)?, exact, 1e-3));
            }
        }
    }
    Ok(Criterion { id: 2, name: "scale function Laplace identity".into(), checks })
}

pub fn classical_ruin(settings: &ValidationSettings) -> Result<Criterion> {
    let m = model_m1();
    let s = ScaleFunctions::new(&m, 0.0, default_grid(&m, 2.0)?)?;
    let mut checks = Vec::new();
    for (run, x) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let closed = 2.0 / 3.0 * (-x / 3.0f64).exp();
        let analytic = 1.0 - s.pk_survival().at(x);
        checks.push(Check::abs(format!("M1 x={x} series"), analytic, closed, 1e-4));
        let cfg = sim(settings, 300 + run as u64, &m, x, 0.0).with_horizon(Horizon::Fixed(200.0));
        let e = estimate(&cfg, Target::RuinProbability)?;
        checks.push(Check::mc(format!("M1 x={x} simulated"), &e, analytic));
    }
    Ok(Criterion { id: 3, name: "classical ruin probability".into(), checks })
}

pub fn xi_delta(settings: &ValidationSettings) -> Result<Criterion> {
    let q = 1.0;
    let mut checks = Vec::new();
    for (run, (name, m)) in models().into_iter().enumerate() {
        let (xi, delta) = (edvci::xi(&m, q)?, edvci::delta(&m, q)?);
        if name == "M1" {
            checks.push(Check::abs("M1 xi formula", xi, 1.0 / 3.0, 1e-12));
            checks.push(Check::abs("M1 delta formula", delta, 1.0 / 3.0, 1e-12));
        }
        let cfg = sim(settings, 400 + run as u64, &m, 0.0, q);
        let e = estimate_many(&cfg, &[Target::Xi, Target::Delta])?;
        checks.push(Check::mc(format!("{name} xi simulated"), &e[0], xi));
        checks.push(Check::mc(format!("{name} delta simulated"), &e[1], delta));
    }
    Ok(Criterion { id: 4, name: "xi and delta against simulation".into(), checks })
}

pub fn edvci_end_to_end(settings: &ValidationSettings) -> Result<Criterion> {
    let m1 = model_m1();
    let mut checks = Vec::new();
    let v0 = Analysis::for_surplus(&m1, 1.0, 0.0)?.edvci(0.0)?.V;
    checks.push(Check::abs("M1 q=1 x=0 analytic", v0, 0.5, 1e-6));
    let e = estimate(&sim(settings, 500, &m1, 0.0, 1.0), Target::Edvci)?;
    checks.push(Check::mc("M1 q=1 x=0 simulated", &e, v0));
    let mut run = 501;
    for (name, m) in models() {
        for q in [0.5, 1.0] {
            let a = Analysis::for_surplus(&m, q, 1.0)?;
            for x in [0.5, 1.0] {
                let v = a.edvci(x)?.V;
                let e = estimate(&sim(settings, run, &m, x, q), Target::Edvci)?;
                run += 1;
                checks.push(Check::mc_or(format!("{name} q={q} x={x} simulated"), &e, v, 0.02 * v));
            }
        }
    }
    Ok(Criterion { id: 5, name: "capital injections end to end".into(), checks })
}

pub fn classical_reduction() -> Result<Criterion> {
    let m1 = model_m1();
    let perturbed =
        LevyModel::new(m1.c(), 1e-3, m1.measure().clone()).expect("same measure and premium as M1");
    let grid = default_grid(&m1, 2.0)?;
    let mut checks = Vec::new();
    for q in [0.5, 1.0, 2.0] {
        let a = Analysis::new(&m1, q, grid)?;
        let b = Analysis::new(&perturbed, q, grid)?;
        for x in [0.0, 0.5, 1.0, 2.0] {
            let general = a.edvci(x)?.V;
            let classical = classical_edvci(&m1, q, x, grid)?;
            checks.push(Check::abs(format!("q={q} x={x} sigma=0"), general, classical, 1e-10));
            // any σ > 0 makes ruin from x = 0 immediate, so the limit is taken for x > 0
            if x > 0.0 {
                checks.push(Check::rel(format!("q={q} x={x} sigma=1e-3"), b.edvci(x)?.V, classical, 1e-2));
            }
        }
    }
    Ok(Criterion { id: 6, name: "classical reduction".into(), checks })
}

/// Pearson χ² of post-ruin record counts against `(1 - ρ)ρⁿ`, bins
/// `0..=6` plus a tail bin.
pub fn law_of_n(settings: &ValidationSettings) -> Result<Criterion> {
    const BINS: u32 = 7;
    let m = model_m1();
    let x = 1.0;
    let cfg = sim(settings, 700, &m, x, 0.0).with_horizon(Horizon::Fixed(200.0));
    let mut targets: Vec<Target> = (0..BINS).map(Target::NLaw).collect();
    targets.push(Target::RuinProbability);
    let e = estimate_many(&cfg, &targets)?;
    let n = settings.paths as f64;
    let ruined = e[BINS as usize].value * n;
    let a = Analysis::for_surplus(&m, 0.0, x)?;
    let mut probs: Vec<f64> = (0..BINS).map(|k| a.n_distribution_given_ruin(k)).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());
    let mut counts: Vec<f64> = e[..BINS as usize].iter().map(|c| c.value * n).collect();
    counts.push(ruined - counts.iter().sum::<f64>());
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(o, p)| {
            let expected = p * ruined;
            (o - expected).powi(2) / expected
        })
        .sum();
    let dof = probs.len() as f64 - 1.0;
    let p_value = 1.0 - ChiSquared::new(dof).expect("positive dof").cdf(stat);
    let checks = vec![
        Check::mc("M1 x=1 ruin probability", &e[BINS as usize], 1.0 - a.scale().pk_survival().at(x)),
        Check::above("M1 chi-square p-value", p_value, 0.01),
    ];
    Ok(Criterion { id: 7, name: "law of the record count".into(), checks })
}

pub fn extended_edpf_oracle(settings: &ValidationSettings) -> Result<Criterion> {
    let m = model_m2();
    let (q, x) = (0.5, 1.0);
    let spec = PenaltySpec::stationary(capped_deficit(2.0), capped_increment(2.0));
    let analytic = Analysis::for_surplus(&m, q, x)?.extended_edpf(x, &spec)?.value;
    let e = estimate(&sim(settings, 800, &m, x, q), Target::ExtendedEdpf(spec))?;
    Ok(Criterion {
        id: 8,
        name: "extended penalty function against simulation".into(),
        checks: vec![Check::mc("M2 q=0.5 x=1 capped", &e, analytic)],
    })
}

pub fn internal_consistency() -> Result<Criterion> {
    let w = deficit();
    let mut checks = Vec::new();
    for (name, m) in models() {
        for q in [0.0, 0.5] {
            let a = Analysis::for_surplus(&m, q, 2.0)?;
            for x in [0.5, 1.0, 2.0] {
                let conv = a.classic_edpf(x, &w)?;
                let scale = a.edpf_scale_form(x, &w)?;
                checks.push(Check::rel(format!("{name} q={q} x={x}"), scale, conv, 1e-3));
            }
        }
    }
    Ok(Criterion { id: 9, name: "penalty function forms agree".into(), checks })
}

/// Criteria 1 to 9. Determinism of the report itself is checked by running
/// the suite twice.
pub fn run_all(settings: &ValidationSettings) -> Result<Report> {
    let criteria = vec![
        root_correctness()?,
        laplace_identity()?,
        classical_ruin(settings)?,
        xi_delta(settings)?,
        edvci_end_to_end(settings)?,
        classical_reduction()?,
        law_of_n(settings)?,
        extended_edpf_oracle(settings)?,
        internal_consistency()?,
    ];
    Ok(Report { settings: *settings, criteria })
}
