use anyhow::{bail, Context, Result};
use ruinkit_core::mc::{estimate_many, Horizon, SimConfig, Target};
use ruinkit_core::validation::{self, Report, ValidationSettings};
use ruinkit_core::{Analysis, ScaleFunctions};
use serde_json::json;

use crate::config::{ExperimentConfig, FORMAT_VERSION};
use crate::output::Table;
use crate::penalty;

const DEFAULT_X: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];

fn qs(cfg: &ExperimentConfig, default: &[f64]) -> Vec<f64> {
    cfg.query.q.clone().unwrap_or_else(|| default.to_vec())
}

fn xs(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.query.x.clone().unwrap_or_else(|| DEFAULT_X.to_vec())
}

fn largest(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

pub fn phi(cfg: &ExperimentConfig) -> Result<Table> {
    let model = cfg.model()?;
    let mut t = Table::new("phi", &["q", "phi"]);
    for q in qs(cfg, &[0.0, 0.5, 1.0, 2.0]) {
        t.push(vec![q.into(), model.phi_inverse(q)?.into()]);
    }
    Ok(t)
}

pub fn ruin(cfg: &ExperimentConfig) -> Result<Table> {
    let model = cfg.model()?;
    let xs = xs(cfg);
    let s = ScaleFunctions::new(model, 0.0, cfg.grid(largest(&xs))?)?;
    let survival = s.pk_survival();
    let mut t = Table::new("ruin", &["x", "ruin_probability"]);
    for x in xs {
        if x < 0.0 {
            bail!("query.x: surplus {x} is negative");
        }
        t.push(vec![x.into(), (1.0 - survival.at(x)).into()]);
    }
    Ok(t)
}

pub fn scale(cfg: &ExperimentConfig) -> Result<Table> {
    let model = cfg.model()?;
    let xs = xs(cfg);
    let grid = cfg.grid(largest(&xs))?;
    let mut t = Table::new("scale", &["q", "x", "W", "W_phi", "f1"]);
    for q in qs(cfg, &[0.0]) {
        let a = Analysis::new(model, q, grid)?;
        let (w, w_phi) = (a.scale().scale_function(), a.scale().scale_function_tilted());
        for &x in &xs {
            t.push(vec![q.into(), x.into(), w.at(x).into(), w_phi.at(x).into(), a.f1_at(x)?.into()]);
        }
    }
    Ok(t)
}

pub fn edpf(cfg: &ExperimentConfig) -> Result<Table> {
    let model = cfg.model()?;
    let first = cfg.query.penalty.as_deref().unwrap_or("deficit");
    let rest = cfg.query.subsequent.as_deref();
    let spec = penalty::spec(first, rest)?;
    let xs = xs(cfg);
    let grid = cfg.grid(largest(&xs))?;
    let mut t = Table::new(
        "edpf",
        &["q", "x", "penalty", "subsequent", "classic", "extended", "explicit_terms", "tail_bound"],
    );
    for q in qs(cfg, &[1.0]) {
        let a = Analysis::new(model, q, grid)?;
        for &x in &xs {
            let e = a.extended_edpf(x, &spec).with_context(|| format!("q = {q}, x = {x}"))?;
            t.push(vec![
                q.into(),
                x.into(),
                first.into(),
                rest.unwrap_or("none").into(),
                e.classic.into(),
                e.value.into(),
                (e.explicit_terms as u64).into(),
                e.tail_bound.into(),
            ]);
        }
    }
    Ok(t)
}

pub fn edvci(cfg: &ExperimentConfig) -> Result<Table> {
    let model = cfg.model()?;
    let xs = xs(cfg);
    let grid = cfg.grid(largest(&xs))?;
    let mut t = Table::new("edvci", &["q", "x", "varphi", "kappa", "xi", "delta", "V", "classical_V"]);
    for q in qs(cfg, &[1.0]) {
        let a = Analysis::new(model, q, grid)?;
        for &x in &xs {
            let r = a.edvci(x)?;
            t.push(vec![
                q.into(),
                x.into(),
                r.varphi.into(),
                r.kappa.into(),
                r.xi.into(),
                r.delta.into(),
                r.V.into(),
                r.classical_V.into(),
            ]);
        }
    }
    Ok(t)
}

fn target(cfg: &ExperimentConfig) -> Result<Target> {
    let name = cfg.query.target.as_deref().context("simulate needs query.target")?;
    let penalty = || penalty::spec(cfg.query.penalty.as_deref().unwrap_or("deficit"), cfg.query.subsequent.as_deref());
    Ok(match name.trim() {
        "ruin_probability" => Target::RuinProbability,
        "kappa" => Target::Kappa,
        "varphi" => Target::Varphi,
        "xi" => Target::Xi,
        "delta" => Target::Delta,
        "edvci" => Target::Edvci,
        "edpf" => Target::Edpf(penalty()?.first),
        "extended_edpf" => Target::ExtendedEdpf(penalty()?),
        other => match other.strip_prefix("n_law(").and_then(|r| r.strip_suffix(')')) {
            Some(n) => Target::NLaw(n.trim().parse().with_context(|| format!("bad record count in `{other}`"))?),
            None => bail!(
                "unknown target `{other}`; expected ruin_probability, kappa, varphi, xi, delta, n_law(n), edpf, extended_edpf or edvci"
            ),
        },
    })
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Table> {
    let model = cfg.model()?;
    let target = target(cfg)?;
    let paths = cfg.query.paths.unwrap_or(ValidationSettings::default().paths);
    let seed = cfg.query.seed.unwrap_or(ValidationSettings::default().seed);
    let mut t = Table::new(
        "simulate",
        &["target", "q", "x", "value", "std_error", "paths", "seed", "horizon", "truncation_bound"],
    );
    for q in qs(cfg, &[1.0]) {
        for x in xs(cfg) {
            let mut sim = SimConfig::new(model.clone(), x, q, paths, seed);
            if let Some(h) = cfg.query.horizon {
                sim = sim.with_horizon(Horizon::Fixed(h));
            }
            sim.bridge_correction = cfg.query.bridge_correction.unwrap_or(true);
            let e = estimate_many(&sim, std::slice::from_ref(&target))
                .with_context(|| format!("q = {q}, x = {x}"))?
                .remove(0);
            t.push(vec![
                e.target.into(),
                q.into(),
                x.into(),
                e.value.into(),
                e.std_error.into(),
                e.paths.into(),
                seed.into(),
                sim.horizon_time().into(),
                e.truncation_bound.into(),
            ]);
        }
    }
    Ok(t)
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Report> {
    let defaults = ValidationSettings::default();
    let settings = ValidationSettings {
        seed: cfg.query.seed.unwrap_or(defaults.seed),
        paths: cfg.query.paths.unwrap_or(defaults.paths),
    };
    if settings.paths < 2 {
        bail!("validation needs at least two paths");
    }
    Ok(validation::run_all(&settings)?)
}

pub fn report_table(report: &Report) -> Table {
    let mut t = Table::new("validate", &["criterion", "name", "check", "value", "reference", "tolerance", "passed"]);
    for c in &report.criteria {
        for k in &c.checks {
            t.push(vec![
                u64::from(c.id).into(),
                c.name.as_str().into(),
                k.label.as_str().into(),
                k.value.into(),
                k.reference.into(),
                k.tolerance.into(),
                if k.passed { "true" } else { "false" }.into(),
            ]);
        }
    }
    t
}

pub fn report_json(report: &Report) -> serde_json::Value {
    json!({
        "format_version": FORMAT_VERSION,
        "command": "validate",
        "passed": report.passed(),
        "settings": report.settings,
        "criteria": report.criteria.iter().map(|c| json!({
            "id": c.id,
            "name": c.name,
            "passed": c.passed(),
            "checks": c.checks,
        })).collect::<Vec<_>>(),
    })
}
