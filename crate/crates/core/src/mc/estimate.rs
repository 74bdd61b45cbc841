use rayon::prelude::*;
use serde::Serialize;

use super::path::{simulate_first_record, simulate_path, RuinPathRecord};
use super::{Horizon, SimConfig, DISCOUNT_EPSILON};
use crate::edpf::{Penalty, PenaltySpec, Subsequent, TailRule};
use crate::error::Result;
use crate::quad::compensated_sum;

/// A quantity estimated by a sample mean over simulated paths.
#[derive(Clone)]
pub enum Target {
    /// `P(τ_x < T)`.
    RuinProbability,
    /// `E[e^{-qτ_x}; τ_x < T]`.
    Kappa,
    /// `E[e^{-qτ_x}(Y_{τ_x} - x)]`.
    Varphi,
    /// `E[e^{-qτ}]` for the first record by a claim from a fresh supremum.
    Xi,
    /// `E[e^{-qτ} Y_τ]` for the same record.
    Delta,
    /// `P(ruin, exactly n records after ruin)`.
    NLaw(u32),
    /// `E[e^{-qτ_x} w(x - Y_{τ_x-}, Y_{τ_x} - x)]`.
    Edpf(Penalty),
    ExtendedEdpf(PenaltySpec),
    /// Deficit at ruin plus every later record increment, discounted.
    Edvci,
}

impl Target {
    pub fn name(&self) -> String {
        match self {
            Target::RuinProbability => "ruin_probability".into(),
            Target::Kappa => "kappa".into(),
            Target::Varphi => "varphi".into(),
            Target::Xi => "xi".into(),
            Target::Delta => "delta".into(),
            Target::NLaw(n) => format!("n_law({n})"),
            Target::Edpf(_) => "edpf".into(),
            Target::ExtendedEdpf(_) => "extended_edpf".into(),
            Target::Edvci => "edvci".into(),
        }
    }

    fn needs_first_record(&self) -> bool {
        matches!(self, Target::Xi | Target::Delta)
    }
}

impl std::fmt::Debug for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub target: String,
    pub value: f64,
    pub std_error: f64,
    pub paths: u64,
    /// Bound on the bias from stopping at a discount-driven horizon,
    /// `ε · max |payoff|`; zero for a fixed horizon.
    pub truncation_bound: f64,
}

impl Estimate {
    /// `|value - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.std_error
    }
}

fn subsequent(spec: &PenaltySpec, k: usize) -> Option<&Penalty> {
    match &spec.subsequent {
        Subsequent::None => None,
        Subsequent::Stationary(f) => Some(f),
        Subsequent::List(fs, rule) => fs.get(k).or(match rule {
            TailRule::Zero => None,
            TailRule::Repeat(f) => Some(f),
        }),
    }
}

fn payoff(target: &Target, r: &RuinPathRecord, q: f64) -> f64 {
    if !r.ruined {
        return 0.0;
    }
    let disc = |t: f64| (-q * t).exp();
    let at_ruin = disc(r.ruin_time);
    match target {
        Target::RuinProbability => 1.0,
        Target::Kappa => at_ruin,
        Target::Varphi => at_ruin * r.deficit,
        Target::NLaw(n) => f64::from(r.records.len() == *n as usize),
        Target::Edpf(w) => {
            if r.ruin_by_jump {
                at_ruin * w(r.surplus_prior, r.deficit)
            } else {
                0.0
            }
        }
        Target::ExtendedEdpf(spec) => {
            let first = if r.ruin_by_jump { at_ruin * (spec.first)(r.surplus_prior, r.deficit) } else { 0.0 };
            let mut terms = vec![first];
            for (k, e) in r.records.iter().enumerate() {
                match subsequent(spec, k) {
                    Some(f) => terms.push(disc(e.time) * f(e.previous_level, e.level)),
                    None => break,
                }
            }
            compensated_sum(terms)
        }
        Target::Edvci => {
            let mut terms = vec![at_ruin * r.deficit];
            terms.extend(r.records.iter().map(|e| disc(e.time) * e.increment));
            compensated_sum(terms)
        }
        Target::Xi | Target::Delta => unreachable!("first-record targets use their own paths"),
    }
}

fn summarize(name: String, samples: &[f64], config: &SimConfig) -> Estimate {
    let n = samples.len() as f64;
    let mean = compensated_sum(samples.iter().copied()) / n;
    let dev: Vec<f64> = samples.iter().map(|s| (s - mean).powi(2)).collect();
    let var = if samples.len() > 1 { compensated_sum(dev) / (n - 1.0) } else { 0.0 };
    let truncation_bound = match config.horizon {
        Horizon::Discount => DISCOUNT_EPSILON * samples.iter().fold(0.0_f64, |m, s| m.max(s.abs())),
        Horizon::Fixed(_) => 0.0,
    };
    Estimate { target: name, value: mean, std_error: (var / n).sqrt(), paths: config.paths, truncation_bound }
}

/// Estimates every target from one set of simulated paths.
///
/// Paths are simulated in parallel, but each uses its own random stream and
/// the samples are summed in path order, so results depend only on the
/// configuration.
pub fn estimate_many(config: &SimConfig, targets: &[Target]) -> Result<Vec<Estimate>> {
    config.validate()?;
    for t in targets {
        if let Target::ExtendedEdpf(spec) = t {
            spec.validate(config.x + 10.0 * config.model.measure().mean_jump())?;
        }
    }
    let q = config.q;
    let ruin_targets: Vec<&Target> = targets.iter().filter(|t| !t.needs_first_record()).collect();
    let ruin_samples: Vec<Vec<f64>> = if ruin_targets.is_empty() {
        Vec::new()
    } else {
        (0..config.paths)
            .into_par_iter()
            .map(|i| {
                let r = simulate_path(config, i);
                ruin_targets.iter().map(|t| payoff(t, &r, q)).collect()
            })
            .collect()
    };
    let first_samples: Vec<(f64, f64)> = if targets.iter().any(Target::needs_first_record) {
        (0..config.paths)
            .into_par_iter()
            .map(|i| {
                let r = simulate_first_record(config, i);
                match r.time {
                    Some(t) => {
                        let d = (-q * t).exp();
                        (d, d * r.level)
                    }
                    None => (0.0, 0.0),
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut k = 0;
    Ok(targets
        .iter()
        .map(|t| {
            let samples: Vec<f64> = match t {
                Target::Xi => first_samples.iter().map(|s| s.0).collect(),
                Target::Delta => first_samples.iter().map(|s| s.1).collect(),
                _ => {
                    let col = ruin_samples.iter().map(|row| row[k]).collect();
                    k += 1;
                    col
                }
            };
            summarize(t.name(), &samples, config)
        })
        .collect())
}

pub fn estimate(config: &SimConfig, target: Target) -> Result<Estimate> {
    Ok(estimate_many(config, std::slice::from_ref(&target))?.remove(0))
}
