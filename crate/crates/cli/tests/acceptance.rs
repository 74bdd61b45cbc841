//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values come from closed forms computed here where they exist.
//! For the exponential-claim model without diffusion the deficit at ruin is
//! `Exp(μ)` and independent of the ruin time, so with `R` the negative root of
//! `ψ(β) = q`:
//! `κ(x) = (μ + R)/μ · e^{Rx}`, `φ(x) = κ(x)/μ`, and the first record from a
//! fresh supremum has `ξ = κ(0)`, `δ = κ(0)/μ`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use ruinkit_core::edpf::{capped_deficit, capped_increment, deficit};
use ruinkit_core::edvci::{self, classical_edvci};
use ruinkit_core::mc::{estimate, estimate_many, Estimate, Horizon, SimConfig, Target};
use ruinkit_core::scale::default_grid;
use ruinkit_core::{Analysis, LevyMeasure, LevyModel, PenaltySpec, ScaleFunctions};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const PATHS: u64 = 100_000;
const SE: f64 = 3.0;

const C: f64 = 1.5;
const LAMBDA: f64 = 1.0;
const MU: f64 = 1.0;

fn model(sigma: f64) -> LevyModel {
    LevyModel::new(C, sigma, LevyMeasure::exponential(LAMBDA, MU).unwrap()).unwrap()
}

/// `ψ(β) = cβ - λβ/(μ + β) + σ²β²/2`.
fn psi(sigma: f64, b: f64) -> f64 {
    C * b - LAMBDA * b / (MU + b) + 0.5 * sigma * sigma * b * b
}

/// Roots `(Φ, R)` of `ψ(β) = q` without diffusion:
/// `cβ² + (cμ - λ - q)β - qμ = 0`.
fn m1_roots(q: f64) -> (f64, f64) {
    let b = C * MU - LAMBDA - q;
    let disc = (b * b + 4.0 * C * q * MU).sqrt();
    ((-b + disc) / (2.0 * C), (-b - disc) / (2.0 * C))
}

fn m1_kappa(q: f64, x: f64) -> f64 {
    let r = m1_roots(q).1;
    (MU + r) / MU * (r * x).exp()
}

fn m1_edvci(q: f64, x: f64) -> f64 {
    let kappa = m1_kappa(q, x);
    let xi = m1_kappa(q, 0.0);
    let delta = xi / MU;
    kappa / MU + delta / (1.0 - xi) * kappa
}

struct Criterion {
    lines: Vec<String>,
    ok: bool,
}

impl Criterion {
    fn new() -> Self {
        Self { lines: Vec::new(), ok: true }
    }

    fn check(&mut self, label: &str, value: f64, reference: f64, tol: f64) {
        let good = (value - reference).abs() <= tol;
        self.ok &= good;
        self.lines.push(format!(
            "      {} {label}: {value:.10} vs {reference:.10} (tol {tol:.2e})",
            if good { "ok " } else { "BAD" }
        ));
    }

    fn mc(&mut self, label: &str, e: &Estimate, reference: f64) {
        self.check(label, e.value, reference, SE * e.std_error + e.truncation_bound);
    }

    fn flag(&mut self, label: &str, good: bool) {
        self.ok &= good;
        self.lines.push(format!("      {} {label}", if good { "ok " } else { "BAD" }));
    }
}

type Check = fn() -> Criterion;

fn sim(m: &LevyModel, x: f64, q: f64, seed: u64) -> SimConfig {
    SimConfig::new(m.clone(), x, q, PATHS, seed)
}

fn c1() -> Criterion {
    let mut c = Criterion::new();
    let m1 = model(0.0);
    c.check("M1 Phi(1)", m1.phi_inverse(1.0).unwrap(), m1_roots(1.0).0, 1e-10);
    c.check("M1 Phi(1) is 1", m1.phi_inverse(1.0).unwrap(), 1.0, 1e-10);
    let phi = model(1.0).phi_inverse(1.0).unwrap();
    c.check("M2 psi(Phi(1))", psi(1.0, phi), 1.0, 1e-10);
    c
}

fn c2() -> Criterion {
    let mut c = Criterion::new();
    for sigma in [0.0, 1.0] {
        let m = model(sigma);
        for q in [0.0, 0.5, 1.0] {
            let s = ScaleFunctions::new(&m, q, default_grid(&m, 1.0).unwrap()).unwrap();
            for extra in [0.5, 1.0, 2.0] {
                let lam = s.phi() + extra;
                let exact = 1.0 / (psi(sigma, lam) - q);
                let label = format!("sigma={sigma} q={q} lambda=Phi+{extra}");
                c.check(&label, s.laplace_transform(lam).unwrap(), exact, 1e-3 * exact);
            }
        }
    }
    c
}

fn c3() -> Criterion {
    let mut c = Criterion::new();
    let m = model(0.0);
    let s = ScaleFunctions::new(&m, 0.0, default_grid(&m, 2.0).unwrap()).unwrap();
    let rho = LAMBDA / (MU * C);
    for (i, x) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let closed = rho * (-(MU - LAMBDA / C) * x).exp();
        let analytic = 1.0 - s.pk_survival().at(x);
        c.check(&format!("x={x} series vs closed form"), analytic, closed, 1e-4);
        let cfg = sim(&m, x, 0.0, 3000 + i as u64).with_horizon(Horizon::Fixed(200.0));
        c.mc(&format!("x={x} simulation vs series"), &estimate(&cfg, Target::RuinProbability).unwrap(), analytic);
    }
    c
}

fn c4() -> Criterion {
    let mut c = Criterion::new();
    let q = 1.0;
    for (i, sigma) in [0.0, 1.0].into_iter().enumerate() {
        let m = model(sigma);
        let (xi, delta) = (edvci::xi(&m, q).unwrap(), edvci::delta(&m, q).unwrap());
        if sigma == 0.0 {
            c.check("M1 xi formula", xi, 1.0 / 3.0, 1e-12);
            c.check("M1 delta formula", delta, 1.0 / 3.0, 1e-12);
            c.check("M1 xi from ruin at zero", xi, m1_kappa(q, 0.0), 1e-12);
            c.check("M1 delta from ruin at zero", delta, m1_kappa(q, 0.0) / MU, 1e-12);
        }
        let e = estimate_many(&sim(&m, 0.0, q, 4000 + i as u64), &[Target::Xi, Target::Delta]).unwrap();
        c.mc(&format!("sigma={sigma} xi simulated"), &e[0], xi);
        c.mc(&format!("sigma={sigma} delta simulated"), &e[1], delta);
    }
    c
}

fn c5() -> Criterion {
    let mut c = Criterion::new();
    let m1 = model(0.0);
    let v0 = Analysis::for_surplus(&m1, 1.0, 0.0).unwrap().edvci(0.0).unwrap().V;
    c.check("M1 q=1 x=0 analytic", v0, 0.5, 1e-6);
    c.mc("M1 q=1 x=0 simulated", &estimate(&sim(&m1, 0.0, 1.0, 5000), Target::Edvci).unwrap(), v0);
    let mut seed = 5001;
    for sigma in [0.0, 1.0] {
        let m = model(sigma);
        for q in [0.5, 1.0] {
            let a = Analysis::for_surplus(&m, q, 1.0).unwrap();
            for x in [0.5, 1.0] {
                let v = a.edvci(x).unwrap().V;
                if sigma == 0.0 {
                    c.check(&format!("M1 q={q} x={x} vs closed form"), v, m1_edvci(q, x), 1e-6);
                }
                let e = estimate(&sim(&m, x, q, seed), Target::Edvci).unwrap();
                seed += 1;
                let tol = (SE * e.std_error + e.truncation_bound).max(0.02 * v);
                c.check(&format!("sigma={sigma} q={q} x={x} simulated"), e.value, v, tol);
            }
        }
    }
    c
}

fn c6() -> Criterion {
    let mut c = Criterion::new();
    let m1 = model(0.0);
    let grid = default_grid(&m1, 2.0).unwrap();
    for q in [0.25, 0.5, 1.0, 2.0] {
        let a = Analysis::new(&m1, q, grid).unwrap();
        let b = Analysis::new(&model(1e-3), q, grid).unwrap();
        for x in [0.0, 0.5, 1.0, 2.0] {
            let general = a.edvci(x).unwrap().V;
            let classical = classical_edvci(&m1, q, x, grid).unwrap();
            c.check(&format!("q={q} x={x} two paths"), general, classical, 1e-10);
            // ruin from x = 0 is immediate once σ > 0, so the small-σ limit needs x > 0
            if x > 0.0 {
                let perturbed = b.edvci(x).unwrap().V;
                c.check(&format!("q={q} x={x} sigma=1e-3"), perturbed, classical, 0.01 * classical);
            }
        }
    }
    c
}

fn c7() -> Criterion {
    const BINS: u32 = 7;
    let mut c = Criterion::new();
    let m = model(0.0);
    let cfg = sim(&m, 1.0, 0.0, 7000).with_horizon(Horizon::Fixed(200.0));
    let mut targets: Vec<Target> = (0..BINS).map(Target::NLaw).collect();
    targets.push(Target::RuinProbability);
    let e = estimate_many(&cfg, &targets).unwrap();
    let n = PATHS as f64;
    let ruined = e[BINS as usize].value * n;
    let rho = LAMBDA / (MU * C);
    let mut probs: Vec<f64> = (0..BINS).map(|k| (1.0 - rho) * rho.powi(k as i32)).collect();
    probs.push(rho.powi(BINS as i32));
    let mut counts: Vec<f64> = e[..BINS as usize].iter().map(|c| c.value * n).collect();
    counts.push(ruined - counts.iter().sum::<f64>());
    let stat: f64 = counts.iter().zip(&probs).map(|(o, p)| (o - p * ruined).powi(2) / (p * ruined)).sum();
    let p = 1.0 - ChiSquared::new((probs.len() - 1) as f64).unwrap().cdf(stat);
    c.flag(&format!("chi-square {stat:.3} on {} bins, p = {p:.4} > 0.01", probs.len()), p > 0.01);
    c
}

fn c8() -> Criterion {
    let mut c = Criterion::new();
    let m = model(1.0);
    let (q, x) = (0.5, 1.0);
    let spec = PenaltySpec::stationary(capped_deficit(2.0), capped_increment(2.0));
    let analytic = Analysis::for_surplus(&m, q, x).unwrap().extended_edpf(x, &spec).unwrap();
    c.flag(&format!("series tail bound {:.2e} < 1e-10", analytic.tail_bound), analytic.tail_bound < 1e-10);
    let e = estimate(&sim(&m, x, q, 8000), Target::ExtendedEdpf(spec)).unwrap();
    c.mc("M2 q=0.5 x=1 simulated", &e, analytic.value);
    c
}

fn c9() -> Criterion {
    let mut c = Criterion::new();
    let w = deficit();
    for sigma in [0.0, 1.0] {
        for q in [0.0, 0.5, 1.0] {
            let a = Analysis::for_surplus(&model(sigma), q, 2.0).unwrap();
            for x in [0.5, 1.0, 2.0] {
                let conv = a.classic_edpf(x, &w).unwrap();
                let scale = a.edpf_scale_form(x, &w).unwrap();
                c.check(&format!("sigma={sigma} q={q} x={x}"), scale, conv, 1e-3 * conv);
                if sigma == 0.0 {
                    c.check(&format!("sigma=0 q={q} x={x} vs closed form"), conv, m1_kappa(q, x) / MU, 1e-4);
                }
            }
        }
    }
    c
}

fn c10() -> Criterion {
    let mut c = Criterion::new();
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("report{i}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_ruinkit"))
            .args(["validate", "--seed", "11", "--paths", "2000", "--format", "json", "--out"])
            .arg(&path)
            .output()
            .unwrap();
        let code = o.status.code();
        c.flag(&format!("run {i} exit status {code:?} is 0 or 2"), matches!(code, Some(0 | 2)));
        outputs.push((o.stdout, std::fs::read(&path).unwrap_or_default()));
    }
    c.flag("stdout reports identical", outputs[0].0 == outputs[1].0 && !outputs[0].0.is_empty());
    c.flag("JSON reports identical", outputs[0].1 == outputs[1].1 && !outputs[0].1.is_empty());
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("root correctness", c1),
        ("scale function Laplace identity", c2),
        ("classical ruin probability", c3),
        ("xi and delta against simulation", c4),
        ("capital injections end to end", c5),
        ("classical reduction", c6),
        ("law of the record count", c7),
        ("extended penalty function against simulation", c8),
        ("penalty function forms agree", c9),
        ("deterministic validation report", c10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = run();
        println!("{} criterion {:>2}: {name} ({:.1} s)", if c.ok { "PASS" } else { "FAIL" }, i + 1, start.elapsed().as_secs_f64());
        for l in &c.lines {
            println!("{l}");
        }
        failed += usize::from(!c.ok);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
