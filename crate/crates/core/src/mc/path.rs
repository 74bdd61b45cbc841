use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, InverseGaussian, StandardNormal, Uniform};
use serde::Serialize;

use super::{SimConfig, SUBSTEP};
use crate::measure::LevyMeasure;

/// Streams at or above this index are used by the first-record simulation.
const FIRST_RECORD_STREAMS: u64 = 1 << 63;

/// A record of `Y` reached by a claim after ruin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordEvent {
    pub time: f64,
    /// `Y` at the previous record (the ruin level for the first one).
    pub previous_level: f64,
    /// Running supremum just before the claim.
    pub sup_before: f64,
    pub level: f64,
    /// `level - previous_level`.
    pub increment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuinPathRecord {
    pub ruined: bool,
    pub ruin_time: f64,
    /// `x - Y_{τ-}`; zero for creeping ruin.
    pub surplus_prior: f64,
    /// `Y_τ - x`; zero for creeping ruin.
    pub deficit: f64,
    pub ruin_by_jump: bool,
    /// Records after ruin, in time order.
    pub records: Vec<RecordEvent>,
    /// Simulation end time.
    pub horizon: f64,
}

impl RuinPathRecord {
    /// Records counted from ruin: the ruin itself when it happens by a claim,
    /// plus every later record.
    pub fn record_count(&self) -> usize {
        usize::from(self.ruin_by_jump) + self.records.len()
    }
}

/// Outcome of the first-record simulation from a fresh supremum at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstRecord {
    /// `None` when no record happens before the horizon.
    pub time: Option<f64>,
    pub level: f64,
}

struct Claims {
    clock: Exp<f64>,
    size: ClaimSize,
}

enum ClaimSize {
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Uniform(Uniform<f64>),
}

impl Claims {
    fn new(measure: &LevyMeasure) -> Self {
        let size = match *measure {
            LevyMeasure::Exponential { mu, .. } => ClaimSize::Exp(Exp::new(mu).expect("validated rate")),
            LevyMeasure::Gamma { shape, rate, .. } => {
                ClaimSize::Gamma(Gamma::new(shape, 1.0 / rate).expect("validated shape"))
            }
            LevyMeasure::Uniform { lower, upper, .. } => {
                ClaimSize::Uniform(Uniform::new_inclusive(lower, upper).expect("validated bounds"))
            }
            LevyMeasure::Tabulated { .. } => unreachable!("rejected by SimConfig::validate"),
        };
        Self { clock: Exp::new(measure.jump_rate()).expect("validated rate"), size }
    }

    fn wait<R: Rng>(&self, rng: &mut R) -> f64 {
        self.clock.sample(rng)
    }

    fn size<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.size {
            ClaimSize::Exp(d) => d.sample(rng),
            ClaimSize::Gamma(d) => d.sample(rng),
            ClaimSize::Uniform(d) => d.sample(rng),
        }
    }
}

/// Between claims `Y` is a Brownian motion with drift `-c` and volatility `σ`.
struct Diffusion {
    c: f64,
    sigma: f64,
    exact: bool,
}

/// Motion over one inter-claim interval.
enum Leg {
    /// `Y` reaches the ruin level continuously after this much time.
    Creep(f64),
    /// Increment over the interval, the level not having been reached.
    Move(f64),
}

impl Diffusion {
    /// Endpoint and running maximum over `dt`, unconditioned.
    fn free<R: Rng>(&self, rng: &mut R, dt: f64) -> (f64, f64) {
        if self.sigma == 0.0 {
            return (-self.c * dt, 0.0);
        }
        if self.exact {
            let end = self.endpoint(rng, dt);
            (end, self.bridge_max(rng, dt, end))
        } else {
            self.substep(rng, dt, f64::INFINITY).1
        }
    }

    fn endpoint<R: Rng>(&self, rng: &mut R, dt: f64) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        -self.c * dt + self.sigma * dt.sqrt() * z
    }

    /// Maximum of a Brownian bridge from 0 to `end` over `dt`.
    fn bridge_max<R: Rng>(&self, rng: &mut R, dt: f64, end: f64) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        0.5 * (end + (end * end - 2.0 * self.sigma * self.sigma * dt * u.ln()).sqrt())
    }

    /// Motion over `dt` that is stopped on first reaching `gap` above the start.
    fn towards<R: Rng>(&self, rng: &mut R, dt: f64, gap: f64) -> Leg {
        if self.sigma == 0.0 {
            return Leg::Move(-self.c * dt);
        }
        if !self.exact {
            return match self.substep(rng, dt, gap) {
                (Some(t), _) => Leg::Creep(t),
                (None, (end, _)) => Leg::Move(end),
            };
        }
        let s2 = self.sigma * self.sigma;
        // against the drift the level is reached with probability e^{-2c·gap/σ²},
        // and then after an inverse Gaussian time
        let reach = (-2.0 * self.c * gap / s2).exp();
        if rng.random::<f64>() < reach {
            let ig = InverseGaussian::new(gap / self.c, gap * gap / s2).expect("positive parameters");
            let hit = ig.sample(rng);
            if hit < dt {
                return Leg::Creep(hit);
            }
        }
        loop {
            let end = self.endpoint(rng, dt);
            let max = self.bridge_max(rng, dt, end);
            if max < gap {
                return Leg::Move(end);
            }
        }
    }

    /// Euler steps of size [`SUBSTEP`]; returns the first crossing of `gap`
    /// (if any) and the endpoint and maximum reached.
    fn substep<R: Rng>(&self, rng: &mut R, dt: f64, gap: f64) -> (Option<f64>, (f64, f64)) {
        let steps = (dt / SUBSTEP).ceil().max(1.0) as usize;
        let h = dt / steps as f64;
        let (mut y, mut max) = (0.0_f64, 0.0_f64);
        for k in 1..=steps {
            let z: f64 = StandardNormal.sample(rng);
            y += -self.c * h + self.sigma * h.sqrt() * z;
            max = max.max(y);
            if y >= gap {
                return (Some(k as f64 * h), (y, max));
            }
        }
        (None, (y, max))
    }
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn diffusion(config: &SimConfig) -> Diffusion {
    Diffusion { c: config.model.c(), sigma: config.model.sigma(), exact: config.bridge_correction }
}

/// One path from surplus `config.x`, followed until the horizon.
///
/// The random stream depends only on `(config.seed, index)`.
pub fn simulate_path(config: &SimConfig, index: u64) -> RuinPathRecord {
    let mut rng = path_rng(config.seed, index);
    let claims = Claims::new(config.model.measure());
    let motion = diffusion(config);
    let horizon = config.horizon_time();
    let x = config.x;
    let mut out = RuinPathRecord {
        ruined: false,
        ruin_time: f64::INFINITY,
        surplus_prior: 0.0,
        deficit: 0.0,
        ruin_by_jump: false,
        records: Vec::new(),
        horizon,
    };
    let mut t = 0.0;
    let mut y = 0.0;
    let mut next_claim = claims.wait(&mut rng);

    if x == 0.0 && motion.sigma > 0.0 {
        // the diffusion exits immediately
        out.ruined = true;
        out.ruin_time = 0.0;
    }
    while !out.ruined {
        let stop = next_claim.min(horizon);
        match motion.towards(&mut rng, stop - t, x - y) {
            Leg::Creep(dt) => {
                t += dt;
                y = x;
                out.ruined = true;
                out.ruin_time = t;
            }
            Leg::Move(end) => {
                y += end;
                t = stop;
                if next_claim >= horizon {
                    return out;
                }
                let jumped = y + claims.size(&mut rng);
                if jumped > x {
                    out.ruined = true;
                    out.ruin_by_jump = true;
                    out.ruin_time = t;
                    out.surplus_prior = x - y;
                    out.deficit = jumped - x;
                }
                y = jumped;
                next_claim = t + claims.wait(&mut rng);
            }
        }
    }

    // after ruin: every claim taking Y above its running supremum is a record
    let mut sup = y;
    let mut last = y;
    loop {
        let stop = next_claim.min(horizon);
        let (end, max) = motion.free(&mut rng, stop - t);
        sup = sup.max(y + max);
        y += end;
        t = stop;
        if next_claim >= horizon {
            return out;
        }
        let jumped = y + claims.size(&mut rng);
        if jumped > sup {
            out.records.push(RecordEvent {
                time: t,
                previous_level: last,
                sup_before: sup,
                level: jumped,
                increment: jumped - last,
            });
            sup = jumped;
            last = jumped;
        }
        y = jumped;
        next_claim = t + claims.wait(&mut rng);
    }
}

/// First record of `Y` reached by a claim, starting from `Y_0 = 0` with
/// supremum 0. Uses streams disjoint from [`simulate_path`].
pub fn simulate_first_record(config: &SimConfig, index: u64) -> FirstRecord {
    let mut rng = path_rng(config.seed, FIRST_RECORD_STREAMS | index);
    let claims = Claims::new(config.model.measure());
    let motion = diffusion(config);
    let horizon = config.horizon_time();
    let (mut t, mut y, mut sup) = (0.0, 0.0_f64, 0.0_f64);
    loop {
        let next = t + claims.wait(&mut rng);
        let stop = next.min(horizon);
        let (end, max) = motion.free(&mut rng, stop - t);
        sup = sup.max(y + max);
        y += end;
        t = stop;
        if next >= horizon {
            return FirstRecord { time: None, level: 0.0 };
        }
        y += claims.size(&mut rng);
        if y > sup {
            return FirstRecord { time: Some(t), level: y };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Horizon;
    use crate::model::LevyModel;

    fn config(sigma: f64, x: f64, q: f64) -> SimConfig {
        let m = LevyModel::new(1.5, sigma, LevyMeasure::exponential(1.0, 1.0).unwrap()).unwrap();
        let c = SimConfig::new(m, x, q, 100, 7);
        if q == 0.0 {
            c.with_horizon(Horizon::Fixed(200.0))
        } else {
            c
        }
    }

    #[test]
    fn same_stream_same_record() {
        let c = config(1.0, 1.0, 0.5);
        assert_eq!(simulate_path(&c, 3), simulate_path(&c, 3));
        let times: Vec<f64> = (0..50).map(|i| simulate_path(&c, i).ruin_time).collect();
        assert!(times.iter().any(|t| t.is_finite() && *t != times[0]));
    }

    #[test]
    fn classical_ruin_is_always_by_a_claim() {
        let c = config(0.0, 1.0, 0.0);
        for i in 0..2000 {
            let r = simulate_path(&c, i);
            if r.ruined {
                assert!(r.ruin_by_jump && r.deficit > 0.0 && r.surplus_prior > 0.0);
            }
        }
    }

    #[test]
    fn no_claims_no_ruin() {
        // a vanishing claim rate leaves a deterministic upward surplus
        let m = LevyModel::new(1.5, 0.0, LevyMeasure::exponential(1e-12, 1.0).unwrap()).unwrap();
        let c = SimConfig::new(m, 1.0, 0.0, 10, 1).with_horizon(Horizon::Fixed(50.0));
        for i in 0..10 {
            let r = simulate_path(&c, i);
            assert!(!r.ruined && r.record_count() == 0);
        }
    }

    #[test]
    fn records_are_strictly_increasing() {
        let c = config(1.0, 0.5, 0.2);
        let mut creeps = 0;
        let mut ruins = 0;
        for i in 0..3000 {
            let r = simulate_path(&c, i);
            assert_eq!(r.deficit > 0.0, r.ruin_by_jump);
            if r.ruined {
                ruins += 1;
                creeps += usize::from(!r.ruin_by_jump);
            }
            let mut t = r.ruin_time;
            let mut level = r.deficit + c.x;
            for e in &r.records {
                assert!(e.time > t && e.increment > 0.0 && e.level > level);
                assert!((e.increment - (e.level - e.previous_level)).abs() < 1e-12);
                t = e.time;
                level = e.level;
            }
        }
        assert!(creeps > 0 && creeps < ruins);
    }

    #[test]
    fn zero_surplus_with_diffusion_is_immediate_ruin() {
        let r = simulate_path(&config(1.0, 0.0, 1.0), 0);
        assert!(r.ruined && r.ruin_time == 0.0 && !r.ruin_by_jump);
    }
}
