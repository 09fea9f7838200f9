//! Binary log-linear learning and the better-response baseline.
//!
//! Each slot the coordinator picks one active player uniformly and a trial
//! channel uniformly over all channels (the current one included). The
//! player estimates its utility on the current channel (phase I) and on the
//! trial channel (phase II) from `N` fresh fading samples each, then switches
//! with probability `1 / (1 + e^{Δ̂/τ})` where `Δ̂ = Û(current) − Û(trial)`.

mod samples;
mod trajectory;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use samples::{
    required_samples, required_samples_bounded, required_samples_unbounded, LogMgf, NoiseConfig,
    NoiseSpec, SampleRequirement,
};
pub use trajectory::{SlotRecord, Trajectory};

use crate::error::{invalid, Error, Result};
use crate::game::CapGame;
use crate::profile::AssignmentProfile;
use crate::rng::{seeded, stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemperatureSchedule {
    Fixed { tau: f64 },
    /// `τ(t) = scale / ln(1 + t)` for slots `t ≥ 1`.
    LogDecreasing { scale: f64 },
}

impl TemperatureSchedule {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            TemperatureSchedule::Fixed { tau } => tau,
            TemperatureSchedule::LogDecreasing { scale } => scale,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("temperature parameter must be positive, got {v}")))
        }
    }

    /// Temperature of slot `t` (slots count from 1; `t = 0` reads as 1).
    pub fn tau_at(&self, t: u64) -> f64 {
        match *self {
            TemperatureSchedule::Fixed { tau } => tau,
            TemperatureSchedule::LogDecreasing { scale } => scale / (t.max(1) as f64).ln_1p(),
        }
    }
}

/// `1 / (1 + e^{Δ/τ})`, evaluated without overflow for any finite `Δ/τ`.
#[inline]
pub fn acceptance_probability(delta: f64, tau: f64) -> f64 {
    let x = delta / tau;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// How the per-phase sample count `N` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplePolicy {
    /// Recompute `N` from the slot's own temperature.
    PerSlot,
    /// `N` computed once at the given temperature and held for every slot.
    AtTemperature { tau: f64 },
    Fixed { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    LogLinear,
    /// Switch iff `Û(trial) > Û(current)`; ties keep the current channel.
    BetterResponse,
}

#[derive(Debug, Clone)]
pub struct LearnerOptions {
    pub rule: UpdateRule,
    pub schedule: TemperatureSchedule,
    pub noise: NoiseSpec,
    pub xi: f64,
    pub samples: SamplePolicy,
    /// Fading draws per profile for the sum-rate column (noisy mode).
    pub sum_rate_mc: usize,
    /// Seed of the sum-rate evaluation stream. Shared across runs so every
    /// profile's reported sum rate is the same number in every trajectory.
    pub eval_seed: u64,
}

impl LearnerOptions {
    /// Log-linear learning with `N` recomputed every slot, `ξ = 1e-5`.
    pub fn blla(schedule: TemperatureSchedule, noise: NoiseSpec) -> Self {
        Self {
            rule: UpdateRule::LogLinear,
            schedule,
            noise,
            xi: 1e-5,
            samples: SamplePolicy::PerSlot,
            sum_rate_mc: 200,
            eval_seed: 0,
        }
    }

    pub fn better_response(n_samples: usize) -> Self {
        Self {
            rule: UpdateRule::BetterResponse,
            schedule: TemperatureSchedule::Fixed { tau: 1.0 },
            noise: NoiseSpec::Bounded { width: 1.0 },
            xi: 1e-5,
            samples: SamplePolicy::Fixed { n: n_samples },
            sum_rate_mc: 200,
            eval_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.noise.validate()?;
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(invalid(format!("xi must lie in (0, 1), got {}", self.xi)));
        }
        match self.samples {
            SamplePolicy::Fixed { n: 0 } => Err(invalid("n_samples must be at least 1")),
            SamplePolicy::AtTemperature { tau } if !(tau > 0.0) => {
                Err(invalid("sample temperature must be positive"))
            }
            _ if self.sum_rate_mc == 0 => Err(invalid("sum_rate_mc must be at least 1")),
            _ => Ok(()),
        }
    }
}

/// Mutable state of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub profile: AssignmentProfile,
    pub t: u64,
    pub tau: f64,
    pub n_samples: usize,
    pub log: Vec<SlotRecord>,
}

impl LearnerState {
    pub fn new(profile: AssignmentProfile) -> Self {
        Self {
            profile,
            t: 0,
            tau: f64::NAN,
            n_samples: 0,
            log: Vec::new(),
        }
    }
}

/// Sum-rate lookups memoized per profile.
#[derive(Debug, Default)]
struct SumRateCache {
    values: HashMap<Vec<usize>, f64>,
}

impl SumRateCache {
    fn get<T: Scalar>(
        &mut self,
        game: &CapGame<T>,
        profile: &AssignmentProfile,
        mc: usize,
        seed: u64,
    ) -> Result<f64> {
        if let Some(&v) = self.values.get(profile.channels()) {
            return Ok(v);
        }
        let v = game.potential(profile, mc, seed)?.mean.as_f64();
        self.values.insert(profile.channels().to_vec(), v);
        Ok(v)
    }
}

/// Runs one learning rule on one game.
#[derive(Debug)]
pub struct Learner<'g, T> {
    game: &'g CapGame<T>,
    opts: LearnerOptions,
    cache: SumRateCache,
    last_n: Option<(f64, usize)>,
}

impl<'g, T: Scalar> Learner<'g, T> {
    pub fn new(game: &'g CapGame<T>, opts: LearnerOptions) -> Result<Self> {
        opts.validate()?;
        if game.active_players().is_empty() {
            return Err(Error::NoActivePlayers);
        }
        Ok(Self {
            game,
            opts,
            cache: SumRateCache::default(),
            last_n: None,
        })
    }

    pub fn options(&self) -> &LearnerOptions {
        &self.opts
    }

    fn samples_at(&mut self, tau: f64) -> Result<usize> {
        let target = match self.opts.samples {
            SamplePolicy::Fixed { n } => return Ok(n),
            SamplePolicy::AtTemperature { tau } => tau,
            SamplePolicy::PerSlot => tau,
        };
        if let Some((cached_tau, n)) = self.last_n {
            if cached_tau == target {
                return Ok(n);
            }
        }
        let req = required_samples(target, self.opts.xi, &self.opts.noise)?;
        let n = usize::try_from(req.n).map_err(|_| Error::SampleCountOverflow(req.n as f64))?;
        self.last_n = Some((target, n));
        Ok(n)
    }

    pub fn sum_rate(&mut self, profile: &AssignmentProfile) -> Result<f64> {
        self.cache
            .get(self.game, profile, self.opts.sum_rate_mc, self.opts.eval_seed)
    }

    /// Advances `state` by one slot.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut LearnerState, rng: &mut R) -> Result<()> {
        let game = self.game;
        let t = state.t + 1;
        let tau = self.opts.schedule.tau_at(t);
        let n = self.samples_at(tau)?;

        let active = game.active_players();
        let player = active[rng.random_range(0..active.len())];
        let trial = rng.random_range(0..game.num_channels());
        let current = state.profile.channel(player);

        let (accepted, delta_hat) = if trial == current {
            (false, 0.0)
        } else {
            let trial_profile = state.profile.with_channel(player, trial);
            let u_cur = game.utility_mean(&state.profile, player, n, false, rng).mean;
            let u_trial = game.utility_mean(&trial_profile, player, n, false, rng).mean;
            let delta = (u_cur - u_trial).as_f64();
            let accept = match self.opts.rule {
                UpdateRule::LogLinear => rng.random::<f64>() < acceptance_probability(delta, tau),
                UpdateRule::BetterResponse => u_trial > u_cur,
            };
            if accept {
                state.profile = trial_profile;
            }
            (accept, delta)
        };

        let sum_rate = self.sum_rate(&state.profile)?;
        state.t = t;
        state.tau = tau;
        state.n_samples = n;
        state.log.push(SlotRecord {
            t,
            tau: (self.opts.rule == UpdateRule::LogLinear).then_some(tau),
            n_samples: n,
            player,
            trial,
            accepted,
            delta_hat,
            sum_rate,
            profile: state.profile.clone(),
        });
        Ok(())
    }

    /// `horizon` slots from `initial`, drawing from `rng`.
    pub fn run_from<R: Rng + ?Sized>(
        &mut self,
        initial: AssignmentProfile,
        horizon: u64,
        rng: &mut R,
    ) -> Result<Trajectory> {
        self.game.check_profile(&initial)?;
        let initial_sum_rate = self.sum_rate(&initial)?;
        let mut state = LearnerState::new(initial.clone());
        state.log.reserve(horizon as usize);
        for _ in 0..horizon {
            self.step(&mut state, rng)?;
        }
        Ok(Trajectory {
            initial,
            initial_sum_rate,
            slots: state.log,
        })
    }

    /// `horizon` slots from a uniformly random initial profile; the initial
    /// profile and all learning randomness come from `seed`.
    pub fn run(&mut self, horizon: u64, seed: u64) -> Result<Trajectory> {
        let mut rng = seeded(seed, stream::LEARNING);
        let initial = self.game.random_profile(&mut rng);
        self.run_from(initial, horizon, &mut rng)
    }
}

/// One BLLA slot with `N` recomputed from the slot temperature. The sum-rate
/// column is exact in deterministic mode and a 200-draw estimate otherwise.
pub fn blla_step<T: Scalar, R: Rng + ?Sized>(
    state: &mut LearnerState,
    game: &CapGame<T>,
    schedule: TemperatureSchedule,
    noise: &NoiseSpec,
    xi: f64,
    rng: &mut R,
) -> Result<()> {
    let mut opts = LearnerOptions::blla(schedule, noise.clone());
    opts.xi = xi;
    Learner::new(game, opts)?.step(state, rng)
}

pub fn run_blla<T: Scalar>(
    game: &CapGame<T>,
    schedule: TemperatureSchedule,
    noise: &NoiseSpec,
    xi: f64,
    horizon: u64,
    seed: u64,
) -> Result<Trajectory> {
    let mut opts = LearnerOptions::blla(schedule, noise.clone());
    opts.xi = xi;
    Learner::new(game, opts)?.run(horizon, seed)
}

pub fn run_br<T: Scalar>(
    game: &CapGame<T>,
    n_samples: usize,
    horizon: u64,
    seed: u64,
) -> Result<Trajectory> {
    Learner::new(game, LearnerOptions::better_response(n_samples))?.run(horizon, seed)
}
