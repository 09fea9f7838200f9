//! The channel-assignment game: marginal-contribution utilities whose
//! expectations form an exact potential game with the sum rate as potential.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profile::AssignmentProfile;
use crate::radio::{Estimate, FadingRealization, LinkBudget, RadioParams, Topology};
use crate::rng::{seeded, stream};
use crate::scalar::Scalar;
use crate::stats::MeanAccumulator;

/// How utilities are observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMode {
    /// Every sample sees fresh Rayleigh fading.
    Noisy,
    /// Fading frozen at one; utilities are exact and repeatable.
    Deterministic,
}

/// Sample mean of `samples` utility observations.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityEstimate<T> {
    pub mean: T,
    pub samples: usize,
    pub sample_variance: T,
    /// Individual observations, when retention was requested.
    pub values: Option<Vec<T>>,
}

/// A channel-assignment game bound to one topology.
///
/// Cellular UEs are passive players pinned to dedicated channels (UEC `k`
/// on channel `k`); D2D pairs are the active players and may use any channel.
/// Utilities are normalized by `phi_max = |D| · W · log2(1 + γ_max)`, an upper
/// bound on the sum rate of any profile.
#[derive(Debug, Clone)]
pub struct CapGame<T> {
    topology: Topology<T>,
    params: RadioParams<T>,
    budget: LinkBudget<T>,
    active: Vec<usize>,
    mode: UtilityMode,
    phi_max: T,
}

impl<T: Scalar> CapGame<T> {
    pub fn new(topology: Topology<T>, params: RadioParams<T>, mode: UtilityMode) -> Result<Self> {
        params.validate()?;
        if topology.num_uec() > params.num_channels {
            return Err(Error::InfeasibleDedicatedChannels {
                num_uec: topology.num_uec(),
                num_channels: params.num_channels,
            });
        }
        let budget = LinkBudget::new(&topology, &params);
        let active = (topology.num_uec()..topology.num_ues()).collect();
        let players = T::from_usize(topology.num_ues().max(1)).unwrap();
        let phi_max = players * params.max_link_rate();
        Ok(Self {
            topology,
            params,
            budget,
            active,
            mode,
            phi_max,
        })
    }

    pub fn topology(&self) -> &Topology<T> {
        &self.topology
    }

    pub fn params(&self) -> &RadioParams<T> {
        &self.params
    }

    pub fn mode(&self) -> UtilityMode {
        self.mode
    }

    /// Same game with a different utility mode.
    pub fn with_mode(&self, mode: UtilityMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn num_ues(&self) -> usize {
        self.topology.num_ues()
    }

    pub fn num_channels(&self) -> usize {
        self.params.num_channels
    }

    pub fn active_players(&self) -> &[usize] {
        &self.active
    }

    pub fn phi_max(&self) -> T {
        self.phi_max
    }

    /// Profile with passive players on their dedicated channels and active
    /// players on `active_channels` (in active-player order).
    pub fn profile(&self, active_channels: &[usize]) -> Result<AssignmentProfile> {
        if active_channels.len() != self.active.len() {
            return Err(invalid(format!(
                "expected {} active channels, got {}",
                self.active.len(),
                active_channels.len()
            )));
        }
        let nc = self.topology.num_uec();
        let channels: Vec<usize> = (0..nc).chain(active_channels.iter().copied()).collect();
        let passive: Vec<bool> = (0..self.num_ues()).map(|ue| ue < nc).collect();
        AssignmentProfile::new(channels, passive, self.num_channels())
    }

    /// Passive players fixed, active players uniform over all channels.
    pub fn random_profile<R: Rng + ?Sized>(&self, rng: &mut R) -> AssignmentProfile {
        let f = self.num_channels();
        let chans: Vec<usize> = self.active.iter().map(|_| rng.random_range(0..f)).collect();
        self.profile(&chans).expect("random channels are in range")
    }

    pub fn check_profile(&self, profile: &AssignmentProfile) -> Result<()> {
        if profile.len() != self.num_ues() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} entries, game has {} UEs",
                profile.len(),
                self.num_ues()
            )));
        }
        for ue in 0..self.topology.num_uec() {
            if !profile.is_passive(ue) || profile.channel(ue) != ue {
                return Err(Error::InvalidProfile(format!(
                    "cellular UE {ue} must stay passive on channel {ue}"
                )));
            }
        }
        if profile.channels().iter().any(|&c| c >= self.num_channels()) {
            return Err(Error::InvalidProfile("channel index out of range".into()));
        }
        Ok(())
    }

    /// Normalized marginal contribution of `player` under one fading draw:
    /// the co-channel sum rate with the player minus the co-channel sum rate
    /// after removing it (its transmit power zeroed).
    pub fn utility_sample(
        &self,
        profile: &AssignmentProfile,
        player: usize,
        fading: &FadingRealization<T>,
    ) -> T {
        let members = profile.cochannel_set(profile.channel(player));
        self.marginal(&members, player, fading)
    }

    #[inline]
    fn marginal(&self, members: &[usize], player: usize, fading: &FadingRealization<T>) -> T {
        let (with, without) =
            self.budget
                .channel_sum_rate_pair(&self.topology, members, player, fading);
        (with - without) / self.phi_max
    }

    /// Exact utility in deterministic mode.
    pub fn utility(&self, profile: &AssignmentProfile, player: usize) -> Result<T> {
        self.require_deterministic()?;
        Ok(self.utility_sample(profile, player, &FadingRealization::unit(self.num_ues())))
    }

    /// Average of `n` utility samples, each with fresh fading on the
    /// player's channel. In deterministic mode this is the exact utility.
    pub fn utility_mean<R: Rng + ?Sized>(
        &self,
        profile: &AssignmentProfile,
        player: usize,
        n: usize,
        retain: bool,
        rng: &mut R,
    ) -> UtilityEstimate<T> {
        assert!(n >= 1, "need at least one sample");
        let members = profile.cochannel_set(profile.channel(player));
        let mut fading = FadingRealization::unit(self.num_ues());
        if self.mode == UtilityMode::Deterministic {
            let u = self.marginal(&members, player, &fading);
            return UtilityEstimate {
                mean: u,
                samples: n,
                sample_variance: T::zero(),
                values: retain.then(|| vec![u; n]),
            };
        }
        let mut acc = MeanAccumulator::new();
        let mut values = retain.then(|| Vec::with_capacity(n));
        for _ in 0..n {
            fading.resample_links(&members, rng);
            let u = self.marginal(&members, player, &fading);
            acc.push(u);
            if let Some(v) = values.as_mut() {
                v.push(u);
            }
        }
        UtilityEstimate {
            mean: acc.mean(),
            samples: n,
            sample_variance: acc.sample_variance(),
            values,
        }
    }

    /// [`Self::utility_mean`] on a fresh seeded fading stream.
    pub fn utility_mean_seeded(
        &self,
        profile: &AssignmentProfile,
        player: usize,
        n: usize,
        seed: u64,
    ) -> Result<UtilityEstimate<T>> {
        if n == 0 {
            return Err(invalid("n_samples must be at least 1"));
        }
        let mut rng = seeded(seed, stream::FADING);
        Ok(self.utility_mean(profile, player, n, false, &mut rng))
    }

    /// Sum rate (bits/s) of all UEs, passive ones included, under one draw.
    pub fn sum_rate_sample(&self, profile: &AssignmentProfile, fading: &FadingRealization<T>) -> T {
        let mut members = Vec::with_capacity(self.num_ues());
        let mut total = T::zero();
        for c in 0..self.num_channels() {
            profile.cochannel_into(c, &mut members);
            if !members.is_empty() {
                total += self
                    .budget
                    .channel_sum_rate(&self.topology, &members, None, fading);
            }
        }
        total
    }

    /// Expected sum rate in bits/s: exact in deterministic mode, otherwise a
    /// Monte Carlo estimate over `num_mc` fading draws.
    pub fn potential(
        &self,
        profile: &AssignmentProfile,
        num_mc: usize,
        seed: u64,
    ) -> Result<Estimate<T>> {
        let unit = FadingRealization::unit(self.num_ues());
        if self.mode == UtilityMode::Deterministic {
            return Ok(Estimate {
                mean: self.sum_rate_sample(profile, &unit),
                std_error: T::zero(),
                samples: 1,
            });
        }
        if num_mc == 0 {
            return Err(invalid("num_mc must be at least 1"));
        }
        let mut rng = seeded(seed, stream::POTENTIAL_EVAL);
        let mut fading = unit;
        let mut acc = MeanAccumulator::new();
        for _ in 0..num_mc {
            fading.resample_all(&mut rng);
            acc.push(self.sum_rate_sample(profile, &fading));
        }
        Ok(acc.estimate())
    }

    /// Exact potential divided by `phi_max` (deterministic mode).
    pub fn normalized_potential(&self, profile: &AssignmentProfile) -> Result<T> {
        self.require_deterministic()?;
        let unit = FadingRealization::unit(self.num_ues());
        Ok(self.sum_rate_sample(profile, &unit) / self.phi_max)
    }

    /// `|ΔU_i − Δφ|` for moving `player` between `a_i` and `a_i_prime` with
    /// everyone else as in `others` (normalized units).
    pub fn verify_potential_identity(
        &self,
        player: usize,
        a_i: usize,
        a_i_prime: usize,
        others: &AssignmentProfile,
    ) -> Result<T> {
        self.require_deterministic()?;
        if others.is_passive(player) {
            return Err(invalid(format!("player {player} is passive")));
        }
        let a = others.with_channel(player, a_i);
        let b = others.with_channel(player, a_i_prime);
        let du = self.utility(&a, player)? - self.utility(&b, player)?;
        let dphi = self.normalized_potential(&a)? - self.normalized_potential(&b)?;
        Ok((du - dphi).abs())
    }

    fn require_deterministic(&self) -> Result<()> {
        match self.mode {
            UtilityMode::Deterministic => Ok(()),
            UtilityMode::Noisy => Err(Error::RequiresDeterministic),
        }
    }
}
