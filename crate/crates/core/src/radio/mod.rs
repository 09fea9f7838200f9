//! Cell layout, link gains, SINR and Shannon rates.

mod fading;
mod topology;

pub use fading::FadingRealization;
pub use topology::{generate_topology, Link, Point, Topology};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::profile::AssignmentProfile;
use crate::rng::{seeded, stream};
use crate::scalar::{db_to_linear, dbm_to_watts, Scalar};
use crate::stats::MeanAccumulator;

/// Radio-layer constants. Powers in watts, distances in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RadioParams<T> {
    pub cell_radius: T,
    pub d2d_radius: T,
    /// Path-loss distance floor `d0`; gains use `max(d, d0)`.
    pub reference_distance: T,
    pub num_channels: usize,
    pub bandwidth_hz: T,
    pub tx_power_ue: T,
    pub tx_power_bs: T,
    /// Noise power per channel.
    pub noise_power: T,
    pub pathloss_exponent: T,
    pub shadowing_sigma_db: T,
    pub sinr_min_db: T,
    pub sinr_max_db: T,
    /// Divide the BS power evenly over the cellular UEs' channels (otherwise
    /// every cellular link gets the full BS power).
    pub split_bs_power: bool,
}

impl<T: Scalar> RadioParams<T> {
    /// The standard LTE-like setting: 5 channels of 180 kHz, 46 dBm BS,
    /// 25 dBm UE, SINR clamped to [-10, 23] dB, thermal noise
    /// `-174 + 10 log10(W)` dBm, path-loss exponent 3.5, 6 dB shadowing,
    /// 200 m cell and 20 m D2D radius.
    pub fn full_scale() -> Self {
        let bandwidth = T::lit(180e3);
        Self {
            cell_radius: T::lit(200.0),
            d2d_radius: T::lit(20.0),
            reference_distance: T::one(),
            num_channels: 5,
            bandwidth_hz: bandwidth,
            tx_power_ue: dbm_to_watts(T::lit(25.0)),
            tx_power_bs: dbm_to_watts(T::lit(46.0)),
            noise_power: dbm_to_watts(T::lit(-174.0) + T::lit(10.0) * bandwidth.log10()),
            pathloss_exponent: T::lit(3.5),
            shadowing_sigma_db: T::lit(6.0),
            sinr_min_db: T::lit(-10.0),
            sinr_max_db: T::lit(23.0),
            split_bs_power: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !(pos(self.tx_power_ue) && pos(self.tx_power_bs) && pos(self.noise_power)) {
            return Err(invalid("all powers must be positive"));
        }
        if !(pos(self.d2d_radius) && self.cell_radius > self.d2d_radius) {
            return Err(invalid("need cell_radius > d2d_radius > 0"));
        }
        if !pos(self.reference_distance) {
            return Err(invalid("reference distance must be positive"));
        }
        if !(self.sinr_min_db < self.sinr_max_db) {
            return Err(invalid("sinr_min_db must be below sinr_max_db"));
        }
        if self.num_channels == 0 {
            return Err(invalid("need at least one channel"));
        }
        if !pos(self.bandwidth_hz) {
            return Err(invalid("bandwidth must be positive"));
        }
        if !(self.pathloss_exponent > T::zero()) || self.shadowing_sigma_db < T::zero() {
            return Err(invalid("path-loss exponent must be positive, shadowing sigma non-negative"));
        }
        Ok(())
    }

    pub fn sinr_min(&self) -> T {
        db_to_linear(self.sinr_min_db)
    }

    pub fn sinr_max(&self) -> T {
        db_to_linear(self.sinr_max_db)
    }

    /// Downlink power of each cellular link.
    pub fn uec_tx_power(&self, num_uec: usize) -> T {
        if self.split_bs_power && num_uec > 0 {
            self.tx_power_bs / T::from_usize(num_uec).unwrap()
        } else {
            self.tx_power_bs
        }
    }

    /// Largest rate any single link can reach.
    pub fn max_link_rate(&self) -> T {
        rate(self.sinr_max(), self.bandwidth_hz)
    }
}

/// Whether fading varies per sample or is frozen at one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    Rayleigh,
    Frozen,
}

/// Precomputed per-UE transmit powers and the linear SINR clamp, bound to
/// one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget<T> {
    pub tx_power: Vec<T>,
    pub noise_power: T,
    pub sinr_min: T,
    pub sinr_max: T,
    pub bandwidth_hz: T,
}

impl<T: Scalar> LinkBudget<T> {
    pub fn new(topology: &Topology<T>, params: &RadioParams<T>) -> Self {
        let uec_power = params.uec_tx_power(topology.num_uec());
        let tx_power = (0..topology.num_ues())
            .map(|ue| {
                if topology.is_uec(ue) {
                    uec_power
                } else {
                    params.tx_power_ue
                }
            })
            .collect();
        Self {
            tx_power,
            noise_power: params.noise_power,
            sinr_min: params.sinr_min(),
            sinr_max: params.sinr_max(),
            bandwidth_hz: params.bandwidth_hz,
        }
    }

    /// Unclamped SINR at `rx` with interference from the other members of
    /// `cochannel` (skipping `excluded`, whose power is treated as zero).
    #[inline]
    pub fn raw_sinr(
        &self,
        topology: &Topology<T>,
        cochannel: &[usize],
        rx: usize,
        excluded: Option<usize>,
        fading: &FadingRealization<T>,
    ) -> T {
        let mut denom = self.noise_power;
        for &tx in cochannel {
            if tx == rx || Some(tx) == excluded {
                continue;
            }
            denom += self.tx_power[tx] * topology.gain(tx, rx) * fading.get(tx, rx);
        }
        self.tx_power[rx] * topology.gain(rx, rx) * fading.get(rx, rx) / denom
    }

    #[inline]
    pub fn clamp(&self, sinr: T) -> T {
        sinr.max(self.sinr_min).min(self.sinr_max)
    }

    /// Sum of the clamped-SINR rates of the members of one channel, with
    /// `excluded` (if any) removed from the channel entirely.
    #[inline]
    pub fn channel_sum_rate(
        &self,
        topology: &Topology<T>,
        cochannel: &[usize],
        excluded: Option<usize>,
        fading: &FadingRealization<T>,
    ) -> T {
        let mut total = T::zero();
        for &rx in cochannel {
            if Some(rx) == excluded {
                continue;
            }
            let s = self.clamp(self.raw_sinr(topology, cochannel, rx, excluded, fading));
            total += rate(s, self.bandwidth_hz);
        }
        total
    }

    /// Channel sum rate with and without `player`, sharing one pass over the
    /// interference terms. Equals two [`Self::channel_sum_rate`] calls.
    #[inline]
    pub fn channel_sum_rate_pair(
        &self,
        topology: &Topology<T>,
        cochannel: &[usize],
        player: usize,
        fading: &FadingRealization<T>,
    ) -> (T, T) {
        let mut with = T::zero();
        let mut without = T::zero();
        for &rx in cochannel {
            let mut others = self.noise_power;
            let mut from_player = T::zero();
            for &tx in cochannel {
                if tx == rx {
                    continue;
                }
                let x = self.tx_power[tx] * topology.gain(tx, rx) * fading.get(tx, rx);
                if tx == player {
                    from_player = x;
                } else {
                    others += x;
                }
            }
            let signal = self.tx_power[rx] * topology.gain(rx, rx) * fading.get(rx, rx);
            with += rate(self.clamp(signal / (others + from_player)), self.bandwidth_hz);
            if rx != player {
                without += rate(self.clamp(signal / others), self.bandwidth_hz);
            }
        }
        (with, without)
    }
}

/// Clamped linear SINR of `ue` under `profile`:
/// `P_i g_i / (Σ_{j on the same channel, j≠i} P_j g_{j,i} + P0)` where every
/// gain is the mean gain times the fading coefficient.
pub fn sinr<T: Scalar>(
    topology: &Topology<T>,
    params: &RadioParams<T>,
    profile: &AssignmentProfile,
    ue: usize,
    fading: &FadingRealization<T>,
) -> T {
    let budget = LinkBudget::new(topology, params);
    let cochannel = profile.cochannel_set(profile.channel(ue));
    budget.clamp(budget.raw_sinr(topology, &cochannel, ue, None, fading))
}

/// Shannon rate `W log2(1 + sinr)` in bits/s.
#[inline]
pub fn rate<T: Scalar>(sinr: T, bandwidth_hz: T) -> T {
    bandwidth_hz * (T::one() + sinr).log2()
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Estimate<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
}

/// Expected rate of `ue` over `num_mc` independent fading draws.
///
/// In [`FadingMode::Frozen`] every draw is the unit realization, so the result
/// equals the single deterministic rate with zero standard error.
pub fn expected_rate<T: Scalar>(
    topology: &Topology<T>,
    params: &RadioParams<T>,
    profile: &AssignmentProfile,
    ue: usize,
    num_mc: usize,
    seed: u64,
    mode: FadingMode,
) -> Result<Estimate<T>> {
    if num_mc == 0 {
        return Err(invalid("num_mc must be at least 1"));
    }
    let budget = LinkBudget::new(topology, params);
    let cochannel = profile.cochannel_set(profile.channel(ue));
    let mut fading = FadingRealization::unit(topology.num_ues());
    let one_rate = |f: &FadingRealization<T>| {
        rate(
            budget.clamp(budget.raw_sinr(topology, &cochannel, ue, None, f)),
            params.bandwidth_hz,
        )
    };
    if mode == FadingMode::Frozen {
        return Ok(Estimate {
            mean: one_rate(&fading),
            std_error: T::zero(),
            samples: num_mc,
        });
    }
    let mut rng = seeded(seed, stream::FADING);
    let mut acc = MeanAccumulator::new();
    for _ in 0..num_mc {
        fading.resample_links(&cochannel, &mut rng);
        acc.push(one_rate(&fading));
    }
    Ok(acc.estimate())
}
