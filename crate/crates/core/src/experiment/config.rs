use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::game::{CapGame, UtilityMode};
use crate::learning::{
    LearnerOptions, NoiseConfig, NoiseSpec, SamplePolicy, TemperatureSchedule, UpdateRule,
};
use crate::radio::{generate_topology, RadioParams, Topology};
use crate::scalar::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Blla,
    Br,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Fixed,
    LogDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Bounded,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleRule {
    /// `N` from each slot's own temperature.
    PerSlot,
    /// `N` from `sample_tau`, held for all slots.
    AtTemperature,
    /// `N = n_samples`.
    Fixed,
}

/// Flat experiment description. Units are part of the key names; powers in
/// dBm are converted to watts when the radio parameters are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub utility_mode: UtilityMode,

    pub cell_radius_m: f64,
    pub d2d_radius_m: f64,
    pub reference_distance_m: f64,
    pub num_channels: usize,
    pub num_uec: usize,
    pub num_ued: usize,
    pub bandwidth_hz: f64,
    pub tx_power_ue_dbm: f64,
    pub tx_power_bs_dbm: f64,
    /// Noise power per channel. Thermal noise at 180 kHz is about -121.45 dBm.
    pub noise_power_dbm: f64,
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
    pub sinr_min_db: f64,
    pub sinr_max_db: f64,
    pub split_bs_power: bool,

    pub schedule: ScheduleKind,
    /// Temperature of the fixed schedule.
    pub tau: f64,
    /// `c` in `τ(t) = c / ln(1 + t)`.
    pub tau_scale: f64,
    pub noise: NoiseKind,
    pub noise_width: f64,
    pub noise_sigma: f64,
    pub xi: f64,
    pub sample_rule: SampleRule,
    pub sample_tau: f64,
    pub n_samples: usize,

    pub horizon: u64,
    pub realizations: usize,
    /// Learning seed of realization `k` is `base_seed + k`.
    pub base_seed: u64,
    pub topology_seed: u64,
    /// Draw a new layout per realization (`topology_seed + k`) instead of
    /// reusing one.
    pub topology_per_realization: bool,
    /// Trailing fraction of slots used for convergence statistics.
    pub final_window: f64,
    /// Fading draws per profile for reported sum rates.
    pub sum_rate_mc: usize,
    pub eval_seed: u64,
    /// Shared fading draws for the exhaustive optimum; 0 disables it.
    pub optimum_mc: usize,
    /// Number of leading realizations whose full trajectories are written.
    pub trajectory_files: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// Small instance: four D2D pairs in a 40 m cell on three channels, no
    /// cellular UEs, 500 slots, 100 realizations on one fixed layout. Layout 74
    /// has a clearly separated optimum, so learning is easy to check on it.
    pub fn desk() -> Self {
        Self {
            algorithm: Algorithm::Blla,
            utility_mode: UtilityMode::Noisy,
            cell_radius_m: 40.0,
            d2d_radius_m: 20.0,
            reference_distance_m: 1.0,
            num_channels: 3,
            num_uec: 0,
            num_ued: 4,
            bandwidth_hz: 180e3,
            tx_power_ue_dbm: 25.0,
            tx_power_bs_dbm: 46.0,
            noise_power_dbm: thermal_noise_dbm(180e3),
            pathloss_exponent: 3.5,
            shadowing_sigma_db: 6.0,
            sinr_min_db: -10.0,
            sinr_max_db: 23.0,
            split_bs_power: true,
            schedule: ScheduleKind::Fixed,
            tau: 0.05,
            tau_scale: 0.1,
            noise: NoiseKind::Bounded,
            noise_width: 1.0,
            noise_sigma: 1.0,
            xi: 1e-5,
            sample_rule: SampleRule::PerSlot,
            sample_tau: 0.1,
            n_samples: 1,
            horizon: 500,
            realizations: 100,
            base_seed: 0,
            topology_seed: 74,
            topology_per_realization: false,
            final_window: 0.25,
            sum_rate_mc: 200,
            eval_seed: 0,
            optimum_mc: 0,
            trajectory_files: 1,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Full-scale setting: 200 m cell, 5 cellular UEs and 15 D2D pairs on
    /// 5 channels, decreasing temperature `0.1 / ln(1 + t)`, 1000 realizations.
    pub fn full_scale() -> Self {
        Self {
            cell_radius_m: 200.0,
            num_channels: 5,
            num_uec: 5,
            num_ued: 15,
            schedule: ScheduleKind::LogDecreasing,
            sample_rule: SampleRule::AtTemperature,
            realizations: 1000,
            topology_per_realization: true,
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full_scale()),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected 'desk' or 'full')"
            ))),
        }
    }

    /// Parses a TOML document; keys it omits keep their values from `base`.
    pub fn from_toml_over(base: &Self, text: &str) -> Result<Self> {
        let overlay: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut merged = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in overlay {
            if !merged.contains_key(&k) {
                return Err(Error::Config(format!("unknown key '{k}'")));
            }
            merged.insert(k, v);
        }
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_over(&Self::desk(), text)
    }

    pub fn load(path: &Path, base: &Self) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_over(base, &text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// SHA-256 (first 16 hex digits) of the serialized config with the
    /// output directory blanked, so moving outputs keeps the hash.
    pub fn config_hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let digest = Sha256::digest(c.to_toml()?.as_bytes());
        Ok(hex::encode(digest)[..16].to_string())
    }

    pub fn radio_params(&self) -> RadioParams<f64> {
        RadioParams {
            cell_radius: self.cell_radius_m,
            d2d_radius: self.d2d_radius_m,
            reference_distance: self.reference_distance_m,
            num_channels: self.num_channels,
            bandwidth_hz: self.bandwidth_hz,
            tx_power_ue: dbm_to_watts(self.tx_power_ue_dbm),
            tx_power_bs: dbm_to_watts(self.tx_power_bs_dbm),
            noise_power: dbm_to_watts(self.noise_power_dbm),
            pathloss_exponent: self.pathloss_exponent,
            shadowing_sigma_db: self.shadowing_sigma_db,
            sinr_min_db: self.sinr_min_db,
            sinr_max_db: self.sinr_max_db,
            split_bs_power: self.split_bs_power,
        }
    }

    pub fn temperature_schedule(&self) -> TemperatureSchedule {
        match self.schedule {
            ScheduleKind::Fixed => TemperatureSchedule::Fixed { tau: self.tau },
            ScheduleKind::LogDecreasing => TemperatureSchedule::LogDecreasing {
                scale: self.tau_scale,
            },
        }
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        match self.noise {
            NoiseKind::Bounded => NoiseConfig::Bounded {
                width: self.noise_width,
            },
            NoiseKind::Gaussian => NoiseConfig::Gaussian {
                sigma: self.noise_sigma,
            },
        }
        .to_spec()
    }

    pub fn sample_policy(&self) -> SamplePolicy {
        match (self.algorithm, self.sample_rule) {
            (Algorithm::Br, _) | (_, SampleRule::Fixed) => SamplePolicy::Fixed { n: self.n_samples },
            (_, SampleRule::PerSlot) => SamplePolicy::PerSlot,
            (_, SampleRule::AtTemperature) => SamplePolicy::AtTemperature {
                tau: self.sample_tau,
            },
        }
    }

    pub fn learner_options(&self) -> Result<LearnerOptions> {
        Ok(LearnerOptions {
            rule: match self.algorithm {
                Algorithm::Blla => UpdateRule::LogLinear,
                Algorithm::Br => UpdateRule::BetterResponse,
            },
            schedule: self.temperature_schedule(),
            noise: self.noise_spec()?,
            xi: self.xi,
            samples: self.sample_policy(),
            sum_rate_mc: self.sum_rate_mc,
            eval_seed: self.eval_seed,
        })
    }

    pub fn topology_seed_for(&self, realization: usize) -> u64 {
        if self.topology_per_realization {
            self.topology_seed.wrapping_add(realization as u64)
        } else {
            self.topology_seed
        }
    }

    pub fn learning_seed_for(&self, realization: usize) -> u64 {
        self.base_seed.wrapping_add(realization as u64)
    }

    pub fn topology(&self, realization: usize) -> Result<Topology<f64>> {
        generate_topology(
            &self.radio_params(),
            self.num_uec,
            self.num_ued,
            self.topology_seed_for(realization),
        )
    }

    pub fn game(&self, realization: usize) -> Result<CapGame<f64>> {
        CapGame::new(self.topology(realization)?, self.radio_params(), self.utility_mode)
    }

    /// Checks every nested invariant before any compute starts.
    pub fn validate(&self) -> Result<()> {
        self.radio_params().validate()?;
        if self.num_uec > self.num_channels {
            return Err(Error::InfeasibleDedicatedChannels {
                num_uec: self.num_uec,
                num_channels: self.num_channels,
            });
        }
        if self.realizations == 0 {
            return Err(invalid("realizations must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if !(self.final_window > 0.0 && self.final_window <= 1.0) {
            return Err(invalid("final_window must lie in (0, 1]"));
        }
        self.learner_options()?.validate()?;
        Ok(())
    }
}

/// `-174 dBm/Hz + 10 log10(W)`.
pub fn thermal_noise_dbm(bandwidth_hz: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10()
}
