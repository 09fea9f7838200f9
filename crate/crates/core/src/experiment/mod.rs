//! Experiment driver: configs, seeded realizations, sweeps and output files.
//!
//! Realization `k` always uses learning seed `base_seed + k` (and, with
//! per-realization layouts, topology seed `topology_seed + k`), so sweep
//! points are paired. Realizations run in parallel and are reduced in index
//! order, so outputs do not depend on scheduling.

mod config;
mod output;
mod stationary_report;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    thermal_noise_dbm, Algorithm, ExperimentConfig, NoiseKind, SampleRule, ScheduleKind,
};
pub use output::{write_stationary_report, write_sweep, Manifest};
pub use stationary_report::{analyze_stationary, StationaryPoint, StationaryReport};

use crate::analysis::{brute_force_optimum_mc, Optimum};
use crate::error::{invalid, Result};
use crate::game::CapGame;
use crate::learning::{
    required_samples, Learner, NoiseSpec, SampleRequirement, SlotRecord, Trajectory,
};
use crate::profile::AssignmentProfile;
use crate::stats::mean_and_std_error;

/// Summary of one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationSummary {
    pub index: usize,
    pub seed: u64,
    pub topology_seed: u64,
    pub final_window_mean: f64,
    pub final_profile: AssignmentProfile,
    /// Best achievable expected sum rate, when the optimum is tracked.
    pub phi_star: Option<f64>,
    /// Fraction of the final window spent in an optimal profile.
    pub optimal_occupancy: Option<f64>,
}

/// Aggregates over the realizations of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub label: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub first_seed: u64,
    pub last_seed: u64,
    pub horizon: u64,
    pub window_slots: usize,
    /// Per-slot mean sum rate across realizations and its standard error.
    pub mean_trace: Vec<f64>,
    pub trace_std_error: Vec<f64>,
    pub final_mean: f64,
    /// Sample standard deviation over realizations divided by `sqrt(R)`.
    pub final_std_error: f64,
    pub phi_star_mean: Option<f64>,
    pub occupancy_mean: Option<f64>,
    pub occupancy_std_error: Option<f64>,
    pub realizations: Vec<RealizationSummary>,
    /// CSV text of the leading trajectories, by realization index.
    #[serde(skip)]
    pub trajectories: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub name: String,
    pub base_hash: String,
    pub points: Vec<SweepPoint>,
}

struct RunOutput {
    summary: RealizationSummary,
    sum_rates: Vec<f64>,
    csv: Option<String>,
}

fn run_realization(
    config: &ExperimentConfig,
    k: usize,
    optima: &BTreeMap<u64, Optimum>,
) -> Result<RunOutput> {
    let game = config.game(k)?;
    let seed = config.learning_seed_for(k);
    let traj = if game.active_players().is_empty() {
        static_trajectory(&game, config)?
    } else {
        Learner::new(&game, config.learner_options()?)?.run(config.horizon, seed)?
    };
    let topology_seed = config.topology_seed_for(k);
    let optimum = optima.get(&topology_seed);
    let sum_rates = traj.sum_rates();
    Ok(RunOutput {
        summary: RealizationSummary {
            index: k,
            seed,
            topology_seed,
            final_window_mean: traj.window_mean_sum_rate(config.final_window),
            final_profile: traj.final_profile().clone(),
            phi_star: optimum.map(|o| o.phi_star),
            optimal_occupancy: optimum
                .map(|o| traj.window_occupancy(config.final_window, &o.profiles)),
        },
        sum_rates,
        csv: (k < config.trajectory_files).then(|| traj.to_csv()),
    })
}

/// Without active players nothing ever moves: every slot keeps the initial
/// profile and its sum rate.
fn static_trajectory(game: &CapGame<f64>, config: &ExperimentConfig) -> Result<Trajectory> {
    let profile = game.profile(&[])?;
    let sum_rate = game.potential(&profile, config.sum_rate_mc, config.eval_seed)?.mean;
    let slots = (1..=config.horizon)
        .map(|t| SlotRecord {
            t,
            tau: None,
            n_samples: 0,
            player: usize::MAX,
            trial: usize::MAX,
            accepted: false,
            delta_hat: 0.0,
            sum_rate,
            profile: profile.clone(),
        })
        .collect();
    Ok(Trajectory {
        initial: profile,
        initial_sum_rate: sum_rate,
        slots,
    })
}

/// Runs `config.realizations` independent trajectories and aggregates them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepResult> {
    let point = run_point(config, "run".to_string())?;
    Ok(SweepResult {
        name: "run".into(),
        base_hash: point.config_hash.clone(),
        points: vec![point],
    })
}

fn run_point(config: &ExperimentConfig, label: String) -> Result<SweepPoint> {
    config.validate()?;
    let r = config.realizations;

    // Exhaustive optima once per distinct layout.
    let mut optima = BTreeMap::new();
    if config.optimum_mc > 0 {
        let seeds: Vec<u64> = (0..r).map(|k| config.topology_seed_for(k)).collect();
        let mut distinct = seeds.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let computed: Vec<(u64, Optimum)> = distinct
            .par_iter()
            .map(|&ts| {
                let k = seeds.iter().position(|&s| s == ts).expect("seed present");
                let game = config.game(k)?;
                Ok((ts, brute_force_optimum_mc(&game, config.optimum_mc, config.eval_seed)?))
            })
            .collect::<Result<_>>()?;
        optima.extend(computed);
    }

    // Any failed realization fails the whole point.
    let runs: Vec<RunOutput> = (0..r)
        .into_par_iter()
        .map(|k| run_realization(config, k, &optima))
        .collect::<Result<_>>()?;

    let horizon = config.horizon as usize;
    let mut mean_trace = Vec::with_capacity(horizon);
    let mut trace_std_error = Vec::with_capacity(horizon);
    let mut column = Vec::with_capacity(r);
    for t in 0..horizon {
        column.clear();
        column.extend(runs.iter().map(|run| run.sum_rates[t]));
        let (m, se) = mean_and_std_error(&column);
        mean_trace.push(m);
        trace_std_error.push(se);
    }
    let finals: Vec<f64> = runs.iter().map(|x| x.summary.final_window_mean).collect();
    let (final_mean, final_std_error) = mean_and_std_error(&finals);

    let (phi_star_mean, occupancy_mean, occupancy_std_error) = if optima.is_empty() {
        (None, None, None)
    } else {
        let phis: Vec<f64> = runs.iter().filter_map(|x| x.summary.phi_star).collect();
        let occ: Vec<f64> = runs
            .iter()
            .filter_map(|x| x.summary.optimal_occupancy)
            .collect();
        let (om, ose) = mean_and_std_error(&occ);
        (Some(mean_and_std_error(&phis).0), Some(om), Some(ose))
    };

    let window_slots = ((horizon as f64) * config.final_window).ceil() as usize;
    let trajectories = runs
        .iter()
        .filter_map(|x| x.csv.clone().map(|c| (x.summary.index, c)))
        .collect();
    Ok(SweepPoint {
        label,
        config: config.clone(),
        config_hash: config.config_hash()?,
        first_seed: config.learning_seed_for(0),
        last_seed: config.learning_seed_for(r - 1),
        horizon: config.horizon,
        window_slots: window_slots.min(horizon),
        mean_trace,
        trace_std_error,
        final_mean,
        final_std_error,
        phi_star_mean,
        occupancy_mean,
        occupancy_std_error,
        realizations: runs.into_iter().map(|x| x.summary).collect(),
        trajectories,
    })
}

/// One experiment per channel count, with identical seeds at every point.
pub fn sweep_channels(config: &ExperimentConfig, channel_counts: &[usize]) -> Result<SweepResult> {
    sweep(config, "channels", channel_counts, |c, v| c.num_channels = v)
}

/// One experiment per D2D-pair count, with identical seeds at every point.
pub fn sweep_ues(config: &ExperimentConfig, ued_counts: &[usize]) -> Result<SweepResult> {
    sweep(config, "ueds", ued_counts, |c, v| c.num_ued = v)
}

fn sweep(
    config: &ExperimentConfig,
    name: &str,
    values: &[usize],
    set: impl Fn(&mut ExperimentConfig, usize),
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(invalid("sweep needs at least one value"));
    }
    // Reject every invalid point before running any of them.
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| {
            let mut c = config.clone();
            set(&mut c, v);
            c.validate().map(|_| c)
        })
        .collect::<Result<_>>()?;
    let points = configs
        .iter()
        .zip(values)
        .map(|(c, v)| run_point(c, format!("{name}={v}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        name: name.to_string(),
        base_hash: config.config_hash()?,
        points,
    })
}

/// Sample count and its intermediate quantities.
pub fn samples_calc(tau: f64, xi: f64, noise: &NoiseSpec) -> Result<SampleRequirement> {
    required_samples(tau, xi, noise)
}
