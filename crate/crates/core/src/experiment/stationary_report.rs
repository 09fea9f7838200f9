use serde::Serialize;

use crate::analysis::{
    brute_force_optimum, exact_transition_matrix, gibbs_distribution, stationary_direct,
    stationary_tree, stochastically_stable_states, StationaryMethod, KERNEL_STATE_LIMIT,
    TREE_STATE_LIMIT,
};
use crate::error::{invalid, Error, Result};
use crate::game::UtilityMode;

use super::ExperimentConfig;

/// Stationary distributions at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub tau: f64,
    pub direct: Vec<f64>,
    pub gibbs: Vec<f64>,
    /// Only for chains small enough to enumerate spanning trees.
    pub tree: Option<Vec<f64>>,
    pub direct_residual: f64,
    pub max_diff_direct_gibbs: f64,
    pub max_diff_direct_tree: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub config_hash: String,
    pub num_states: usize,
    /// Profile of each state index, `;`-separated channels.
    pub profiles: Vec<String>,
    pub optimum: Vec<usize>,
    pub phi_star: f64,
    pub points: Vec<StationaryPoint>,
    /// `None` when the grid has a single temperature.
    pub stable: Option<Vec<usize>>,
    /// Whether the stable set equals the optimum set.
    pub verdict: Option<bool>,
    pub warnings: Vec<String>,
}

/// Exact stationary analysis of realization 0's layout in the deterministic
/// utility mode: distributions by all methods along `tau_grid`, the
/// stochastically stable set, the exhaustive optimum, and whether they agree.
pub fn analyze_stationary(config: &ExperimentConfig, tau_grid: &[f64]) -> Result<StationaryReport> {
    config.validate()?;
    if tau_grid.is_empty() {
        return Err(invalid("temperature grid is empty"));
    }
    let game = config.game(0)?.with_mode(UtilityMode::Deterministic);
    let f = game.num_channels() as u128;
    let size = f
        .checked_pow(game.active_players().len() as u32)
        .unwrap_or(u128::MAX);
    if size > KERNEL_STATE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            size,
            limit: KERNEL_STATE_LIMIT,
        });
    }
    let optimum = brute_force_optimum(&game)?;

    let mut points = Vec::with_capacity(tau_grid.len());
    let mut profiles = Vec::new();
    for &tau in tau_grid {
        let kernel = exact_transition_matrix(&game, tau)?;
        if profiles.is_empty() {
            profiles = kernel.space.iter().map(|p| p.to_string()).collect();
        }
        let direct = stationary_direct(&kernel.matrix)?;
        let gibbs = gibbs_distribution(&game, tau)?;
        let tree = if kernel.matrix.len() <= TREE_STATE_LIMIT {
            Some(stationary_tree(&kernel.matrix)?)
        } else {
            None
        };
        points.push(StationaryPoint {
            tau,
            direct_residual: kernel.matrix.stationarity_residual(&direct.probs),
            max_diff_direct_gibbs: direct.max_abs_diff(&gibbs),
            max_diff_direct_tree: tree.as_ref().map(|t| direct.max_abs_diff(t)),
            direct: direct.probs,
            gibbs: gibbs.probs,
            tree: tree.map(|t| t.probs),
        });
    }

    let stability = stochastically_stable_states(&game, tau_grid, StationaryMethod::Direct)?;
    let verdict = stability.stable.as_ref().map(|s| *s == optimum.indices);
    Ok(StationaryReport {
        config_hash: config.config_hash()?,
        num_states: profiles.len(),
        profiles,
        optimum: optimum.indices,
        phi_star: optimum.phi_star,
        points,
        stable: stability.stable,
        verdict,
        warnings: stability.warnings,
    })
}
