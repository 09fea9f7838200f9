//! Exact analysis of small instances in the deterministic utility mode:
//! exhaustive optimum, the one-slot BLLA transition matrix, its stationary
//! distribution by three independent methods, and resistance calculus.
//!
//! Profiles of a game are indexed in mixed radix over the active players:
//! `index = Σ_k channel(active[k]) · F^k`, so the lowest active player is
//! the least significant digit.

mod kernel;
mod resistance;
mod stationary;
mod trees;

pub use kernel::{exact_transition_matrix, StochasticMatrix, TransitionKernel, KERNEL_STATE_LIMIT};
pub use resistance::{
    empirical_resistance, min_resistance_tree_check, res_add, res_inv, res_mul, res_of_const,
    res_of_exp, res_sub, resistance_graph, transition_resistance, EmpiricalResistance,
    ResistanceExpr, ResistanceMatrix, ResistanceTerm, SubExpTag, TreeCheck,
};
pub use stationary::{
    gibbs_distribution, stationary_direct, stationary_tree, stochastically_stable_states,
    StabilityReport, StationaryDistribution, StationaryMethod, TREE_STATE_LIMIT,
};
pub use trees::for_each_arborescence;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{CapGame, UtilityMode};
use crate::profile::AssignmentProfile;
use crate::radio::FadingRealization;
use crate::rng::{seeded, stream};
use crate::scalar::Scalar;

/// Largest profile space the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Normalized potentials within this distance of the maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Enumeration of all profiles reachable by the active players, with the
/// passive players held on their dedicated channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpace {
    template: AssignmentProfile,
    active: Vec<usize>,
    num_channels: usize,
    size: usize,
}

impl ProfileSpace {
    pub fn new<T: Scalar>(game: &CapGame<T>, limit: u128) -> Result<Self> {
        let f = game.num_channels() as u128;
        let k = game.active_players().len() as u32;
        let size = f.checked_pow(k).unwrap_or(u128::MAX);
        if size > limit {
            return Err(Error::StateSpaceTooLarge { size, limit });
        }
        let template = game.profile(&vec![0; k as usize])?;
        Ok(Self {
            template,
            active: game.active_players().to_vec(),
            num_channels: game.num_channels(),
            size: size as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn active_players(&self) -> &[usize] {
        &self.active
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn profile(&self, index: usize) -> AssignmentProfile {
        assert!(index < self.size, "profile index {index} out of range");
        let mut p = self.template.clone();
        let mut rest = index;
        for &ue in &self.active {
            p = p.with_channel(ue, rest % self.num_channels);
            rest /= self.num_channels;
        }
        p
    }

    pub fn index(&self, profile: &AssignmentProfile) -> usize {
        self.active
            .iter()
            .rev()
            .fold(0, |acc, &ue| acc * self.num_channels + profile.channel(ue))
    }

    pub fn iter(&self) -> impl Iterator<Item = AssignmentProfile> + '_ {
        (0..self.size).map(|i| self.profile(i))
    }
}

/// Maximizing profiles and the maximum potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub indices: Vec<usize>,
    pub profiles: Vec<AssignmentProfile>,
    /// Maximum expected sum rate, bits/s.
    pub phi_star: f64,
    pub phi_star_normalized: f64,
    /// Normalized gap to the best non-optimal profile (infinite if none).
    pub runner_up_gap: f64,
}

fn optimum_from_values(space: &ProfileSpace, values: &[f64], phi_max: f64) -> Optimum {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let indices: Vec<usize> = (0..values.len())
        .filter(|&i| best - values[i] <= TIE_TOLERANCE)
        .collect();
    let runner_up = values
        .iter()
        .filter(|&&v| best - v > TIE_TOLERANCE)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Optimum {
        profiles: indices.iter().map(|&i| space.profile(i)).collect(),
        indices,
        phi_star: best * phi_max,
        phi_star_normalized: best,
        runner_up_gap: best - runner_up,
    }
}

/// Normalized exact potential of every profile, by index.
pub fn potential_table<T: Scalar>(game: &CapGame<T>, space: &ProfileSpace) -> Result<Vec<f64>> {
    space
        .iter()
        .map(|p| game.normalized_potential(&p).map(Scalar::as_f64))
        .collect()
}

/// Exhaustive maximization of the exact potential (deterministic mode).
pub fn brute_force_optimum<T: Scalar>(game: &CapGame<T>) -> Result<Optimum> {
    if game.mode() != UtilityMode::Deterministic {
        return Err(Error::RequiresDeterministic);
    }
    let space = ProfileSpace::new(game, BRUTE_FORCE_LIMIT)?;
    let values = potential_table(game, &space)?;
    Ok(optimum_from_values(&space, &values, game.phi_max().as_f64()))
}

/// Exhaustive maximization of the expected sum rate under Rayleigh fading,
/// estimated from `num_mc` full fading draws shared by every profile (common
/// random numbers, so profile differences carry little Monte Carlo noise).
pub fn brute_force_optimum_mc<T: Scalar>(
    game: &CapGame<T>,
    num_mc: usize,
    seed: u64,
) -> Result<Optimum> {
    if game.mode() == UtilityMode::Deterministic {
        return brute_force_optimum(game);
    }
    if num_mc == 0 {
        return Err(crate::error::invalid("num_mc must be at least 1"));
    }
    let space = ProfileSpace::new(game, BRUTE_FORCE_LIMIT)?;
    let profiles: Vec<AssignmentProfile> = space.iter().collect();
    let mut sums = vec![0.0; space.len()];
    let mut rng = seeded(seed, stream::ORACLE);
    let mut fading = FadingRealization::unit(game.num_ues());
    for _ in 0..num_mc {
        fading.resample_all(&mut rng);
        for (s, p) in sums.iter_mut().zip(&profiles) {
            *s += game.sum_rate_sample(p, &fading).as_f64();
        }
    }
    let phi_max = game.phi_max().as_f64();
    let values: Vec<f64> = sums.iter().map(|s| s / num_mc as f64 / phi_max).collect();
    Ok(optimum_from_values(&space, &values, phi_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{RadioParams, Topology};

    fn params(channels: usize) -> RadioParams<f64> {
        let mut p = RadioParams::full_scale();
        p.num_channels = channels;
        p.tx_power_ue = 1.0;
        p.tx_power_bs = 1.0;
        p.noise_power = 0.1;
        p.bandwidth_hz = 1.0;
        p
    }

    #[test]
    fn mixed_radix_round_trip() {
        let topo = Topology::from_gains(1, vec![vec![1.0; 4]; 4]).unwrap();
        let g = CapGame::new(topo, params(3), UtilityMode::Deterministic).unwrap();
        let space = ProfileSpace::new(&g, 100).unwrap();
        assert_eq!(space.len(), 27);
        for i in 0..27 {
            let p = space.profile(i);
            assert_eq!(p.channel(0), 0);
            assert_eq!(space.index(&p), i);
        }
        // Lowest active player is the least significant digit.
        assert_eq!(space.profile(1).channels(), &[0, 1, 0, 0]);
        assert_eq!(space.profile(3).channels(), &[0, 0, 1, 0]);
        assert!(matches!(
            ProfileSpace::new(&g, 26),
            Err(Error::StateSpaceTooLarge { size: 27, limit: 26 })
        ));
    }

    #[test]
    fn single_player_optimum_is_linear_scan() {
        let topo = Topology::from_gains(2, vec![
            vec![1.0, 0.2, 0.9],
            vec![0.1, 1.0, 0.05],
            vec![0.3, 0.02, 1.0],
        ])
        .unwrap();
        let g = CapGame::new(topo, params(3), UtilityMode::Deterministic).unwrap();
        let opt = brute_force_optimum(&g).unwrap();
        let scan: Vec<f64> = (0..3)
            .map(|c| g.potential(&g.profile(&[c]).unwrap(), 1, 0).unwrap().mean)
            .collect();
        let best = scan.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(opt.indices, vec![scan.iter().position(|&v| v == best).unwrap()]);
        assert!((opt.phi_star - best).abs() < 1e-9);
        // Alone on the free channel beats sharing with either cellular UE.
        assert_eq!(opt.profiles[0].channel(2), 2);
    }

    #[test]
    fn symmetric_pair_separates() {
        let topo = Topology::from_gains(0, vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g = CapGame::new(topo, params(2), UtilityMode::Deterministic).unwrap();
        let opt = brute_force_optimum(&g).unwrap();
        let mut chans: Vec<Vec<usize>> =
            opt.profiles.iter().map(|p| p.channels().to_vec()).collect();
        chans.sort();
        assert_eq!(chans, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn mc_optimum_requires_samples() {
        let topo = Topology::from_gains(0, vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g = CapGame::new(topo, params(2), UtilityMode::Noisy).unwrap();
        assert!(brute_force_optimum_mc(&g, 0, 1).is_err());
        // Fading is per link, so relabeling channels keeps every shared draw
        // identical and the two separating profiles tie exactly.
        let opt = brute_force_optimum_mc(&g, 500, 1).unwrap();
        assert_eq!(opt.indices.len(), 2);
        assert!(opt.profiles.iter().all(|p| p.channel(0) != p.channel(1)));
    }
}
