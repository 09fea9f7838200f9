use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::game::{CapGame, UtilityMode};
use crate::scalar::Scalar;

use super::kernel::{exact_transition_matrix, StochasticMatrix};
use super::trees::for_each_arborescence;
use super::{potential_table, ProfileSpace};

/// Largest chain the spanning-tree method enumerates.
pub const TREE_STATE_LIMIT: usize = 8;

/// Residual above which a direct solve is reported as ill-conditioned.
const DIRECT_RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryMethod {
    Direct,
    Gibbs,
    Tree,
}

impl StationaryMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            StationaryMethod::Direct => "direct",
            StationaryMethod::Gibbs => "gibbs",
            StationaryMethod::Tree => "tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub probs: Vec<f64>,
    pub tau: Option<f64>,
    pub method: StationaryMethod,
}

impl StationaryDistribution {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves `πP = π`, `Σπ = 1` by Gaussian elimination in state-reduction
/// (GTH) form: states are eliminated one at a time and each pivot is taken as
/// the sum of the remaining off-diagonal entries instead of `1 − P_kk`, so no
/// subtraction occurs and tiny escape rates survive at small temperatures.
///
/// Fails with [`Error::IllConditioned`] if the chain is numerically reducible
/// (some escape rate underflowed to zero) or the solution's stationarity
/// residual exceeds 1e-10.
pub fn stationary_direct(matrix: &StochasticMatrix) -> Result<StationaryDistribution> {
    let n = matrix.len();
    if n == 0 {
        return Err(invalid("empty chain"));
    }
    let mut a: Vec<f64> = (0..n).flat_map(|i| matrix.row(i).to_vec()).collect();
    for k in (1..n).rev() {
        let escape: f64 = (0..k).map(|j| a[k * n + j]).sum();
        if !(escape > 0.0) {
            return Err(Error::IllConditioned {
                residual: f64::INFINITY,
            });
        }
        for i in 0..k {
            a[i * n + k] /= escape;
        }
        for i in 0..k {
            let w = a[i * n + k];
            if w == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += w * a[k * n + j];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * a[i * n + k]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let residual = matrix.stationarity_residual(&pi);
    if !(residual <= DIRECT_RESIDUAL_LIMIT) {
        return Err(Error::IllConditioned { residual });
    }
    Ok(StationaryDistribution {
        probs: pi,
        tau: None,
        method: StationaryMethod::Direct,
    })
}

/// `π(a) ∝ e^{φ(a)/τ}` over the profile space, with `φ` the normalized
/// exact potential (deterministic mode).
pub fn gibbs_distribution<T: Scalar>(game: &CapGame<T>, tau: f64) -> Result<StationaryDistribution> {
    if game.mode() != UtilityMode::Deterministic {
        return Err(Error::RequiresDeterministic);
    }
    if !(tau > 0.0) {
        return Err(invalid("temperature must be positive"));
    }
    let space = ProfileSpace::new(game, super::BRUTE_FORCE_LIMIT)?;
    let phi = potential_table(game, &space)?;
    Ok(StationaryDistribution {
        probs: gibbs_weights(&phi, tau),
        tau: Some(tau),
        method: StationaryMethod::Gibbs,
    })
}

pub(crate) fn gibbs_weights(phi: &[f64], tau: f64) -> Vec<f64> {
    let max = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = phi.iter().map(|p| ((p - max) / tau).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Markov chain tree theorem: `π_c ∝ Σ_{trees rooted at c} Π P_e` over
/// spanning arborescences directed toward `c`.
pub fn stationary_tree(matrix: &StochasticMatrix) -> Result<StationaryDistribution> {
    let n = matrix.len();
    if n == 0 {
        return Err(invalid("empty chain"));
    }
    if n > TREE_STATE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            size: n as u128,
            limit: TREE_STATE_LIMIT as u128,
        });
    }
    let mut u = vec![0.0; n];
    for (root, slot) in u.iter_mut().enumerate() {
        for_each_arborescence(
            n,
            root,
            |v, w| matrix.get(v, w) > 0.0,
            |parent| {
                *slot += (0..n)
                    .filter(|&v| v != root)
                    .map(|v| matrix.get(v, parent[v]))
                    .product::<f64>();
            },
        );
    }
    let total: f64 = u.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("chain has no spanning arborescence (not irreducible)"));
    }
    Ok(StationaryDistribution {
        probs: u.into_iter().map(|x| x / total).collect(),
        tau: None,
        method: StationaryMethod::Tree,
    })
}

/// Stationary distributions along a temperature grid and the states they
/// single out as stochastically stable.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub tau_grid: Vec<f64>,
    pub distributions: Vec<StationaryDistribution>,
    /// Profile indices judged stable; `None` for a single-point grid.
    pub stable: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// Decides stochastic stability from exact stationary distributions.
///
/// With `k` the number of states whose mass did not decrease over the last
/// grid step, a state is stable if its mass at the smallest temperature is at
/// least `0.5 / k`. Mass that keeps growing as `τ` falls is what survives the
/// `τ → 0` limit, and `k` stays the size of the maximizer set once the grid
/// reaches temperatures well below the potential gaps. Warnings flag states
/// whose last-step trend contradicts their verdict (grid too coarse).
pub fn stochastically_stable_states<T: Scalar>(
    game: &CapGame<T>,
    tau_grid: &[f64],
    method: StationaryMethod,
) -> Result<StabilityReport> {
    if tau_grid.is_empty() {
        return Err(invalid("temperature grid is empty"));
    }
    if tau_grid.windows(2).any(|w| !(w[1] < w[0])) || !(tau_grid[tau_grid.len() - 1] > 0.0) {
        return Err(invalid("temperature grid must be positive and strictly decreasing"));
    }
    let distributions = tau_grid
        .iter()
        .map(|&tau| stationary_at(game, tau, method))
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let stable = if distributions.len() < 2 {
        None
    } else {
        let last = &distributions[distributions.len() - 1].probs;
        let prev = &distributions[distributions.len() - 2].probs;
        let growing: Vec<bool> = last
            .iter()
            .zip(prev)
            .map(|(l, p)| *l >= *p - 1e-15)
            .collect();
        let k = growing.iter().filter(|&&g| g).count();
        if k == 0 {
            warnings.push("no state gained mass over the last grid step".to_string());
            Some(Vec::new())
        } else {
            let threshold = 0.5 / k as f64;
            let stable: Vec<usize> = (0..last.len()).filter(|&s| last[s] >= threshold).collect();
            for s in 0..last.len() {
                let is_stable = last[s] >= threshold;
                if is_stable && !growing[s] {
                    warnings.push(format!(
                        "state {s} is judged stable but lost mass on the last grid step"
                    ));
                } else if !is_stable && growing[s] && last[s] > prev[s] + 1e-15 {
                    warnings.push(format!(
                        "state {s} is judged unstable but still gains mass; refine the grid"
                    ));
                }
            }
            Some(stable)
        }
    };
    Ok(StabilityReport {
        tau_grid: tau_grid.to_vec(),
        distributions,
        stable,
        warnings,
    })
}

fn stationary_at<T: Scalar>(
    game: &CapGame<T>,
    tau: f64,
    method: StationaryMethod,
) -> Result<StationaryDistribution> {
    let mut d = match method {
        StationaryMethod::Gibbs => return gibbs_distribution(game, tau),
        StationaryMethod::Direct => stationary_direct(&exact_transition_matrix(game, tau)?.matrix)?,
        StationaryMethod::Tree => stationary_tree(&exact_transition_matrix(game, tau)?.matrix)?,
    };
    d.tau = Some(tau);
    Ok(d)
}
