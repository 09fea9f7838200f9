use crate::error::{invalid, Error, Result};
use crate::game::{CapGame, UtilityMode};
use crate::learning::acceptance_probability;
use crate::scalar::Scalar;

use super::ProfileSpace;

/// Largest state count for which a dense transition matrix is built.
pub const KERNEL_STATE_LIMIT: u128 = 2048;

/// Dense row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    /// Validates non-negativity and unit row sums (within 1e-12).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("transition matrix must be square"));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let m = Self { n, data };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.row(i);
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(invalid(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("row {i} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row vector times matrix: `πP`.
    pub fn left_apply(&self, pi: &[f64]) -> Vec<f64> {
        assert_eq!(pi.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (i, &w) in pi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.row(i)) {
                *o += w * p;
            }
        }
        out
    }

    /// `‖πP − π‖∞`.
    pub fn stationarity_residual(&self, pi: &[f64]) -> f64 {
        self.left_apply(pi)
            .iter()
            .zip(pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// One-slot BLLA transition matrix over a game's profile space.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    pub space: ProfileSpace,
    pub tau: f64,
    pub matrix: StochasticMatrix,
    /// Normalized exact potential per profile index.
    pub potentials: Vec<f64>,
}

/// Exact BLLA kernel at temperature `tau` (deterministic mode).
///
/// For `b` differing from `a` only in active player `i`'s channel:
/// `P_ab = (1/#active) · (1/|F|) · 1/(1 + e^{(U_i(a) − U_i(b))/τ})`.
/// Self-trials and rejections stay on the diagonal.
pub fn exact_transition_matrix<T: Scalar>(game: &CapGame<T>, tau: f64) -> Result<TransitionKernel> {
    if game.mode() != UtilityMode::Deterministic {
        return Err(Error::RequiresDeterministic);
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid(format!("temperature must be positive, got {tau}")));
    }
    if game.active_players().is_empty() {
        return Err(Error::NoActivePlayers);
    }
    let space = ProfileSpace::new(game, KERNEL_STATE_LIMIT)?;
    let n = space.len();
    let f = space.num_channels();
    let active = space.active_players().to_vec();
    let proposal = 1.0 / (active.len() * f) as f64;

    let mut data = vec![0.0; n * n];
    let mut potentials = Vec::with_capacity(n);
    for a in 0..n {
        let pa = space.profile(a);
        potentials.push(game.normalized_potential(&pa)?.as_f64());
        let mut off = 0.0;
        for &i in &active {
            let u_a = game.utility(&pa, i)?.as_f64();
            for c in (0..f).filter(|&c| c != pa.channel(i)) {
                let pb = pa.with_channel(i, c);
                let u_b = game.utility(&pb, i)?.as_f64();
                let p = proposal * acceptance_probability(u_a - u_b, tau);
                data[a * n + space.index(&pb)] = p;
                off += p;
            }
        }
        data[a * n + a] = 1.0 - off;
    }
    let matrix = StochasticMatrix { n, data };
    matrix.check()?;
    Ok(TransitionKernel {
        space,
        tau,
        matrix,
        potentials,
    })
}
