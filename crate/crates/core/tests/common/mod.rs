#![allow(dead_code)]

use d2d_cap::radio::{RadioParams, Topology};
use d2d_cap::{CapGameF64, UtilityMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit powers and bandwidth, noise 0.1, so direct SINRs sit well inside
/// the clamp range.
pub fn unit_params(channels: usize) -> RadioParams<f64> {
    let mut p = RadioParams::full_scale();
    p.num_channels = channels;
    p.tx_power_ue = 1.0;
    p.tx_power_bs = 1.0;
    p.noise_power = 0.1;
    p.bandwidth_hz = 1.0;
    p
}

/// Direct gains in [0.5, 2], cross gains in [0.01, 1].
pub fn random_gains(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|tx| {
            (0..n)
                .map(|rx| {
                    if tx == rx {
                        rng.random_range(0.5..2.0)
                    } else {
                        rng.random_range(0.01..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn random_game(seed: u64, num_uec: usize, num_ued: usize, channels: usize, mode: UtilityMode) -> CapGameF64 {
    let gains = random_gains(num_uec + num_ued, seed);
    CapGameF64::new(Topology::from_gains(num_uec, gains).unwrap(), unit_params(channels), mode).unwrap()
}

/// Two identical D2D pairs on two channels: separating them is optimal and
/// both separated profiles tie exactly.
pub fn symmetric_game() -> CapGameF64 {
    let gains = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
    CapGameF64::new(
        Topology::from_gains(0, gains).unwrap(),
        unit_params(2),
        UtilityMode::Deterministic,
    )
    .unwrap()
}
