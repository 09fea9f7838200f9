use std::fmt::Write as _;

use serde::Serialize;

use crate::profile::AssignmentProfile;

/// What happened in one learning slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub t: u64,
    /// Temperature of the slot; `None` for better response.
    pub tau: Option<f64>,
    pub n_samples: usize,
    pub player: usize,
    pub trial: usize,
    pub accepted: bool,
    /// `Û(current) − Û(trial)`; zero for self-trials, which draw no samples.
    pub delta_hat: f64,
    /// Sum-rate estimate (bits/s) of the profile after the slot.
    pub sum_rate: f64,
    pub profile: AssignmentProfile,
}

/// Initial profile plus one record per slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial: AssignmentProfile,
    pub initial_sum_rate: f64,
    pub slots: Vec<SlotRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn final_profile(&self) -> &AssignmentProfile {
        self.slots.last().map_or(&self.initial, |s| &s.profile)
    }

    pub fn sum_rates(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.sum_rate).collect()
    }

    /// First slot index of the trailing window covering `fraction` of slots.
    pub fn window_start(&self, fraction: f64) -> usize {
        let len = ((self.slots.len() as f64) * fraction).ceil() as usize;
        self.slots.len() - len.clamp(1.min(self.slots.len()), self.slots.len())
    }

    /// Mean sum rate over the trailing `fraction` of slots.
    pub fn window_mean_sum_rate(&self, fraction: f64) -> f64 {
        if self.slots.is_empty() {
            return self.initial_sum_rate;
        }
        let w = &self.slots[self.window_start(fraction)..];
        w.iter().map(|s| s.sum_rate).sum::<f64>() / w.len() as f64
    }

    /// Fraction of the trailing window spent in any of `targets`.
    pub fn window_occupancy(&self, fraction: f64, targets: &[AssignmentProfile]) -> f64 {
        if self.slots.is_empty() {
            return if targets.contains(&self.initial) { 1.0 } else { 0.0 };
        }
        let w = &self.slots[self.window_start(fraction)..];
        let hits = w.iter().filter(|s| targets.contains(&s.profile)).count();
        hits as f64 / w.len() as f64
    }

    pub const CSV_HEADER: &'static str =
        "t,tau,n,player,trial,accepted,delta_hat,sum_rate,profile";

    /// Header plus one line per slot. `profile` is `;`-separated channels.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.slots.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.slots {
            let tau = s.tau.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.t,
                tau,
                s.n_samples,
                s.player,
                s.trial,
                u8::from(s.accepted),
                s.delta_hat,
                s.sum_rate,
                s.profile
            );
        }
        out
    }
}
