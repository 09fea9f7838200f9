//! Channel assignment vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One channel index per UE plus a passive flag.
///
/// Passive players (cellular UEs) keep their dedicated channel for the whole
/// trajectory; only active players (D2D pairs) may be reassigned.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssignmentProfile {
    channels: Vec<usize>,
    passive: Vec<bool>,
}

impl AssignmentProfile {
    pub fn new(channels: Vec<usize>, passive: Vec<bool>, num_channels: usize) -> Result<Self> {
        if channels.len() != passive.len() {
            return Err(Error::InvalidProfile(format!(
                "{} channels but {} passive flags",
                channels.len(),
                passive.len()
            )));
        }
        if let Some((ue, &c)) = channels.iter().enumerate().find(|(_, &c)| c >= num_channels) {
            return Err(Error::InvalidProfile(format!(
                "UE {ue} assigned channel {c} but only {num_channels} channels exist"
            )));
        }
        let mut taken = vec![false; num_channels];
        for (ue, (&c, &p)) in channels.iter().zip(&passive).enumerate() {
            if p {
                if taken[c] {
                    return Err(Error::InvalidProfile(format!(
                        "passive UE {ue} shares dedicated channel {c}"
                    )));
                }
                taken[c] = true;
            }
        }
        Ok(Self { channels, passive })
    }

    /// Profile where every UE is an active player.
    pub fn all_active(channels: Vec<usize>, num_channels: usize) -> Result<Self> {
        let passive = vec![false; channels.len()];
        Self::new(channels, passive, num_channels)
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    #[inline]
    pub fn channel(&self, ue: usize) -> usize {
        self.channels[ue]
    }

    #[inline]
    pub fn is_passive(&self, ue: usize) -> bool {
        self.passive[ue]
    }

    pub fn passive_flags(&self) -> &[bool] {
        &self.passive
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn active_players(&self) -> impl Iterator<Item = usize> + '_ {
        self.passive
            .iter()
            .enumerate()
            .filter(|(_, &p)| !p)
            .map(|(i, _)| i)
    }

    /// Reassigns an active player. Passive players are rejected.
    pub fn set_channel(&mut self, ue: usize, channel: usize) -> Result<()> {
        if self.passive[ue] {
            return Err(Error::InvalidProfile(format!("UE {ue} is passive")));
        }
        self.channels[ue] = channel;
        Ok(())
    }

    /// Copy with `ue` moved to `channel` (ue must be active).
    pub fn with_channel(&self, ue: usize, channel: usize) -> Self {
        debug_assert!(!self.passive[ue], "passive UE {ue} cannot move");
        let mut next = self.clone();
        next.channels[ue] = channel;
        next
    }

    /// The UEs currently on `channel`, in increasing index order.
    pub fn cochannel_set(&self, channel: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.cochannel_into(channel, &mut out);
        out
    }

    pub fn cochannel_into(&self, channel: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(
            self.channels
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == channel)
                .map(|(i, _)| i),
        );
    }
}

/// Semicolon-separated channel vector, e.g. `0;2;1`.
impl fmt::Display for AssignmentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.channels.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
