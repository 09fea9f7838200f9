use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::RadioParams;
use crate::error::{invalid, Error, Result};
use crate::rng::{seeded, stream};
use crate::scalar::{db_to_linear, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Transmitter/receiver pair of one UE's link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Link<T> {
    pub tx: Point<T>,
    pub rx: Point<T>,
}

/// Placement of the base station and all UE links, with mean power gains.
///
/// UE indices: cellular UEs come first (`0..num_uec`), D2D pairs after.
/// `mean_gain` is row-major `[tx * n + rx]`: the linear gain from UE `tx`'s
/// transmitter to UE `rx`'s receiver (path loss times frozen shadowing).
/// The diagonal holds each UE's own link gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Topology<T> {
    pub seed: Option<u64>,
    pub bs_position: Point<T>,
    pub uec_links: Vec<Link<T>>,
    pub ued_links: Vec<Link<T>>,
    mean_gain: Vec<T>,
}

impl<T: Scalar> Topology<T> {
    /// Topology with hand-set gains (positions all at the origin). Used for
    /// exact small instances.
    pub fn from_gains(num_uec: usize, gains: Vec<Vec<T>>) -> Result<Self> {
        let n = gains.len();
        if num_uec > n {
            return Err(invalid(format!("{num_uec} UECs but only {n} UEs")));
        }
        if gains.iter().any(|row| row.len() != n) {
            return Err(invalid("gain matrix must be square"));
        }
        let flat: Vec<T> = gains.into_iter().flatten().collect();
        if flat.iter().any(|g| !(*g > T::zero()) || !g.is_finite()) {
            return Err(invalid("all mean gains must be positive and finite"));
        }
        let zero_link = Link {
            tx: Point::origin(),
            rx: Point::origin(),
        };
        Ok(Self {
            seed: None,
            bs_position: Point::origin(),
            uec_links: vec![zero_link; num_uec],
            ued_links: vec![zero_link; n - num_uec],
            mean_gain: flat,
        })
    }

    pub fn num_ues(&self) -> usize {
        self.uec_links.len() + self.ued_links.len()
    }

    pub fn num_uec(&self) -> usize {
        self.uec_links.len()
    }

    pub fn num_ued(&self) -> usize {
        self.ued_links.len()
    }

    pub fn is_uec(&self, ue: usize) -> bool {
        ue < self.uec_links.len()
    }

    pub fn link(&self, ue: usize) -> &Link<T> {
        let nc = self.uec_links.len();
        if ue < nc {
            &self.uec_links[ue]
        } else {
            &self.ued_links[ue - nc]
        }
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> T {
        self.mean_gain[tx * self.num_ues() + rx]
    }

    pub fn gain_matrix(&self) -> Vec<Vec<T>> {
        let n = self.num_ues();
        (0..n)
            .map(|tx| (0..n).map(|rx| self.gain(tx, rx)).collect())
            .collect()
    }

    /// Checks the geometric and gain invariants against `params`.
    pub fn validate(&self, params: &RadioParams<T>) -> Result<()> {
        let n = self.num_ues();
        if self.mean_gain.len() != n * n {
            return Err(invalid("gain matrix size does not match UE count"));
        }
        if self.mean_gain.iter().any(|g| !(*g > T::zero())) {
            return Err(invalid("all mean gains must be positive"));
        }
        let slack = T::lit(1e-9);
        for link in &self.ued_links {
            if link.tx.distance(&link.rx) > params.d2d_radius + slack {
                return Err(invalid("D2D receiver outside d2d_radius"));
            }
        }
        for link in self.uec_links.iter().chain(&self.ued_links) {
            for p in [&link.tx, &link.rx] {
                if p.distance(&self.bs_position) > params.cell_radius + slack {
                    return Err(invalid("UE outside the cell"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn uniform_in_disk<T: Scalar, R: Rng + ?Sized>(center: Point<T>, radius: T, rng: &mut R) -> Point<T> {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let r = radius * T::lit(u.sqrt());
    let theta = T::lit(2.0 * std::f64::consts::PI * v);
    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Draws a cell layout and its mean gains.
///
/// Cellular UEs are uniform in the cell and served downlink by the BS at the
/// centre. D2D transmitters are uniform in the cell and each receiver is
/// uniform in the `d2d_radius` disk around its transmitter (redrawn until it
/// also lies inside the cell). Mean gain is
/// `max(d, d0)^(-η) · 10^(S/10)` with `S ~ N(0, σ_sh²)` drawn once per link.
///
/// Positions and shadowing come from separate streams keyed by UE index, so
/// adding UEs to a layout keeps the existing ones unchanged.
pub fn generate_topology<T: Scalar>(
    params: &RadioParams<T>,
    num_uec: usize,
    num_ued: usize,
    seed: u64,
) -> Result<Topology<T>> {
    params.validate()?;
    if num_uec > params.num_channels {
        return Err(Error::InfeasibleDedicatedChannels {
            num_uec,
            num_channels: params.num_channels,
        });
    }
    let bs = Point::origin();

    let mut rng = seeded(seed, stream::UEC_POSITIONS);
    let uec_links: Vec<Link<T>> = (0..num_uec)
        .map(|_| Link {
            tx: bs,
            rx: uniform_in_disk(bs, params.cell_radius, &mut rng),
        })
        .collect();

    let mut rng = seeded(seed, stream::UED_POSITIONS);
    let ued_links: Vec<Link<T>> = (0..num_ued)
        .map(|_| {
            let tx = uniform_in_disk(bs, params.cell_radius, &mut rng);
            let rx = loop {
                let rx = uniform_in_disk(tx, params.d2d_radius, &mut rng);
                if rx.distance(&bs) <= params.cell_radius {
                    break rx;
                }
            };
            Link { tx, rx }
        })
        .collect();

    let links: Vec<&Link<T>> = uec_links.iter().chain(&ued_links).collect();
    let n = links.len();
    let mut mean_gain = Vec::with_capacity(n * n);
    for (tx, tx_link) in links.iter().enumerate() {
        let mut shadow_rng = seeded(seed, stream::SHADOWING_BASE + tx as u64);
        for rx_link in &links {
            let d = tx_link.tx.distance(&rx_link.rx).max(params.reference_distance);
            let z: f64 = shadow_rng.sample(StandardNormal);
            let shadow_db = params.shadowing_sigma_db * T::lit(z);
            mean_gain.push(d.powf(-params.pathloss_exponent) * db_to_linear(shadow_db));
        }
    }

    Ok(Topology {
        seed: Some(seed),
        bs_position: bs,
        uec_links,
        ued_links,
        mean_gain,
    })
}
