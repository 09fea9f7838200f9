use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{num_uec} cellular UEs need dedicated channels but only {num_channels} channels exist")]
    InfeasibleDedicatedChannels { num_uec: usize, num_channels: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("operation requires the deterministic (frozen-fading) utility mode")]
    RequiresDeterministic,

    #[error("game has no active players")]
    NoActivePlayers,

    #[error("state space of {size} states exceeds the limit of {limit}")]
    StateSpaceTooLarge { size: u128, limit: u128 },

    #[error(
        "stationary solve is ill-conditioned (residual {residual:e}); \
         use the tree method or a larger temperature"
    )]
    IllConditioned { residual: f64 },

    #[error("noise MGF too heavy: optimized Chernoff exponent {denominator:e} is not positive")]
    MgfTooHeavy { denominator: f64 },

    #[error("required sample count {0:e} does not fit in u64")]
    SampleCountOverflow(f64),

    #[error("resistance undefined: {0}")]
    ResistanceUndefined(String),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
