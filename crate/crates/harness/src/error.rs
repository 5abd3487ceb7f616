use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] coop_cdma::Error),
    #[error("packet {packet} at sweep point {point}: {source}")]
    Packet {
        point: usize,
        packet: usize,
        source: coop_cdma::Error,
    },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for numerical
    /// failures inside the simulation.
    pub fn exit_code(&self) -> i32 {
        let numerical = |e: &coop_cdma::Error| {
            matches!(
                e,
                coop_cdma::Error::Singular { .. } | coop_cdma::Error::DegenerateAllocation | coop_cdma::Error::EmptySamples
            )
        };
        match self {
            HarnessError::Core(e) | HarnessError::Packet { source: e, .. } if numerical(e) => 2,
            HarnessError::Packet { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
