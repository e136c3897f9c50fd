use thiserror::Error;

/// Errors raised by the channel model and its tooling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// The visible cap does not intersect the inclination band.
    #[error("no visible satellites: polar inclination minus user polar angle ({gap_deg:.3} deg) exceeds the cap angle ({cap_deg:.3} deg)")]
    NoVisibleSatellites { gap_deg: f64, cap_deg: f64 },

    /// Invalid shell, constellation or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A delay-Doppler grid is too coarse for the requested quantity.
    #[error("resolution error: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

impl ChannelError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ChannelError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        ChannelError::Config(msg.into())
    }
}
