use thiserror::Error;

/// Errors shared by every module.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("not a subgroup: {0}")]
    Containment(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity(_) => "capacity",
            Error::Containment(_) => "containment",
            Error::Domain(_) => "domain",
            Error::Integrity(_) => "integrity",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Extra allowance added to every degree cap, read from `PARCX_CAPACITY`.
pub fn capacity_bonus() -> usize {
    std::env::var("PARCX_CAPACITY")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

pub(crate) fn check_cap(what: &str, value: usize, cap: usize) -> Result<()> {
    if value > cap + capacity_bonus() {
        Err(Error::Capacity(format!("{what} = {value} exceeds limit {cap}")))
    } else {
        Ok(())
    }
}
