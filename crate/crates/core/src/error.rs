use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("system is unstable: {0}")]
    UnstableSystem(String),

    #[error("equilibrium equations are singular: {0}")]
    SingularSystem(String),

    #[error("argument outside the domain of convergence: {0}")]
    OutOfDomain(String),

    #[error("loss probability {0} leaves no admitted jobs")]
    DegenerateLoss(f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for errors caused by the queueing model itself (instability,
    /// degeneracy) rather than by malformed input.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::UnstableSystem(_)
                | Error::SingularSystem(_)
                | Error::DegenerateLoss(_)
                | Error::OutOfDomain(_)
        )
    }
}
