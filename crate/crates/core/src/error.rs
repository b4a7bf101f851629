use crate::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("distribution has no atoms")]
    EmptyDistribution,
    #[error("negative value {0} (distributions must be non-negative)")]
    NegativeValue(Rational),
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(Rational),
    #[error("masses sum to {0}, expected 1")]
    NotNormalized(Rational),
    #[error("assembly has no members")]
    EmptyAssembly,
    #[error("bad argument: {0}")]
    InvalidArgument(String),
    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what}: {count} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        count: u128,
        cap: u128,
    },
    /// A property that must hold mathematically failed; indicates a bug.
    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),
}
