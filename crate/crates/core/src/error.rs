use thiserror::Error;

/// Errors raised by the model, cost and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// `gamma * (1 + v0 * T) - v0 * T` is not strictly positive.
    #[error(
        "infeasible parameters: gamma*(1+v0*T) - v0*T = {margin:e} must be > 0 \
         (gamma = {gamma}, T = {horizon}, v0 = {v0}); {hint}"
    )]
    Infeasible {
        gamma: f64,
        horizon: f64,
        v0: f64,
        margin: f64,
        hint: String,
    },

    #[error("the power-utility (phi, psi) representation is undefined for gamma = 1; use the logarithmic value")]
    LogGammaUnsupported,

    #[error("initial wealth must be positive, got {0}")]
    NonpositiveWealth(f64),

    #[error("time {t} is outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("annual costs require a positive horizon")]
    ZeroHorizon,

    #[error("operation not defined for investor type {0}")]
    UnsupportedInvestorType(crate::InvestorType),

    #[error("cost pair {from}->{to} violates the order U <= M <= R <= I")]
    UnorderedPair {
        from: crate::InvestorType,
        to: crate::InvestorType,
    },

    #[error("unsupported limit: {0}")]
    UnsupportedLimit(String),

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
