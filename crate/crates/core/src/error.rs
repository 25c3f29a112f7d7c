use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the (open) domain of a formula.
    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: String,
    },

    /// The server cannot keep up with the mean load.
    #[error("unstable system: mean load {load} is not below capacity {capacity}")]
    Unstable { load: f64, capacity: f64 },

    /// An envelope rate does not exceed what the traffic needs at this θ.
    #[error("envelope rate {rate} does not exceed m·ρ(θ) = {required} at θ = {theta}")]
    EnvelopeRate { rate: f64, required: f64, theta: f64 },

    /// No parameterization satisfies the constraints.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// The overflow profile cannot be integrated into a sample-path deficit.
    #[error("profile is not composable: {0}")]
    NotComposable(String),

    /// A quantity with unit suffix could not be read.
    #[error("cannot parse {0:?}: {1}")]
    Parse(String, String),

    #[error("optimization failed: objective is non-finite on [{lo}, {hi}]")]
    Optimization { lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            name,
            value,
            domain: domain.into(),
        }
    }
}
