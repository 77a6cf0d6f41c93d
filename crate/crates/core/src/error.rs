use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A closed-form quantity was evaluated outside the range where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{field} is not strictly positive at node {index} (value {value:e})")]
    Positivity {
        field: &'static str,
        index: usize,
        value: f64,
    },

    #[error("CFL violation: number {number:.4} exceeds limit {limit}")]
    Cfl { number: f64, limit: f64 },

    #[error("stretching term would destroy positivity: dt*|coeff|*max|div u| = {0:.4} >= 1")]
    PositivityLoss(f64),

    #[error("singular tridiagonal system (zero pivot at row {0})")]
    Singular(usize),

    #[error("Picard iteration stopped contracting at iterate {iterate}")]
    NonContraction { iterate: usize },

    #[error("bisection bracket [{lo}, {hi}] does not straddle a sign change")]
    Bracket { lo: f64, hi: f64 },

    #[error("characteristic through r = {r_query} left the domain at r = {r_exit}")]
    CharacteristicExit { r_query: f64, r_exit: f64 },

    #[error("parameters violate the admissibility condition (delta = {delta}); set the override flag to run anyway")]
    Inadmissible { delta: f64 },

    #[error("at t = {t:e}: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Wraps the error with the simulation time at which it happened.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }
}
