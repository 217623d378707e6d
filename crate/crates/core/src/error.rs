use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid modulus {ell}^{level}: {reason}")]
    Modulus {
        ell: u64,
        level: u32,
        reason: &'static str,
    },

    #[error("generator {0} lies outside the ambient group")]
    OutsideAmbient(String),

    #[error("subgroup does not have index 2 in the enclosing group")]
    NotIndexTwo,

    #[error("singular or degenerate curve: {0}")]
    BadCurve(String),

    #[error("prime {0} is not a prime of good reduction")]
    BadPrime(u64),

    #[error("could not pin down #E(F_{p}) in the Hasse interval")]
    OrderAmbiguous { p: u64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error(
        "exhaustive lift count needs {needed} levels of lifting, limit is {limit}; use sampling"
    )]
    LiftBudget { needed: u32, limit: u32 },

    #[error("factorization budget exhausted for {0}")]
    FactorBudget(String),

    #[error("catalog: {0}")]
    Catalog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
