use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("`{scheme}` has no {what} formula")]
    NoFormula { scheme: &'static str, what: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Pairing(#[from] rccpabe_core::pairing::PairingError),
    #[error(transparent)]
    Policy(#[from] rccpabe_core::lsss::PolicyError),
    #[error(transparent)]
    Chain(#[from] rccpabe_chain::ChainError),
    #[error(transparent)]
    Scheme(#[from] rccpabe_core::scheme::SchemeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
