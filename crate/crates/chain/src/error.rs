use rccpabe_core::scheme::SchemeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    /// A security gate refused the request (revoked key or uploader).
    #[error("access denied: {0}")]
    Denied(String),
    /// The submitted object is malformed or fails a validity check.
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("unknown call kind `{0}`")]
    UnknownCall(String),
    #[error("query error: {0}")]
    Query(String),
    #[error("dangling locator: region `{region}` has no record {record}")]
    Dangling { region: String, record: String },
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("ledger format: {0}")]
    Format(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
