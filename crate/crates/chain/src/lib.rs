//! In-process emulation of the two-layer chain system: a relay chain that
//! evaluates context rules, meters gas, keeps the revocation list and the
//! cross-region index, and per-region ledgers that store ciphertexts and
//! run searches. Everything runs on a virtual millisecond clock.

pub mod config;
mod error;
pub mod federation;
pub mod gas;
pub mod ledger;
pub mod regional;
pub mod relay;
pub mod rules;

pub use config::ChainConfig;
pub use error::ChainError;
pub use federation::Federation;
pub use gas::{CallKind, CallReceipt, GasMeter, GasSchedule};
pub use regional::{LedgerEntry, RegionalChain, ScopeFilter};
pub use relay::{IndexEntry, RelayChain};
pub use rules::{ContextRule, RuleTable};
