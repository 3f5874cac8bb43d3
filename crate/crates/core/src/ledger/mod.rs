//! Simulated hospital chains, relay chain and content store.
//!
//! Blocks are an append-only transaction log; there is no consensus. Each
//! state object is meant to be owned by one actor at a time (wrap it in a
//! `Mutex` to share it), while distinct states run independently.

mod audit;
mod node;
mod relay;
mod store;

use thiserror::Error;

use crate::crf::CiphertextId;
use crate::scheme::codec::CodecError;
use crate::scheme::ChainTag;

pub use audit::{AuditEntry, AuditFilter, AuditLog, Outcome};
pub use node::{AccessRecord, ChainNodeState, ContractResult, IndexEntry, Refusal, TxKind, TxRecord};
pub use relay::{RegistrationReceipt, RelayState};
pub use store::ContentStore;

/// Content digest used as a store address; `Data_1` and `Data_2` are both
/// addresses of this form.
pub type Address = CiphertextId;

pub const DEFAULT_MAX_ACCESS_COUNT: usize = 100;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("chain {0:?} is already registered with the relay")]
    DuplicateRegistration(ChainTag),
    #[error("chain {0:?} is not registered with the relay")]
    Unregistered(ChainTag),
    #[error("no re-encrypted ciphertext under {0}")]
    NotFound(Address),
    #[error("content store has no object at {0}")]
    MissingContent(Address),
    #[error("stored object is corrupt: {0}")]
    Corrupt(#[from] CodecError),
    #[error("bad simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Simulation knobs, stored as a `key=value` text file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub max_access_count: usize,
    pub transport_latency_ms: u64,
    pub node_count: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_access_count: DEFAULT_MAX_ACCESS_COUNT,
            transport_latency_ms: 0,
            node_count: 1,
        }
    }
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self, LedgerError> {
        let mut cfg = SimConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LedgerError::Config(format!("line {}: expected key=value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| LedgerError::Config(format!("line {}: `{v}` is not a number", i + 1)))
            };
            match k {
                "max_access_count" => cfg.max_access_count = num(v)? as usize,
                "transport_latency_ms" => cfg.transport_latency_ms = num(v)?,
                "node_count" => cfg.node_count = num(v)? as usize,
                other => return Err(LedgerError::Config(format!("line {}: unknown key `{other}`", i + 1))),
            }
        }
        if cfg.max_access_count == 0 {
            return Err(LedgerError::Config("max_access_count must be positive".into()));
        }
        if cfg.node_count == 0 {
            return Err(LedgerError::Config("node_count must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        format!(
            "max_access_count={}\ntransport_latency_ms={}\nnode_count={}\n",
            self.max_access_count, self.transport_latency_ms, self.node_count
        )
    }
}

#[cfg(test)]
mod tests;
