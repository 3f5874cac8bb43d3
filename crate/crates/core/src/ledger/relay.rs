use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Address, AuditEntry, AuditFilter, AuditLog, LedgerError, Outcome};
use crate::group::Backend;
use crate::scheme::codec::WireObject;
use crate::scheme::{ChainTag, ReCiphertext, SanitizedCiphertext, SanitizedReKey, Scheme};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct StoredResult {
    #[serde(with = "hex::serde")]
    ciphertext: Vec<u8>,
    #[serde(with = "hex::serde")]
    attachment: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrationReceipt {
    pub chain: ChainTag,
    pub params_digest: Address,
    pub seq: u64,
    pub timestamp_ms: u64,
}

/// The relay chain: chain registration, re-encryption and the audit trail.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayState {
    registered: BTreeMap<ChainTag, RegistrationReceipt>,
    results: HashMap<Address, StoredResult>,
    processed: u64,
    audit: AuditLog,
}

impl RelayState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_chain(
        &mut self,
        chain: ChainTag,
        params_digest: Address,
        timestamp_ms: u64,
    ) -> Result<RegistrationReceipt, LedgerError> {
        let party = format!("chain-{chain:?}");
        if self.registered.contains_key(&chain) {
            self.audit
                .append("register", &party, timestamp_ms, Outcome::Rejected, params_digest.to_hex());
            return Err(LedgerError::DuplicateRegistration(chain));
        }
        let seq = self
            .audit
            .append("register", &party, timestamp_ms, Outcome::Ok, params_digest.to_hex());
        let receipt = RegistrationReceipt {
            chain,
            params_digest,
            seq,
            timestamp_ms,
        };
        self.registered.insert(chain, receipt.clone());
        Ok(receipt)
    }

    pub fn is_registered(&self, chain: ChainTag) -> bool {
        self.registered.contains_key(&chain)
    }

    pub fn registered_chains(&self) -> Vec<ChainTag> {
        self.registered.keys().copied().collect()
    }

    /// Re-encrypts for a share from chain `from` to chain `to` and stores the
    /// result under `Data_2`, the digest of its wire encoding.
    #[allow(clippy::too_many_arguments)]
    pub fn relay_reencrypt<B: Backend>(
        &mut self,
        scheme: &Scheme<B>,
        from: ChainTag,
        to: ChainTag,
        ct: &SanitizedCiphertext<B>,
        rk: &SanitizedReKey<B>,
        attachment: &[u8],
        party: &str,
        timestamp_ms: u64,
    ) -> Result<Address, LedgerError> {
        for chain in [from, to] {
            if !self.is_registered(chain) {
                self.audit
                    .append("reencrypt", party, timestamp_ms, Outcome::Rejected, String::new());
                return Err(LedgerError::Unregistered(chain));
            }
        }
        let rc = scheme.reenc(ct, rk);
        let bytes = rc.to_wire(scheme.backend());
        let data_2 = Address::digest(&bytes);
        self.results.entry(data_2).or_insert_with(|| StoredResult {
            ciphertext: bytes,
            attachment: attachment.to_vec(),
        });
        self.processed += 1;
        self.audit
            .append("reencrypt", party, timestamp_ms, Outcome::Ok, data_2.to_hex());
        Ok(data_2)
    }

    /// Read-only lookup of a stored re-encrypted ciphertext.
    pub fn relay_fetch<B: Backend>(&self, backend: &B, data_2: &Address) -> Result<ReCiphertext<B>, LedgerError> {
        Ok(self.relay_fetch_with_attachment(backend, data_2)?.0)
    }

    pub fn relay_fetch_with_attachment<B: Backend>(
        &self,
        backend: &B,
        data_2: &Address,
    ) -> Result<(ReCiphertext<B>, Vec<u8>), LedgerError> {
        let stored = self.results.get(data_2).ok_or(LedgerError::NotFound(*data_2))?;
        let rc = ReCiphertext::from_wire(backend, &stored.ciphertext)?;
        Ok((rc, stored.attachment.clone()))
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    /// Records an outcome decided elsewhere, e.g. a rejected message.
    pub fn audit_note(&mut self, kind: &str, party: &str, timestamp_ms: u64, outcome: Outcome, id_hex: String) {
        self.audit.append(kind, party, timestamp_ms, outcome, id_hex);
    }

    pub fn audit_query(&self, filter: &AuditFilter) -> Vec<AuditEntry> {
        self.audit.query(filter)
    }
}
