use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Address, AuditFilter, AuditLog, ContentStore, LedgerError, Outcome, RegistrationReceipt};
use crate::group::Backend;
use crate::scheme::codec::WireObject;
use crate::scheme::{ChainTag, SanitizedCiphertext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxKind {
    Registration,
    StoreCiphertext,
    Access,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxRecord {
    pub height: u64,
    pub digest: Address,
    pub kind: TxKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub address: Address,
    pub owner: String,
    /// Address of the encrypted PHR blob sealed under the ciphertext's message.
    pub attachment: Option<Address>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub user: String,
    pub timestamp_ms: u64,
    pub data_1: Address,
}

/// Typed refusals of the access contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Refusal {
    AccessLimitReached,
    TargetDataMissing,
}

impl Refusal {
    pub fn message(&self) -> &'static str {
        match self {
            Refusal::AccessLimitReached => "Access limit reached!",
            Refusal::TargetDataMissing => "Target data doesn\u{2019}t exist",
        }
    }
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractResult<B: Backend> {
    Granted {
        ciphertext: SanitizedCiphertext<B>,
        attachment: Vec<u8>,
    },
    Refused(Refusal),
}

/// One hospital chain's view: transaction log, ciphertext index and the
/// access list enforced by the access contract.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainNodeState {
    pub chain: ChainTag,
    pub gateway_id: String,
    pub registration: Option<RegistrationReceipt>,
    pub max_access_count: usize,
    tx_log: Vec<TxRecord>,
    index: HashMap<Address, IndexEntry>,
    access_list: Vec<AccessRecord>,
    audit: AuditLog,
}

impl ChainNodeState {
    pub fn new(chain: ChainTag, gateway_id: &str, max_access_count: usize) -> Self {
        assert!(max_access_count > 0, "max_access_count must be positive");
        ChainNodeState {
            chain,
            gateway_id: gateway_id.to_string(),
            registration: None,
            max_access_count,
            tx_log: Vec::new(),
            index: HashMap::new(),
            access_list: Vec::new(),
            audit: AuditLog::new(),
        }
    }

    pub fn is_registered(&self) -> bool {
        self.registration.is_some()
    }

    pub fn accept_registration(&mut self, receipt: RegistrationReceipt) {
        self.append_tx(receipt.params_digest, TxKind::Registration);
        self.registration = Some(receipt);
    }

    fn append_tx(&mut self, digest: Address, kind: TxKind) {
        let height = self.tx_log.len() as u64 + 1;
        self.tx_log.push(TxRecord { height, digest, kind });
    }

    pub fn tx_log(&self) -> &[TxRecord] {
        &self.tx_log
    }

    pub fn access_list(&self) -> &[AccessRecord] {
        &self.access_list
    }

    pub fn lookup(&self, data_1: &Address) -> Option<&IndexEntry> {
        self.index.get(data_1)
    }

    pub fn index_len(&self) -> usize {
        self.index.len()
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn audit_query(&self, filter: &AuditFilter) -> Vec<super::AuditEntry> {
        self.audit.query(filter)
    }

    /// Puts the ciphertext (and optional PHR blob) in the store and indexes
    /// it. Returns `(Data_1, Add_1)`.
    #[allow(clippy::too_many_arguments)]
    pub fn store_ciphertext<B: Backend>(
        &mut self,
        backend: &B,
        store: &ContentStore,
        ct: &SanitizedCiphertext<B>,
        attachment: Option<&[u8]>,
        owner: &str,
        timestamp_ms: u64,
    ) -> Result<(Address, Address), LedgerError> {
        if !self.is_registered() {
            return Err(LedgerError::Unregistered(self.chain));
        }
        let address = store.store(&ct.to_wire(backend));
        let attachment = attachment.map(|a| store.store(a));
        let data_1 = address;
        self.index.entry(data_1).or_insert_with(|| IndexEntry {
            address,
            owner: owner.to_string(),
            attachment,
        });
        self.append_tx(data_1, TxKind::StoreCiphertext);
        self.audit.append("store", owner, timestamp_ms, Outcome::Ok, data_1.to_hex());
        Ok((data_1, address))
    }

    pub fn access_count(&self, user: &str) -> usize {
        self.access_list.iter().filter(|r| r.user == user).count()
    }

    /// The access contract: refuse once `user` has `max_access_count`
    /// recorded accesses, refuse unknown `Data_1`, else fetch and record.
    pub fn contract_fetch<B: Backend>(
        &mut self,
        backend: &B,
        store: &ContentStore,
        data_1: &Address,
        user: &str,
        timestamp_ms: u64,
    ) -> Result<ContractResult<B>, LedgerError> {
        let refuse = |this: &mut Self, r: Refusal| {
            this.audit
                .append("contract_fetch", user, timestamp_ms, Outcome::Refused, data_1.to_hex());
            Ok(ContractResult::Refused(r))
        };
        if self.access_count(user) >= self.max_access_count {
            return refuse(self, Refusal::AccessLimitReached);
        }
        let Some(entry) = self.index.get(data_1) else {
            return refuse(self, Refusal::TargetDataMissing);
        };
        let bytes = store
            .fetch(&entry.address)
            .ok_or(LedgerError::MissingContent(entry.address))?;
        let ciphertext = SanitizedCiphertext::from_wire(backend, &bytes)?;
        let attachment = match entry.attachment {
            Some(a) => store.fetch(&a).ok_or(LedgerError::MissingContent(a))?,
            None => Vec::new(),
        };
        self.access_list.push(AccessRecord {
            user: user.to_string(),
            timestamp_ms,
            data_1: *data_1,
        });
        let tx = [&data_1.0[..], user.as_bytes(), &timestamp_ms.to_be_bytes()].concat();
        self.append_tx(Address::digest(&tx), TxKind::Access);
        self.audit
            .append("contract_fetch", user, timestamp_ms, Outcome::Ok, data_1.to_hex());
        Ok(ContractResult::Granted { ciphertext, attachment })
    }
}
