//! Reverse firewalls for the two hospitals.
//!
//! [`CrfGuardA`] sits between chain A's hospital/data owners and the outside
//! world. It re-randomises every ciphertext with a fresh `beta`, remembers
//! that `beta` under the ciphertext's content id, and folds the same `beta`
//! into the re-encryption key when the owner later shares that ciphertext.
//! [`CrfGuardB`] only re-randomises partial user keys on chain B.

mod asa;

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Mutex, RwLock};

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{Backend, GroupOps, Scalar};
use crate::scheme::codec::WireObject;
use crate::scheme::{
    ChainParams, OriginalCiphertext, ReKey, SanitizedCiphertext, SanitizedReKey, Scheme,
    SchemeError, UserPublicKey,
};

pub use asa::{random_bits, run_subverted_encryptor, AsaReport, LeakChannel, ParityLeak};

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("firewall master key must be nonzero")]
    ZeroMaster,
    #[error("unknown ciphertext {0}")]
    UnknownCiphertext(CiphertextId),
    #[error("ledger conflict: ciphertext {0} already bound to a different beta")]
    LedgerConflict(CiphertextId),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("bad ledger snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// SHA-256 of a sanitized ciphertext's wire encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CiphertextId(pub [u8; 32]);

impl CiphertextId {
    pub fn of<B: Backend>(backend: &B, ct: &SanitizedCiphertext<B>) -> Self {
        Self::digest(&ct.to_wire(backend))
    }

    pub fn digest(bytes: &[u8]) -> Self {
        CiphertextId(Sha256::digest(bytes).into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        Some(CiphertextId(bytes.try_into().ok()?))
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let v = hex::decode(s).ok()?;
        Some(CiphertextId(v.try_into().ok()?))
    }
}

impl fmt::Display for CiphertextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CiphertextId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CiphertextId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CiphertextId::from_hex(&s).ok_or_else(|| serde::de::Error::custom("expected 64 hex digits"))
    }
}

impl std::str::FromStr for CiphertextId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CiphertextId::from_hex(s).ok_or_else(|| format!("`{s}` is not a 64-digit hex id"))
    }
}

impl fmt::Debug for CiphertextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CiphertextId({})", &self.to_hex()[..16])
    }
}

pub struct CrfGuardA<B: Backend> {
    scheme: Scheme<B>,
    master: Scalar,
    ledger: RwLock<HashMap<CiphertextId, Scalar>>,
    snapshot: Option<Mutex<File>>,
}

impl<B: Backend> fmt::Debug for CrfGuardA<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CrfGuardA")
            .field("ledger_len", &self.ledger_len())
            .field("snapshot", &self.snapshot.is_some())
            .finish_non_exhaustive()
    }
}

impl<B: Backend> CrfGuardA<B> {
    pub fn new(backend: B, master: Scalar) -> Result<Self, CrfError> {
        if master.is_zero() {
            return Err(CrfError::ZeroMaster);
        }
        Ok(CrfGuardA {
            scheme: Scheme::new(backend),
            master,
            ledger: RwLock::new(HashMap::new()),
            snapshot: None,
        })
    }

    /// Loads any records already in `path`, then appends every new record.
    pub fn with_snapshot(backend: B, master: Scalar, path: &Path) -> Result<Self, CrfError> {
        let mut guard = Self::new(backend, master)?;
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            guard.load_snapshot(&text)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        guard.snapshot = Some(Mutex::new(file));
        Ok(guard)
    }

    pub fn backend(&self) -> &B {
        self.scheme.backend()
    }

    pub fn sanitize_system_key(&self, hospital_public_key: &B::G1) -> Result<B::G1, CrfError> {
        Ok(self.scheme.crf_system_key(hospital_public_key, &self.master)?)
    }

    pub fn sanitize_owner_key(&self, sk_do_raw: &B::G1) -> Result<B::G1, CrfError> {
        Ok(self.scheme.crf_keygen_do(sk_do_raw, &self.master)?)
    }

    pub fn sanitize_ciphertext<R: RngCore + CryptoRng + ?Sized>(
        &self,
        ct: &OriginalCiphertext<B>,
        pk_do: &B::G1,
        params: &ChainParams<B>,
        rng: &mut R,
    ) -> Result<(SanitizedCiphertext<B>, CiphertextId), CrfError> {
        let beta = self.backend().random_nonzero_scalar(rng);
        self.sanitize_ciphertext_with(ct, pk_do, params, beta)
    }

    /// As [`Self::sanitize_ciphertext`] with a caller-chosen `beta`.
    pub fn sanitize_ciphertext_with(
        &self,
        ct: &OriginalCiphertext<B>,
        pk_do: &B::G1,
        params: &ChainParams<B>,
        beta: Scalar,
    ) -> Result<(SanitizedCiphertext<B>, CiphertextId), CrfError> {
        let sct = self.scheme.crf_enc(ct, pk_do, params, &beta)?;
        let id = CiphertextId::of(self.backend(), &sct);
        self.record(id, beta)?;
        Ok((sct, id))
    }

    pub fn sanitize_rekey(
        &self,
        rk: &ReKey<B>,
        id: &CiphertextId,
        pk_do: &B::G1,
        pk_du: &UserPublicKey<B>,
    ) -> Result<SanitizedReKey<B>, CrfError> {
        let beta = self.beta_for(id).ok_or(CrfError::UnknownCiphertext(*id))?;
        Ok(self.scheme.crf_rekeygen(rk, pk_do, pk_du, &beta)?)
    }

    pub fn beta_for(&self, id: &CiphertextId) -> Option<Scalar> {
        self.ledger.read().unwrap().get(id).cloned()
    }

    pub fn ledger_len(&self) -> usize {
        self.ledger.read().unwrap().len()
    }

    /// First writer wins; re-recording the same `beta` is a no-op.
    pub fn record(&self, id: CiphertextId, beta: Scalar) -> Result<(), CrfError> {
        let mut ledger = self.ledger.write().unwrap();
        if let Some(existing) = ledger.get(&id) {
            return if *existing == beta {
                Ok(())
            } else {
                Err(CrfError::LedgerConflict(id))
            };
        }
        if let Some(file) = &self.snapshot {
            let mut file = file.lock().unwrap();
            writeln!(file, "{}", self.snapshot_line(&id, &beta))?;
            file.flush()?;
        }
        ledger.insert(id, beta);
        Ok(())
    }

    fn snapshot_line(&self, id: &CiphertextId, beta: &Scalar) -> String {
        format!("{} {}", id.to_hex(), hex::encode(self.backend().encode_scalar(beta)))
    }

    /// Newline-delimited `hex(id) hex(beta)` records, sorted by id.
    pub fn export_snapshot(&self) -> String {
        let ledger = self.ledger.read().unwrap();
        let mut entries: Vec<_> = ledger.iter().collect();
        entries.sort_by_key(|(id, _)| **id);
        entries
            .into_iter()
            .map(|(id, beta)| self.snapshot_line(id, beta) + "\n")
            .collect()
    }

    pub fn load_snapshot(&self, text: &str) -> Result<usize, CrfError> {
        let mut n = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| CrfError::Snapshot {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (id, beta) = line.split_once(' ').ok_or_else(|| bad("expected two fields"))?;
            let id = CiphertextId::from_hex(id).ok_or_else(|| bad("bad ciphertext id"))?;
            let beta = hex::decode(beta).map_err(|_| bad("bad beta hex"))?;
            let beta = self
                .backend()
                .decode_scalar(&beta)
                .map_err(|e| bad(&e.to_string()))?;
            let mut ledger = self.ledger.write().unwrap();
            match ledger.get(&id) {
                Some(existing) if *existing != beta => return Err(CrfError::LedgerConflict(id)),
                Some(_) => {}
                None => {
                    ledger.insert(id, beta);
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

#[derive(Debug)]
pub struct CrfGuardB<B: Backend> {
    scheme: Scheme<B>,
    master: Scalar,
}

impl<B: Backend> CrfGuardB<B> {
    pub fn new(backend: B, master: Scalar) -> Result<Self, CrfError> {
        if master.is_zero() {
            return Err(CrfError::ZeroMaster);
        }
        Ok(CrfGuardB {
            scheme: Scheme::new(backend),
            master,
        })
    }

    pub fn sanitize_system_key(&self, hospital_public_key: &B::G1) -> Result<B::G1, CrfError> {
        Ok(self.scheme.crf_system_key(hospital_public_key, &self.master)?)
    }

    /// `D' = D^b`
    pub fn sanitize_partial_key(&self, partial: &B::G1) -> Result<B::G1, CrfError> {
        Ok(self.scheme.crf_partial_key(partial, &self.master)?)
    }
}

#[cfg(test)]
mod tests;
