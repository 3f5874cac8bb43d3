//! Message envelopes and their wire format.
//!
//! `kind (1 B) || sender (8 B) || recipient (8 B) || T (8 B BE) || N (16 B) || fields`
//!
//! Each field is a `u32` big-endian length followed by its bytes. The high
//! bit of the kind byte marks a confidentiality-wrapped payload.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ProtocolError;

pub const NONCE_LEN: usize = 16;
pub const HEADER_LEN: usize = 1 + 8 + 8 + 8 + NONCE_LEN;
const WRAPPED_BIT: u8 = 0x80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MessageKind {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    DataOwner,
    DataUser,
    HospitalA,
    Relay,
}

/// What a payload field holds. Every variant is public material; secret
/// key shares, master scalars, `beta` and `X` have no variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    RoleTag,
    OwnerPublicKey,
    UserPublicKey,
    UserIdentity,
    DataId,
    ResultId,
    IdentityProof,
    ReKey,
    SanitizedCiphertext,
    ReCiphertext,
    PhrBlob,
    SessionCiphertext,
    SealedPayload,
}

impl MessageKind {
    pub const ALL: [MessageKind; 8] = [
        MessageKind::M1,
        MessageKind::M2,
        MessageKind::M3,
        MessageKind::M4,
        MessageKind::M5,
        MessageKind::M6,
        MessageKind::M7,
        MessageKind::M8,
    ];

    pub fn as_byte(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.get((b as usize).checked_sub(1)?).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn role_tag(self) -> &'static str {
        match self {
            MessageKind::M1 => "request_1",
            MessageKind::M2 => "request_2",
            MessageKind::M3 => "request_3",
            MessageKind::M4 => "respond_1",
            MessageKind::M5 => "respond_2",
            MessageKind::M6 => "respond_3",
            MessageKind::M7 => "request_4",
            MessageKind::M8 => "respond_4",
        }
    }

    pub fn route(self) -> (Role, Role) {
        use Role::*;
        match self {
            MessageKind::M1 => (DataUser, DataOwner),
            MessageKind::M2 => (DataOwner, HospitalA),
            MessageKind::M3 => (HospitalA, Relay),
            MessageKind::M4 => (Relay, HospitalA),
            MessageKind::M5 => (HospitalA, DataOwner),
            MessageKind::M6 => (DataOwner, DataUser),
            MessageKind::M7 => (DataUser, Relay),
            MessageKind::M8 => (Relay, DataUser),
        }
    }

    /// Payload fields in order. For M1 this is the content inside the
    /// confidentiality wrapping; see [`MessageKind::wire_schema`].
    pub fn schema(self) -> &'static [FieldKind] {
        use FieldKind::*;
        match self {
            MessageKind::M1 => &[RoleTag, OwnerPublicKey, UserPublicKey, UserIdentity, DataId, IdentityProof],
            MessageKind::M2 => &[RoleTag, OwnerPublicKey, UserPublicKey, UserIdentity, DataId, ReKey],
            MessageKind::M3 => &[RoleTag, DataId, SanitizedCiphertext, ReKey, PhrBlob],
            MessageKind::M4 | MessageKind::M5 | MessageKind::M6 => &[RoleTag, ResultId],
            MessageKind::M7 => &[RoleTag, OwnerPublicKey, UserPublicKey, ResultId],
            MessageKind::M8 => &[RoleTag, ReCiphertext, PhrBlob],
        }
    }

    pub fn wire_schema(self) -> &'static [FieldKind] {
        match self {
            MessageKind::M1 => &[FieldKind::SessionCiphertext, FieldKind::SealedPayload],
            other => other.schema(),
        }
    }

    pub fn is_wrapped(self) -> bool {
        self == MessageKind::M1
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.as_byte())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActorId(pub [u8; 8]);

impl ActorId {
    /// First 8 bytes of SHA-256 of the actor's name.
    pub fn named(name: &str) -> Self {
        let d = Sha256::digest(name.as_bytes());
        ActorId(d[..8].try_into().unwrap())
    }
}

impl fmt::Debug for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActorId({})", hex::encode(self.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub kind: MessageKind,
    pub wrapped: bool,
    pub sender: ActorId,
    pub recipient: ActorId,
    pub timestamp_ms: u64,
    pub nonce: [u8; NONCE_LEN],
    pub fields: Vec<Vec<u8>>,
}

impl Envelope {
    /// Stamps `T` and a fresh `N`.
    pub fn build<R: RngCore + ?Sized>(
        kind: MessageKind,
        sender: ActorId,
        recipient: ActorId,
        now_ms: u64,
        fields: Vec<Vec<u8>>,
        rng: &mut R,
    ) -> Self {
        let mut nonce = [0u8; NONCE_LEN];
        rng.fill_bytes(&mut nonce);
        Envelope {
            kind,
            wrapped: kind.is_wrapped(),
            sender,
            recipient,
            timestamp_ms: now_ms,
            nonce,
            fields,
        }
    }

    pub fn field(&self, i: usize) -> &[u8] {
        &self.fields[i]
    }

    pub fn encode(&self) -> Vec<u8> {
        let body: usize = self.fields.iter().map(|f| 4 + f.len()).sum();
        let mut out = Vec::with_capacity(HEADER_LEN + body);
        let flag = if self.wrapped { WRAPPED_BIT } else { 0 };
        out.push(self.kind.as_byte() | flag);
        out.extend_from_slice(&self.sender.0);
        out.extend_from_slice(&self.recipient.0);
        out.extend_from_slice(&self.timestamp_ms.to_be_bytes());
        out.extend_from_slice(&self.nonce);
        for f in &self.fields {
            out.extend_from_slice(&(f.len() as u32).to_be_bytes());
            out.extend_from_slice(f);
        }
        out
    }

    /// Parses and checks the field count against the kind's wire schema.
    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let malformed = |m: &str| ProtocolError::Malformed(m.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(malformed("envelope shorter than header"));
        }
        let kind_byte = bytes[0];
        let kind = MessageKind::from_byte(kind_byte & !WRAPPED_BIT).ok_or_else(|| malformed("unknown kind"))?;
        let wrapped = kind_byte & WRAPPED_BIT != 0;
        if wrapped != kind.is_wrapped() {
            return Err(malformed("confidentiality flag does not match kind"));
        }
        let sender = ActorId(bytes[1..9].try_into().unwrap());
        let recipient = ActorId(bytes[9..17].try_into().unwrap());
        let timestamp_ms = u64::from_be_bytes(bytes[17..25].try_into().unwrap());
        let nonce = bytes[25..HEADER_LEN].try_into().unwrap();
        let fields = unpack_fields(&bytes[HEADER_LEN..])?;
        let env = Envelope {
            kind,
            wrapped,
            sender,
            recipient,
            timestamp_ms,
            nonce,
            fields,
        };
        env.check_fields(kind.wire_schema())?;
        Ok(env)
    }

    pub(crate) fn check_fields(&self, schema: &[FieldKind]) -> Result<(), ProtocolError> {
        if self.fields.len() != schema.len() {
            return Err(ProtocolError::Malformed(format!(
                "{} carries {} fields, schema has {}",
                self.kind,
                self.fields.len(),
                schema.len()
            )));
        }
        if schema.first() == Some(&FieldKind::RoleTag) && self.fields[0] != self.kind.role_tag().as_bytes() {
            return Err(ProtocolError::Malformed(format!("{} has the wrong role tag", self.kind)));
        }
        Ok(())
    }
}

/// `u32`-length-prefixed concatenation, used for M1's sealed content.
pub fn pack_fields(fields: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in fields {
        out.extend_from_slice(&(f.len() as u32).to_be_bytes());
        out.extend_from_slice(f);
    }
    out
}

pub fn unpack_fields(mut bytes: &[u8]) -> Result<Vec<Vec<u8>>, ProtocolError> {
    let mut fields = Vec::new();
    while !bytes.is_empty() {
        if bytes.len() < 4 {
            return Err(ProtocolError::Malformed("truncated field".into()));
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        bytes = &bytes[4..];
        if bytes.len() < len {
            return Err(ProtocolError::Malformed("truncated field".into()));
        }
        fields.push(bytes[..len].to_vec());
        bytes = &bytes[len..];
    }
    Ok(fields)
}
