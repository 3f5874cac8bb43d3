//! Binary encodings for keys, parameters and ciphertexts.
//!
//! * wire form: `kind (1 B) || body`
//! * file form: `"MXC1" || kind (1 B) || profile id (1 B) || body`
//!
//! Bodies are fixed-width element encodings in field order. Identities are the
//! only variable-width field and carry a `u16` big-endian length prefix.

use thiserror::Error;

use super::{
    ChainParams, ChainTag, MasterSecrets, OriginalCiphertext, OwnerKeys, ReCiphertext, ReKey,
    SanitizedCiphertext, SanitizedReKey, UserKeys, UserPublicKey,
};
use crate::group::{Backend, GroupError, GroupOps, Scalar};

pub const FILE_MAGIC: &[u8; 4] = b"MXC1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("bad magic: not a key or parameter file")]
    BadMagic,
    #[error("wrong object kind: expected {expected:#04x}, found {actual:#04x}")]
    WrongKind { expected: u8, actual: u8 },
    #[error("profile mismatch: file was written under profile {file:#04x}, loaded profile is {loaded:#04x}")]
    ProfileMismatch { file: u8, loaded: u8 },
    #[error("truncated input: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("{0} trailing bytes after object")]
    TrailingBytes(usize),
    #[error("unknown chain tag {0:#04x}")]
    BadChainTag(u8),
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated {
                needed: n - self.buf.len(),
            });
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn byte(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn g1<B: Backend>(&mut self, b: &B) -> Result<B::G1, CodecError> {
        Ok(b.decode_g1(self.take(b.g1_len())?)?)
    }

    pub fn gt<B: Backend>(&mut self, b: &B) -> Result<B::Gt, CodecError> {
        Ok(b.decode_gt(self.take(b.gt_len())?)?)
    }

    pub fn scalar<B: Backend>(&mut self, b: &B) -> Result<Scalar, CodecError> {
        Ok(b.decode_scalar(self.take(b.scalar_len())?)?)
    }

    pub fn identity(&mut self) -> Result<Vec<u8>, CodecError> {
        let len = u16::from_be_bytes(self.take(2)?.try_into().unwrap()) as usize;
        Ok(self.take(len)?.to_vec())
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes(self.buf.len()))
        }
    }
}

fn put_identity(out: &mut Vec<u8>, id: &[u8]) {
    let len = u16::try_from(id.len()).expect("identity longer than 65535 bytes");
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(id);
}

/// An object with a kind byte and a fixed field order.
pub trait WireObject<B: Backend>: Sized {
    const KIND: u8;

    fn write_body(&self, b: &B, out: &mut Vec<u8>);
    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError>;

    /// Body only: the element payload.
    fn body_bytes(&self, b: &B) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_body(b, &mut out);
        out
    }

    fn to_wire(&self, b: &B) -> Vec<u8> {
        let mut out = vec![Self::KIND];
        self.write_body(b, &mut out);
        out
    }

    fn from_wire(b: &B, bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let kind = r.byte()?;
        if kind != Self::KIND {
            return Err(CodecError::WrongKind {
                expected: Self::KIND,
                actual: kind,
            });
        }
        let v = Self::read_body(b, &mut r)?;
        r.finish()?;
        Ok(v)
    }

    fn to_file(&self, b: &B) -> Vec<u8> {
        let mut out = FILE_MAGIC.to_vec();
        out.push(Self::KIND);
        out.push(b.profile().id());
        self.write_body(b, &mut out);
        out
    }

    fn from_file(b: &B, bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        if r.take(4).map_err(|_| CodecError::BadMagic)? != FILE_MAGIC {
            return Err(CodecError::BadMagic);
        }
        let kind = r.byte()?;
        if kind != Self::KIND {
            return Err(CodecError::WrongKind {
                expected: Self::KIND,
                actual: kind,
            });
        }
        let file = r.byte()?;
        let loaded = b.profile().id();
        if file != loaded {
            return Err(CodecError::ProfileMismatch { file, loaded });
        }
        let v = Self::read_body(b, &mut r)?;
        r.finish()?;
        Ok(v)
    }
}

impl<B: Backend> WireObject<B> for ChainParams<B> {
    const KIND: u8 = 0x01;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.push(self.chain.as_byte());
        out.extend(b.encode_g1(&self.system_public_key));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let tag = r.byte()?;
        let chain = ChainTag::from_byte(tag).ok_or(CodecError::BadChainTag(tag))?;
        let system_public_key = r.g1(b)?;
        if system_public_key == b.g1_identity() {
            return Err(GroupError::InvalidElement("system public key is the identity").into());
        }
        Ok(ChainParams {
            chain,
            system_public_key,
        })
    }
}

impl<B: Backend> WireObject<B> for MasterSecrets {
    const KIND: u8 = 0x02;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_scalar(&self.hospital_master));
        out.extend(b.encode_scalar(&self.crf_master));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(MasterSecrets {
            hospital_master: r.scalar(b)?,
            crf_master: r.scalar(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for OwnerKeys<B> {
    const KIND: u8 = 0x03;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        put_identity(out, &self.identity);
        out.extend(b.encode_g1(&self.pk_do));
        out.extend(b.encode_g1(&self.sk_do_raw));
        out.extend(b.encode_g1(&self.sk_do_sanitized));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(OwnerKeys {
            identity: r.identity()?,
            pk_do: r.g1(b)?,
            sk_do_raw: r.g1(b)?,
            sk_do_sanitized: r.g1(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for UserKeys<B> {
    const KIND: u8 = 0x04;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        put_identity(out, &self.identity);
        out.extend(b.encode_g1(&self.partial_raw));
        out.extend(b.encode_g1(&self.partial_sanitized));
        out.extend(b.encode_scalar(&self.user_secret));
        out.extend(b.encode_g1(&self.sk_du));
        out.extend(b.encode_g1(&self.pk_du_1));
        out.extend(b.encode_g1(&self.pk_du_2));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(UserKeys {
            identity: r.identity()?,
            partial_raw: r.g1(b)?,
            partial_sanitized: r.g1(b)?,
            user_secret: r.scalar(b)?,
            sk_du: r.g1(b)?,
            pk_du_1: r.g1(b)?,
            pk_du_2: r.g1(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for UserPublicKey<B> {
    const KIND: u8 = 0x05;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_g1(&self.pk1));
        out.extend(b.encode_g1(&self.pk2));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(UserPublicKey {
            pk1: r.g1(b)?,
            pk2: r.g1(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for OriginalCiphertext<B> {
    const KIND: u8 = 0x10;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_g1(&self.c1));
        out.extend(b.encode_gt(&self.c2));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(OriginalCiphertext {
            c1: r.g1(b)?,
            c2: r.gt(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for SanitizedCiphertext<B> {
    const KIND: u8 = 0x11;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_g1(&self.c1p));
        out.extend(b.encode_gt(&self.c2p));
        out.extend(b.encode_g1(&self.c3p));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(SanitizedCiphertext {
            c1p: r.g1(b)?,
            c2p: r.gt(b)?,
            c3p: r.g1(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for ReKey<B> {
    const KIND: u8 = 0x12;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_g1(&self.rk1));
        out.extend(b.encode_g1(&self.rk2));
        out.extend(b.encode_gt(&self.rk3));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(ReKey {
            rk1: r.g1(b)?,
            rk2: r.g1(b)?,
            rk3: r.gt(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for SanitizedReKey<B> {
    const KIND: u8 = 0x13;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_g1(&self.rk1p));
        out.extend(b.encode_g1(&self.rk2p));
        out.extend(b.encode_gt(&self.rk3p));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(SanitizedReKey {
            rk1p: r.g1(b)?,
            rk2p: r.g1(b)?,
            rk3p: r.gt(b)?,
        })
    }
}

impl<B: Backend> WireObject<B> for ReCiphertext<B> {
    const KIND: u8 = 0x14;

    fn write_body(&self, b: &B, out: &mut Vec<u8>) {
        out.extend(b.encode_g1(&self.c1));
        out.extend(b.encode_gt(&self.c2));
        out.extend(b.encode_g1(&self.c3));
        out.extend(b.encode_gt(&self.c4));
    }

    fn read_body(b: &B, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(ReCiphertext {
            c1: r.g1(b)?,
            c2: r.gt(b)?,
            c3: r.g1(b)?,
            c4: r.gt(b)?,
        })
    }
}
