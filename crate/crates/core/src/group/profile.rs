//! Group profile descriptors.
//!
//! A descriptor is a small `key=value` text file:
//!
//! ```text
//! backend=pairing
//! security_bits=80
//! q=730750818665451621361119245571504901405976559617
//! field_prime=8780710799663312522437781984754049815806883199414208211028653399266475630880222957078625179422662221423155858769582317459277713367317481324925129998224791
//! generator_x=...
//! generator_y=...
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{is_probable_prime, BackendKind};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("key `{key}`: {reason}")]
    InvalidValue { key: &'static str, reason: String },
    #[error("group order q is not prime")]
    OrderNotPrime,
    #[error("field prime is not a prime congruent to 3 mod 4")]
    BadFieldPrime,
    #[error("q does not divide field_prime + 1")]
    OrderDoesNotDivide,
    #[error("generator is not a point of order q on y^2 = x^3 + x")]
    BadGenerator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupProfile {
    pub backend_kind: BackendKind,
    pub security_bits: u32,
    pub order: BigUint,
    /// Only for the pairing backend.
    pub field_prime: Option<BigUint>,
    /// Affine generator coordinates, pairing backend only.
    pub generator: Option<(BigUint, BigUint)>,
}

/// Type-A field prime (512 bits, `p = h*q - 1`, `p = 3 mod 4`).
pub(crate) const A80_FIELD_PRIME: &str = "8780710799663312522437781984754049815806883199414208211028653399266475630880222957078625179422662221423155858769582317459277713367317481324925129998224791";
/// `q = 2^159 + 2^107 + 1`.
pub(crate) const A80_ORDER: &str = "730750818665451621361119245571504901405976559617";

impl GroupProfile {
    /// 80-bit Type-A parameters without a generator; the pairing backend
    /// derives one deterministically.
    pub fn a80() -> Self {
        GroupProfile {
            backend_kind: BackendKind::Pairing,
            security_bits: 80,
            order: A80_ORDER.parse().unwrap(),
            field_prime: Some(A80_FIELD_PRIME.parse().unwrap()),
            generator: None,
        }
    }

    /// Transparent profile over a prime order `q`.
    pub fn transparent(order: BigUint) -> Result<Self, ProfileError> {
        if !is_probable_prime(&order) {
            return Err(ProfileError::OrderNotPrime);
        }
        Ok(GroupProfile {
            backend_kind: BackendKind::Transparent,
            security_bits: (order.bits() / 2) as u32,
            order,
            field_prime: None,
            generator: None,
        })
    }

    /// Transparent profile sharing the 160-bit order of the Type-A curve.
    pub fn transparent_a80() -> Self {
        let mut p = Self::transparent(A80_ORDER.parse().unwrap()).unwrap();
        p.security_bits = 80;
        p
    }

    pub fn to_descriptor(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "backend={}", self.backend_kind.as_str());
        let _ = writeln!(out, "security_bits={}", self.security_bits);
        let _ = writeln!(out, "q={}", self.order);
        if let Some(p) = &self.field_prime {
            let _ = writeln!(out, "field_prime={p}");
        }
        if let Some((x, y)) = &self.generator {
            let _ = writeln!(out, "generator_x={x}");
            let _ = writeln!(out, "generator_y={y}");
        }
        out
    }

    /// One-byte profile tag embedded in key and ciphertext files.
    pub fn id(&self) -> u8 {
        Sha256::digest(self.to_descriptor().as_bytes())[0]
    }

    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ProfileError::Syntax { line: i + 1 })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &'static str| kv.get(key).ok_or(ProfileError::MissingKey(key));
        let big = |key: &'static str| -> Result<BigUint, ProfileError> {
            BigUint::from_str(get(key)?).map_err(|e| ProfileError::InvalidValue {
                key,
                reason: e.to_string(),
            })
        };

        let backend_kind = BackendKind::from_str(get("backend")?)
            .map_err(|reason| ProfileError::InvalidValue { key: "backend", reason })?;
        let security_bits = get("security_bits")?
            .parse()
            .map_err(|e: std::num::ParseIntError| ProfileError::InvalidValue {
                key: "security_bits",
                reason: e.to_string(),
            })?;
        let order = big("q")?;
        if !is_probable_prime(&order) {
            return Err(ProfileError::OrderNotPrime);
        }
        let mut profile = GroupProfile {
            backend_kind,
            security_bits,
            order,
            field_prime: None,
            generator: None,
        };
        if backend_kind == BackendKind::Pairing {
            let p = big("field_prime")?;
            if !is_probable_prime(&p) || (&p % 4u32) != BigUint::from(3u32) {
                return Err(ProfileError::BadFieldPrime);
            }
            if (&p + BigUint::one()) % &profile.order != BigUint::from(0u32) {
                return Err(ProfileError::OrderDoesNotDivide);
            }
            profile.field_prime = Some(p);
            if kv.contains_key("generator_x") || kv.contains_key("generator_y") {
                profile.generator = Some((big("generator_x")?, big("generator_y")?));
            }
        }
        Ok(profile)
    }
}
