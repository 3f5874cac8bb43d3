//! Symmetric bilinear groups.
//!
//! Two interchangeable backends implement [`Backend`]:
//!
//! * [`TransparentBackend`] stores every element as its discrete log with
//!   respect to the generator (or `e(g, g)` in the target group). It is exact
//!   and insecure, which makes brute-force oracles possible in tests.
//! * [`PairingBackend`] is a real Type-A pairing: the supersingular curve
//!   `y^2 = x^3 + x` over a 512-bit prime field with a 160-bit subgroup and
//!   the reduced Tate pairing.
//!
//! Scheme code goes through [`GroupOps`], which wraps the raw primitives and
//! records every exponentiation, pairing and hash in the thread's
//! [`OpCounters`].

mod counters;
mod hashing;
pub mod pairing;
mod profile;
mod transparent;

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use counters::{counters_reset, counters_snapshot, measure, OpCounters};
pub use hashing::{expand_digest, is_probable_prime};
pub use pairing::PairingBackend;
pub use profile::{GroupProfile, ProfileError};
pub use transparent::{TransparentBackend, TransparentG1, TransparentGt};

use counters::{bump, Op};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("malformed encoding: expected {expected} bytes, got {actual}")]
    MalformedEncoding { expected: usize, actual: usize },
    #[error("invalid element: {0}")]
    InvalidElement(&'static str),
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Transparent,
    Pairing,
}

impl BackendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::Transparent => "transparent",
            BackendKind::Pairing => "pairing",
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transparent" => Ok(BackendKind::Transparent),
            "pairing" => Ok(BackendKind::Pairing),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

/// An integer modulo the group order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar(BigUint);

impl Scalar {
    /// Reduces `value` modulo `order`.
    pub fn new(value: BigUint, order: &BigUint) -> Self {
        Scalar(value % order)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Raw group primitives. Nothing here touches the operation counters; use the
/// [`GroupOps`] extension methods from scheme code.
pub trait Backend: Clone + Debug + PartialEq + Eq + Send + Sync + 'static {
    type G1: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;
    type Gt: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn kind(&self) -> BackendKind;
    fn profile(&self) -> &GroupProfile;
    fn order(&self) -> &BigUint;

    fn generator(&self) -> Self::G1;
    fn g1_identity(&self) -> Self::G1;
    fn gt_identity(&self) -> Self::Gt;

    fn g1_pow_raw(&self, base: &Self::G1, e: &BigUint) -> Self::G1;
    fn g1_mul_raw(&self, a: &Self::G1, b: &Self::G1) -> Self::G1;
    fn g1_inv_raw(&self, a: &Self::G1) -> Self::G1;

    fn gt_pow_raw(&self, base: &Self::Gt, e: &BigUint) -> Self::Gt;
    fn gt_mul_raw(&self, a: &Self::Gt, b: &Self::Gt) -> Self::Gt;
    fn gt_inv_raw(&self, a: &Self::Gt) -> Self::Gt;

    fn pair_raw(&self, a: &Self::G1, b: &Self::G1) -> Self::Gt;

    /// Deterministic map from `(domain, data)` into the order-q subgroup.
    fn map_to_g1(&self, domain: &[u8], data: &[u8]) -> Self::G1;

    /// `e(g, g)`.
    fn gt_generator(&self) -> Self::Gt;

    fn g1_len(&self) -> usize;
    fn gt_len(&self) -> usize;

    fn encode_g1(&self, x: &Self::G1) -> Vec<u8>;
    fn decode_g1(&self, bytes: &[u8]) -> Result<Self::G1, GroupError>;
    fn encode_gt(&self, x: &Self::Gt) -> Vec<u8>;
    fn decode_gt(&self, bytes: &[u8]) -> Result<Self::Gt, GroupError>;

    /// Discrete log of a G1 element, when the backend exposes it.
    fn g1_exponent(&self, _x: &Self::G1) -> Option<BigUint> {
        None
    }

    /// Discrete log of a GT element with respect to `e(g, g)`, when exposed.
    fn gt_exponent(&self, _x: &Self::Gt) -> Option<BigUint> {
        None
    }
}

const H1_DOMAIN: &[u8] = b"MXC-H1";
const H2_DOMAIN: &[u8] = b"MXC-H2";

/// Counted group operations used by the scheme.
pub trait GroupOps: Backend {
    fn pair(&self, a: &Self::G1, b: &Self::G1) -> Self::Gt {
        bump(Op::Pairing);
        self.pair_raw(a, b)
    }

    fn g1_exp(&self, base: &Self::G1, s: &Scalar) -> Self::G1 {
        bump(Op::E1);
        self.g1_pow_raw(base, s.value())
    }

    fn g1_mul(&self, a: &Self::G1, b: &Self::G1) -> Self::G1 {
        self.g1_mul_raw(a, b)
    }

    fn g1_inv(&self, a: &Self::G1) -> Self::G1 {
        self.g1_inv_raw(a)
    }

    fn g1_div(&self, a: &Self::G1, b: &Self::G1) -> Self::G1 {
        self.g1_mul_raw(a, &self.g1_inv_raw(b))
    }

    fn gt_exp(&self, base: &Self::Gt, s: &Scalar) -> Self::Gt {
        bump(Op::E2);
        self.gt_pow_raw(base, s.value())
    }

    fn gt_mul(&self, a: &Self::Gt, b: &Self::Gt) -> Self::Gt {
        self.gt_mul_raw(a, b)
    }

    fn gt_inv(&self, a: &Self::Gt) -> Self::Gt {
        self.gt_inv_raw(a)
    }

    fn gt_div(&self, a: &Self::Gt, b: &Self::Gt) -> Self::Gt {
        self.gt_mul_raw(a, &self.gt_inv_raw(b))
    }

    /// `H1: {0,1}* -> G1`.
    fn hash_to_g1(&self, data: &[u8]) -> Self::G1 {
        bump(Op::Hash);
        self.map_to_g1(H1_DOMAIN, data)
    }

    /// `H2: GT -> G1`, over the canonical encoding of `x`.
    fn hash_gt_to_g1(&self, x: &Self::Gt) -> Self::G1 {
        bump(Op::Hash);
        self.map_to_g1(H2_DOMAIN, &self.encode_gt(x))
    }

    fn scalar(&self, v: u64) -> Scalar {
        Scalar::new(BigUint::from(v), self.order())
    }

    fn scalar_from_biguint(&self, v: BigUint) -> Scalar {
        Scalar::new(v, self.order())
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_below(self.order()))
    }

    /// Uniform in `[1, q)`.
    fn random_nonzero_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Scalar {
        let q_minus_one = self.order() - BigUint::one();
        Scalar(rng.gen_biguint_below(&q_minus_one) + BigUint::one())
    }

    /// Uniform element of GT; the exponent is sampled then applied uncounted.
    fn random_gt<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Self::Gt {
        let k = rng.gen_biguint_below(self.order());
        self.gt_pow_raw(&self.gt_generator(), &k)
    }

    fn random_g1<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Self::G1 {
        let k = rng.gen_biguint_below(self.order());
        self.g1_pow_raw(&self.generator(), &k)
    }

    fn scalar_len(&self) -> usize {
        byte_len(self.order())
    }

    fn encode_scalar(&self, s: &Scalar) -> Vec<u8> {
        to_fixed_be(s.value(), self.scalar_len())
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Scalar, GroupError> {
        if bytes.len() != self.scalar_len() {
            return Err(GroupError::MalformedEncoding {
                expected: self.scalar_len(),
                actual: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if &v >= self.order() {
            return Err(GroupError::InvalidElement("scalar not reduced modulo q"));
        }
        Ok(Scalar(v))
    }

    /// Checks `x^q = 1` in G1.
    fn g1_in_subgroup(&self, x: &Self::G1) -> bool {
        self.g1_pow_raw(x, self.order()) == self.g1_identity()
    }

    /// Checks `x^q = 1` in GT.
    fn gt_in_subgroup(&self, x: &Self::Gt) -> bool {
        self.gt_pow_raw(x, self.order()) == self.gt_identity()
    }
}

impl<B: Backend> GroupOps for B {}

pub(crate) fn byte_len(n: &BigUint) -> usize {
    (n.bits() as usize).div_ceil(8)
}

/// Big-endian encoding left-padded to `width` bytes.
pub(crate) fn to_fixed_be(v: &BigUint, width: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    let raw: &[u8] = if v.is_zero() { &[] } else { &raw };
    assert!(raw.len() <= width, "value wider than {width} bytes");
    let mut out = vec![0u8; width - raw.len()];
    out.extend_from_slice(raw);
    out
}
