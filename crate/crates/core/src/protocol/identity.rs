//! Proof that a data user holds `sk_DU` for a presented public key.
//!
//! The user's key satisfies `e(pk1, pk2) = e(g, sk)`. The prover sends
//! `A = e(g, g)^t` and `Z = g^t sk^c` with `c = H(A, pk1, pk2, context)`;
//! the verifier accepts when `e(g, Z) = A e(pk1, pk2)^c` and `pk1 = H1(ID)`.

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::group::{Backend, GroupOps, Scalar};
use crate::scheme::codec::{CodecError, Reader};
use crate::scheme::UserPublicKey;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityProof<B: Backend> {
    pub commitment: B::Gt,
    pub response: B::G1,
}

fn challenge<B: Backend>(b: &B, commitment: &B::Gt, pk: &UserPublicKey<B>, context: &[u8]) -> Scalar {
    let mut h = Sha256::new();
    h.update(b"MXC-POP");
    for part in [b.encode_gt(commitment), b.encode_g1(&pk.pk1), b.encode_g1(&pk.pk2)] {
        h.update((part.len() as u32).to_be_bytes());
        h.update(part);
    }
    h.update((context.len() as u32).to_be_bytes());
    h.update(context);
    b.scalar_from_biguint(BigUint::from_bytes_be(&h.finalize()))
}

pub fn prove<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    b: &B,
    sk_du: &B::G1,
    pk: &UserPublicKey<B>,
    context: &[u8],
    rng: &mut R,
) -> IdentityProof<B> {
    let t = b.random_nonzero_scalar(rng);
    let commitment = b.gt_exp(&b.gt_generator(), &t);
    let c = challenge(b, &commitment, pk, context);
    let response = b.g1_mul(&b.g1_exp(&b.generator(), &t), &b.g1_exp(sk_du, &c));
    IdentityProof { commitment, response }
}

pub fn verify<B: Backend>(
    b: &B,
    identity: &[u8],
    pk: &UserPublicKey<B>,
    proof: &IdentityProof<B>,
    context: &[u8],
) -> bool {
    if identity.is_empty() || pk.pk2 == b.g1_identity() || b.hash_to_g1(identity) != pk.pk1 {
        return false;
    }
    let c = challenge(b, &proof.commitment, pk, context);
    let lhs = b.pair(&b.generator(), &proof.response);
    let rhs = b.gt_mul(&proof.commitment, &b.gt_exp(&b.pair(&pk.pk1, &pk.pk2), &c));
    lhs == rhs
}

impl<B: Backend> IdentityProof<B> {
    pub fn encode(&self, b: &B) -> Vec<u8> {
        let mut out = b.encode_gt(&self.commitment);
        out.extend(b.encode_g1(&self.response));
        out
    }

    pub fn decode(b: &B, bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let proof = IdentityProof {
            commitment: r.gt(b)?,
            response: r.g1(b)?,
        };
        r.finish()?;
        Ok(proof)
    }
}
