//! Data encapsulation for PHR bytes under a key derived from the group message.
//!
//! Wire layout: `nonce (12 B) || ciphertext || tag (16 B)`.

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;
use thiserror::Error;

use crate::group::Backend;

pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

const KDF_INFO: &[u8] = b"medexchain dem v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DemError {
    #[error("tamper detected: authentication failed")]
    TamperDetected,
    #[error("wrapped payload too short ({0} bytes)")]
    Truncated(usize),
}

fn derive_key<B: Backend>(backend: &B, m: &B::Gt) -> Key {
    let ikm = backend.encode_gt(m);
    let hk = Hkdf::<Sha256>::new(None, &ikm);
    let mut okm = [0u8; 32];
    hk.expand(KDF_INFO, &mut okm)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    Key::from(okm)
}

pub fn hybrid_wrap<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    backend: &B,
    phr: &[u8],
    m: &B::Gt,
    rng: &mut R,
) -> Vec<u8> {
    let cipher = ChaCha20Poly1305::new(&derive_key(backend, m));
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let sealed = cipher
        .encrypt(Nonce::from_slice(&nonce), phr)
        .expect("in-memory encryption cannot fail");
    let mut out = Vec::with_capacity(NONCE_LEN + sealed.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&sealed);
    out
}

pub fn hybrid_unwrap<B: Backend>(backend: &B, wrapped: &[u8], m: &B::Gt) -> Result<Vec<u8>, DemError> {
    if wrapped.len() < NONCE_LEN + TAG_LEN {
        return Err(DemError::Truncated(wrapped.len()));
    }
    let (nonce, body) = wrapped.split_at(NONCE_LEN);
    ChaCha20Poly1305::new(&derive_key(backend, m))
        .decrypt(Nonce::from_slice(nonce), body)
        .map_err(|_| DemError::TamperDetected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupOps, TransparentBackend};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn wrap_unwrap() {
        let b = TransparentBackend::a80();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m = b.random_gt(&mut rng);
        let wrapped = hybrid_wrap(&b, b"blood pressure 120/80", &m, &mut rng);
        assert_eq!(wrapped.len(), NONCE_LEN + 21 + TAG_LEN);
        assert_eq!(hybrid_unwrap(&b, &wrapped, &m).unwrap(), b"blood pressure 120/80");
    }

    #[test]
    fn wrong_key_and_bit_flips_are_detected() {
        let b = TransparentBackend::a80();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let m = b.random_gt(&mut rng);
        let other = b.gt_mul(&m, &b.gt_generator());
        let wrapped = hybrid_wrap(&b, b"ecg trace", &m, &mut rng);
        assert_eq!(hybrid_unwrap(&b, &wrapped, &other), Err(DemError::TamperDetected));
        for bit in 0..wrapped.len() * 8 {
            let mut t = wrapped.clone();
            t[bit / 8] ^= 1 << (bit % 8);
            assert_eq!(hybrid_unwrap(&b, &t, &m), Err(DemError::TamperDetected));
        }
        assert_eq!(hybrid_unwrap(&b, &wrapped[..20], &m), Err(DemError::Truncated(20)));
    }
}
