//! Subverted-encryptor experiment.
//!
//! A malicious `Enc` picks its randomness so that `g^alpha` leaks a secret
//! bit. The firewall's `beta` should wipe that channel while every ciphertext
//! still decrypts.

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{CryptoRng, Rng, RngCore};
use serde::Serialize;

use super::{CrfError, CrfGuardA};
use crate::group::{Backend, GroupOps, Scalar};
use crate::scheme::{ChainTag, Scheme};

/// How a subverted encryptor hides one bit in its randomness.
pub trait LeakChannel {
    /// Nonzero exponent carrying `bit`.
    fn embed(&self, order: &BigUint, bit: bool, rng: &mut dyn RngCore) -> BigUint;
    /// Reads the bit back from an observed exponent.
    fn extract(&self, exponent: &BigUint) -> bool;
}

/// `alpha` even for 0, odd for 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParityLeak;

impl LeakChannel for ParityLeak {
    fn embed(&self, order: &BigUint, bit: bool, rng: &mut dyn RngCore) -> BigUint {
        loop {
            let mut bytes = vec![0u8; order.to_bytes_be().len() + 8];
            rng.fill_bytes(&mut bytes);
            let mut a = BigUint::from_bytes_be(&bytes) % order;
            if a.is_odd() != bit {
                a += 1u32;
            }
            if &a < order && a != BigUint::from(0u32) {
                return a;
            }
        }
    }

    fn extract(&self, exponent: &BigUint) -> bool {
        exponent.is_odd()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsaReport {
    pub trials: usize,
    /// Distinguisher accuracy on raw `Enc*` outputs.
    pub unsanitized_accuracy: f64,
    /// Distinguisher accuracy after the firewall.
    pub sanitized_accuracy: f64,
    /// Every sanitized ciphertext opened to its message.
    pub all_decrypted: bool,
}

/// Runs `trials` subverted encryptions leaking `secret_bit(i)` through
/// `channel`, sanitizes each with a fresh chain-A firewall, and scores a
/// distinguisher that knows the channel.
///
/// Needs a backend that exposes discrete logs.
pub fn run_subverted_encryptor<B, L, R>(
    backend: &B,
    trials: usize,
    mut secret_bit: impl FnMut(usize) -> bool,
    channel: &L,
    rng: &mut R,
) -> Result<AsaReport, CrfError>
where
    B: Backend,
    L: LeakChannel + ?Sized,
    R: RngCore + CryptoRng,
{
    let g = backend.generator();
    if backend.g1_exponent(&g).is_none() {
        return Err(CrfError::Unsupported(
            "subverted-encryptor experiment needs observable exponents (transparent backend)",
        ));
    }
    let scheme = Scheme::new(backend.clone());
    let (params, secrets) = scheme.setup_chain_random(ChainTag::A, rng);
    let owner = scheme.owner_keys(b"asa-owner", &secrets)?;
    let guard = CrfGuardA::new(backend.clone(), secrets.crf_master.clone())?;

    let mut raw_hits = 0usize;
    let mut clean_hits = 0usize;
    let mut all_decrypted = true;
    for i in 0..trials {
        let bit = secret_bit(i);
        let alpha = Scalar::new(channel.embed(backend.order(), bit, rng), backend.order());
        let m = backend.random_gt(rng);
        let ct = scheme.enc(&m, &params, &owner.pk_do, &alpha)?;
        let beta = backend.random_nonzero_scalar(rng);
        let (sct, _) = guard.sanitize_ciphertext_with(&ct, &owner.pk_do, &params, beta)?;

        let raw = backend.g1_exponent(&ct.c1).expect("checked above");
        let clean = backend.g1_exponent(&sct.c1p).expect("checked above");
        raw_hits += usize::from(channel.extract(&raw) == bit);
        clean_hits += usize::from(channel.extract(&clean) == bit);
        all_decrypted &= scheme.dec_owner(&sct.c1p, &sct.c2p, &owner.sk_do_sanitized) == m;
    }
    let frac = |hits: usize| if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    Ok(AsaReport {
        trials,
        unsanitized_accuracy: frac(raw_hits),
        sanitized_accuracy: frac(clean_hits),
        all_decrypted,
    })
}

/// Uniform secret bits from `rng`.
pub fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen()).collect()
}
