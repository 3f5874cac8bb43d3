//! The cross-chain proxy re-encryption scheme.
//!
//! Chain A runs an identity-based system for data owners, chain B a
//! certificateless one for data users. A relay converts chain-A ciphertexts
//! into chain-B ciphertexts with a re-encryption key built by the owner and
//! re-randomised by chain A's reverse firewall.
//!
//! Every algorithm takes its randomness explicitly so tests can pin exact
//! exponents; the `*_random` helpers sample internally. Cost per stage, in
//! G1/GT exponentiations, pairings and hashes:
//!
//! | stage        | cost             |
//! |--------------|------------------|
//! | KeyGen (DO)  | `2E1+H`          |
//! | KeyGen (DU)  | `4E1+2H`         |
//! | Enc          | `3E1+2E2+2P`     |
//! | ReKeyGen     | `3E1+2E2+2P+H`   |
//! | ReEnc        | `P`              |
//! | Dec          | `2P+H`           |

pub mod codec;
pub mod hybrid;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Backend, GroupError, GroupOps, Scalar};

pub use hybrid::{hybrid_unwrap, hybrid_wrap, DemError};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("invalid master key: {0} must be nonzero")]
    InvalidMasterKey(&'static str),
    #[error("scalar `{0}` must be nonzero")]
    ZeroScalar(&'static str),
    #[error("invalid identity: identities must be non-empty")]
    InvalidIdentity,
    #[error("parameters belong to chain {actual:?}, expected chain {expected:?}")]
    WrongChain { expected: ChainTag, actual: ChainTag },
    #[error("invalid public key: {0}")]
    InvalidPublicKey(&'static str),
    #[error("invalid ciphertext: {0}")]
    InvalidCiphertext(#[from] GroupError),
    #[error(transparent)]
    Dem(#[from] DemError),
}

pub type Result<T, E = SchemeError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChainTag {
    A,
    B,
}

impl ChainTag {
    pub fn as_byte(self) -> u8 {
        match self {
            ChainTag::A => b'A',
            ChainTag::B => b'B',
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            b'A' => Some(ChainTag::A),
            b'B' => Some(ChainTag::B),
            _ => None,
        }
    }
}

/// Public parameters of one chain after its firewall has re-randomised the
/// hospital's system key: `PK' = g^(s a)` on chain A, `g^(y b)` on chain B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainParams<B: Backend> {
    pub chain: ChainTag,
    pub system_public_key: B::G1,
}

/// Hospital master key and firewall master key of one chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSecrets {
    pub hospital_master: Scalar,
    pub crf_master: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnerKeys<B: Backend> {
    pub identity: Vec<u8>,
    /// `H1(ID)`
    pub pk_do: B::G1,
    /// `pk^s`, issued by the hospital.
    pub sk_do_raw: B::G1,
    /// `pk^(s a)`, after the firewall.
    pub sk_do_sanitized: B::G1,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UserPublicKey<B: Backend> {
    pub pk1: B::G1,
    pub pk2: B::G1,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserKeys<B: Backend> {
    pub identity: Vec<u8>,
    /// `D = H1(ID)^y`
    pub partial_raw: B::G1,
    /// `D' = D^b`
    pub partial_sanitized: B::G1,
    pub user_secret: Scalar,
    /// `H1(ID)^(y b r)`
    pub sk_du: B::G1,
    /// `H1(ID)`
    pub pk_du_1: B::G1,
    /// `(PK_B')^r`
    pub pk_du_2: B::G1,
}

impl<B: Backend> UserKeys<B> {
    pub fn public_key(&self) -> UserPublicKey<B> {
        UserPublicKey {
            pk1: self.pk_du_1.clone(),
            pk2: self.pk_du_2.clone(),
        }
    }
}

/// `(g^alpha, M e(PK_A', pk_DO)^alpha)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OriginalCiphertext<B: Backend> {
    pub c1: B::G1,
    pub c2: B::Gt,
}

/// Firewall output: `(g^(alpha+beta), M e(PK_A', pk_DO)^(alpha+beta), pk_DO^beta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanitizedCiphertext<B: Backend> {
    pub c1p: B::G1,
    pub c2p: B::Gt,
    pub c3p: B::G1,
}

/// Re-encryption key as produced by the data owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReKey<B: Backend> {
    /// `H2(X) / sk_DO'`
    pub rk1: B::G1,
    /// `g^lambda`
    pub rk2: B::G1,
    /// `X e(pk_DU1, pk_DU2)^lambda`
    pub rk3: B::Gt,
}

/// Re-encryption key after the firewall folded in the ciphertext's beta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanitizedReKey<B: Backend> {
    pub rk1p: B::G1,
    pub rk2p: B::G1,
    pub rk3p: B::Gt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReCiphertext<B: Backend> {
    pub c1: B::G1,
    pub c2: B::Gt,
    pub c3: B::G1,
    pub c4: B::Gt,
}

/// The group-element message plus, optionally, bulk PHR bytes sealed under a
/// key derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainMessage<B: Backend> {
    pub group_payload: B::Gt,
    pub dem_payload: Option<Vec<u8>>,
}

impl<B: Backend> PlainMessage<B> {
    pub fn new(group_payload: B::Gt) -> Self {
        PlainMessage {
            group_payload,
            dem_payload: None,
        }
    }

    /// Samples a fresh `M` and seals `phr` under it.
    pub fn wrap_phr<R: RngCore + CryptoRng + ?Sized>(backend: &B, phr: &[u8], rng: &mut R) -> Self {
        let m = backend.random_gt(rng);
        let dem = hybrid_wrap(backend, phr, &m, rng);
        PlainMessage {
            group_payload: m,
            dem_payload: Some(dem),
        }
    }

    /// Recovers the PHR bytes; fails unless `group_payload` is exact.
    pub fn unwrap_phr(&self, backend: &B) -> Result<Vec<u8>> {
        let dem = self.dem_payload.as_deref().unwrap_or_default();
        Ok(hybrid_unwrap(backend, dem, &self.group_payload)?)
    }
}

fn nonzero(s: &Scalar, name: &'static str) -> Result<()> {
    if s.is_zero() {
        Err(SchemeError::ZeroScalar(name))
    } else {
        Ok(())
    }
}

fn require_chain<B: Backend>(params: &ChainParams<B>, expected: ChainTag) -> Result<()> {
    if params.chain != expected {
        return Err(SchemeError::WrongChain {
            expected,
            actual: params.chain,
        });
    }
    Ok(())
}

/// The scheme's algorithms over one backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme<B: Backend> {
    backend: B,
}

impl<B: Backend> Scheme<B> {
    pub fn new(backend: B) -> Self {
        Scheme { backend }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    /// Hospital step: `PK = g^s`.
    pub fn hospital_public_key(&self, hospital_master: &Scalar) -> Result<B::G1> {
        if hospital_master.is_zero() {
            return Err(SchemeError::InvalidMasterKey("hospital master"));
        }
        let b = &self.backend;
        Ok(b.g1_exp(&b.generator(), hospital_master))
    }

    /// Firewall step: `PK' = PK^a`.
    pub fn crf_system_key(&self, hospital_public_key: &B::G1, crf_master: &Scalar) -> Result<B::G1> {
        if crf_master.is_zero() {
            return Err(SchemeError::InvalidMasterKey("firewall master"));
        }
        Ok(self.backend.g1_exp(hospital_public_key, crf_master))
    }

    pub fn setup_chain(&self, chain: ChainTag, secrets: &MasterSecrets) -> Result<ChainParams<B>> {
        let pk = self.hospital_public_key(&secrets.hospital_master)?;
        let system_public_key = self.crf_system_key(&pk, &secrets.crf_master)?;
        Ok(ChainParams {
            chain,
            system_public_key,
        })
    }

    /// Samples nonzero master scalars and sets up a chain.
    pub fn setup_chain_random<R: RngCore + CryptoRng + ?Sized>(
        &self,
        chain: ChainTag,
        rng: &mut R,
    ) -> (ChainParams<B>, MasterSecrets) {
        let secrets = MasterSecrets {
            hospital_master: self.backend.random_nonzero_scalar(rng),
            crf_master: self.backend.random_nonzero_scalar(rng),
        };
        let params = self
            .setup_chain(chain, &secrets)
            .expect("sampled scalars are nonzero");
        (params, secrets)
    }

    /// Returns `(pk_DO, sk_DO) = (H1(ID), H1(ID)^s)`.
    pub fn keygen_do(&self, identity: &[u8], s: &Scalar) -> Result<(B::G1, B::G1)> {
        if identity.is_empty() {
            return Err(SchemeError::InvalidIdentity);
        }
        nonzero(s, "s")?;
        let b = &self.backend;
        let pk = b.hash_to_g1(identity);
        let sk = b.g1_exp(&pk, s);
        Ok((pk, sk))
    }

    /// `sk_DO' = sk_DO^a`.
    pub fn crf_keygen_do(&self, sk_do_raw: &B::G1, a: &Scalar) -> Result<B::G1> {
        if a.is_zero() {
            return Err(SchemeError::InvalidMasterKey("firewall master"));
        }
        Ok(self.backend.g1_exp(sk_do_raw, a))
    }

    pub fn owner_keys(&self, identity: &[u8], secrets: &MasterSecrets) -> Result<OwnerKeys<B>> {
        let (pk_do, sk_do_raw) = self.keygen_do(identity, &secrets.hospital_master)?;
        let sk_do_sanitized = self.crf_keygen_do(&sk_do_raw, &secrets.crf_master)?;
        Ok(OwnerKeys {
            identity: identity.to_vec(),
            pk_do,
            sk_do_raw,
            sk_do_sanitized,
        })
    }

    /// Hospital B: `D = H1(ID)^y`.
    pub fn partial_keygen_du(&self, identity: &[u8], y: &Scalar) -> Result<B::G1> {
        if identity.is_empty() {
            return Err(SchemeError::InvalidIdentity);
        }
        nonzero(y, "y")?;
        let b = &self.backend;
        Ok(b.g1_exp(&b.hash_to_g1(identity), y))
    }

    /// Firewall B: `D' = D^b`.
    pub fn crf_partial_key(&self, partial: &B::G1, crf_master: &Scalar) -> Result<B::G1> {
        if crf_master.is_zero() {
            return Err(SchemeError::InvalidMasterKey("firewall master"));
        }
        Ok(self.backend.g1_exp(partial, crf_master))
    }

    /// Data-user step: `sk = D'^r`, `pk = (H1(ID), PK_B'^r)`.
    pub fn complete_user_keys(
        &self,
        identity: &[u8],
        partial_raw: B::G1,
        partial_sanitized: B::G1,
        r: &Scalar,
        chain_b: &ChainParams<B>,
    ) -> Result<UserKeys<B>> {
        nonzero(r, "r")?;
        require_chain(chain_b, ChainTag::B)?;
        let b = &self.backend;
        let sk_du = b.g1_exp(&partial_sanitized, r);
        let pk_du_1 = b.hash_to_g1(identity);
        let pk_du_2 = b.g1_exp(&chain_b.system_public_key, r);
        Ok(UserKeys {
            identity: identity.to_vec(),
            partial_raw,
            partial_sanitized,
            user_secret: r.clone(),
            sk_du,
            pk_du_1,
            pk_du_2,
        })
    }

    pub fn keygen_du(
        &self,
        identity: &[u8],
        y: &Scalar,
        crf_b: &Scalar,
        r: &Scalar,
        chain_b: &ChainParams<B>,
    ) -> Result<UserKeys<B>> {
        nonzero(r, "r")?;
        let partial = self.partial_keygen_du(identity, y)?;
        let sanitized = self.crf_partial_key(&partial, crf_b)?;
        self.complete_user_keys(identity, partial, sanitized, r, chain_b)
    }

    pub fn keygen_du_random<R: RngCore + CryptoRng + ?Sized>(
        &self,
        identity: &[u8],
        secrets_b: &MasterSecrets,
        chain_b: &ChainParams<B>,
        rng: &mut R,
    ) -> Result<UserKeys<B>> {
        let r = self.backend.random_nonzero_scalar(rng);
        self.keygen_du(
            identity,
            &secrets_b.hospital_master,
            &secrets_b.crf_master,
            &r,
            chain_b,
        )
    }

    /// `e(g, sk_DO') = e(PK_A', pk_DO)`
    pub fn owner_keys_consistent(&self, keys: &OwnerKeys<B>, chain_a: &ChainParams<B>) -> bool {
        let b = &self.backend;
        b.pair(&b.generator(), &keys.sk_do_sanitized) == b.pair(&chain_a.system_public_key, &keys.pk_do)
    }

    /// `e(pk_DU1, pk_DU2) = e(g, sk_DU)`
    pub fn user_keys_consistent(&self, keys: &UserKeys<B>) -> bool {
        let b = &self.backend;
        b.pair(&keys.pk_du_1, &keys.pk_du_2) == b.pair(&b.generator(), &keys.sk_du)
    }

    /// `C = (g^alpha, M e(PK_A', pk_DO)^alpha)`.
    pub fn enc(
        &self,
        m: &B::Gt,
        params: &ChainParams<B>,
        pk_do: &B::G1,
        alpha: &Scalar,
    ) -> Result<OriginalCiphertext<B>> {
        nonzero(alpha, "alpha")?;
        require_chain(params, ChainTag::A)?;
        let b = &self.backend;
        let c1 = b.g1_exp(&b.generator(), alpha);
        let mask = b.gt_exp(&b.pair(&params.system_public_key, pk_do), alpha);
        Ok(OriginalCiphertext {
            c1,
            c2: b.gt_mul(m, &mask),
        })
    }

    pub fn enc_random<R: RngCore + CryptoRng + ?Sized>(
        &self,
        m: &B::Gt,
        params: &ChainParams<B>,
        pk_do: &B::G1,
        rng: &mut R,
    ) -> Result<OriginalCiphertext<B>> {
        let alpha = self.backend.random_nonzero_scalar(rng);
        self.enc(m, params, pk_do, &alpha)
    }

    /// Firewall A re-randomises a ciphertext with a fresh `beta`.
    pub fn crf_enc(
        &self,
        ct: &OriginalCiphertext<B>,
        pk_do: &B::G1,
        params: &ChainParams<B>,
        beta: &Scalar,
    ) -> Result<SanitizedCiphertext<B>> {
        nonzero(beta, "beta")?;
        require_chain(params, ChainTag::A)?;
        let b = &self.backend;
        let c1p = b.g1_mul(&ct.c1, &b.g1_exp(&b.generator(), beta));
        let mask = b.gt_exp(&b.pair(&params.system_public_key, pk_do), beta);
        let c2p = b.gt_mul(&ct.c2, &mask);
        let c3p = b.g1_exp(pk_do, beta);
        Ok(SanitizedCiphertext { c1p, c2p, c3p })
    }

    /// Owner-side decryption of a chain-A ciphertext: `c2 / e(c1, sk_DO')`.
    /// Also opens sanitized ciphertexts via their `(c1', c2')` part.
    pub fn dec_owner(&self, c1: &B::G1, c2: &B::Gt, sk_do_sanitized: &B::G1) -> B::Gt {
        let b = &self.backend;
        b.gt_div(c2, &b.pair(c1, sk_do_sanitized))
    }

    fn check_user_public_key(&self, pk: &UserPublicKey<B>) -> Result<()> {
        let id = self.backend.g1_identity();
        if pk.pk1 == id {
            return Err(SchemeError::InvalidPublicKey("pk_DU1 is the identity"));
        }
        if pk.pk2 == id {
            return Err(SchemeError::InvalidPublicKey("pk_DU2 is the identity (r = 0)"));
        }
        Ok(())
    }

    /// `RK = (H2(X) / sk_DO', g^lambda, X e(pk_DU1, pk_DU2)^lambda)`.
    pub fn rekeygen(
        &self,
        sk_do_sanitized: &B::G1,
        pk_du: &UserPublicKey<B>,
        lambda: &Scalar,
        x: &B::Gt,
    ) -> Result<ReKey<B>> {
        nonzero(lambda, "lambda")?;
        self.check_user_public_key(pk_du)?;
        let b = &self.backend;
        let rk1 = b.g1_div(&b.hash_gt_to_g1(x), sk_do_sanitized);
        let rk2 = b.g1_exp(&b.generator(), lambda);
        let rk3 = b.gt_mul(x, &b.gt_exp(&b.pair(&pk_du.pk1, &pk_du.pk2), lambda));
        Ok(ReKey { rk1, rk2, rk3 })
    }

    /// Samples `lambda` and `X`; returns the key and `X` for test oracles.
    pub fn rekeygen_random<R: RngCore + CryptoRng + ?Sized>(
        &self,
        sk_do_sanitized: &B::G1,
        pk_du: &UserPublicKey<B>,
        rng: &mut R,
    ) -> Result<ReKey<B>> {
        let lambda = self.backend.random_nonzero_scalar(rng);
        let x = self.backend.random_gt(rng);
        self.rekeygen(sk_do_sanitized, pk_du, &lambda, &x)
    }

    /// Firewall A folds the ciphertext's `beta` into the key. `beta` must be
    /// the one used by [`Scheme::crf_enc`] for the ciphertext being shared.
    pub fn crf_rekeygen(
        &self,
        rk: &ReKey<B>,
        pk_do: &B::G1,
        pk_du: &UserPublicKey<B>,
        beta: &Scalar,
    ) -> Result<SanitizedReKey<B>> {
        nonzero(beta, "beta")?;
        let b = &self.backend;
        let rk1p = b.g1_div(&rk.rk1, &b.g1_exp(pk_do, beta));
        let rk2p = b.g1_mul(&rk.rk2, &b.g1_exp(&b.generator(), beta));
        let rk3p = b.gt_mul(&rk.rk3, &b.gt_exp(&b.pair(&pk_du.pk1, &pk_du.pk2), beta));
        Ok(SanitizedReKey { rk1p, rk2p, rk3p })
    }

    /// Relay: `(c1', c2' e(c1', rk1' c3'), rk2', rk3')`.
    pub fn reenc(&self, ct: &SanitizedCiphertext<B>, rk: &SanitizedReKey<B>) -> ReCiphertext<B> {
        let b = &self.backend;
        let c2 = b.gt_mul(&ct.c2p, &b.pair(&ct.c1p, &b.g1_mul(&rk.rk1p, &ct.c3p)));
        ReCiphertext {
            c1: ct.c1p.clone(),
            c2,
            c3: rk.rk2p.clone(),
            c4: rk.rk3p.clone(),
        }
    }

    /// `X = C4 / e(C3, sk_DU)`.
    pub fn recover_x(&self, ct: &ReCiphertext<B>, sk_du: &B::G1) -> B::Gt {
        let b = &self.backend;
        b.gt_div(&ct.c4, &b.pair(&ct.c3, sk_du))
    }

    /// `M = C2 / e(C1, H2(X))`.
    pub fn dec(&self, ct: &ReCiphertext<B>, sk_du: &B::G1) -> B::Gt {
        let b = &self.backend;
        let x = self.recover_x(ct, sk_du);
        b.gt_div(&ct.c2, &b.pair(&ct.c1, &b.hash_gt_to_g1(&x)))
    }

    /// Decrypts and, when a DEM payload is attached, authenticates and opens it.
    pub fn dec_message(
        &self,
        ct: &ReCiphertext<B>,
        dem: Option<&[u8]>,
        sk_du: &B::G1,
    ) -> Result<PlainMessage<B>> {
        let m = self.dec(ct, sk_du);
        let msg = PlainMessage {
            group_payload: m,
            dem_payload: dem.map(<[u8]>::to_vec),
        };
        if dem.is_some() {
            msg.unwrap_phr(&self.backend)?;
        }
        Ok(msg)
    }
}
