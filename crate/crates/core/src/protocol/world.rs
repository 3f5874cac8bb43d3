//! Everything the actors share: chain parameters, firewalls, ledgers, the
//! content store and per-actor nonce caches.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use rand::{CryptoRng, RngCore};

use super::envelope::{ActorId, Envelope, MessageKind};
use super::freshness::{Clock, FreshnessPolicy, NonceCache, SystemClock};
use super::{parse_id, ProtocolError};
use crate::crf::{CrfError, CrfGuardA, CrfGuardB};
use crate::group::{Backend, GroupOps, Scalar};
use crate::ledger::{Address, ChainNodeState, ContentStore, RelayState, SimConfig};
use crate::scheme::codec::WireObject;
use crate::scheme::{
    ChainParams, ChainTag, MasterSecrets, OwnerKeys, PlainMessage, ReKey, Scheme, UserKeys,
    UserPublicKey,
};

pub const HOSPITAL_A: &str = "hospital-a";
pub const RELAY: &str = "relay";

pub fn owner_actor(name: &str) -> String {
    format!("do:{name}")
}

pub fn user_actor(name: &str) -> String {
    format!("du:{name}")
}

/// Raw parts a [`World`] is assembled from.
pub struct WorldState<B: Backend> {
    pub backend: B,
    pub secrets_a: MasterSecrets,
    pub secrets_b: MasterSecrets,
    pub guard_a: CrfGuardA<B>,
    pub node_a: ChainNodeState,
    pub node_b: ChainNodeState,
    pub relay: RelayState,
    pub store: ContentStore,
}

pub struct World<B: Backend> {
    pub scheme: Scheme<B>,
    pub chain_a: ChainParams<B>,
    pub chain_b: ChainParams<B>,
    hospital_a_master: Scalar,
    hospital_b_master: Scalar,
    pub guard_a: CrfGuardA<B>,
    pub guard_b: CrfGuardB<B>,
    pub node_a: Mutex<ChainNodeState>,
    pub node_b: Mutex<ChainNodeState>,
    pub relay: Mutex<RelayState>,
    pub store: ContentStore,
    pub policy: FreshnessPolicy,
    clock: Arc<dyn Clock>,
    owners: RwLock<HashMap<String, Arc<OwnerKeys<B>>>>,
    users: RwLock<HashMap<String, Arc<UserKeys<B>>>>,
    nonces: Mutex<HashMap<ActorId, NonceCache>>,
}

impl<B: Backend> std::fmt::Debug for World<B> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("World")
            .field("backend", &self.scheme.backend().kind())
            .field("owners", &self.owners.read().unwrap().len())
            .field("users", &self.users.read().unwrap().len())
            .finish_non_exhaustive()
    }
}

pub fn params_digest<B: Backend>(b: &B, p: &ChainParams<B>) -> Address {
    Address::digest(&p.to_wire(b))
}

impl<B: Backend> World<B> {
    /// Fresh masters for both hospitals and firewalls, chains registered
    /// with the relay.
    pub fn provision<R: RngCore + CryptoRng + ?Sized>(
        backend: B,
        config: &SimConfig,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        let secrets_a = MasterSecrets {
            hospital_master: backend.random_nonzero_scalar(rng),
            crf_master: backend.random_nonzero_scalar(rng),
        };
        let secrets_b = MasterSecrets {
            hospital_master: backend.random_nonzero_scalar(rng),
            crf_master: backend.random_nonzero_scalar(rng),
        };
        let guard_a = CrfGuardA::new(backend.clone(), secrets_a.crf_master.clone())?;
        let world = Self::from_state(WorldState {
            backend,
            secrets_a,
            secrets_b,
            guard_a,
            node_a: ChainNodeState::new(ChainTag::A, "gateway-a", config.max_access_count),
            node_b: ChainNodeState::new(ChainTag::B, "gateway-b", config.max_access_count),
            relay: RelayState::new(),
            store: ContentStore::new(),
        })?;
        world.register_chains(0)?;
        Ok(world)
    }

    pub fn from_state(state: WorldState<B>) -> Result<Self, ProtocolError> {
        let scheme = Scheme::new(state.backend.clone());
        let pk_a = scheme.hospital_public_key(&state.secrets_a.hospital_master)?;
        let chain_a = ChainParams {
            chain: ChainTag::A,
            system_public_key: state.guard_a.sanitize_system_key(&pk_a)?,
        };
        let guard_b = CrfGuardB::new(state.backend.clone(), state.secrets_b.crf_master.clone())?;
        let pk_b = scheme.hospital_public_key(&state.secrets_b.hospital_master)?;
        let chain_b = ChainParams {
            chain: ChainTag::B,
            system_public_key: guard_b.sanitize_system_key(&pk_b)?,
        };
        Ok(World {
            scheme,
            chain_a,
            chain_b,
            hospital_a_master: state.secrets_a.hospital_master,
            hospital_b_master: state.secrets_b.hospital_master,
            guard_a: state.guard_a,
            guard_b,
            node_a: Mutex::new(state.node_a),
            node_b: Mutex::new(state.node_b),
            relay: Mutex::new(state.relay),
            store: state.store,
            policy: FreshnessPolicy::default(),
            clock: Arc::new(SystemClock),
            owners: RwLock::new(HashMap::new()),
            users: RwLock::new(HashMap::new()),
            nonces: Mutex::new(HashMap::new()),
        })
    }

    /// Registers both chains with the relay if they are not already.
    pub fn register_chains(&self, now_ms: u64) -> Result<(), ProtocolError> {
        let b = self.scheme.backend().clone();
        let mut relay = self.relay.lock().unwrap();
        for (params, node) in [(&self.chain_a, &self.node_a), (&self.chain_b, &self.node_b)] {
            let mut node = node.lock().unwrap();
            if !node.is_registered() {
                let receipt = relay.register_chain(params.chain, params_digest(&b, params), now_ms)?;
                node.accept_registration(receipt);
            }
        }
        Ok(())
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_policy(mut self, policy: FreshnessPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    pub fn backend(&self) -> &B {
        self.scheme.backend()
    }

    /// Hospital A issues `sk_DO`, the firewall turns it into `sk_DO'`.
    pub fn provision_owner(&self, name: &str) -> Result<Arc<OwnerKeys<B>>, ProtocolError> {
        let (pk_do, sk_do_raw) = self.scheme.keygen_do(name.as_bytes(), &self.hospital_a_master)?;
        let sk_do_sanitized = self.guard_a.sanitize_owner_key(&sk_do_raw)?;
        let keys = Arc::new(OwnerKeys {
            identity: name.as_bytes().to_vec(),
            pk_do,
            sk_do_raw,
            sk_do_sanitized,
        });
        self.owners.write().unwrap().insert(name.to_string(), keys.clone());
        Ok(keys)
    }

    /// Hospital B issues `D`, firewall B re-randomises it, the user
    /// finishes with a fresh `r`.
    pub fn provision_user<R: RngCore + CryptoRng + ?Sized>(
        &self,
        name: &str,
        rng: &mut R,
    ) -> Result<Arc<UserKeys<B>>, ProtocolError> {
        let partial = self.scheme.partial_keygen_du(name.as_bytes(), &self.hospital_b_master)?;
        let sanitized = self.guard_b.sanitize_partial_key(&partial)?;
        let r = self.backend().random_nonzero_scalar(rng);
        let keys = Arc::new(
            self.scheme
                .complete_user_keys(name.as_bytes(), partial, sanitized, &r, &self.chain_b)?,
        );
        self.users.write().unwrap().insert(name.to_string(), keys.clone());
        Ok(keys)
    }

    pub fn insert_owner(&self, keys: OwnerKeys<B>) -> Arc<OwnerKeys<B>> {
        let name = String::from_utf8_lossy(&keys.identity).into_owned();
        let keys = Arc::new(keys);
        self.owners.write().unwrap().insert(name, keys.clone());
        keys
    }

    pub fn insert_user(&self, keys: UserKeys<B>) -> Arc<UserKeys<B>> {
        let name = String::from_utf8_lossy(&keys.identity).into_owned();
        let keys = Arc::new(keys);
        self.users.write().unwrap().insert(name, keys.clone());
        keys
    }

    pub fn owner(&self, name: &str) -> Result<Arc<OwnerKeys<B>>, ProtocolError> {
        self.owners
            .read()
            .unwrap()
            .get(name)
            .cloned()
            .ok_or_else(|| ProtocolError::UnknownActor(owner_actor(name)))
    }

    pub fn user(&self, name: &str) -> Result<Arc<UserKeys<B>>, ProtocolError> {
        self.users
            .read()
            .unwrap()
            .get(name)
            .cloned()
            .ok_or_else(|| ProtocolError::UnknownActor(user_actor(name)))
    }

    /// Encrypts `phr` for `owner`, sanitizes it through firewall A and
    /// stores it on chain A. Returns `Data_1`.
    pub fn upload_phr<R: RngCore + CryptoRng + ?Sized>(
        &self,
        owner: &str,
        phr: &[u8],
        rng: &mut R,
    ) -> Result<Address, ProtocolError> {
        let keys = self.owner(owner)?;
        let msg = PlainMessage::wrap_phr(self.backend(), phr, rng);
        self.upload_message(&keys, &msg, rng)
    }

    pub fn upload_message<R: RngCore + CryptoRng + ?Sized>(
        &self,
        keys: &OwnerKeys<B>,
        msg: &PlainMessage<B>,
        rng: &mut R,
    ) -> Result<Address, ProtocolError> {
        let ct = self.scheme.enc_random(&msg.group_payload, &self.chain_a, &keys.pk_do, rng)?;
        let (sct, _) = self.guard_a.sanitize_ciphertext(&ct, &keys.pk_do, &self.chain_a, rng)?;
        let owner = String::from_utf8_lossy(&keys.identity);
        let (data_1, _) = self.node_a.lock().unwrap().store_ciphertext(
            self.backend(),
            &self.store,
            &sct,
            msg.dem_payload.as_deref(),
            &owner,
            self.now_ms(),
        )?;
        Ok(data_1)
    }

    /// Freshness check against `actor`'s nonce cache.
    pub(crate) fn admit(&self, actor: ActorId, env: &Envelope) -> Result<(), ProtocolError> {
        let now = self.now_ms();
        let mut caches = self.nonces.lock().unwrap();
        caches.entry(actor).or_default().admit(&self.policy, env, now)
    }

    /// Firewall A on the owner's outbound path: replaces a raw `RK` in M2
    /// with the sanitized key for the named ciphertext. Unknown ids pass
    /// through untouched and are refused downstream by the access contract.
    pub fn crf_in_transit(&self, mut env: Envelope) -> Result<Envelope, ProtocolError> {
        if env.kind != MessageKind::M2 {
            return Ok(env);
        }
        let b = self.backend();
        let pk_do = crate::scheme::codec::Reader::new(env.field(1)).g1(b)?;
        let pk_du = UserPublicKey::read_body(b, &mut crate::scheme::codec::Reader::new(env.field(2)))?;
        let data_1 = parse_id(env.field(4))?;
        let rk = ReKey::from_wire(b, env.field(5))?;
        match self.guard_a.sanitize_rekey(&rk, &data_1, &pk_do, &pk_du) {
            Ok(srk) => env.fields[5] = srk.to_wire(b),
            Err(CrfError::UnknownCiphertext(_)) => {}
            Err(e) => return Err(e.into()),
        }
        Ok(env)
    }
}
