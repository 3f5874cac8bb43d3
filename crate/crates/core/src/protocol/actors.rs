//! Per-share state machines for the four roles.
//!
//! Every handler first checks that the envelope is addressed to it and that
//! its kind is the one the current state expects (no state change and no
//! nonce consumed otherwise), then applies the freshness policy.

use std::sync::Arc;

use rand::{CryptoRng, RngCore};

use super::envelope::{pack_fields, unpack_fields, ActorId, Envelope, MessageKind, NONCE_LEN};
use super::identity::{self, IdentityProof};
use super::world::{owner_actor, user_actor, World, HOSPITAL_A, RELAY};
use super::{parse_id, ProtocolError};
use crate::group::{Backend, GroupOps};
use crate::ledger::{Address, ContractResult, Outcome, Refusal};
use crate::scheme::codec::{Reader, WireObject};
use crate::scheme::{
    hybrid_unwrap, hybrid_wrap, ChainTag, OriginalCiphertext, OwnerKeys, PlainMessage, ReCiphertext,
    SanitizedCiphertext, SanitizedReKey, UserKeys, UserPublicKey,
};

#[derive(Debug)]
pub enum Step<B: Backend> {
    Send(Envelope),
    /// The data user holds `Data_2` and stopped before M7.
    Paused(Address),
    Refused(Refusal),
    Finished { message: PlainMessage<B>, phr: Vec<u8> },
}

fn tag(kind: MessageKind) -> Vec<u8> {
    kind.role_tag().as_bytes().to_vec()
}

fn expect(
    world: &World<impl Backend>,
    me: ActorId,
    state: &'static str,
    want: MessageKind,
    env: &Envelope,
) -> Result<(), ProtocolError> {
    if env.recipient != me {
        return Err(ProtocolError::WrongRecipient);
    }
    if env.kind != want {
        return Err(ProtocolError::WrongState { state, got: env.kind });
    }
    world.admit(me, env)
}

fn read_g1<B: Backend>(b: &B, bytes: &[u8]) -> Result<B::G1, ProtocolError> {
    let mut r = Reader::new(bytes);
    let v = r.g1(b)?;
    r.finish()?;
    Ok(v)
}

/// M1 context the identity proof is bound to.
fn proof_context<B: Backend>(b: &B, t: u64, nonce: &[u8; NONCE_LEN], data_1: &Address, pk_do: &B::G1) -> Vec<u8> {
    let mut ctx = t.to_be_bytes().to_vec();
    ctx.extend_from_slice(nonce);
    ctx.extend_from_slice(&data_1.0);
    ctx.extend(b.encode_g1(pk_do));
    ctx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UserState {
    Start,
    AwaitM6,
    ReadyToFetch,
    AwaitM8,
    Done,
}

pub struct UserSession<B: Backend> {
    pub id: ActorId,
    keys: Arc<UserKeys<B>>,
    owner: ActorId,
    pk_do: B::G1,
    data_1: Option<Address>,
    data_2: Option<Address>,
    pause_after_m6: bool,
    pub state: UserState,
}

impl<B: Backend> UserSession<B> {
    pub fn new(keys: Arc<UserKeys<B>>, owner: &OwnerPublic<B>, data_1: Address) -> Self {
        UserSession {
            id: ActorId::named(&user_actor(&String::from_utf8_lossy(&keys.identity))),
            keys,
            owner: owner.actor,
            pk_do: owner.pk_do.clone(),
            data_1: Some(data_1),
            data_2: None,
            pause_after_m6: false,
            state: UserState::Start,
        }
    }

    /// Picks up a share whose M6 arrived earlier.
    pub fn resume(keys: Arc<UserKeys<B>>, owner: &OwnerPublic<B>, data_2: Address) -> Self {
        UserSession {
            data_1: None,
            data_2: Some(data_2),
            state: UserState::ReadyToFetch,
            ..Self::new(keys, owner, Address::digest(b""))
        }
    }

    pub fn pause_after_m6(mut self, pause: bool) -> Self {
        self.pause_after_m6 = pause;
        self
    }

    pub fn data_2(&self) -> Option<Address> {
        self.data_2
    }

    /// Builds M1: the request sealed to the owner's identity key.
    pub fn start<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        if self.state != UserState::Start {
            return Err(ProtocolError::WrongState {
                state: "data user already started",
                got: MessageKind::M1,
            });
        }
        let b = world.backend();
        let data_1 = self.data_1.expect("fresh sessions carry Data_1");
        let mut env = Envelope::build(MessageKind::M1, self.id, self.owner, world.now_ms(), Vec::new(), rng);
        let pk = self.keys.public_key();
        let ctx = proof_context(b, env.timestamp_ms, &env.nonce, &data_1, &self.pk_do);
        let proof = identity::prove(b, &self.keys.sk_du, &pk, &ctx, rng);
        let inner = pack_fields(&[
            tag(MessageKind::M1),
            b.encode_g1(&self.pk_do),
            pk.body_bytes(b),
            self.keys.identity.clone(),
            data_1.0.to_vec(),
            proof.encode(b),
        ]);
        let session_key = b.random_gt(rng);
        let sealed_key = world.scheme.enc_random(&session_key, &world.chain_a, &self.pk_do, rng)?;
        env.fields = vec![sealed_key.to_wire(b), hybrid_wrap(b, &inner, &session_key, rng)];
        self.state = UserState::AwaitM6;
        Ok(env)
    }

    /// Builds M7 for a paused or resumed session.
    pub fn fetch_request<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        if self.state != UserState::ReadyToFetch {
            return Err(ProtocolError::WrongState {
                state: "data user has no Data_2 yet",
                got: MessageKind::M7,
            });
        }
        let b = world.backend();
        let data_2 = self.data_2.expect("ready sessions carry Data_2");
        let fields = vec![
            tag(MessageKind::M7),
            b.encode_g1(&self.pk_do),
            self.keys.public_key().body_bytes(b),
            data_2.0.to_vec(),
        ];
        self.state = UserState::AwaitM8;
        Ok(Envelope::build(MessageKind::M7, self.id, ActorId::named(RELAY), world.now_ms(), fields, rng))
    }

    pub fn handle<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        env: Envelope,
        rng: &mut R,
    ) -> Result<Step<B>, ProtocolError> {
        match self.state {
            UserState::AwaitM6 => {
                expect(world, self.id, "data user awaiting M6", MessageKind::M6, &env)?;
                self.data_2 = Some(parse_id(env.field(1))?);
                self.state = UserState::ReadyToFetch;
                if self.pause_after_m6 {
                    return Ok(Step::Paused(self.data_2.unwrap()));
                }
                Ok(Step::Send(self.fetch_request(world, rng)?))
            }
            UserState::AwaitM8 => {
                expect(world, self.id, "data user awaiting M8", MessageKind::M8, &env)?;
                let b = world.backend();
                let rc = ReCiphertext::from_wire(b, env.field(1))?;
                let blob = env.field(2);
                let dem = (!blob.is_empty()).then_some(blob);
                let message = world.scheme.dec_message(&rc, dem, &self.keys.sk_du)?;
                let phr = match dem {
                    Some(_) => message.unwrap_phr(b)?,
                    None => Vec::new(),
                };
                self.state = UserState::Done;
                Ok(Step::Finished { message, phr })
            }
            state => Err(ProtocolError::WrongState {
                state: user_state_name(state),
                got: env.kind,
            }),
        }
    }
}

fn user_state_name(s: UserState) -> &'static str {
    match s {
        UserState::Start => "data user not started",
        UserState::AwaitM6 => "data user awaiting M6",
        UserState::ReadyToFetch => "data user ready to fetch",
        UserState::AwaitM8 => "data user awaiting M8",
        UserState::Done => "data user done",
    }
}

/// What a data user needs to know about an owner.
#[derive(Clone, Debug)]
pub struct OwnerPublic<B: Backend> {
    pub actor: ActorId,
    pub pk_do: B::G1,
}

impl<B: Backend> OwnerPublic<B> {
    pub fn of(keys: &OwnerKeys<B>) -> Self {
        OwnerPublic {
            actor: ActorId::named(&owner_actor(&String::from_utf8_lossy(&keys.identity))),
            pk_do: keys.pk_do.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OwnerState {
    AwaitM1,
    AwaitM5,
    Done,
}

pub struct OwnerSession<B: Backend> {
    pub id: ActorId,
    keys: Arc<OwnerKeys<B>>,
    user: Option<ActorId>,
    pub state: OwnerState,
}

impl<B: Backend> OwnerSession<B> {
    pub fn new(keys: Arc<OwnerKeys<B>>) -> Self {
        OwnerSession {
            id: OwnerPublic::of(&keys).actor,
            keys,
            user: None,
            state: OwnerState::AwaitM1,
        }
    }

    pub fn handle<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        env: Envelope,
        rng: &mut R,
    ) -> Result<Step<B>, ProtocolError> {
        let b = world.backend();
        match self.state {
            OwnerState::AwaitM1 => {
                expect(world, self.id, "data owner awaiting M1", MessageKind::M1, &env)?;
                let sealed_key = OriginalCiphertext::from_wire(b, env.field(0))?;
                let session_key = world
                    .scheme
                    .dec_owner(&sealed_key.c1, &sealed_key.c2, &self.keys.sk_do_sanitized);
                let inner = hybrid_unwrap(b, env.field(1), &session_key)
                    .map_err(|_| ProtocolError::Malformed("M1 is not sealed to this owner".into()))?;
                let fields = unpack_fields(&inner)?;
                let opened = Envelope { fields, ..env.clone() };
                opened.check_fields(MessageKind::M1.schema())?;
                let pk_do = read_g1(b, opened.field(1))?;
                if pk_do != self.keys.pk_do {
                    return Err(ProtocolError::Malformed("M1 names a different owner key".into()));
                }
                let pk_du = UserPublicKey::read_body(b, &mut Reader::new(opened.field(2)))?;
                let du_identity = opened.field(3).to_vec();
                let data_1 = parse_id(opened.field(4))?;
                let proof = IdentityProof::decode(b, opened.field(5))?;
                let ctx = proof_context(b, env.timestamp_ms, &env.nonce, &data_1, &pk_do);
                if !identity::verify(b, &du_identity, &pk_du, &proof, &ctx) {
                    return Err(ProtocolError::IdentityVerification);
                }
                let rk = world.scheme.rekeygen_random(&self.keys.sk_do_sanitized, &pk_du, rng)?;
                self.user = Some(env.sender);
                self.state = OwnerState::AwaitM5;
                let fields = vec![
                    tag(MessageKind::M2),
                    b.encode_g1(&pk_do),
                    pk_du.body_bytes(b),
                    du_identity,
                    data_1.0.to_vec(),
                    rk.to_wire(b),
                ];
                Ok(Step::Send(Envelope::build(
                    MessageKind::M2,
                    self.id,
                    ActorId::named(HOSPITAL_A),
                    world.now_ms(),
                    fields,
                    rng,
                )))
            }
            OwnerState::AwaitM5 => {
                expect(world, self.id, "data owner awaiting M5", MessageKind::M5, &env)?;
                let data_2 = parse_id(env.field(1))?;
                self.state = OwnerState::Done;
                let fields = vec![tag(MessageKind::M6), data_2.0.to_vec()];
                Ok(Step::Send(Envelope::build(
                    MessageKind::M6,
                    self.id,
                    self.user.expect("set on M1"),
                    world.now_ms(),
                    fields,
                    rng,
                )))
            }
            OwnerState::Done => Err(ProtocolError::WrongState {
                state: "data owner done",
                got: env.kind,
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HospitalState {
    AwaitM2,
    AwaitM4,
    Done,
}

pub struct HospitalSession {
    pub id: ActorId,
    owner: Option<ActorId>,
    pub state: HospitalState,
}

impl Default for HospitalSession {
    fn default() -> Self {
        Self::new()
    }
}

impl HospitalSession {
    pub fn new() -> Self {
        HospitalSession {
            id: ActorId::named(HOSPITAL_A),
            owner: None,
            state: HospitalState::AwaitM2,
        }
    }

    pub fn handle<B: Backend, R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        env: Envelope,
        rng: &mut R,
    ) -> Result<Step<B>, ProtocolError> {
        let b = world.backend();
        match self.state {
            HospitalState::AwaitM2 => {
                expect(world, self.id, "hospital awaiting M2", MessageKind::M2, &env)?;
                let user = String::from_utf8_lossy(env.field(3)).into_owned();
                let data_1 = parse_id(env.field(4))?;
                let granted = world.node_a.lock().unwrap().contract_fetch(
                    b,
                    &world.store,
                    &data_1,
                    &user,
                    world.now_ms(),
                )?;
                let (ct, blob) = match granted {
                    ContractResult::Granted { ciphertext, attachment } => (ciphertext, attachment),
                    ContractResult::Refused(r) => {
                        self.state = HospitalState::Done;
                        return Ok(Step::Refused(r));
                    }
                };
                let srk = SanitizedReKey::from_wire(b, env.field(5))
                    .map_err(|_| ProtocolError::Malformed("re-encryption key was not sanitized".into()))?;
                self.owner = Some(env.sender);
                self.state = HospitalState::AwaitM4;
                let fields = vec![
                    tag(MessageKind::M3),
                    data_1.0.to_vec(),
                    ct.to_wire(b),
                    srk.to_wire(b),
                    blob,
                ];
                Ok(Step::Send(Envelope::build(
                    MessageKind::M3,
                    self.id,
                    ActorId::named(RELAY),
                    world.now_ms(),
                    fields,
                    rng,
                )))
            }
            HospitalState::AwaitM4 => {
                expect(world, self.id, "hospital awaiting M4", MessageKind::M4, &env)?;
                let data_2 = parse_id(env.field(1))?;
                self.state = HospitalState::Done;
                let fields = vec![tag(MessageKind::M5), data_2.0.to_vec()];
                Ok(Step::Send(Envelope::build(
                    MessageKind::M5,
                    self.id,
                    self.owner.expect("set on M2"),
                    world.now_ms(),
                    fields,
                    rng,
                )))
            }
            HospitalState::Done => Err(ProtocolError::WrongState {
                state: "hospital done",
                got: env.kind,
            }),
        }
    }
}

/// The relay answers M3 and M7 independently.
pub struct RelaySession {
    pub id: ActorId,
}

impl Default for RelaySession {
    fn default() -> Self {
        Self::new()
    }
}

impl RelaySession {
    pub fn new() -> Self {
        RelaySession {
            id: ActorId::named(RELAY),
        }
    }

    pub fn handle<B: Backend, R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        env: Envelope,
        rng: &mut R,
    ) -> Result<Step<B>, ProtocolError> {
        let b = world.backend();
        if env.recipient != self.id {
            return Err(ProtocolError::WrongRecipient);
        }
        match env.kind {
            MessageKind::M3 => {
                world.admit(self.id, &env)?;
                let ct = SanitizedCiphertext::from_wire(b, env.field(2))?;
                let rk = SanitizedReKey::from_wire(b, env.field(3))?;
                let data_2 = world.relay.lock().unwrap().relay_reencrypt(
                    &world.scheme,
                    ChainTag::A,
                    ChainTag::B,
                    &ct,
                    &rk,
                    env.field(4),
                    HOSPITAL_A,
                    world.now_ms(),
                )?;
                let fields = vec![tag(MessageKind::M4), data_2.0.to_vec()];
                Ok(Step::Send(Envelope::build(
                    MessageKind::M4,
                    self.id,
                    env.sender,
                    world.now_ms(),
                    fields,
                    rng,
                )))
            }
            MessageKind::M7 => {
                world.admit(self.id, &env)?;
                let data_2 = parse_id(env.field(3))?;
                let party = hex::encode(env.sender.0);
                let mut relay = world.relay.lock().unwrap();
                let fetched = relay.relay_fetch_with_attachment(b, &data_2);
                let outcome = if fetched.is_ok() { Outcome::Ok } else { Outcome::Rejected };
                relay.audit_note("fetch", &party, world.now_ms(), outcome, data_2.to_hex());
                drop(relay);
                let (rc, blob) = fetched?;
                let fields = vec![tag(MessageKind::M8), rc.to_wire(b), blob];
                Ok(Step::Send(Envelope::build(
                    MessageKind::M8,
                    self.id,
                    env.sender,
                    world.now_ms(),
                    fields,
                    rng,
                )))
            }
            other => Err(ProtocolError::WrongState {
                state: "relay accepts only M3 and M7",
                got: other,
            }),
        }
    }
}
