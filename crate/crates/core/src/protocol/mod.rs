//! The eight-message cross-chain sharing flow.
//!
//! A data user asks the owner (M1), the owner issues a re-encryption key
//! that firewall A sanitizes in transit (M2), hospital A runs the access
//! contract and forwards the ciphertext to the relay (M3), the result id
//! travels back to the user (M4..M6), who fetches and decrypts it (M7, M8).

pub mod actors;
pub mod envelope;
pub mod freshness;
pub mod identity;
pub mod transport;
pub mod world;

use std::time::{Duration, Instant};

use rand::{CryptoRng, RngCore};

use crate::crf::{CiphertextId, CrfError};
use crate::group::Backend;
use crate::ledger::{Address, LedgerError, Outcome, Refusal};
use crate::scheme::codec::CodecError;
use crate::scheme::{PlainMessage, SchemeError};

pub use actors::{
    HospitalSession, HospitalState, OwnerPublic, OwnerSession, OwnerState, RelaySession, Step, UserSession,
    UserState,
};
pub use envelope::{ActorId, Envelope, FieldKind, MessageKind, Role};
pub use freshness::{Clock, FreshnessPolicy, ManualClock, NonceCache, SystemClock};
pub use identity::IdentityProof;
pub use transport::{RecordingTransport, SimTransport, Transport, TransportError};
pub use world::{World, WorldState};

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("stale message: clock skew {skew_ms} ms")]
    Stale { skew_ms: u64 },
    #[error("replayed nonce")]
    Replayed,
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("{got} not accepted while {state}")]
    WrongState { state: &'static str, got: MessageKind },
    #[error("message addressed to another actor")]
    WrongRecipient,
    #[error("data user failed the identity check")]
    IdentityVerification,
    #[error("unknown actor {0}")]
    UnknownActor(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Crf(#[from] CrfError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

pub(crate) fn parse_id(bytes: &[u8]) -> Result<Address, ProtocolError> {
    CiphertextId::from_slice(bytes).ok_or_else(|| ProtocolError::Malformed("bad ciphertext id".into()))
}

#[derive(Debug)]
pub enum ShareOutcome<B: Backend> {
    Success { message: PlainMessage<B>, phr: Vec<u8> },
    /// The user stopped after M6 holding `Data_2`.
    Paused(Address),
    Refused(Refusal),
    Rejected(ProtocolError),
    Timeout,
}

impl<B: Backend> ShareOutcome<B> {
    pub fn is_success(&self) -> bool {
        matches!(self, ShareOutcome::Success { .. })
    }
}

#[derive(Debug)]
pub struct ShareReport<B: Backend> {
    pub outcome: ShareOutcome<B>,
    /// Every frame handed to the transport, in order.
    pub trace: Vec<(MessageKind, usize)>,
    pub elapsed: Duration,
    pub data_2: Option<Address>,
}

struct Parties<B: Backend> {
    user: UserSession<B>,
    owner: OwnerSession<B>,
    hospital: HospitalSession,
    relay: RelaySession,
}

impl<B: Backend> Parties<B> {
    fn new(world: &World<B>, owner: &str, user: UserSession<B>) -> Result<Self, ProtocolError> {
        Ok(Parties {
            user,
            owner: OwnerSession::new(world.owner(owner)?),
            hospital: HospitalSession::new(),
            relay: RelaySession::new(),
        })
    }

    fn dispatch<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        world: &World<B>,
        env: Envelope,
        rng: &mut R,
    ) -> Result<Step<B>, ProtocolError> {
        let to = env.recipient;
        if to == self.user.id {
            self.user.handle(world, env, rng)
        } else if to == self.owner.id {
            self.owner.handle(world, env, rng)
        } else if to == self.hospital.id {
            self.hospital.handle(world, env, rng)
        } else if to == self.relay.id {
            self.relay.handle(world, env, rng)
        } else {
            Err(ProtocolError::WrongRecipient)
        }
    }
}

fn drive<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    world: &World<B>,
    parties: &mut Parties<B>,
    first: Result<Envelope, ProtocolError>,
    transport: &dyn Transport,
    rng: &mut R,
) -> ShareReport<B> {
    let started = Instant::now();
    let mut trace = Vec::new();
    let run = || -> Result<ShareOutcome<B>, ProtocolError> {
        let mut env = first?;
        loop {
            let wire = env.encode();
            trace.push((env.kind, wire.len()));
            let received = Envelope::decode(&transport.send(wire)?)?;
            let received = world.crf_in_transit(received)?;
            match parties.dispatch(world, received, rng)? {
                Step::Send(next) => env = next,
                Step::Paused(d2) => return Ok(ShareOutcome::Paused(d2)),
                Step::Refused(r) => return Ok(ShareOutcome::Refused(r)),
                Step::Finished { message, phr } => return Ok(ShareOutcome::Success { message, phr }),
            }
        }
    };
    let outcome = match run() {
        Ok(o) => o,
        Err(ProtocolError::Transport(TransportError::Timeout)) => ShareOutcome::Timeout,
        Err(e) => {
            let party = hex::encode(parties.user.id.0);
            world
                .relay
                .lock()
                .unwrap()
                .audit_note("reject", &party, world.now_ms(), Outcome::Rejected, e.to_string());
            ShareOutcome::Rejected(e)
        }
    };
    ShareReport {
        outcome,
        trace,
        elapsed: started.elapsed(),
        data_2: parties.user.data_2(),
    }
}

/// Runs M1..M8 for `user` asking `owner` for the record at `data_1`.
pub fn orchestrate_share<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    world: &World<B>,
    owner: &str,
    user: &str,
    data_1: Address,
    transport: &dyn Transport,
    rng: &mut R,
) -> ShareReport<B> {
    share(world, owner, user, data_1, transport, false, rng)
}

/// Runs M1..M6 and stops with `Data_2` in hand.
pub fn run_share_phase<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    world: &World<B>,
    owner: &str,
    user: &str,
    data_1: Address,
    transport: &dyn Transport,
    rng: &mut R,
) -> ShareReport<B> {
    share(world, owner, user, data_1, transport, true, rng)
}

fn share<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    world: &World<B>,
    owner: &str,
    user: &str,
    data_1: Address,
    transport: &dyn Transport,
    pause: bool,
    rng: &mut R,
) -> ShareReport<B> {
    let setup = || -> Result<Parties<B>, ProtocolError> {
        let keys = world.user(user)?;
        let owner_pub = OwnerPublic::of(&*world.owner(owner)?);
        Parties::new(world, owner, UserSession::new(keys, &owner_pub, data_1).pause_after_m6(pause))
    };
    let mut parties = match setup() {
        Ok(p) => p,
        Err(e) => return failed(e),
    };
    let first = parties.user.start(world, rng);
    drive(world, &mut parties, first, transport, rng)
}

/// Runs M7 and M8 for a share whose `Data_2` the user already holds.
pub fn run_fetch_phase<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    world: &World<B>,
    owner: &str,
    user: &str,
    data_2: Address,
    transport: &dyn Transport,
    rng: &mut R,
) -> ShareReport<B> {
    let setup = || -> Result<Parties<B>, ProtocolError> {
        let keys = world.user(user)?;
        let owner_pub = OwnerPublic::of(&*world.owner(owner)?);
        Parties::new(world, owner, UserSession::resume(keys, &owner_pub, data_2))
    };
    let mut parties = match setup() {
        Ok(p) => p,
        Err(e) => return failed(e),
    };
    let first = parties.user.fetch_request(world, rng);
    drive(world, &mut parties, first, transport, rng)
}

fn failed<B: Backend>(e: ProtocolError) -> ShareReport<B> {
    ShareReport {
        outcome: ShareOutcome::Rejected(e),
        trace: Vec::new(),
        elapsed: Duration::ZERO,
        data_2: None,
    }
}
