use super::*;
use crate::crf::{CiphertextId, CrfGuardA};
use crate::group::{measure, Backend, GroupOps, OpCounters, TransparentBackend};
use crate::scheme::{ChainParams, OwnerKeys, Scheme, UserKeys};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

type T = TransparentBackend;

struct Env {
    scheme: Scheme<T>,
    pa: ChainParams<T>,
    guard: CrfGuardA<T>,
    owner: OwnerKeys<T>,
    user: UserKeys<T>,
    node: ChainNodeState,
    relay: RelayState,
    store: ContentStore,
    rng: ChaCha20Rng,
}

fn env(max: usize) -> Env {
    let b = T::a80();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let scheme = Scheme::new(b.clone());
    let (pa, ma) = scheme.setup_chain_random(ChainTag::A, &mut rng);
    let (pb, mb) = scheme.setup_chain_random(ChainTag::B, &mut rng);
    let guard = CrfGuardA::new(b.clone(), ma.crf_master.clone()).unwrap();
    let owner = scheme.owner_keys(b"do", &ma).unwrap();
    let user = scheme.keygen_du_random(b"du", &mb, &pb, &mut rng).unwrap();
    let mut relay = RelayState::new();
    let mut node = ChainNodeState::new(ChainTag::A, "gw-a", max);
    let receipt = relay.register_chain(ChainTag::A, Address::digest(b"params-a"), 1).unwrap();
    node.accept_registration(receipt);
    relay.register_chain(ChainTag::B, Address::digest(b"params-b"), 2).unwrap();
    Env {
        scheme,
        pa,
        guard,
        owner,
        user,
        node,
        relay,
        store: ContentStore::new(),
        rng,
    }
}

impl Env {
    fn upload(&mut self) -> (<T as crate::group::Backend>::Gt, Address) {
        let b = self.scheme.backend().clone();
        let m = b.random_gt(&mut self.rng);
        let ct = self.scheme.enc_random(&m, &self.pa, &self.owner.pk_do, &mut self.rng).unwrap();
        let (sct, id) = self
            .guard
            .sanitize_ciphertext(&ct, &self.owner.pk_do, &self.pa, &mut self.rng)
            .unwrap();
        let (data_1, _) = self.node.store_ciphertext(&b, &self.store, &sct, None, "do", 10).unwrap();
        assert_eq!(data_1, id);
        (m, data_1)
    }
}

#[test]
fn content_store_is_content_addressed() {
    let s = ContentStore::new();
    let a = s.store(b"hello");
    assert_eq!(a, Address::digest(b"hello"));
    assert_eq!(s.fetch(&a).unwrap(), b"hello");
    assert_eq!(s.store(b"hello"), a);
    assert_ne!(s.store(b"hellp"), a);
    assert_eq!(s.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    s.save_dir(dir.path()).unwrap();
    std::fs::write(dir.path().join(Address::digest(b"x").to_hex()), b"not x").unwrap();
    let loaded = ContentStore::load_dir(dir.path()).unwrap();
    assert_eq!(loaded.len(), 2);
    assert_eq!(loaded.fetch(&a).unwrap(), b"hello");
}

#[test]
fn registration_rules() {
    let mut relay = RelayState::new();
    relay.register_chain(ChainTag::A, Address::digest(b"a"), 0).unwrap();
    relay.register_chain(ChainTag::B, Address::digest(b"b"), 0).unwrap();
    assert_eq!(relay.registered_chains(), vec![ChainTag::A, ChainTag::B]);
    assert!(matches!(
        relay.register_chain(ChainTag::A, Address::digest(b"a"), 0),
        Err(LedgerError::DuplicateRegistration(ChainTag::A))
    ));
    let mut node = ChainNodeState::new(ChainTag::A, "gw", 3);
    let b = T::small();
    let ct = crate::scheme::SanitizedCiphertext::<T> {
        c1p: b.generator(),
        c2p: b.gt_generator(),
        c3p: b.generator(),
    };
    assert!(matches!(
        node.store_ciphertext(&b, &ContentStore::new(), &ct, None, "do", 0),
        Err(LedgerError::Unregistered(ChainTag::A))
    ));
}

#[test]
fn store_round_trips_and_grows_log_by_one() {
    let mut e = env(5);
    let before = e.node.tx_log().len();
    let (_, data_1) = e.upload();
    assert_eq!(e.node.tx_log().len(), before + 1);
    let entry = e.node.lookup(&data_1).unwrap().clone();
    let bytes = e.store.fetch(&entry.address).unwrap();
    assert_eq!(Address::digest(&bytes), data_1);
    let heights: Vec<_> = e.node.tx_log().iter().map(|t| t.height).collect();
    assert!(heights.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn access_contract_limits_and_missing_targets() {
    let mut e = env(3);
    let b = e.scheme.backend().clone();
    let (_, data_1) = e.upload();
    for t in 0..3 {
        let r = e.node.contract_fetch(&b, &e.store, &data_1, "du-1", 100 + t).unwrap();
        assert!(matches!(r, ContractResult::Granted { .. }));
    }
    let r = e.node.contract_fetch(&b, &e.store, &data_1, "du-1", 200).unwrap();
    assert_eq!(r, ContractResult::Refused(Refusal::AccessLimitReached));
    assert_eq!(Refusal::AccessLimitReached.to_string(), "Access limit reached!");
    let r = e
        .node
        .contract_fetch(&b, &e.store, &CiphertextId([0; 32]), "du-2", 300)
        .unwrap();
    assert_eq!(r, ContractResult::Refused(Refusal::TargetDataMissing));
    assert_eq!(Refusal::TargetDataMissing.to_string(), "Target data doesn\u{2019}t exist");
    // a different user is unaffected
    let r = e.node.contract_fetch(&b, &e.store, &data_1, "du-2", 301).unwrap();
    assert!(matches!(r, ContractResult::Granted { .. }));
    assert_eq!(e.node.access_count("du-1"), 3);
    assert_eq!(e.node.access_list().len(), 4);
    let refused = e.node.audit_query(&AuditFilter::all().outcome(Outcome::Refused));
    assert_eq!(refused.len(), 2);
    assert_eq!(e.node.audit_query(&AuditFilter::all().party("du-2")).len(), 2);
}

#[test]
fn limit_holds_under_concurrency() {
    let mut e = env(10);
    let b = e.scheme.backend().clone();
    let (_, data_1) = e.upload();
    let node = std::sync::Mutex::new(e.node);
    let granted = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| {
                for t in 0..10 {
                    let r = node.lock().unwrap().contract_fetch(&b, &e.store, &data_1, "du", t).unwrap();
                    if matches!(r, ContractResult::Granted { .. }) {
                        granted.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    }
                }
            });
        }
    });
    assert_eq!(granted.into_inner(), 10);
}

#[test]
fn relay_reencrypt_fetch_and_audit() {
    let mut e = env(5);
    let b = e.scheme.backend().clone();
    let pk = e.user.public_key();
    let mut ids = Vec::new();
    for i in 0..3 {
        let (m, data_1) = e.upload();
        let ContractResult::Granted { ciphertext: sct, .. } = e.node.contract_fetch(&b, &e.store, &data_1, "du", i).unwrap() else {
            panic!("refused")
        };
        let rk = e.scheme.rekeygen_random(&e.owner.sk_do_sanitized, &pk, &mut e.rng).unwrap();
        let srk = e.guard.sanitize_rekey(&rk, &data_1, &e.owner.pk_do, &pk).unwrap();
        let (data_2, c) = measure(|| {
            e.relay
                .relay_reencrypt(&e.scheme, ChainTag::A, ChainTag::B, &sct, &srk, b"", "du", i)
                .unwrap()
        });
        assert_eq!(c, OpCounters::new(0, 0, 1, 0));
        let rc = e.relay.relay_fetch(&b, &data_2).unwrap();
        assert_eq!(e.relay.relay_fetch(&b, &data_2).unwrap(), rc);
        assert_eq!(e.scheme.dec(&rc, &e.user.sk_du), m);
        ids.push(data_2);
    }
    assert_eq!(e.relay.audit_query(&AuditFilter::all().kind("reencrypt")).len(), 3);
    assert!(matches!(
        e.relay.relay_fetch(&b, &CiphertextId([9; 32])),
        Err(LedgerError::NotFound(_))
    ));
    let seqs: Vec<_> = e.relay.audit().entries().iter().map(|x| x.seq).collect();
    assert!(seqs.windows(2).all(|w| w[0] + 1 == w[1]));
    let jl = e.relay.audit().to_jsonl();
    let first: serde_json::Value = serde_json::from_str(jl.lines().next().unwrap()).unwrap();
    for k in ["seq", "kind", "party", "timestamp_ms", "outcome", "id_hex"] {
        assert!(first.get(k).is_some(), "missing {k}");
    }
    assert_eq!(AuditLog::from_jsonl(&jl).unwrap(), *e.relay.audit());
}

#[test]
fn unregistered_chain_cannot_reencrypt() {
    let mut e = env(5);
    let b = e.scheme.backend().clone();
    let (_, data_1) = e.upload();
    let ContractResult::Granted { ciphertext: sct, .. } = e.node.contract_fetch(&b, &e.store, &data_1, "du", 0).unwrap() else {
        panic!()
    };
    let pk = e.user.public_key();
    let rk = e.scheme.rekeygen_random(&e.owner.sk_do_sanitized, &pk, &mut e.rng).unwrap();
    let srk = e.guard.sanitize_rekey(&rk, &data_1, &e.owner.pk_do, &pk).unwrap();
    let mut lonely = RelayState::new();
    lonely.register_chain(ChainTag::A, Address::digest(b"a"), 0).unwrap();
    assert!(matches!(
        lonely.relay_reencrypt(&e.scheme, ChainTag::A, ChainTag::B, &sct, &srk, b"", "du", 1),
        Err(LedgerError::Unregistered(ChainTag::B))
    ));
    assert_eq!(
        lonely.audit_query(&AuditFilter::all().outcome(Outcome::Rejected)).len(),
        1
    );
}

#[test]
fn node_state_survives_json() {
    let mut e = env(5);
    e.upload();
    let text = serde_json::to_string(&e.node).unwrap();
    let back: ChainNodeState = serde_json::from_str(&text).unwrap();
    assert_eq!(back, e.node);
    let text = serde_json::to_string(&e.relay).unwrap();
    assert_eq!(serde_json::from_str::<RelayState>(&text).unwrap(), e.relay);
}

#[test]
fn sim_config_parsing() {
    assert_eq!(SimConfig::parse("").unwrap(), SimConfig::default());
    let c = SimConfig::parse("# sim\nmax_access_count = 7\ntransport_latency_ms=20\nnode_count=4\n").unwrap();
    assert_eq!(c.max_access_count, 7);
    assert_eq!(SimConfig::parse(&c.to_text()).unwrap(), c);
    assert!(SimConfig::parse("max_access_count=0").is_err());
    assert!(SimConfig::parse("colour=blue").is_err());
    assert!(SimConfig::parse("node_count=x").is_err());
}
