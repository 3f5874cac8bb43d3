use super::*;
use crate::group::{PairingBackend, TransparentBackend};
use crate::scheme::{ChainTag, MasterSecrets};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

type T = TransparentBackend;

struct World {
    scheme: Scheme<T>,
    params: ChainParams<T>,
    guard: CrfGuardA<T>,
    pk_do: <T as Backend>::G1,
    sk_do: <T as Backend>::G1,
    user: crate::scheme::UserKeys<T>,
}

fn world(rng: &mut ChaCha20Rng) -> World {
    let b = T::a80();
    let scheme = Scheme::new(b.clone());
    let (params, ma) = scheme.setup_chain_random(ChainTag::A, rng);
    let (pb, mb) = scheme.setup_chain_random(ChainTag::B, rng);
    let guard = CrfGuardA::new(b.clone(), ma.crf_master.clone()).unwrap();
    let (pk_do, raw) = scheme.keygen_do(b"do", &ma.hospital_master).unwrap();
    let sk_do = guard.sanitize_owner_key(&raw).unwrap();
    let user = scheme.keygen_du_random(b"du", &mb, &pb, rng).unwrap();
    World {
        scheme,
        params,
        guard,
        pk_do,
        sk_do,
        user,
    }
}

#[test]
fn zero_master_is_rejected() {
    let b = T::small();
    assert!(matches!(CrfGuardA::new(b.clone(), b.scalar(0)), Err(CrfError::ZeroMaster)));
    assert!(matches!(CrfGuardB::new(b.clone(), b.scalar(0)), Err(CrfError::ZeroMaster)));
}

#[test]
fn unit_master_passes_through() {
    let b = T::small();
    let a = CrfGuardA::new(b.clone(), b.scalar(1)).unwrap();
    let x = b.g1_from_exponent(42);
    assert_eq!(a.sanitize_owner_key(&x).unwrap(), x);
    let g = CrfGuardB::new(b.clone(), b.scalar(1)).unwrap();
    assert_eq!(g.sanitize_partial_key(&x).unwrap(), x);
}

#[test]
fn owner_key_exponent_is_hsa() {
    let b = T::small();
    let s = Scheme::new(b.clone());
    let ma = MasterSecrets {
        hospital_master: b.scalar(7),
        crf_master: b.scalar(5),
    };
    let params = s.setup_chain(ChainTag::A, &ma).unwrap();
    let guard = CrfGuardA::new(b.clone(), b.scalar(5)).unwrap();
    let (pk, raw) = s.keygen_do(b"carol", &b.scalar(7)).unwrap();
    let sk = guard.sanitize_owner_key(&raw).unwrap();
    let h: u64 = b.g1_exponent(&pk).unwrap().try_into().unwrap();
    assert_eq!(b.g1_exponent(&sk).unwrap(), (h * 35 % 101).into());
    let keys = crate::scheme::OwnerKeys {
        identity: b"carol".to_vec(),
        pk_do: pk,
        sk_do_raw: raw,
        sk_do_sanitized: sk,
    };
    assert!(s.owner_keys_consistent(&keys, &params));
}

#[test]
fn fresh_beta_per_sanitization() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let w = world(&mut rng);
    let m = w.scheme.backend().random_gt(&mut rng);
    let ct = w.scheme.enc_random(&m, &w.params, &w.pk_do, &mut rng).unwrap();
    let (s1, id1) = w.guard.sanitize_ciphertext(&ct, &w.pk_do, &w.params, &mut rng).unwrap();
    let (s2, id2) = w.guard.sanitize_ciphertext(&ct, &w.pk_do, &w.params, &mut rng).unwrap();
    assert_ne!(id1, id2);
    assert_ne!(s1, s2);
    assert_ne!(w.guard.beta_for(&id1), w.guard.beta_for(&id2));
    assert_eq!(w.guard.ledger_len(), 2);
    assert_eq!(id1, CiphertextId::of(w.scheme.backend(), &s1));
}

#[test]
fn ledger_returns_beta_used() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let w = world(&mut rng);
    let b = w.scheme.backend();
    let m = b.random_gt(&mut rng);
    let ct = w.scheme.enc_random(&m, &w.params, &w.pk_do, &mut rng).unwrap();
    let beta = b.scalar(123_456);
    let (sct, id) = w
        .guard
        .sanitize_ciphertext_with(&ct, &w.pk_do, &w.params, beta.clone())
        .unwrap();
    assert_eq!(w.guard.beta_for(&id), Some(beta.clone()));
    let alpha = b.g1_exponent(&ct.c1).unwrap();
    assert_eq!(b.g1_exponent(&sct.c1p).unwrap(), (alpha + 123_456u32) % b.order());
    assert!(w.guard.record(id, beta).is_ok());
    assert!(matches!(w.guard.record(id, b.scalar(1)), Err(CrfError::LedgerConflict(_))));
}

#[test]
fn guard_pipeline_and_cross_pairing() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let w = world(&mut rng);
    let b = w.scheme.backend();
    let pk = w.user.public_key();
    let m1 = b.random_gt(&mut rng);
    let m2 = b.random_gt(&mut rng);
    let ct1 = w.scheme.enc_random(&m1, &w.params, &w.pk_do, &mut rng).unwrap();
    let ct2 = w.scheme.enc_random(&m2, &w.params, &w.pk_do, &mut rng).unwrap();
    let (s1, id1) = w.guard.sanitize_ciphertext(&ct1, &w.pk_do, &w.params, &mut rng).unwrap();
    let (s2, _) = w.guard.sanitize_ciphertext(&ct2, &w.pk_do, &w.params, &mut rng).unwrap();

    let rk = w.scheme.rekeygen_random(&w.sk_do, &pk, &mut rng).unwrap();
    let srk = w.guard.sanitize_rekey(&rk, &id1, &w.pk_do, &pk).unwrap();
    assert_eq!(w.scheme.dec(&w.scheme.reenc(&s1, &srk), &w.user.sk_du), m1);
    assert_ne!(w.scheme.dec(&w.scheme.reenc(&s2, &srk), &w.user.sk_du), m2);

    let unknown = CiphertextId([7; 32]);
    assert!(matches!(
        w.guard.sanitize_rekey(&rk, &unknown, &w.pk_do, &pk),
        Err(CrfError::UnknownCiphertext(id)) if id == unknown
    ));
}

#[test]
fn snapshot_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let w = world(&mut rng);
    let b = w.scheme.backend();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beta.ledger");
    let master = b.scalar(99);
    let ids: Vec<_> = {
        let g = CrfGuardA::with_snapshot(b.clone(), master.clone(), &path).unwrap();
        (0..5)
            .map(|_| {
                let m = b.random_gt(&mut rng);
                let ct = w.scheme.enc_random(&m, &w.params, &w.pk_do, &mut rng).unwrap();
                g.sanitize_ciphertext(&ct, &w.pk_do, &w.params, &mut rng).unwrap().1
            })
            .collect()
    };
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    for line in text.lines() {
        let (id, beta) = line.split_once(' ').unwrap();
        assert_eq!(id.len(), 64);
        assert_eq!(beta.len(), 40);
    }
    let reloaded = CrfGuardA::with_snapshot(b.clone(), master, &path).unwrap();
    assert_eq!(reloaded.ledger_len(), 5);
    for id in &ids {
        assert!(reloaded.beta_for(id).is_some());
    }
    let fresh = CrfGuardA::new(b.clone(), b.scalar(3)).unwrap();
    assert_eq!(fresh.load_snapshot(&reloaded.export_snapshot()).unwrap(), 5);
    assert!(matches!(
        fresh.load_snapshot("zz 00"),
        Err(CrfError::Snapshot { line: 1, .. })
    ));
}

#[test]
fn concurrent_sanitize_keeps_every_entry() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let w = world(&mut rng);
    let b = w.scheme.backend().clone();
    let ct = w
        .scheme
        .enc_random(&b.random_gt(&mut rng), &w.params, &w.pk_do, &mut rng)
        .unwrap();
    std::thread::scope(|s| {
        for t in 0..4u64 {
            let (w, ct) = (&w, &ct);
            s.spawn(move || {
                let mut rng = ChaCha20Rng::seed_from_u64(100 + t);
                for _ in 0..50 {
                    w.guard.sanitize_ciphertext(ct, &w.pk_do, &w.params, &mut rng).unwrap();
                }
            });
        }
    });
    assert_eq!(w.guard.ledger_len(), 200);
}

#[test]
fn parity_channel_is_closed_by_the_firewall() {
    let b = T::a80();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let bits = random_bits(&mut rng, 2000);
    let report = run_subverted_encryptor(&b, bits.len(), |i| bits[i], &ParityLeak, &mut rng).unwrap();
    assert_eq!(report.unsanitized_accuracy, 1.0);
    assert!((report.sanitized_accuracy - 0.5).abs() < 0.05, "{report:?}");
    assert!(report.all_decrypted);
}

#[test]
fn subverted_encryptor_unsupported_on_pairing() {
    let b = PairingBackend::a80();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    assert!(matches!(
        run_subverted_encryptor(&b, 1, |_| true, &ParityLeak, &mut rng),
        Err(CrfError::Unsupported(_))
    ));
}
