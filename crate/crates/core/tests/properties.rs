use medexchain::group::{Backend, GroupOps, TransparentBackend};
use medexchain::protocol::{ActorId, Envelope, MessageKind};
use medexchain::scheme::codec::WireObject;
use medexchain::scheme::{hybrid_unwrap, hybrid_wrap, ChainTag, SanitizedCiphertext, Scheme};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn kind() -> impl Strategy<Value = MessageKind> {
    (0usize..8).prop_map(|i| MessageKind::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelopes_survive_the_wire(
        kind in kind(),
        t in any::<u64>(),
        seed in any::<u64>(),
        body in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..64), 1..6),
    ) {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let mut fields: Vec<Vec<u8>> = body.into_iter().cycle().take(kind.wire_schema().len()).collect();
        if !kind.is_wrapped() {
            fields[0] = kind.role_tag().as_bytes().to_vec();
        }
        let env = Envelope::build(kind, ActorId::named("a"), ActorId::named("b"), t, fields, &mut r);
        prop_assert_eq!(Envelope::decode(&env.encode()).unwrap(), env);
    }

    #[test]
    fn truncated_envelopes_are_rejected(kind in kind(), seed in any::<u64>(), cut in 1usize..40) {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let mut fields = vec![vec![7u8; 33]; kind.wire_schema().len()];
        if !kind.is_wrapped() {
            fields[0] = kind.role_tag().as_bytes().to_vec();
        }
        let wire = Envelope::build(kind, ActorId::named("a"), ActorId::named("b"), 1, fields, &mut r).encode();
        prop_assert!(Envelope::decode(&wire[..wire.len() - cut]).is_err());
    }

    #[test]
    fn hybrid_payload_round_trips_and_rejects_the_wrong_key(
        phr in proptest::collection::vec(any::<u8>(), 0..512),
        seed in any::<u64>(),
    ) {
        let b = TransparentBackend::a80();
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let m = b.random_gt(&mut r);
        let sealed = hybrid_wrap(&b, &phr, &m, &mut r);
        prop_assert_eq!(hybrid_unwrap(&b, &sealed, &m).unwrap(), phr);
        let other = b.gt_mul(&m, &b.gt_generator());
        prop_assert!(hybrid_unwrap(&b, &sealed, &other).is_err());
    }

    #[test]
    fn sanitized_ciphertexts_round_trip_on_the_small_group(seed in any::<u64>()) {
        let b = TransparentBackend::small();
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let s = Scheme::new(b.clone());
        let (pa, ma) = s.setup_chain_random(ChainTag::A, &mut r);
        let owner = s.owner_keys(b"o", &ma).unwrap();
        let m = b.random_gt(&mut r);
        let ct = s.enc_random(&m, &pa, &owner.pk_do, &mut r).unwrap();
        let sct = s.crf_enc(&ct, &owner.pk_do, &pa, &b.random_nonzero_scalar(&mut r)).unwrap();
        let back = SanitizedCiphertext::from_wire(&b, &sct.to_wire(&b)).unwrap();
        prop_assert_eq!(s.dec_owner(&back.c1p, &back.c2p, &owner.sk_do_sanitized), m);
    }
}
