//! Key generation, encryption, firewall sanitization, re-encryption and
//! decryption without any ledger or protocol around them.

use medexchain::group::{GroupOps, TransparentBackend};
use medexchain::scheme::{ChainTag, PlainMessage, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = TransparentBackend::a80();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let s = Scheme::new(b.clone());

    let (chain_a, masters_a) = s.setup_chain_random(ChainTag::A, &mut rng);
    let (chain_b, masters_b) = s.setup_chain_random(ChainTag::B, &mut rng);
    let owner = s.owner_keys(b"alice", &masters_a)?;
    let user = s.keygen_du_random(b"bob", &masters_b, &chain_b, &mut rng)?;

    let msg = PlainMessage::wrap_phr(&b, b"allergies: penicillin", &mut rng);
    let ct = s.enc_random(&msg.group_payload, &chain_a, &owner.pk_do, &mut rng)?;
    let beta = b.random_nonzero_scalar(&mut rng);
    let sct = s.crf_enc(&ct, &owner.pk_do, &chain_a, &beta)?;

    let rk = s.rekeygen_random(&owner.sk_do_sanitized, &user.public_key(), &mut rng)?;
    let srk = s.crf_rekeygen(&rk, &owner.pk_do, &user.public_key(), &beta)?;
    let rc = s.reenc(&sct, &srk);

    let opened = s.dec_message(&rc, msg.dem_payload.as_deref(), &user.sk_du)?;
    println!("group element recovered: {}", opened.group_payload == msg.group_payload);
    println!("record: {}", String::from_utf8(opened.unwrap_phr(&b)?)?);
    Ok(())
}
