//! The chain-A access contract grants a user a bounded number of shares and
//! refuses unknown records.

use medexchain::group::TransparentBackend;
use medexchain::ledger::{Address, SimConfig};
use medexchain::protocol::{orchestrate_share, ShareOutcome, SimTransport, World};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let config = SimConfig {
        max_access_count: 2,
        ..SimConfig::default()
    };
    let world = World::provision(TransparentBackend::a80(), &config, &mut rng)?;
    world.provision_owner("alice")?;
    world.provision_user("bob", &mut rng)?;
    let data_1 = world.upload_phr("alice", b"MRI report", &mut rng)?;
    let t = SimTransport::instant();

    for (i, target) in [data_1, data_1, data_1, Address::digest(b"nope")].into_iter().enumerate() {
        match orchestrate_share(&world, "alice", "bob", target, &t, &mut rng).outcome {
            ShareOutcome::Success { phr, .. } => println!("request {i}: granted, {} bytes", phr.len()),
            ShareOutcome::Refused(r) => println!("request {i}: {r}"),
            other => println!("request {i}: {other:?}"),
        }
    }
    let node = world.node_a.lock().unwrap();
    println!("access list entries: {}", node.access_list().len());
    for e in node.audit().entries() {
        println!("  audit {} {} {:?}", e.kind, e.party, e.outcome);
    }
    Ok(())
}
