//! Full M1..M8 exchange between a chain-A owner and a chain-B user through
//! the relay, with every frame recorded.

use medexchain::group::PairingBackend;
use medexchain::ledger::SimConfig;
use medexchain::protocol::{orchestrate_share, RecordingTransport, ShareOutcome, SimTransport, World};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let world = World::provision(PairingBackend::a80(), &SimConfig::default(), &mut rng)?;
    world.provision_owner("alice")?;
    world.provision_user("bob", &mut rng)?;
    let data_1 = world.upload_phr("alice", b"discharge summary, ward 7", &mut rng)?;
    println!("Data_1 = {}", data_1.to_hex());

    let transport = RecordingTransport::new(SimTransport::with_latency_ms(2));
    let report = orchestrate_share(&world, "alice", "bob", data_1, &transport, &mut rng);
    for env in transport.envelopes() {
        println!("{} {:>4} bytes  {:?} -> {:?}", env.kind, env.encode().len(), env.kind.route().0, env.kind.route().1);
    }
    if let Some(d2) = report.data_2 {
        println!("Data_2 = {}", d2.to_hex());
    }
    match report.outcome {
        ShareOutcome::Success { phr, .. } => println!("bob reads: {}", String::from_utf8_lossy(&phr)),
        other => println!("share failed: {other:?}"),
    }
    println!("elapsed {:?}", report.elapsed);
    Ok(())
}
