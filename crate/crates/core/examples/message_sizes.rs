//! Serialized key and ciphertext sizes.

use medexchain::bench::run_size_report;
use medexchain::group::{PairingBackend, TransparentBackend};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let pairing = run_size_report(&PairingBackend::a80(), &mut rng)?;
    let transparent = run_size_report(&TransparentBackend::a80(), &mut rng)?;
    println!("{:<8} {:>8} {:>12}", "object", "pairing", "transparent");
    for ((name, p), (_, t)) in pairing.rows().iter().zip(transparent.rows()) {
        println!("{name:<8} {p:>8} {t:>12}");
    }
    Ok(())
}
