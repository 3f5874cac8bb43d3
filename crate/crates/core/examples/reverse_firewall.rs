//! A subverted encryptor leaks one bit per ciphertext through the parity of
//! its randomness. The firewall's re-randomization erases it.

use medexchain::crf::{random_bits, run_subverted_encryptor, ParityLeak};
use medexchain::group::TransparentBackend;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let trials = 10_000;
    let secret = random_bits(&mut rng, trials);
    let report = run_subverted_encryptor(&TransparentBackend::a80(), trials, |i| secret[i], &ParityLeak, &mut rng)?;
    println!("trials:               {}", report.trials);
    println!("accuracy, raw:        {:.4}", report.unsanitized_accuracy);
    println!("accuracy, sanitized:  {:.4}", report.sanitized_accuracy);
    println!("all still decrypt:    {}", report.all_decrypted);
    Ok(())
}
