//! Per-stage group-operation counts and timings on the pairing backend.

use medexchain::bench::{run_stage_bench, stage_csv};
use medexchain::group::PairingBackend;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let bench = run_stage_bench(&PairingBackend::a80(), 10, &mut rng)?;
    print!("{}", stage_csv(&bench.stages)?);
    for p in &bench.primitives {
        println!("{:<11} median {:>9.1} us", p.op, p.median_us);
    }
    for c in bench.ratio_checks() {
        println!("{}: ratio {:.2} ({})", c.name, c.ratio, if c.within_tolerance { "ok" } else { "off" });
    }
    Ok(())
}
