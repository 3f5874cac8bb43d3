//! Concurrent shares across many owners and users, with and without
//! injected per-hop latency.

use medexchain::bench::{run_system_bench, SystemConfig};
use medexchain::group::TransparentBackend;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for latency_ms in [0, 5] {
        let config = SystemConfig {
            request_count: 500,
            concurrency: 16,
            latency_ms,
            max_access_count: 20,
            ..SystemConfig::default()
        };
        let r = run_system_bench(TransparentBackend::a80(), &config)?;
        println!(
            "latency {:>2} ms: {:>8.0} rps  p50 {:.2} ms  p95 {:.2} ms  ok {} refused {} rejected {} timeout {}  verified {}",
            latency_ms, r.throughput_rps, r.p50_ms, r.p95_ms, r.success, r.refused, r.rejected, r.timeout, r.verified
        );
    }
    Ok(())
}
