use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{percentile, BenchError};
use crate::group::Backend;
use crate::ledger::{Address, SimConfig};
use crate::protocol::{orchestrate_share, ShareOutcome, SimTransport, World};
use crate::scheme::PlainMessage;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub request_count: usize,
    pub concurrency: usize,
    pub latency_ms: u64,
    pub max_access_count: usize,
    pub owners: usize,
    pub users: usize,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            request_count: 1_000,
            concurrency: 8,
            latency_ms: 0,
            max_access_count: usize::MAX,
            owners: 4,
            users: 16,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemRunReport {
    pub backend: String,
    pub request_count: usize,
    pub concurrency: usize,
    pub latency_ms: u64,
    pub elapsed_ms: f64,
    pub throughput_rps: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub success: usize,
    pub refused: usize,
    pub rejected: usize,
    pub timeout: usize,
    /// Successes whose group element and record bytes matched the upload.
    pub verified: usize,
    /// `(user, successes, refusals)` in user order.
    pub per_user: Vec<(String, usize, usize)>,
}

impl SystemRunReport {
    pub fn tallies_conserved(&self) -> bool {
        self.success + self.refused + self.rejected + self.timeout == self.request_count
    }

    pub fn all_successes_verified(&self) -> bool {
        self.verified == self.success
    }
}

#[derive(Default)]
struct Tally {
    success: usize,
    refused: usize,
    rejected: usize,
    timeout: usize,
    verified: usize,
    latencies_ms: Vec<f64>,
    per_user: HashMap<usize, (usize, usize)>,
}

/// Provisions owners, users and one record per owner, then runs
/// `request_count` shares across `concurrency` worker threads. Request `i`
/// goes from user `i mod users` to owner `i mod owners`.
pub fn run_system_bench<B: Backend>(backend: B, config: &SystemConfig) -> Result<SystemRunReport, BenchError> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let sim = SimConfig {
        max_access_count: config.max_access_count.max(1),
        transport_latency_ms: config.latency_ms,
        ..SimConfig::default()
    };
    let kind = backend.kind().as_str().to_string();
    let world = World::provision(backend, &sim, &mut rng)?;
    let owners = config.owners.max(1);
    let users = config.users.max(1);

    let mut records: Vec<(Address, PlainMessage<B>, Vec<u8>)> = Vec::with_capacity(owners);
    for o in 0..owners {
        let keys = world.provision_owner(&format!("owner-{o}"))?;
        let mut phr = format!("record of owner-{o}: ").into_bytes();
        phr.extend((0..64).map(|_| rng.next_u32() as u8));
        let msg = PlainMessage::wrap_phr(world.backend(), &phr, &mut rng);
        let data_1 = world.upload_message(&keys, &msg, &mut rng)?;
        records.push((data_1, msg, phr));
    }
    for u in 0..users {
        world.provision_user(&format!("user-{u}"), &mut rng)?;
    }

    let transport = SimTransport::with_latency_ms(config.latency_ms);
    let next = AtomicUsize::new(0);
    let tally = Mutex::new(Tally::default());
    let workers = config.concurrency.clamp(1, config.request_count.max(1));
    let started = Instant::now();
    std::thread::scope(|scope| {
        for w in 0..workers {
            let (world, records, transport, next, tally) = (&world, &records, &transport, &next, &tally);
            let seed = config.seed.wrapping_add(1 + w as u64);
            scope.spawn(move || {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= config.request_count {
                        break;
                    }
                    let (u, o) = (i % users, i % owners);
                    let (data_1, msg, phr) = &records[o];
                    let report = orchestrate_share(
                        world,
                        &format!("owner-{o}"),
                        &format!("user-{u}"),
                        *data_1,
                        transport,
                        &mut rng,
                    );
                    let mut t = tally.lock().unwrap();
                    t.latencies_ms.push(report.elapsed.as_secs_f64() * 1e3);
                    let slot = t.per_user.entry(u).or_default();
                    match report.outcome {
                        ShareOutcome::Success { message, phr: got } => {
                            slot.0 += 1;
                            t.success += 1;
                            if message.group_payload == msg.group_payload && &got == phr {
                                t.verified += 1;
                            }
                        }
                        ShareOutcome::Refused(_) => {
                            slot.1 += 1;
                            t.refused += 1;
                        }
                        ShareOutcome::Timeout => t.timeout += 1,
                        ShareOutcome::Rejected(_) | ShareOutcome::Paused(_) => t.rejected += 1,
                    }
                }
            });
        }
    });
    let elapsed = started.elapsed().as_secs_f64();
    let t = tally.into_inner().unwrap();
    let lat = if t.latencies_ms.is_empty() { vec![0.0] } else { t.latencies_ms };
    Ok(SystemRunReport {
        backend: kind,
        request_count: config.request_count,
        concurrency: workers,
        latency_ms: config.latency_ms,
        elapsed_ms: elapsed * 1e3,
        throughput_rps: config.request_count as f64 / elapsed.max(1e-9),
        p50_ms: percentile(&lat, 50.0),
        p95_ms: percentile(&lat, 95.0),
        success: t.success,
        refused: t.refused,
        rejected: t.rejected,
        timeout: t.timeout,
        verified: t.verified,
        per_user: (0..users)
            .filter_map(|u| t.per_user.get(&u).map(|(s, r)| (format!("user-{u}"), *s, *r)))
            .collect(),
    })
}
