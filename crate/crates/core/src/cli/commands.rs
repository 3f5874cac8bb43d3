use std::path::Path;

use rand::rngs::OsRng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use super::state::{load_shares, open_world, read, save_shares, save_world, write, DataDir, PendingShare};
use super::{BenchArgs, BenchKind, CliConfig, CliError, Command, Output, RoleArg};
use crate::bench::{self, SizeReport, Stage, SystemConfig};
use crate::crf::{CiphertextId, CrfGuardA};
use crate::group::{Backend, BackendKind, GroupOps};
use crate::ledger::{Address, AuditEntry, ChainNodeState, ContentStore, RelayState};
use crate::protocol::{orchestrate_share, run_fetch_phase, run_share_phase, ShareOutcome, SimTransport, World, WorldState};
use crate::scheme::codec::WireObject;
use crate::scheme::{ChainTag, MasterSecrets, ReCiphertext};

const SAMPLE_PHR: &[u8] = b"patient: demo-001\nblood type: O+\nallergies: penicillin\nlast visit: cardiology follow-up\n";

pub(super) fn dispatch<B: Backend>(b: B, cfg: &CliConfig, cmd: Command, o: &mut Output<'_>) -> Result<(), CliError> {
    let dir = DataDir::new(&cfg.data_dir);
    match cmd {
        Command::Setup { force } => setup(&b, cfg, &dir, force, o),
        Command::Keygen {
            role,
            id,
            force,
            reveal_secrets,
        } => keygen(&b, cfg, &dir, role, &id, force, reveal_secrets, o),
        Command::Encrypt { file, owner } => encrypt(&b, cfg, &dir, &file, &owner, o),
        Command::Share { data1, user, owner } => share(&b, cfg, &dir, &data1, &user, owner.as_deref(), o),
        Command::Fetch { data2 } => fetch(&b, cfg, &dir, &data2, o),
        Command::Decrypt { data2, out, force } => decrypt(&b, cfg, &dir, &data2, out.as_deref(), force, o),
        Command::Bench(args) => bench_cmd(b, cfg, &args, o),
        Command::Demo { file, force } => demo(&b, cfg, &dir, file.as_deref(), force, o),
    }
}

fn check_name(kind: &str, id: &str) -> Result<(), CliError> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{kind} id `{id}` must be 1-64 characters of letters, digits, '-', '_' or '.'"
        )))
    }
}

fn parse_address(what: &str, hex: &str) -> Result<Address, CliError> {
    hex.trim()
        .parse::<CiphertextId>()
        .map_err(|_| CliError::Usage(format!("{what} must be 64 hex characters")))
}

fn setup<B: Backend>(b: &B, cfg: &CliConfig, dir: &DataDir, force: bool, o: &mut Output<'_>) -> Result<(), CliError> {
    if dir.is_set_up() {
        if !force {
            return Err(CliError::Exists(format!("system parameters in {}", dir.root.display())));
        }
        dir.wipe()?;
    }
    dir.create_layout()?;
    let mut rng = OsRng;
    let mut masters = || MasterSecrets {
        hospital_master: b.random_nonzero_scalar(&mut rng),
        crf_master: b.random_nonzero_scalar(&mut rng),
    };
    let (secrets_a, secrets_b) = (masters(), masters());
    write(&dir.master_file('a'), &secrets_a.to_file(b))?;
    write(&dir.master_file('b'), &secrets_b.to_file(b))?;
    let guard_a = CrfGuardA::with_snapshot(b.clone(), secrets_a.crf_master.clone(), &dir.crf_snapshot())?;
    let world = World::from_state(WorldState {
        backend: b.clone(),
        secrets_a,
        secrets_b,
        guard_a,
        node_a: ChainNodeState::new(ChainTag::A, "gateway-a", cfg.max_access_count),
        node_b: ChainNodeState::new(ChainTag::B, "gateway-b", cfg.max_access_count),
        relay: RelayState::new(),
        store: ContentStore::new(),
    })?;
    world.register_chains(world.now_ms())?;
    write(&dir.chain_file('a'), &world.chain_a.to_file(b))?;
    write(&dir.chain_file('b'), &world.chain_b.to_file(b))?;
    save_world(dir, &world)?;
    write(&dir.profile_file(), b.profile().to_descriptor().as_bytes())?;

    let pk_a = hex::encode(b.encode_g1(&world.chain_a.system_public_key));
    let pk_b = hex::encode(b.encode_g1(&world.chain_b.system_public_key));
    if o.json {
        o.value(&json!({
            "data_dir": dir.root,
            "backend": b.kind().as_str(),
            "chain_a_public_key": pk_a,
            "chain_b_public_key": pk_b,
            "registered": ["A", "B"],
        }));
    } else {
        o.line(format!("initialised {} ({} backend)", dir.root.display(), b.kind().as_str()));
        o.line(format!("chain A system key  {pk_a}"));
        o.line(format!("chain B system key  {pk_b}"));
        o.line("both chains registered with the relay");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn keygen<B: Backend>(
    b: &B,
    cfg: &CliConfig,
    dir: &DataDir,
    role: RoleArg,
    id: &str,
    force: bool,
    reveal: bool,
    o: &mut Output<'_>,
) -> Result<(), CliError> {
    check_name("key", id)?;
    let world = open_world(dir, b, cfg)?;
    let enc = |x: &B::G1| hex::encode(b.encode_g1(x));
    let mut report = serde_json::Map::new();
    report.insert("id".into(), id.into());
    match role {
        RoleArg::Owner => {
            let path = dir.owner_file(id);
            if path.exists() && !force {
                return Err(CliError::Exists(format!("owner key `{id}`")));
            }
            let keys = world.provision_owner(id)?;
            write(&path, &keys.to_file(b))?;
            report.insert("role".into(), "owner".into());
            report.insert("pk_do".into(), enc(&keys.pk_do).into());
            if reveal {
                report.insert("sk_do".into(), enc(&keys.sk_do_sanitized).into());
            }
        }
        RoleArg::User => {
            let path = dir.user_file(id);
            if path.exists() && !force {
                return Err(CliError::Exists(format!("user key `{id}`")));
            }
            let keys = world.provision_user(id, &mut OsRng)?;
            write(&path, &keys.to_file(b))?;
            report.insert("role".into(), "user".into());
            report.insert("pk_du_1".into(), enc(&keys.pk_du_1).into());
            report.insert("pk_du_2".into(), enc(&keys.pk_du_2).into());
            if reveal {
                report.insert("sk_du".into(), enc(&keys.sk_du).into());
                report.insert("user_secret".into(), hex::encode(b.encode_scalar(&keys.user_secret)).into());
            }
        }
    }
    if o.json {
        o.value(&report.into());
    } else {
        for (k, v) in &report {
            o.line(format!("{k:<12} {}", v.as_str().unwrap_or_default()));
        }
        if !reveal {
            o.line("secret key written to the data directory (use --reveal-secrets to print it)");
        }
    }
    Ok(())
}

fn encrypt<B: Backend>(
    b: &B,
    cfg: &CliConfig,
    dir: &DataDir,
    file: &Path,
    owner: &str,
    o: &mut Output<'_>,
) -> Result<(), CliError> {
    check_name("owner", owner)?;
    let world = open_world(dir, b, cfg)?;
    if world.owner(owner).is_err() {
        return Err(CliError::Missing {
            what: format!("no keys for owner `{owner}`"),
            run: format!("medexchain keygen --role owner --id {owner}"),
        });
    }
    let phr = read(file)?;
    let data_1 = world.upload_phr(owner, &phr, &mut OsRng)?;
    save_world(dir, &world)?;
    if o.json {
        o.value(&json!({ "data_1": data_1, "owner": owner, "bytes": phr.len() }));
    } else {
        o.line(format!("stored {} bytes for {owner} on chain A", phr.len()));
        o.line(format!("Data_1 {data_1}"));
    }
    Ok(())
}

fn require_user<B: Backend>(world: &World<B>, user: &str) -> Result<(), CliError> {
    world.user(user).map(|_| ()).map_err(|_| CliError::Missing {
        what: format!("no keys for user `{user}`"),
        run: format!("medexchain keygen --role user --id {user}"),
    })
}

fn outcome_error<B: Backend>(outcome: ShareOutcome<B>) -> CliError {
    match outcome {
        ShareOutcome::Refused(r) => CliError::Refused(r),
        ShareOutcome::Rejected(e) => e.into(),
        ShareOutcome::Timeout => crate::protocol::ProtocolError::from(crate::protocol::TransportError::Timeout).into(),
        ShareOutcome::Success { .. } | ShareOutcome::Paused(_) => unreachable!("not an error outcome"),
    }
}

fn share<B: Backend>(
    b: &B,
    cfg: &CliConfig,
    dir: &DataDir,
    data1: &str,
    user: &str,
    owner: Option<&str>,
    o: &mut Output<'_>,
) -> Result<(), CliError> {
    check_name("user", user)?;
    let data_1 = parse_address("Data_1", data1)?;
    let world = open_world(dir, b, cfg)?;
    require_user(&world, user)?;
    let indexed = world.node_a.lock().unwrap().lookup(&data_1).map(|e| e.owner.clone());
    let owner = match (owner, indexed) {
        (Some(o), _) => o.to_string(),
        (None, Some(o)) => o,
        (None, None) => return Err(CliError::Refused(crate::ledger::Refusal::TargetDataMissing)),
    };
    let transport = SimTransport::with_latency_ms(cfg.transport_latency_ms);
    let report = run_share_phase(&world, &owner, user, data_1, &transport, &mut OsRng);
    save_world(dir, &world)?;
    let data_2 = match report.outcome {
        ShareOutcome::Paused(d2) => d2,
        other => return Err(outcome_error(other)),
    };
    let mut shares = load_shares(dir)?;
    shares.insert(
        data_2,
        PendingShare {
            owner: owner.clone(),
            user: user.to_string(),
            data_1,
        },
    );
    save_shares(dir, &shares)?;
    let trace: Vec<_> = report
        .trace
        .iter()
        .map(|(k, n)| json!({ "message": k.to_string(), "bytes": n }))
        .collect();
    if o.json {
        o.value(&json!({ "data_2": data_2, "owner": owner, "user": user, "trace": trace }));
    } else {
        for (k, n) in &report.trace {
            o.line(format!("{k}  {n} bytes"));
        }
        o.line(format!("Data_2 {data_2}"));
        o.line(format!("next: medexchain fetch --data2 {data_2}"));
    }
    Ok(())
}

fn pending(dir: &DataDir, data_2: &Address) -> Result<PendingShare, CliError> {
    load_shares(dir)?.remove(data_2).ok_or_else(|| CliError::Missing {
        what: format!("no share produced {data_2}"),
        run: "medexchain share --data1 <Data_1> --user <id>".into(),
    })
}

fn fetch<B: Backend>(b: &B, cfg: &CliConfig, dir: &DataDir, data2: &str, o: &mut Output<'_>) -> Result<(), CliError> {
    let data_2 = parse_address("Data_2", data2)?;
    let world = open_world(dir, b, cfg)?;
    let share = pending(dir, &data_2)?;
    let transport = SimTransport::with_latency_ms(cfg.transport_latency_ms);
    let report = run_fetch_phase(&world, &share.owner, &share.user, data_2, &transport, &mut OsRng);
    save_world(dir, &world)?;
    if !matches!(report.outcome, ShareOutcome::Success { .. }) {
        return Err(outcome_error(report.outcome));
    }
    let (rc, blob) = world.relay.lock().unwrap().relay_fetch_with_attachment(b, &data_2)?;
    let inbox = dir.inbox(&share.user);
    write(&inbox.join(format!("{data_2}.mxc")), &rc.to_file(b))?;
    write(&inbox.join(format!("{data_2}.blob")), &blob)?;
    if o.json {
        o.value(&json!({ "data_2": data_2, "user": share.user, "inbox": inbox }));
    } else {
        o.line(format!("fetched {data_2} for {} into {}", share.user, inbox.display()));
        o.line(format!("next: medexchain decrypt --data2 {data_2}"));
    }
    Ok(())
}

fn decrypt<B: Backend>(
    b: &B,
    cfg: &CliConfig,
    dir: &DataDir,
    data2: &str,
    out: Option<&Path>,
    force: bool,
    o: &mut Output<'_>,
) -> Result<(), CliError> {
    let data_2 = parse_address("Data_2", data2)?;
    let world = open_world(dir, b, cfg)?;
    let share = pending(dir, &data_2)?;
    let inbox = dir.inbox(&share.user);
    let ct_path = inbox.join(format!("{data_2}.mxc"));
    if !ct_path.exists() {
        return Err(CliError::Missing {
            what: format!("{data_2} has not been fetched"),
            run: format!("medexchain fetch --data2 {data_2}"),
        });
    }
    let rc = ReCiphertext::from_file(b, &read(&ct_path)?)?;
    let blob = read(&inbox.join(format!("{data_2}.blob")))?;
    let keys = world.user(&share.user)?;
    let dem = (!blob.is_empty()).then_some(blob.as_slice());
    let msg = world.scheme.dec_message(&rc, dem, &keys.sk_du)?;
    let phr = if dem.is_some() { msg.unwrap_phr(b)? } else { Vec::new() };
    match out {
        Some(path) => {
            if path.exists() && !force {
                return Err(CliError::Exists(path.display().to_string()));
            }
            write(path, &phr)?;
            if o.json {
                o.value(&json!({ "data_2": data_2, "out": path, "bytes": phr.len() }));
            } else {
                o.line(format!("wrote {} bytes to {}", phr.len(), path.display()));
            }
        }
        None if o.json => o.value(&json!({ "data_2": data_2, "record_hex": hex::encode(&phr) })),
        None => {
            let _ = o.out.write_all(&phr);
        }
    }
    Ok(())
}

fn check_exact(failures: Vec<String>) -> Result<(), CliError> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failures.join("; ")))
    }
}

fn bench_cmd<B: Backend>(b: B, cfg: &CliConfig, args: &BenchArgs, o: &mut Output<'_>) -> Result<(), CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    if let Some(d) = &args.out {
        std::fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
    }
    match args.kind {
        BenchKind::Stages => {
            let result = if args.counters_only {
                bench::run_stage_counts(&b, args.repetitions, &mut rng)?
            } else {
                bench::run_stage_bench(&b, args.repetitions, &mut rng)?
            };
            let csv = bench::stage_csv(&result.stages)?;
            if let Some(d) = &args.out {
                write(&d.join("stages.csv"), csv.as_bytes())?;
                bench::write_json(&d.join("stages.json"), &result)?;
            }
            let ratios = result.ratio_checks();
            if o.json {
                o.value(&json!({ "stages": result.stages, "primitives": result.primitives, "ratios": ratios }));
            } else {
                let _ = o.out.write_all(csv.as_bytes());
                for p in &result.primitives {
                    o.line(format!("{:<12} mean {:>10.1} us  median {:>10.1} us", p.op, p.mean_us, p.median_us));
                }
                for r in &ratios {
                    let verdict = if r.within_tolerance { "ok" } else { "outside tolerance" };
                    o.line(format!("{:<20} ratio {:.3}  {verdict}", r.name, r.ratio));
                }
            }
            let failures = Stage::ALL
                .iter()
                .map(|s| result.stage(*s))
                .filter(|r| !r.counters_exact)
                .map(|r| format!("{} counts differ from the cost table", r.stage))
                .collect();
            check_exact(failures)
        }
        BenchKind::Sizes => {
            let sizes = bench::run_size_report(&b, &mut rng)?;
            if let Some(d) = &args.out {
                bench::write_json(&d.join("sizes.json"), &sizes)?;
            }
            if o.json {
                o.value(&serde_json::to_value(&sizes).expect("sizes serialize"));
            } else {
                o.line(format!("{} backend, |G1| = {} B, |GT| = {} B", sizes.backend, sizes.g1_len, sizes.gt_len));
                for (name, n) in sizes.rows() {
                    o.line(format!("{name:<8} {n:>6} bytes"));
                }
            }
            let expected = SizeReport::expected(&sizes.backend, b.g1_len(), b.gt_len());
            let mut failures = Vec::new();
            if sizes != expected {
                failures.push("sizes differ from the element-count model".to_string());
            }
            if b.kind() == BackendKind::Pairing && sizes.total != 1920 {
                failures.push(format!("total is {} bytes, expected 1920", sizes.total));
            }
            check_exact(failures)
        }
        BenchKind::System => {
            let config = SystemConfig {
                request_count: args.requests,
                concurrency: args.concurrency,
                latency_ms: args.latency_ms.unwrap_or(cfg.transport_latency_ms),
                max_access_count: args.max_access.unwrap_or(usize::MAX),
                owners: args.owners,
                users: args.users,
                seed: args.seed,
            };
            let r = bench::run_system_bench(b, &config)?;
            if let Some(d) = &args.out {
                bench::write_json(&d.join("system.json"), &r)?;
            }
            if o.json {
                o.value(&serde_json::to_value(&r).expect("report serializes"));
            } else {
                o.line(format!(
                    "{} requests, concurrency {}, {} ms/hop on {}",
                    r.request_count, r.concurrency, r.latency_ms, r.backend
                ));
                o.line(format!(
                    "throughput {:.1} req/s   p50 {:.2} ms   p95 {:.2} ms",
                    r.throughput_rps, r.p50_ms, r.p95_ms
                ));
                o.line(format!(
                    "success {}  refused {}  rejected {}  timeout {}  verified {}",
                    r.success, r.refused, r.rejected, r.timeout, r.verified
                ));
            }
            let mut failures = Vec::new();
            if !r.tallies_conserved() {
                failures.push("outcome tallies do not add up".to_string());
            }
            if !r.all_successes_verified() {
                failures.push(format!("{} of {} successes failed verification", r.success - r.verified, r.success));
            }
            check_exact(failures)
        }
    }
}

fn print_audit(o: &mut Output<'_>, name: &str, entries: &[AuditEntry]) {
    o.line(format!("-- {name}"));
    for e in entries {
        o.line(format!(
            "{:>4} {:<15} {:<18} {:<9} {}",
            e.seq,
            e.kind,
            e.party,
            serde_json::to_value(e.outcome).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            e.id_hex
        ));
    }
}

fn demo<B: Backend>(
    b: &B,
    cfg: &CliConfig,
    dir: &DataDir,
    file: Option<&Path>,
    force: bool,
    o: &mut Output<'_>,
) -> Result<(), CliError> {
    let input = match file {
        Some(p) => read(p)?,
        None => SAMPLE_PHR.to_vec(),
    };
    let mut quiet = Output {
        json: true,
        out: &mut std::io::sink(),
    };
    setup(b, cfg, dir, force, &mut quiet)?;
    keygen(b, cfg, dir, RoleArg::Owner, "alice", false, false, &mut quiet)?;
    keygen(b, cfg, dir, RoleArg::User, "bob", false, false, &mut quiet)?;
    let sample = dir.root.join("sample.phr");
    write(&sample, &input)?;
    encrypt(b, cfg, dir, &sample, "alice", &mut quiet)?;

    let world = open_world(dir, b, cfg)?;
    let data_1 = world.node_a.lock().unwrap().tx_log().iter().rev().find_map(|t| {
        (t.kind == crate::ledger::TxKind::StoreCiphertext).then_some(t.digest)
    });
    let data_1 = data_1.ok_or_else(|| CliError::Corrupt("demo record missing from chain A".into()))?;
    let transport = SimTransport::with_latency_ms(cfg.transport_latency_ms);
    let report = orchestrate_share(&world, "alice", "bob", data_1, &transport, &mut OsRng);
    save_world(dir, &world)?;
    let phr = match report.outcome {
        ShareOutcome::Success { phr, .. } => phr,
        other => return Err(outcome_error(other)),
    };
    let recovered = dir.root.join("recovered.phr");
    write(&recovered, &phr)?;
    let identical = phr == input;

    let node_a = world.node_a.lock().unwrap().audit().entries().to_vec();
    let relay = world.relay.lock().unwrap().audit().entries().to_vec();
    if o.json {
        o.value(&json!({
            "data_1": data_1,
            "data_2": report.data_2,
            "trace": report.trace.iter().map(|(k, n)| json!({ "message": k.to_string(), "bytes": n })).collect::<Vec<_>>(),
            "recovered": recovered,
            "identical": identical,
            "audit": { "chain_a": node_a, "relay": relay },
        }));
    } else {
        o.line(format!("Data_1 {data_1}"));
        for (k, n) in &report.trace {
            o.line(format!("{k}  {n} bytes"));
        }
        if let Some(d2) = report.data_2 {
            o.line(format!("Data_2 {d2}"));
        }
        o.line(format!("recovered {} bytes -> {}", phr.len(), recovered.display()));
        o.line("----- recovered record -----");
        o.line(String::from_utf8_lossy(&phr));
        o.line("----- audit trail -----");
        print_audit(o, "chain A", &node_a);
        print_audit(o, "relay", &relay);
        o.line(if identical { "recovered record is byte-identical to the input" } else { "MISMATCH" });
    }
    if identical {
        Ok(())
    } else {
        Err(CliError::CheckFailed("recovered record differs from the input".into()))
    }
}
