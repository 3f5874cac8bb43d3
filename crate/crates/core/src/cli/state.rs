//! On-disk layout: `params/` (profile, chain parameters), `keys/` (hospital
//! masters, owner and user keys), `store/` (content-addressed objects and
//! fetched results), `ledger/` (chain, relay and firewall state) and
//! `audit/` (JSONL audit trails).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CliConfig, CliError};
use crate::crf::CrfGuardA;
use crate::group::Backend;
use crate::ledger::{Address, ChainNodeState, ContentStore, RelayState};
use crate::protocol::{FreshnessPolicy, World, WorldState};
use crate::scheme::codec::WireObject;
use crate::scheme::{ChainParams, MasterSecrets, OwnerKeys, UserKeys};

#[derive(Clone, Debug)]
pub struct DataDir {
    pub root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn params(&self) -> PathBuf {
        self.root.join("params")
    }
    pub fn keys(&self) -> PathBuf {
        self.root.join("keys")
    }
    pub fn store(&self) -> PathBuf {
        self.root.join("store")
    }
    pub fn ledger(&self) -> PathBuf {
        self.root.join("ledger")
    }
    pub fn audit(&self) -> PathBuf {
        self.root.join("audit")
    }

    pub fn profile_file(&self) -> PathBuf {
        self.params().join("profile")
    }
    pub fn chain_file(&self, chain: char) -> PathBuf {
        self.params().join(format!("chain-{chain}.mxc"))
    }
    pub fn master_file(&self, chain: char) -> PathBuf {
        self.keys().join(format!("hospital-{chain}.master.mxc"))
    }
    pub fn owner_file(&self, id: &str) -> PathBuf {
        self.keys().join("owners").join(format!("{id}.mxc"))
    }
    pub fn user_file(&self, id: &str) -> PathBuf {
        self.keys().join("users").join(format!("{id}.mxc"))
    }
    pub fn objects(&self) -> PathBuf {
        self.store().join("objects")
    }
    pub fn inbox(&self, user: &str) -> PathBuf {
        self.store().join("inbox").join(user)
    }
    pub fn crf_snapshot(&self) -> PathBuf {
        self.ledger().join("crf-a.snapshot")
    }
    pub fn node_file(&self, chain: char) -> PathBuf {
        self.ledger().join(format!("node-{chain}.json"))
    }
    pub fn relay_file(&self) -> PathBuf {
        self.ledger().join("relay.json")
    }
    pub fn shares_file(&self) -> PathBuf {
        self.ledger().join("shares.json")
    }

    pub fn is_set_up(&self) -> bool {
        self.profile_file().exists()
    }

    pub fn create_layout(&self) -> Result<(), CliError> {
        for d in [
            self.params(),
            self.keys().join("owners"),
            self.keys().join("users"),
            self.objects(),
            self.store().join("inbox"),
            self.ledger(),
            self.audit(),
        ] {
            fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
        }
        Ok(())
    }

    /// Removes the five state directories, leaving anything else alone.
    pub fn wipe(&self) -> Result<(), CliError> {
        for d in [self.params(), self.keys(), self.store(), self.ledger(), self.audit()] {
            if d.exists() {
                fs::remove_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
            }
        }
        Ok(())
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read(path)?).map_err(|e| CliError::Corrupt(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_vec_pretty(value).expect("state serializes");
    write(path, &text)
}

/// A share that reached M6: who asked whom for what.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingShare {
    pub owner: String,
    pub user: String,
    pub data_1: Address,
}

pub fn load_shares(dir: &DataDir) -> Result<BTreeMap<Address, PendingShare>, CliError> {
    let path = dir.shares_file();
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    read_json(&path)
}

pub fn save_shares(dir: &DataDir, shares: &BTreeMap<Address, PendingShare>) -> Result<(), CliError> {
    write_json(&dir.shares_file(), shares)
}

pub fn check_profile<B: Backend>(dir: &DataDir, backend: &B) -> Result<(), CliError> {
    if !dir.is_set_up() {
        return Err(CliError::Missing {
            what: format!("no system parameters in {}", dir.root.display()),
            run: "medexchain setup".into(),
        });
    }
    let stored = String::from_utf8_lossy(&read(&dir.profile_file())?).into_owned();
    if stored != backend.profile().to_descriptor() {
        return Err(CliError::Config(format!(
            "{} was set up for a different group profile; pass the matching --backend",
            dir.root.display()
        )));
    }
    Ok(())
}

/// Rebuilds the world from disk and checks the stored chain parameters.
pub fn open_world<B: Backend>(dir: &DataDir, backend: &B, cfg: &CliConfig) -> Result<World<B>, CliError> {
    check_profile(dir, backend)?;
    let b = backend;
    let secrets_a = MasterSecrets::from_file(b, &read(&dir.master_file('a'))?)?;
    let secrets_b = MasterSecrets::from_file(b, &read(&dir.master_file('b'))?)?;
    let guard_a = CrfGuardA::with_snapshot(b.clone(), secrets_a.crf_master.clone(), &dir.crf_snapshot())?;
    let mut node_a: ChainNodeState = read_json(&dir.node_file('a'))?;
    let node_b: ChainNodeState = read_json(&dir.node_file('b'))?;
    node_a.max_access_count = cfg.max_access_count;
    let relay: RelayState = read_json(&dir.relay_file())?;
    let store = ContentStore::load_dir(&dir.objects())?;
    let world = World::from_state(WorldState {
        backend: b.clone(),
        secrets_a,
        secrets_b,
        guard_a,
        node_a,
        node_b,
        relay,
        store,
    })?
    .with_policy(FreshnessPolicy {
        max_skew_ms: cfg.freshness_window_ms,
        nonce_ttl_ms: 2 * cfg.freshness_window_ms,
    });
    for (tag, params) in [('a', &world.chain_a), ('b', &world.chain_b)] {
        let stored = ChainParams::from_file(b, &read(&dir.chain_file(tag))?)?;
        if &stored != params {
            return Err(CliError::Corrupt(format!("chain-{tag} parameters do not match the hospital keys")));
        }
    }
    for (sub, is_owner) in [("owners", true), ("users", false)] {
        let d = dir.keys().join(sub);
        let Ok(entries) = fs::read_dir(&d) else { continue };
        for entry in entries {
            let path = entry.map_err(|e| CliError::io(&d, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("mxc") {
                continue;
            }
            let bytes = read(&path)?;
            if is_owner {
                world.insert_owner(OwnerKeys::from_file(b, &bytes)?);
            } else {
                world.insert_user(UserKeys::from_file(b, &bytes)?);
            }
        }
    }
    Ok(world)
}

/// Persists ledgers, store and audit trails. The firewall ledger is
/// appended to as it grows.
pub fn save_world<B: Backend>(dir: &DataDir, world: &World<B>) -> Result<(), CliError> {
    let node_a = world.node_a.lock().unwrap();
    let node_b = world.node_b.lock().unwrap();
    let relay = world.relay.lock().unwrap();
    write_json(&dir.node_file('a'), &*node_a)?;
    write_json(&dir.node_file('b'), &*node_b)?;
    write_json(&dir.relay_file(), &*relay)?;
    world.store.save_dir(&dir.objects())?;
    write(&dir.audit().join("node-a.jsonl"), node_a.audit().to_jsonl().as_bytes())?;
    write(&dir.audit().join("node-b.jsonl"), node_b.audit().to_jsonl().as_bytes())?;
    write(&dir.audit().join("relay.jsonl"), relay.audit().to_jsonl().as_bytes())?;
    Ok(())
}
