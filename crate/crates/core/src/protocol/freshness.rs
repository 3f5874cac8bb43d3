use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use super::envelope::{Envelope, MessageKind, NONCE_LEN};
use super::ProtocolError;

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// Settable clock for tests.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        ManualClock(AtomicU64::new(start_ms))
    }

    pub fn set(&self, ms: u64) {
        self.0.store(ms, Ordering::SeqCst);
    }

    pub fn advance(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreshnessPolicy {
    pub max_skew_ms: u64,
    /// How long a seen nonce is remembered.
    pub nonce_ttl_ms: u64,
}

impl Default for FreshnessPolicy {
    fn default() -> Self {
        FreshnessPolicy {
            max_skew_ms: 300_000,
            nonce_ttl_ms: 600_000,
        }
    }
}

/// One actor's memory of accepted `(kind, nonce)` pairs.
#[derive(Debug, Default)]
pub struct NonceCache {
    seen: HashMap<(MessageKind, [u8; NONCE_LEN]), u64>,
    last_purge_ms: u64,
}

impl NonceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// Checks timestamp skew, then records the nonce if unseen.
    pub fn admit(&mut self, policy: &FreshnessPolicy, env: &Envelope, now_ms: u64) -> Result<(), ProtocolError> {
        let skew = now_ms.abs_diff(env.timestamp_ms);
        if skew > policy.max_skew_ms {
            return Err(ProtocolError::Stale { skew_ms: skew });
        }
        if now_ms.saturating_sub(self.last_purge_ms) > policy.nonce_ttl_ms / 2 {
            self.seen.retain(|_, expiry| *expiry > now_ms);
            self.last_purge_ms = now_ms;
        }
        let key = (env.kind, env.nonce);
        match self.seen.get(&key) {
            Some(expiry) if *expiry > now_ms => Err(ProtocolError::Replayed),
            _ => {
                self.seen.insert(key, now_ms + policy.nonce_ttl_ms);
                Ok(())
            }
        }
    }
}
