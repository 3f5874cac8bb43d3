use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::envelope::Envelope;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("delivery timed out")]
    Timeout,
}

/// Carries encoded envelopes between actors.
pub trait Transport: Send + Sync {
    fn send(&self, wire: Vec<u8>) -> Result<Vec<u8>, TransportError>;
}

/// In-process transport with fixed per-hop latency and random loss.
#[derive(Debug)]
pub struct SimTransport {
    pub latency: Duration,
    pub drop_probability: f64,
    rng: Mutex<ChaCha20Rng>,
}

impl SimTransport {
    pub fn new(latency: Duration, drop_probability: f64, seed: u64) -> Self {
        SimTransport {
            latency,
            drop_probability: drop_probability.clamp(0.0, 1.0),
            rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    pub fn instant() -> Self {
        Self::new(Duration::ZERO, 0.0, 0)
    }

    pub fn with_latency_ms(ms: u64) -> Self {
        Self::new(Duration::from_millis(ms), 0.0, 0)
    }
}

impl Transport for SimTransport {
    fn send(&self, wire: Vec<u8>) -> Result<Vec<u8>, TransportError> {
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        if self.drop_probability > 0.0 && self.rng.lock().unwrap().gen_bool(self.drop_probability) {
            return Err(TransportError::Timeout);
        }
        Ok(wire)
    }
}

/// Wraps a transport and keeps a copy of every frame it carries.
pub struct RecordingTransport<T: Transport> {
    inner: T,
    frames: Mutex<Vec<Vec<u8>>>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport {
            inner,
            frames: Mutex::new(Vec::new()),
        }
    }

    pub fn frames(&self) -> Vec<Vec<u8>> {
        self.frames.lock().unwrap().clone()
    }

    pub fn envelopes(&self) -> Vec<Envelope> {
        self.frames()
            .iter()
            .filter_map(|f| Envelope::decode(f).ok())
            .collect()
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, wire: Vec<u8>) -> Result<Vec<u8>, TransportError> {
        self.frames.lock().unwrap().push(wire.clone());
        self.inner.send(wire)
    }
}
