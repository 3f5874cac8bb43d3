//! Operation-count and timing benches for the six scheme stages, serialized
//! object sizes, and a concurrent end-to-end sharing benchmark.

mod report;
mod system;

use std::time::Instant;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::group::{measure, Backend, GroupOps, OpCounters};
use crate::protocol::ProtocolError;
use crate::scheme::codec::WireObject;
use crate::scheme::{ChainTag, MasterSecrets, Scheme, SchemeError};

pub use report::{read_json, stage_csv, write_json, write_stage_csv, ReportFormat, STAGE_CSV_HEADER};
pub use system::{run_system_bench, SystemConfig, SystemRunReport};

/// Iterations run and discarded before timing starts.
pub const WARM_UP: usize = 5;

/// Allowed relative gap between a stage's time and its primitive-cost model.
pub const RATIO_TOLERANCE: f64 = 0.25;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad JSON report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad CSV report: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    KeyGenDo,
    KeyGenDu,
    Enc,
    ReKeyGen,
    ReEnc,
    Dec,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::KeyGenDo,
        Stage::KeyGenDu,
        Stage::Enc,
        Stage::ReKeyGen,
        Stage::ReEnc,
        Stage::Dec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::KeyGenDo => "KeyGen_DO",
            Stage::KeyGenDu => "KeyGen_DU",
            Stage::Enc => "Enc",
            Stage::ReKeyGen => "ReKeyGen",
            Stage::ReEnc => "ReEnc",
            Stage::Dec => "Dec",
        }
    }

    /// Cost of the stage including its firewall step.
    pub fn expected(self) -> OpCounters {
        match self {
            Stage::KeyGenDo => OpCounters::new(2, 0, 0, 1),
            Stage::KeyGenDu => OpCounters::new(4, 0, 0, 2),
            Stage::Enc => OpCounters::new(3, 2, 2, 0),
            Stage::ReKeyGen => OpCounters::new(3, 2, 2, 1),
            Stage::ReEnc => OpCounters::new(0, 0, 1, 0),
            Stage::Dec => OpCounters::new(0, 0, 2, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageReport {
    pub stage: String,
    pub e1: u64,
    pub e2: u64,
    pub p: u64,
    pub h: u64,
    /// `None` in counters-only runs.
    pub mean_us: Option<f64>,
    pub median_us: Option<f64>,
    pub backend: String,
    pub repetitions: usize,
    /// Every repetition hit the expected counts.
    pub counters_exact: bool,
}

impl StageReport {
    pub fn counters(&self) -> OpCounters {
        OpCounters::new(self.e1, self.e2, self.p, self.h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveReport {
    pub op: String,
    pub mean_us: f64,
    pub median_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioCheck {
    pub name: String,
    pub measured_us: f64,
    pub model_us: f64,
    pub ratio: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageBench {
    pub stages: Vec<StageReport>,
    pub primitives: Vec<PrimitiveReport>,
}

impl StageBench {
    pub fn stage(&self, s: Stage) -> &StageReport {
        self.stages.iter().find(|r| r.stage == s.name()).expect("all stages present")
    }

    pub fn primitive(&self, op: &str) -> Option<&PrimitiveReport> {
        self.primitives.iter().find(|p| p.op == op)
    }

    pub fn counters_exact(&self) -> bool {
        self.stages.iter().all(|s| s.counters_exact)
    }

    /// ReEnc against one pairing, Dec against two pairings and a hash,
    /// compared on medians. Empty for counters-only runs.
    pub fn ratio_checks(&self) -> Vec<RatioCheck> {
        let (Some(p), Some(h)) = (self.primitive("pair"), self.primitive("hash_to_g1")) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (stage, model) in [
            (Stage::ReEnc, p.median_us),
            (Stage::Dec, 2.0 * p.median_us + h.median_us),
        ] {
            let Some(measured) = self.stage(stage).median_us else {
                continue;
            };
            let ratio = measured / model;
            out.push(RatioCheck {
                name: format!("{} vs {}", stage.name(), stage.expected()),
                measured_us: measured,
                model_us: model,
                ratio,
                within_tolerance: (ratio - 1.0).abs() <= RATIO_TOLERANCE,
            });
        }
        out
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Nearest-rank percentile of unsorted samples, `pct` in `[0, 100]`.
pub fn percentile(xs: &[f64], pct: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

struct Samples {
    counters: Vec<OpCounters>,
    micros: Vec<f64>,
}

fn timed<R>(samples: &mut Samples, record: bool, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let (out, c) = measure(f);
    let us = start.elapsed().as_secs_f64() * 1e6;
    if record {
        samples.counters.push(c);
        samples.micros.push(us);
    }
    out
}

/// One pass over all six stages with fresh keys and randomness, each stage
/// fed the previous stage's output.
fn pipeline_pass<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    scheme: &Scheme<B>,
    samples: &mut [Samples],
    record: bool,
    rng: &mut R,
) -> Result<(), BenchError> {
    let b = scheme.backend();
    let mut masters = || MasterSecrets {
        hospital_master: b.random_nonzero_scalar(rng),
        crf_master: b.random_nonzero_scalar(rng),
    };
    let (ma, mb) = (masters(), masters());
    let pa = scheme.setup_chain(ChainTag::A, &ma)?;
    let pb = scheme.setup_chain(ChainTag::B, &mb)?;
    let mut id = [0u8; 12];
    rng.fill_bytes(&mut id);
    let do_id = [b"do-".as_slice(), &id].concat();
    let du_id = [b"du-".as_slice(), &id].concat();

    let owner = timed(&mut samples[0], record, || scheme.owner_keys(&do_id, &ma))?;

    let r = b.random_nonzero_scalar(rng);
    let user = timed(&mut samples[1], record, || {
        scheme.keygen_du(&du_id, &mb.hospital_master, &mb.crf_master, &r, &pb)
    })?;

    let m = b.random_gt(rng);
    let (s, beta) = (b.random_nonzero_scalar(rng), b.random_nonzero_scalar(rng));
    let sct = timed(&mut samples[2], record, || -> Result<_, SchemeError> {
        let ct = scheme.enc(&m, &pa, &owner.pk_do, &s)?;
        scheme.crf_enc(&ct, &owner.pk_do, &pa, &beta)
    })?;

    let pk = user.public_key();
    let (lambda, x) = (b.random_nonzero_scalar(rng), b.random_gt(rng));
    let srk = timed(&mut samples[3], record, || -> Result<_, SchemeError> {
        let rk = scheme.rekeygen(&owner.sk_do_sanitized, &pk, &lambda, &x)?;
        scheme.crf_rekeygen(&rk, &owner.pk_do, &pk, &beta)
    })?;

    let rc = timed(&mut samples[4], record, || scheme.reenc(&sct, &srk));
    let out = timed(&mut samples[5], record, || scheme.dec(&rc, &user.sk_du));
    assert_eq!(out, m, "bench pipeline failed to decrypt");
    Ok(())
}

fn summarize<B: Backend>(b: &B, stage: Stage, s: &Samples, with_timing: bool) -> StageReport {
    let expected = stage.expected();
    let exact = s.counters.iter().all(|c| *c == expected);
    let c = s.counters.first().copied().unwrap_or_default();
    StageReport {
        stage: stage.name().to_string(),
        e1: c.e1,
        e2: c.e2,
        p: c.pairing,
        h: c.hash,
        mean_us: with_timing.then(|| mean(&s.micros)),
        median_us: with_timing.then(|| median(&s.micros)),
        backend: b.kind().as_str().to_string(),
        repetitions: s.counters.len(),
        counters_exact: exact,
    }
}

fn run_stages<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    backend: &B,
    repetitions: usize,
    with_timing: bool,
    rng: &mut R,
) -> Result<Vec<StageReport>, BenchError> {
    if repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    let scheme = Scheme::new(backend.clone());
    let mut samples: Vec<Samples> = Stage::ALL
        .iter()
        .map(|_| Samples {
            counters: Vec::new(),
            micros: Vec::new(),
        })
        .collect();
    let warm = if with_timing { WARM_UP } else { 0 };
    for i in 0..warm + repetitions {
        pipeline_pass(&scheme, &mut samples, i >= warm, rng)?;
    }
    Ok(Stage::ALL
        .iter()
        .zip(&samples)
        .map(|(stage, s)| summarize(backend, *stage, s, with_timing))
        .collect())
}

fn bench_primitive<R: RngCore + CryptoRng + ?Sized, T>(
    name: &str,
    repetitions: usize,
    rng: &mut R,
    mut input: impl FnMut(&mut R) -> T,
    mut op: impl FnMut(&T),
) -> PrimitiveReport {
    let mut micros = Vec::with_capacity(repetitions);
    for i in 0..WARM_UP + repetitions {
        let x = input(rng);
        let start = Instant::now();
        op(&x);
        if i >= WARM_UP {
            micros.push(start.elapsed().as_secs_f64() * 1e6);
        }
    }
    PrimitiveReport {
        op: name.to_string(),
        mean_us: mean(&micros),
        median_us: median(&micros),
    }
}

/// Times single primitives on fresh random inputs.
pub fn run_primitive_bench<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    b: &B,
    repetitions: usize,
    rng: &mut R,
) -> Vec<PrimitiveReport> {
    let reps = repetitions.max(1);
    vec![
        bench_primitive(
            "pair",
            reps,
            rng,
            |r| (b.random_g1(r), b.random_g1(r)),
            |(x, y)| {
                std::hint::black_box(b.pair(x, y));
            },
        ),
        bench_primitive(
            "g1_exp",
            reps,
            rng,
            |r| (b.random_g1(r), b.random_scalar(r)),
            |(x, s)| {
                std::hint::black_box(b.g1_exp(x, s));
            },
        ),
        bench_primitive(
            "gt_exp",
            reps,
            rng,
            |r| (b.random_gt(r), b.random_scalar(r)),
            |(x, s)| {
                std::hint::black_box(b.gt_exp(x, s));
            },
        ),
        bench_primitive(
            "hash_to_g1",
            reps,
            rng,
            |r| {
                let mut id = [0u8; 16];
                r.fill_bytes(&mut id);
                id
            },
            |id| {
                std::hint::black_box(b.hash_to_g1(id));
            },
        ),
    ]
}

/// Times each of the six stages over `repetitions` fresh pipelines after a
/// warm-up, alongside primitive microbenchmarks.
pub fn run_stage_bench<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    backend: &B,
    repetitions: usize,
    rng: &mut R,
) -> Result<StageBench, BenchError> {
    let stages = run_stages(backend, repetitions, true, rng)?;
    let primitives = run_primitive_bench(backend, repetitions, rng);
    Ok(StageBench { stages, primitives })
}

/// Counters only; the output is a pure function of the inputs.
pub fn run_stage_counts<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    backend: &B,
    repetitions: usize,
    rng: &mut R,
) -> Result<StageBench, BenchError> {
    Ok(StageBench {
        stages: run_stages(backend, repetitions, false, rng)?,
        primitives: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeReport {
    pub backend: String,
    pub g1_len: usize,
    pub gt_len: usize,
    pub key_do: usize,
    pub key_du: usize,
    pub ct: usize,
    pub rk: usize,
    pub ct_prime: usize,
    pub total: usize,
}

impl SizeReport {
    /// Sizes implied by the element widths alone.
    pub fn expected(backend: &str, g1: usize, gt: usize) -> Self {
        let (key_do, key_du, ct, rk, ct_prime) = (2 * g1, 3 * g1, 2 * g1 + gt, 2 * g1 + gt, 2 * g1 + 2 * gt);
        SizeReport {
            backend: backend.to_string(),
            g1_len: g1,
            gt_len: gt,
            key_do,
            key_du,
            ct,
            rk,
            ct_prime,
            total: key_do + key_du + ct + rk + ct_prime,
        }
    }

    pub fn rows(&self) -> [(&'static str, usize); 6] {
        [
            ("Key_DO", self.key_do),
            ("Key_DU", self.key_du),
            ("CT", self.ct),
            ("RK", self.rk),
            ("CT'", self.ct_prime),
            ("Total", self.total),
        ]
    }
}

/// Serializes freshly generated keys and ciphertexts and measures them.
pub fn run_size_report<B: Backend, R: RngCore + CryptoRng + ?Sized>(
    backend: &B,
    rng: &mut R,
) -> Result<SizeReport, BenchError> {
    let b = backend;
    let s = Scheme::new(b.clone());
    let (pa, ma) = s.setup_chain_random(ChainTag::A, rng);
    let (pb, mb) = s.setup_chain_random(ChainTag::B, rng);
    let owner = s.owner_keys(b"size-do", &ma)?;
    let user = s.keygen_du_random(b"size-du", &mb, &pb, rng)?;
    let m = b.random_gt(rng);
    let ct = s.enc_random(&m, &pa, &owner.pk_do, rng)?;
    let beta = b.random_nonzero_scalar(rng);
    let sct = s.crf_enc(&ct, &owner.pk_do, &pa, &beta)?;
    let rk = s.rekeygen_random(&owner.sk_do_sanitized, &user.public_key(), rng)?;
    let srk = s.crf_rekeygen(&rk, &owner.pk_do, &user.public_key(), &beta)?;
    let rc = s.reenc(&sct, &srk);

    let key_do = b.encode_g1(&owner.pk_do).len() + b.encode_g1(&owner.sk_do_sanitized).len();
    let key_du = [&user.sk_du, &user.pk_du_1, &user.pk_du_2]
        .iter()
        .map(|x| b.encode_g1(x).len())
        .sum();
    let (ct, rk, ct_prime) = (sct.body_bytes(b).len(), srk.body_bytes(b).len(), rc.body_bytes(b).len());
    Ok(SizeReport {
        backend: b.kind().as_str().to_string(),
        g1_len: b.g1_len(),
        gt_len: b.gt_len(),
        key_do,
        key_du,
        ct,
        rk,
        ct_prime,
        total: key_do + key_du + ct + rk + ct_prime,
    })
}
