//! The `medexchain` command line.

mod commands;
mod config;
mod state;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{CliConfig, DATA_DIR_ENV, DEFAULT_DATA_DIR};
pub use state::{DataDir, PendingShare};

use crate::bench::BenchError;
use crate::crf::CrfError;
use crate::group::{BackendKind, GroupProfile, PairingBackend, ProfileError, TransparentBackend};
use crate::ledger::{LedgerError, Refusal};
use crate::protocol::ProtocolError;
use crate::scheme::codec::CodecError;
use crate::scheme::SchemeError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{what}; run `{run}` first")]
    Missing { what: String, run: String },
    #[error("{0} already exists; pass --force to replace it")]
    Exists(String),
    #[error("{0}")]
    Refused(Refusal),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("bad argument: {0}")]
    Usage(String),
    #[error("corrupt state: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("exact check failed: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Crf(#[from] CrfError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for access-contract refusals, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Refused(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "medexchain", version, about = "Cross-chain medical record sharing with reverse firewalls")]
pub struct Cli {
    /// key=value settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// State directory; also read from MEDEXCHAIN_DATA_DIR.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Transparent,
    Pairing,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Transparent => BackendKind::Transparent,
            BackendArg::Pairing => BackendKind::Pairing,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Owner,
    User,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchKind {
    Stages,
    Sizes,
    System,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate hospital and firewall masters for both chains and register
    /// the chains with the relay.
    Setup {
        #[arg(long)]
        force: bool,
    },
    /// Issue keys for a data owner (chain A) or data user (chain B).
    Keygen {
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long)]
        id: String,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        reveal_secrets: bool,
    },
    /// Encrypt a file for an owner and store it on chain A.
    Encrypt {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        owner: String,
    },
    /// Run M1..M6: a user requests a stored record and receives Data_2.
    Share {
        #[arg(long)]
        data1: String,
        #[arg(long)]
        user: String,
        /// Defaults to the owner recorded on chain A.
        #[arg(long)]
        owner: Option<String>,
    },
    /// Run M7..M8: fetch the re-encrypted record from the relay.
    Fetch {
        #[arg(long)]
        data2: String,
    },
    /// Decrypt a fetched record with the user's key.
    Decrypt {
        #[arg(long)]
        data2: String,
        /// Write the record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Operation counts and timings, object sizes, or the system benchmark.
    Bench(BenchArgs),
    /// Provision both chains, share a sample record end to end and print the
    /// recovered bytes and the audit trail.
    Demo {
        /// Record to share; a built-in sample otherwise.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Wipe existing state in the data directory first.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub kind: BenchKind,
    #[arg(long, default_value_t = 50)]
    pub repetitions: usize,
    /// Skip timing so the CSV depends only on the seed.
    #[arg(long)]
    pub counters_only: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for CSV and JSON reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub requests: usize,
    #[arg(long, default_value_t = 8)]
    pub concurrency: usize,
    /// Per-hop latency; defaults to the configured transport latency.
    #[arg(long)]
    pub latency_ms: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub owners: usize,
    #[arg(long, default_value_t = 16)]
    pub users: usize,
    /// Per-user access limit for the system run; unlimited by default.
    #[arg(long)]
    pub max_access: Option<usize>,
}

/// Where command output goes.
pub struct Output<'a> {
    pub json: bool,
    pub out: &'a mut dyn Write,
}

impl Output<'_> {
    pub(crate) fn line(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", text.as_ref());
    }

    pub(crate) fn value(&mut self, v: &serde_json::Value) {
        let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(v).expect("json value"));
    }
}

/// Resolves the configuration: defaults, then environment, then the config
/// file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<CliConfig, CliError> {
    let mut cfg = CliConfig::from_env();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(dir) = &cli.data_dir {
        cfg.data_dir = dir.clone();
    }
    if let Some(b) = cli.backend {
        cfg.backend = b.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_profile(cfg: &CliConfig) -> Result<Option<GroupProfile>, CliError> {
    let Some(path) = &cfg.profile else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let profile = GroupProfile::parse(&text)?;
    if profile.backend_kind != cfg.backend {
        return Err(CliError::Config(format!(
            "profile {} is for the {} backend",
            path.display(),
            profile.backend_kind.as_str()
        )));
    }
    Ok(Some(profile))
}

/// Runs a parsed command, writing human or JSON output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&cli)?;
    let profile = load_profile(&cfg)?;
    let mut o = Output { json: cli.json, out };
    match cfg.backend {
        BackendKind::Transparent => {
            let b = match profile {
                Some(p) => TransparentBackend::new(p.order)?,
                None => TransparentBackend::a80(),
            };
            commands::dispatch(b, &cfg, cli.command, &mut o)
        }
        BackendKind::Pairing => {
            let b = match profile {
                Some(p) => PairingBackend::from_profile(p)?,
                None => PairingBackend::a80(),
            };
            commands::dispatch(b, &cfg, cli.command, &mut o)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
