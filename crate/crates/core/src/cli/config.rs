use std::path::{Path, PathBuf};

use crate::group::BackendKind;
use crate::ledger::DEFAULT_MAX_ACCESS_COUNT;

use super::CliError;

pub const DATA_DIR_ENV: &str = "MEDEXCHAIN_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "medexchain-data";

/// Operator settings. Precedence, lowest first: defaults, environment,
/// config file, command-line flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliConfig {
    /// Group profile descriptor to load instead of the backend's default.
    pub profile: Option<PathBuf>,
    pub data_dir: PathBuf,
    pub max_access_count: usize,
    pub freshness_window_ms: u64,
    pub transport_latency_ms: u64,
    pub backend: BackendKind,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            profile: None,
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            max_access_count: DEFAULT_MAX_ACCESS_COUNT,
            freshness_window_ms: 300_000,
            transport_latency_ms: 0,
            backend: BackendKind::Transparent,
        }
    }
}

impl CliConfig {
    /// Defaults overlaid with `MEDEXCHAIN_DATA_DIR`.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.data_dir = PathBuf::from(dir);
        }
        cfg
    }

    /// Applies a `key=value` file on top of `self`. Relative paths in the
    /// file resolve against the file's directory.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        self.apply_text(&text, base)
    }

    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Config(format!("line {}: {msg}", i + 1));
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key=value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{v}` is not a number")));
            match k {
                "profile" => self.profile = Some(base.join(v)),
                "data_dir" => self.data_dir = base.join(v),
                "max_access_count" => self.max_access_count = num(v)? as usize,
                "freshness_window_ms" => self.freshness_window_ms = num(v)?,
                "transport_latency_ms" => self.transport_latency_ms = num(v)?,
                "backend" => self.backend = v.parse().map_err(bad)?,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.max_access_count == 0 {
            return Err(CliError::Config("max_access_count must be positive".into()));
        }
        if self.freshness_window_ms == 0 {
            return Err(CliError::Config("freshness_window_ms must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_defaults() {
        let mut cfg = CliConfig::default();
        cfg.apply_text(
            "# comment\nbackend = pairing\nmax_access_count=3\ndata_dir=state\nfreshness_window_ms=1000 # trailing\n",
            Path::new("/etc/mx"),
        )
        .unwrap();
        assert_eq!(cfg.backend, BackendKind::Pairing);
        assert_eq!(cfg.max_access_count, 3);
        assert_eq!(cfg.data_dir, PathBuf::from("/etc/mx/state"));
        assert_eq!(cfg.freshness_window_ms, 1000);
        assert_eq!(cfg.transport_latency_ms, 0);
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut cfg = CliConfig::default();
        let err = cfg.apply_text("max_access_count=0", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("positive"));
        assert!(cfg.apply_text("colour=blue", Path::new(".")).is_err());
        assert!(cfg.apply_text("backend=quantum", Path::new(".")).is_err());
        assert!(cfg.apply_text("just words", Path::new(".")).is_err());
    }
}
